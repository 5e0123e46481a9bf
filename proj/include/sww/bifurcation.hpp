// Kernel and range of the linear operator at the bifurcation frequency, and the
// fourth-order approximate standing wave with its frequency-amplitude relation.
#pragma once

#include "sww/residual.hpp"

#include <stdexcept>
#include <utility>
#include <vector>

namespace sww {

struct LatticePoint {
    int l = 0;
    int j = 0;
    double value = 0.0;
};

// All (l, j) with l, j >= 1 inside the box where |wb^2 l^2 - j(1 + kappa j^2)| < tol.
std::vector<LatticePoint> near_resonances(double kappa, int L, int J, double tol);

class ResonanceError : public std::runtime_error {
public:
    explicit ResonanceError(LatticePoint p);
    LatticePoint point;
};

class SolvabilityError : public std::runtime_error {
public:
    explicit SolvabilityError(double defect);
    // g11 + wb f11
    double defect;
};

class TwistError : public std::runtime_error {
public:
    TwistError(double kappa, double omega2_bar);
    double kappa;
    double omega2_bar;
};

struct KernelFrame {
    double kappa = 0.0;
    double omega_bar = 0.0;
    // v0 spans the kernel, w0 is its complement in the (1,1) block, r0 spans the range
    // part and z0 = -d_t v0 completes it.
    StatePair v0, w0, r0, z0;
};

struct ScreenOptions {
    int L = 200;
    int J = 200;
    double tol = 1e-8;
};

// Throws ResonanceError when a second lattice root is found within the screen box.
KernelFrame build_kernel_frame(double kappa, int L, int J, const ScreenOptions& screen = {});

// Solve L_wb (eta, psi) = (f, g) on every mode. The (1,1) block requires g11 + wb f11 = 0
// and is solved with zero kernel component; the mean mode gives eta00 = g00.
StatePair invert_L_baromega(const Field2D& f, const Field2D& g, double kappa, double tol = 1e-10);

// Coordinates of p sin t cos x, q cos t cos x on (r0, z0).
std::pair<double, double> project_mode11(double p, double q, double omega_bar);

// (p, q) of a pair in Y x X: coefficient of sin t cos x in the first entry and of
// cos t cos x in the second.
std::pair<double, double> mode11_coordinates(const StatePair& u);

double alpha02(double kappa);
double alpha22(double kappa);
double beta22(double kappa);
// Closed form of the second-order frequency correction.
double omega2_bar_formula(double kappa);
// 136 k^3 + 66 k^2 + 3 k - 8
double twist_polynomial(double kappa);
// Root of the twist polynomial in (0, 1).
double twist_root();

struct ApproxOptions {
    int L = 8;
    int J = 8;
    double twist_tol = 1e-8;
    ScreenOptions screen{};
    // Contour used to extract Taylor coefficients of F.
    double radius = 0.1;
    int nodes = 48;
};

struct ApproxSolution {
    double kappa = 0.0, eps = 0.0, xi = 0.0;
    double omega_bar = 0.0;
    double omega2_bar = 0.0, omega3_bar = 0.0;
    double b3 = 0.0, b4 = 0.0;
    double omega = 0.0;
    // xi-free profiles.
    StatePair w2, w3, w4;
    // u_k including the powers of xi: u_bar = sum eps^k u_k, k = 1..4 (index 0 unused).
    std::vector<StatePair> orders;
    StatePair u_bar;
    KernelFrame frame;
};

ApproxSolution build_approx_solution(double kappa, double eps, double xi, const ApproxOptions& opt = {});

// omega(eps, xi) = wb + eps^2 xi wb2 + eps^3 xi^{3/2} wb3
double frequency(const ApproxSolution& a, double eps, double xi);

}  // namespace sww
