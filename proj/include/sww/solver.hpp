// Small-divisor screening, inversion of the linearized operator (dense and through the
// conjugation chain), the Nash-Moser iteration and the excluded-parameter estimate.
#pragma once

#include "sww/bifurcation.hpp"
#include "sww/descent.hpp"

#include <array>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace sww {

// ---- screening ------------------------------------------------------------------

struct MelnikovViolation {
    int l = 0;
    int j = 0;
    // |omega l - mu_j| j^tau / gamma, below 1 for a violation
    double ratio = 0.0;
};

struct MelnikovReport {
    double omega = 0.0;
    double gamma = 0.0;
    double tau = 0.0;
    std::vector<MelnikovViolation> violations;
    // Smallest |omega l - mu_j| j^tau over the screened range, with its lattice point.
    double margin = 0.0;
    int margin_l = 0;
    int margin_j = 0;
    bool admissible() const { return violations.empty(); }
};

// Lists every (l, j) with 2 <= j <= J_max, 0 <= l <= L_max and |omega l - mu_j| <= gamma / j^tau;
// mu[j] is the eigenvalue table. Only the l nearest to mu_j / omega can violate when gamma < omega / 2.
MelnikovReport melnikov_screen(double omega, const std::vector<double>& mu, double gamma, double tau, int J_max,
                               int L_max);

struct DiophantineReport {
    // min over the range of |sqrt(1 + kappa) l - sqrt(j + kappa j^3)| j^tau
    double gamma_star = 0.0;
    int l = 0;
    int j = 0;
};

DiophantineReport kappa_diophantine(double kappa, double tau_star, int J_max);

// ---- diagonal plus remainder ----------------------------------------------------

class ContractionError : public std::runtime_error {
public:
    explicit ContractionError(double proxy);
    double proxy;
};

class MelnikovError : public std::runtime_error {
public:
    explicit MelnikovError(MelnikovViolation v);
    MelnikovViolation violation;
};

struct DiagRemainderReport {
    int iterations = 0;
    // Largest ratio of successive Neumann corrections.
    double contraction = 0.0;
    double residual = 0.0;
};

using ComplexMap = std::function<Field2D(const Field2D&)>;

// x with (D + R) x = h: D^{-1}(I + R D^{-1})^{-1} h by a Neumann series. Divisors on |j| >= 2 are
// checked against gamma / |j|^tau; the j = 0 mean and the zero divisors are left at zero.
Field2D invert_diag_plus_remainder(const DiagonalData& D, const ComplexMap& R, const Field2D& h, double gamma,
                                   double tau, DiagRemainderReport* report = nullptr, double tol = 1e-13,
                                   int max_iter = 200);

// ---- linearized inversion -------------------------------------------------------

enum class InversionMode { Direct, Pipeline };

class TwistFailure : public std::runtime_error {
public:
    explicit TwistFailure(double pivot);
    double pivot;
};

class CertificationError : public std::runtime_error {
public:
    CertificationError(const std::string& what, double residual);
    double residual;
};

// Data shared by all inversions around one approximate solution.
struct InversionSetup {
    double kappa = 0.0;
    double omega = 0.0;
    double omega_bar = 0.0;
    // d u_bar / d eps truncated after the eps^2 term
    StatePair U;
    StatePair v0, w0, z0;
    // Galerkin box |l| + |j| < N and coefficient table
    int N = 8;
    int L = 8;
    int J = 8;
    double tol = 1e-9;
    double pivot_floor = 1e-14;
    DNConfig dn{};
    // Pipeline only: Krylov controls.
    int krylov_restart = 60;
    int krylov_max_iter = 400;
};

InversionSetup inversion_setup(const ApproxSolution& a, int N);

struct InversionReport {
    InversionMode mode = InversionMode::Direct;
    // Relative residual of the Galerkin system.
    double residual = 0.0;
    // Coefficient of U in h.
    double a = 0.0;
    // Schur complement of the kernel bordering (z0 coordinate of F'(u) U after elimination).
    double pivot = 0.0;
    int iterations = 0;
    int size = 0;
};

// h = a U + h~ with h~ in W, solving Pi_N F'(u) h = Pi_N f on the box of the setup.
StatePair invert_linearized(const StatePair& u, const StatePair& f, const InversionSetup& setup, InversionMode mode,
                            InversionReport* report = nullptr);

// z0 coordinate of a pair in Y x X.
double z0_coordinate(const StatePair& f, double omega_bar);

// ---- Nash-Moser -----------------------------------------------------------------

struct NashMoserConfig {
    int sigma = 6;
    double chi = 1.5;
    double delta = 0.5;
    double alpha0 = 0.0, alpha1 = 0.0, rho1 = 0.0, rho0 = 0.0, kappa1 = 0.0, beta1 = 0.0;
    // Analytic N0 = eps^{-rho0}; the practical run starts from N0_practical when it is positive.
    double N0_practical = 5.5;
    int N_max = 24;
    int table = 24;
    double s0 = 5.0;
    int max_iter = 12;
    double tol = 1e-11;
    double gamma_exponent = 5.0 / 6.0;
    double tau = 1.5;
    InversionMode mode = InversionMode::Direct;
    DNConfig dn{};

    // All constants derived from sigma.
    static NashMoserConfig from_sigma(int sigma);
    double analytic_N0(double eps) const;
    // Box sizes N_1, N_2, ... as used by the iteration (ceil of N0^{chi^n}, capped).
    int box(int n, double eps) const;
};

struct StepRecord {
    int n = 0;
    int N = 0;
    double residual = 0.0;
    double step_norm = 0.0;
    double pivot = 0.0;
    double melnikov_margin = 0.0;
    // max_j |mu_j(u_n) - mu_j(u_{n-1})| / j^{3/2}
    double eigen_shift = 0.0;
    double seconds = 0.0;
};

struct RunRecord {
    double kappa = 0.0, eps = 0.0, xi = 0.0, omega = 0.0;
    double initial_residual = 0.0;
    std::vector<StepRecord> steps;
    bool converged = false;
    bool excluded = false;
    std::optional<MelnikovViolation> violation;
    std::string message;
    double parity_defect = 0.0;
    double seconds = 0.0;

    double final_residual() const { return steps.empty() ? initial_residual : steps.back().residual; }
    // log r_{n+1} / log r_n over the sequence starting from the initial residual.
    std::vector<double> log_ratios() const;
};

struct NashMoserResult {
    StatePair u;
    RunRecord record;
    DiagonalData diag;
};

NashMoserResult nash_moser_run(double kappa, double eps, double xi, const NashMoserConfig& cfg = {});

// Screens a xi grid and returns the first admissible value (Melnikov at u_bar).
std::optional<double> find_admissible_xi(double kappa, double eps, const std::vector<double>& candidates,
                                         const NashMoserConfig& cfg = {});

// ---- measure --------------------------------------------------------------------

// lambda3, lambda1, lambda_{-1} at u_bar(eps, xi); these depend on eps sqrt(xi) only.
struct EigenvalueModel {
    double kappa = 0.0;
    ApproxSolution base;  // built at xi = 1
    double eta_lo = 0.0, eta_hi = 0.0;
    // Chebyshev nodes in eta and the values of lambda3 - 1, lambda1, lambda_{-1} there
    std::vector<double> nodes;
    std::array<std::vector<double>, 3> values;

    // lambda3 - 1, lambda1, lambda_{-1} at eta = eps sqrt(xi)
    std::array<double, 3> lambdas(double eta) const;

    static EigenvalueModel build(double kappa, double eta_lo, double eta_hi, int nodes = 7, int table = 12);
    DiagonalData diagonal(double eps, double xi) const;
    double omega(double eps, double xi) const { return frequency(base, eps, xi); }
};

struct MeasureConfig {
    int samples = 10000;
    int J_max = 10000;
    double gamma_exponent = 5.0 / 6.0;
    double tau = 1.5;
    double tau_star = 1.5;
    int nodes = 7;
    int table = 12;
    unsigned long long seed = 1;
    int threads = 1;
};

struct MeasurePoint {
    double eps = 0.0;
    double gamma = 0.0;
    int samples = 0;
    int excluded = 0;
    double fraction = 0.0;
    // Smallest violating j (0 when none).
    int min_violating_j = 0;
    // Below this j the Diophantine bound and the eigenvalue perturbation exclude violations.
    double cutoff_j = 0.0;
    // max over samples and screened j of (|omega - wb| l + |mu_j - sqrt(j + kappa j^3)|) / (eps^2 j^{3/2})
    double perturbation = 0.0;
};

struct MeasureReport {
    std::vector<MeasurePoint> points;
    double gamma_star = 0.0;
    // Fraction <= C eps^{1/18} with the smallest such C.
    double fit_C = 0.0;
    // fitted exponent of the excluded fraction (NaN when some fraction is zero)
    double fitted_exponent = 0.0;
    // min over eps of cutoff_j eps^{2/3}
    double C0 = 0.0;
    bool monotone = false;
    bool cutoff_respected = false;
};

MeasureReport measure_estimate(double kappa, const std::vector<double>& eps_list, const MeasureConfig& cfg = {});

}  // namespace sww
