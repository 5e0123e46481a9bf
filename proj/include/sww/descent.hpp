// Fourier integral operator A h = sum_j h_j p(t,x,j) e^{i(jx + |j|^{1/2} beta)} built by
// descent so that L5 A - A D is of order -3/2, together with the diagonal operator D,
// the normal matrix A*A and the composition expansion of |D|^r A.
#pragma once

#include "sww/conjugation.hpp"

#include <Eigen/Dense>

#include <array>
#include <stdexcept>
#include <vector>

namespace sww {

class DescentError : public std::runtime_error {
public:
    DescentError(const std::string& step, double average);
    double average;
};

// A complex field that depends on sign(j): the values for j > 0 and j < 0.
struct SignedField {
    Field2D pos;
    Field2D neg;

    const Field2D& at(int sign) const { return sign > 0 ? pos : neg; }
    Field2D& at(int sign) { return sign > 0 ? pos : neg; }
    // Real functions (a, b) with field = a + i sign(j) b.
    std::pair<Field2D, Field2D> split_sign_imag() const;
    // Real functions (a, b) with field = sign(j) a + i b.
    std::pair<Field2D, Field2D> split_sign_real() const;
};

struct PhaseData {
    Field2D beta;
    Field2D beta0;
    Field2D beta1;
    // rho(t) = -(1/(2 lambda)) mean_x a14^2
    Field2D rho;
    double lambda1 = 0.0;
};

// Kills the order-1 term: beta1 = -(2/(3 lambda)) dx^{-1} a14, lambda1 = mean of rho.
PhaseData build_phase(const Field2D& a14, double lambda, double omega);

struct AmplitudeData {
    SignedField f;
    SignedField b0;
    // g^{(-1)}, g^{(-2)}, g^{(-3)}
    std::array<SignedField, 3> g;
    // r^{(-1)} with the lambda_{-1} shift applied
    SignedField r1;
    // p^{(0)} .. p^{(-3)}
    std::array<SignedField, 4> layers;
    double lambda_m1 = 0.0;
    // |lambda_{-1}| from j > 0 minus the one from j < 0
    double sign_mismatch = 0.0;
};

// Descent of the amplitude p = sum_m |j|^{m/2} p^{(m)} for the L5 coefficients.
AmplitudeData build_amplitude(const CoefficientChain& c, const PhaseData& ph, double avg_tol = 1e-10);

struct FioOp {
    Field2D beta;
    std::array<SignedField, 4> layers;
    // Number of amplitude layers in use (0 means p = 1).
    int orders = 4;

    static FioOp identity(int L, int J);
    int L() const { return beta.L(); }
    int J() const { return beta.J(); }
    // p(t, x, j) at a point, for probes.
    cd amplitude(double t, double x, int j) const;
};

FioOp make_fio(const PhaseData& ph, const AmplitudeData& am);

// A h on the output table (L, J); the j = 0 mode is passed through.
Field2D fio_apply(const FioOp& A, const Field2D& h, int L, int J);
inline Field2D fio_apply(const FioOp& A, const Field2D& h) { return fio_apply(A, h, h.L(), h.J()); }

struct FioInverseReport {
    double certificate = 0.0;
    bool certified = false;
};

// (A*A)^{-1} A* h slice by slice in time on the modes |l| <= L, |j| <= J.
Field2D fio_invert(const FioOp& A, const Field2D& h, FioInverseReport* report = nullptr, double tol = 1e-8);

// Space-only operator w_k = (1 + b(x)) e^{i(kx + |k|^{1/2} beta(x))}, |k| <= K.
struct NormalMatrixReport {
    // Entries (w_j, w_k), row k, column j, indices shifted by K.
    Eigen::MatrixXcd M;
    Eigen::MatrixXcd M_inv;
    // Largest column norm of M/(2 pi) - I and of its inverse minus I.
    double defect = 0.0;
    double inverse_defect = 0.0;
    int neumann_terms = 0;
};

class NeumannDivergence : public std::runtime_error {
public:
    explicit NeumannDivergence(double defect);
    double defect;
};

NormalMatrixReport fio_normal_matrix(const Field2D& beta, int K, const Field2D* b = nullptr);

// Columns of A_x restricted to |k| <= K, as a dense matrix on a uniform grid of n points.
Eigen::MatrixXcd fio_columns(const Field2D& beta, int K, int n, const Field2D* b = nullptr);

// |D|^r A e_k = sum_{alpha < N} B_alpha e_k + R_N e_k for the space-only operator.
struct CompositionProbe {
    std::vector<int> modes;
    // norms[alpha][i] = ||B_alpha e_k||_0 at k = modes[i]
    std::vector<std::vector<double>> norms;
    // ||R_N |D|^m e_k||_0
    std::vector<double> remainder;
    // fitted exponents in k of the norms
    std::vector<double> orders;
};

CompositionProbe fio_compose_Dr(const Field2D& beta, double r, double m, int N, const std::vector<int>& modes,
                                bool with_hilbert = false, double s0 = 1.0);

struct DiagonalData {
    double omega = 0.0;
    double kappa = 0.0;
    double lambda3 = 1.0;
    double lambda1 = 0.0;
    double lambda_m1 = 0.0;

    double mu(int j) const;
    std::vector<double> table(int J) const;
    // omega d_t + i mu_{|j|} on complex fields
    Field2D apply(const Field2D& h) const;
    // coefficientwise inverse; modes with |omega l + mu_j| < floor are zeroed
    Field2D apply_inv(const Field2D& h, double floor = 0.0) const;
};

DiagonalData assemble_diagonal(double lambda3, double lambda1, double lambda_m1, double kappa, double omega);

// Everything needed downstream from one state.
struct DescentResult {
    ReductionChain reduction;
    PhaseData phase;
    AmplitudeData amplitude;
    FioOp A;
    DiagonalData diag;
};

DescentResult build_descent(const StatePair& u, double omega, double kappa, const DNConfig& cfg = {});

// lambda1 from the state directly, through the changes of variables.
double lambda1_from_state(const StatePair& u, double omega, double kappa, const DNConfig& cfg = {});

struct DescentProbe {
    std::vector<int> l;
    std::vector<int> j;
    std::vector<double> residual;
};

// ||(L5 A - A D) |D|^{3/2} e_{l,j}||_0 on the requested modes (both signs of j).
DescentProbe descent_remainder_probe(const DescentResult& d, const std::vector<int>& ls,
                                     const std::vector<int>& js, int L, int J);

}  // namespace sww
