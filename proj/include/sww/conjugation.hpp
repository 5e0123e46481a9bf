// Reduction of the linearized operator to constant coefficients at the top orders:
// space diffeomorphism, time reparametrization, diagonal rescaling, multiplier
// symmetrization and the lower-order symmetrizer M.
#pragma once

#include "sww/linearization.hpp"

#include <array>
#include <stdexcept>

namespace sww {

class DiffeoError : public std::runtime_error {
public:
    DiffeoError(const std::string& which, double measured);
    double measured;
};

// h(t, x + s(t, x)) and h(t + s(t), x), evaluated on the collocation grid of h.
Field2D compose_space(const Field2D& h, const Field2D& shift);
Field2D compose_time(const Field2D& h, const Field2D& shift);

struct ChangeOfVariables {
    // y = x + beta(t, x)  <=>  x = y + beta_inv(t, y)
    Field2D beta;
    Field2D beta_inv;
    // tau = t + alpha(t)  <=>  t = tau + alpha_inv(tau); only l-modes with j = 0.
    Field2D alpha;
    Field2D alpha_inv;
    double mu = 1.0;
    double max_beta_x = 0.0;
    double max_alpha_dot = 0.0;

    Field2D B(const Field2D& h) const { return compose_space(h, beta); }
    Field2D B_inv(const Field2D& h) const { return compose_space(h, beta_inv); }
    Field2D A(const Field2D& h) const { return compose_time(h, alpha); }
    Field2D A_inv(const Field2D& h) const { return compose_time(h, alpha_inv); }
};

// mu, alpha, beta from the surface slope; throws DiffeoError past |beta_x|, |alpha'| = 1/2.
ChangeOfVariables compute_changes(const StatePair& u, double omega, double kappa, double newton_tol = 1e-12);

// Variable coefficients of the reduction, indexed as a[1..19]; the symmetrization
// coefficients are filled by symmetrize_lower.
struct CoefficientChain {
    double omega = 0.0;
    double kappa = 0.0;
    double mu = 1.0;
    // sqrt(mu kappa)
    double lambda = 0.0;
    std::array<Field2D, 20> a;
    Field2D a25, a27, a28;
    Field2D a29, a30, a31, a32;
    Field2D v2, v4, g3, g5;

    const Field2D& operator[](int i) const { return a[static_cast<std::size_t>(i)]; }
    int L() const { return a[1].L(); }
    int J() const { return a[1].J(); }
};

struct L3Stage {
    LinearizedOp op;
    ChangeOfVariables cv;
    CoefficientChain chain;
    // max |mu a7^2 - a10 a11| on the grid
    double proportionality = 0.0;
};

// Builds a1..a19 and a25, a27, a28. Throws std::runtime_error when the
// proportionality residual exceeds 1e-8.
L3Stage conjugate_to_L3(const StatePair& u, double omega, double kappa, const DNConfig& cfg = {});

// Principal parts of the conjugated operators (the G - |D| remainder is left out).
StatePair apply_L1(const CoefficientChain& c, const StatePair& h);
StatePair apply_L2(const CoefficientChain& c, const StatePair& h);
// Includes the Hilbert commutator term so that P L3 = L2 Q holds exactly.
StatePair apply_L3(const CoefficientChain& c, const StatePair& h);
StatePair apply_P(const CoefficientChain& c, const StatePair& h);
StatePair apply_Q(const CoefficientChain& c, const StatePair& h);

// Smooth positive symbol equal to ((1 + kappa xi^2)/|xi|)^{1/2} for |xi| >= 2/3 and 1
// for |xi| <= 1/3.
double top_symbol(double xi, double kappa);
// sqrt(1 + kappa j^2) - sqrt(kappa)|j| - 1/(2 sqrt(kappa)|j|), j != 0.
double capillary_tail(int j, double kappa);

struct TopSymmetrizer {
    double mu = 1.0;
    double kappa = 0.0;
    Multiplier Lambda;
    Multiplier Lambda_inv;
    // sqrt(mu) |D|^{1/2} (1 - kappa d_xx)^{1/2}
    Multiplier T;

    StatePair S(const StatePair& h) const;
    StatePair S_inv(const StatePair& h) const;
};

TopSymmetrizer symmetrize_top(double kappa, double mu);

// a25, a27, a28 from a14..a19.
void fill_top_coefficients(CoefficientChain& c);

StatePair apply_L4(const CoefficientChain& c, const TopSymmetrizer& s, const StatePair& h);

// Solves the eight-equation system for v2, v4, g3, g5, a29..a32.
void symmetrize_lower(CoefficientChain& c);

// Residuals of the eight equations after symmetrize_lower (max abs coefficient).
std::array<double, 8> symmetrization_defects(const CoefficientChain& c);

// M = [[1, g], [0, v]], v = 1 + v2 H|D|^{-1} + v4 |D|^{-2}, g = g3 |D|^{-3/2} + g5 H|D|^{-5/2}.
StatePair apply_M(const CoefficientChain& c, const StatePair& h);
// L5 = [[A5, -C5], [C5, A5]] on real pairs.
StatePair apply_L5(const CoefficientChain& c, const TopSymmetrizer& s, const StatePair& h);
// Same operator on h = eta + i psi.
Field2D apply_L5_complex(const CoefficientChain& c, const TopSymmetrizer& s, const Field2D& h);

inline Field2D to_complex(const StatePair& h) { return h.eta + h.psi * cd(0.0, 1.0); }
inline StatePair from_complex(const Field2D& h) { return {h.re(), h.im()}; }

// Full chain at u: changes of variables, coefficients, both symmetrizations.
struct ReductionChain {
    L3Stage stage;
    TopSymmetrizer top;
    const CoefficientChain& chain() const { return stage.chain; }
};

ReductionChain build_reduction(const StatePair& u, double omega, double kappa, const DNConfig& cfg = {});

}  // namespace sww
