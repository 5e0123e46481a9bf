// Water-wave map F(u, omega) with g = 1, and its low-degree homogeneous parts.
#pragma once

#include "sww/dn.hpp"
#include "sww/state.hpp"

#include <functional>
#include <vector>

namespace sww {

// (F1, F2) = (omega eta_t - G(eta) psi, omega psi_t + eta + ... - curvature).
using ResidualValue = StatePair;

ResidualValue evaluate_F(const StatePair& u, double omega, double kappa, const DNConfig& cfg = {});

// Linear part at u = 0: (omega eta_t - |D| psi, eta - kappa eta_xx + omega psi_t).
StatePair linear_L(const StatePair& h, double omega, double kappa);

// Symmetric bilinear part with G0 = |D_x|.
StatePair quadratic_T2(const StatePair& a, const StatePair& b);
// Homogeneous cubic part T3[u, u, u].
StatePair cubic_T3(const StatePair& u, double kappa);

// kappa eta_xx / (1 + eta_x^2)^{3/2}
Field2D mean_curvature(const Field2D& eta, double kappa);

// Coefficients c_0..c_nmax of a map analytic in eps, by the trapezoidal rule on the
// circle |eps| = radius with the given number of nodes. The coefficients of a real
// analytic map are returned as real fields.
std::vector<StatePair> taylor_coefficients(const std::function<StatePair(cd)>& map, int nmax,
                                           double radius, int nodes);

}  // namespace sww
