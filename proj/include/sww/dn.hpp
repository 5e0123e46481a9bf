// Dirichlet-Neumann operator of the infinitely deep fluid, by Taylor expansion in the
// surface elevation, with its shape derivative and the coefficients B, V.
#pragma once

#include "sww/field.hpp"

#include <stdexcept>
#include <vector>

namespace sww {

struct DNConfig {
    int order = 4;
    // Bound on the space H^6 size of eta (summed over time modes).
    double smallness = 0.1;
    bool check_smallness = true;
};

class DNSmallnessError : public std::runtime_error {
public:
    DNSmallnessError(double measured, double bound);
    double measured;
    double bound;
};

// sum_l ||eta_l(x)||_{H^s_x}: dominates sup_t of the space Sobolev norm.
double space_sobolev_sup(const Field2D& eta, double s);

// Taylor term of degree n in eta, by the recursion (n >= 0).
Field2D dn_term(const Field2D& eta, const Field2D& psi, int n);

// Sum of the Taylor terms of degree <= cfg.order.
Field2D dn_apply(const Field2D& eta, const Field2D& psi, const DNConfig& cfg = {});

// Quadratic term of the expansion, polarized: symmetric in (eta1, eta2).
Field2D dn_second_variation(const Field2D& eta1, const Field2D& eta2, const Field2D& psi);

struct BVData {
    Field2D B;
    Field2D V;
};

BVData compute_BV(const Field2D& eta, const Field2D& psi, const DNConfig& cfg = {});

// -G(eta)(B eta_t) - d_x(V eta_t) where eta_t is the surface variation.
Field2D dn_shape_derivative(const Field2D& eta, const Field2D& psi, const Field2D& eta_var,
                            const DNConfig& cfg = {});

struct DecayReport {
    std::vector<int> modes;
    std::vector<double> residuals;
    double slope = 0.0;
};

// ||(G(eta) - |D_x|) |D_x|^m e^{ijx}||_0 across the requested j, with the log-log slope.
DecayReport dn_remainder_probe(const Field2D& eta, const std::vector<int>& modes, double m,
                               const DNConfig& cfg = {});

}  // namespace sww
