#include "sww/dn.hpp"

#include "sww/numerics.hpp"

#include <cmath>
#include <string>

namespace sww {

DNSmallnessError::DNSmallnessError(double m, double b)
    : std::runtime_error("dirichlet-neumann: surface too large, ||eta||_6 = " + std::to_string(m) +
                         " > " + std::to_string(b)),
      measured(m), bound(b)
{
}

double space_sobolev_sup(const Field2D& eta, double s)
{
    double total = 0.0;
    for (int l = -eta.L(); l <= eta.L(); ++l) {
        double acc = 0.0;
        for (int j = -eta.J(); j <= eta.J(); ++j)
            acc += std::norm(eta(l, j)) * std::pow(std::max(1.0, std::abs(double(j))), 2.0 * s);
        total += std::sqrt(acc);
    }
    return total;
}

namespace {

// eta^k / k! for k = 0..n.
std::vector<Field2D> scaled_powers(const Field2D& eta, int n)
{
    std::vector<Field2D> p;
    p.push_back(Field2D::constant(eta.L(), eta.J(), 1.0));
    for (int k = 1; k <= n; ++k) p.push_back(multiply(p.back(), eta) * (1.0 / k));
    return p;
}

// (eta^k/k!) |D|^{k+1} chi - d_x(eta^k/k!) d_x |D|^{k-1} chi.
Field2D principal(const std::vector<Field2D>& pw, int k, const Field2D& chi)
{
    if (k == 0) return apply(mult::abs_dx(1.0), chi);
    Field2D r = multiply(pw[k], apply(mult::abs_dx(k + 1), chi));
    r -= multiply(apply(mult::dx(), pw[k]), apply(mult::dx() * mult::abs_dx(k - 1), chi));
    return r;
}

Field2D term_rec(const std::vector<Field2D>& pw, int n, const Field2D& chi)
{
    Field2D r = principal(pw, n, chi);
    for (int m = 1; m <= n; ++m) r -= term_rec(pw, n - m, multiply(pw[m], apply(mult::abs_dx(m), chi)));
    return r;
}

void check(const Field2D& eta, const DNConfig& cfg)
{
    if (!cfg.check_smallness) return;
    const double m = space_sobolev_sup(eta, 6.0);
    if (m > cfg.smallness) throw DNSmallnessError(m, cfg.smallness);
}

}  // namespace

Field2D dn_term(const Field2D& eta, const Field2D& psi, int n)
{
    return term_rec(scaled_powers(eta, n), n, psi);
}

Field2D dn_apply(const Field2D& eta, const Field2D& psi, const DNConfig& cfg)
{
    check(eta, cfg);
    const int N = cfg.order;
    const auto pw = scaled_powers(eta, N);
    // pending[b] collects the functions on which the sum of terms of degree <= b acts.
    std::vector<Field2D> pending(static_cast<std::size_t>(N) + 1, Field2D(psi.L(), psi.J(), psi.is_real()));
    pending[N] = psi;
    Field2D out(psi.L(), psi.J(), psi.is_real() && eta.is_real());
    for (int b = N; b >= 0; --b) {
        const Field2D& chi = pending[b];
        if (chi.is_zero()) continue;
        for (int k = 0; k <= b; ++k) out += principal(pw, k, chi);
        for (int m = 1; m <= b; ++m) pending[b - m] -= multiply(pw[m], apply(mult::abs_dx(m), chi));
    }
    return out;
}

Field2D dn_second_variation(const Field2D& eta1, const Field2D& eta2, const Field2D& psi)
{
    // G_2 is quadratic in eta: polarize.
    const Field2D plus = dn_term(eta1 + eta2, psi, 2);
    const Field2D minus = dn_term(eta1 - eta2, psi, 2);
    return (plus - minus) * 0.5;
}

BVData compute_BV(const Field2D& eta, const Field2D& psi, const DNConfig& cfg)
{
    const Field2D g = dn_apply(eta, psi, cfg);
    const Field2D ex = apply(mult::dx(), eta);
    const Field2D px = apply(mult::dx(), psi);
    const bool real = eta.is_real() && psi.is_real();
    BVData bv;
    bv.B = collocate({&ex, &px, &g}, [](const cd* v) { return (v[0] * v[1] + v[2]) / (1.0 + v[0] * v[0]); },
                     psi.L(), psi.J(), real);
    bv.V = px - multiply(bv.B, ex);
    return bv;
}

Field2D dn_shape_derivative(const Field2D& eta, const Field2D& psi, const Field2D& eta_var,
                            const DNConfig& cfg)
{
    const BVData bv = compute_BV(eta, psi, cfg);
    Field2D r = -dn_apply(eta, multiply(bv.B, eta_var), cfg);
    r -= apply(mult::dx(), multiply(bv.V, eta_var));
    return r;
}

DecayReport dn_remainder_probe(const Field2D& eta, const std::vector<int>& modes, double m,
                               const DNConfig& cfg)
{
    DecayReport rep;
    std::vector<double> xs, ys;
    for (int j : modes) {
        const Field2D e = Field2D::exponential(eta.L(), eta.J(), 0, j, std::pow(std::abs(double(j)), m));
        const double r = sobolev_norm(dn_apply(eta, e, cfg) - apply(mult::abs_dx(1.0), e), 0.0);
        rep.modes.push_back(j);
        rep.residuals.push_back(r);
        if (r > 0.0) {
            xs.push_back(std::abs(double(j)));
            ys.push_back(r);
        }
    }
    if (xs.size() >= 2) rep.slope = fit_loglog(xs, ys).slope;
    return rep;
}

}  // namespace sww
