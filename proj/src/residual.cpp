#include "sww/residual.hpp"

#include <cmath>

namespace sww {

namespace {
Field2D D(const Field2D& f) { return apply(mult::abs_dx(), f); }
Field2D Dx(const Field2D& f) { return apply(mult::dx(), f); }
}  // namespace

ResidualValue evaluate_F(const StatePair& u, double omega, double kappa, const DNConfig& cfg)
{
    const Field2D& eta = u.eta;
    const Field2D& psi = u.psi;
    const Field2D g = dn_apply(eta, psi, cfg);
    const Field2D ex = Dx(eta), exx = apply(mult::dxx(), eta), px = Dx(psi);
    const bool real = eta.is_real() && psi.is_real();
    const Field2D nonlin = collocate(
        {&px, &g, &ex, &exx},
        [kappa](const cd* v) {
            const cd q = 1.0 + v[2] * v[2];
            const cd a = v[1] + v[2] * v[0];
            return 0.5 * v[0] * v[0] - 0.5 * a * a / q - kappa * v[3] / (q * std::sqrt(q));
        },
        psi.L(), psi.J(), real);
    ResidualValue F;
    F.eta = apply(mult::dt(), eta) * omega - g;
    F.psi = apply(mult::dt(), psi) * omega + eta + nonlin;
    return F;
}

StatePair linear_L(const StatePair& h, double omega, double kappa)
{
    StatePair r;
    r.eta = apply(mult::dt(), h.eta) * omega - D(h.psi);
    r.psi = h.eta - apply(mult::dxx(), h.eta) * kappa + apply(mult::dt(), h.psi) * omega;
    return r;
}

StatePair quadratic_T2(const StatePair& a, const StatePair& b)
{
    StatePair r;
    r.eta = (Dx(multiply(a.eta, Dx(b.psi)) + multiply(b.eta, Dx(a.psi))) +
             D(multiply(a.eta, D(b.psi)) + multiply(b.eta, D(a.psi)))) *
            0.5;
    r.psi = (multiply(Dx(a.psi), Dx(b.psi)) - multiply(D(a.psi), D(b.psi))) * 0.5;
    return r;
}

StatePair cubic_T3(const StatePair& u, double kappa)
{
    const Field2D& eta = u.eta;
    const Field2D Dpsi = D(u.psi);
    const Field2D e2 = multiply(eta, eta);
    const Field2D pxx = apply(mult::dxx(), u.psi);
    const Field2D inner = D(multiply(eta, Dpsi));
    StatePair r;
    r.eta = -(apply(mult::dxx(), multiply(e2, Dpsi)) * 0.5) - D(multiply(eta, inner)) - D(multiply(e2, pxx)) * 0.5;
    const Field2D ex = Dx(eta);
    r.psi = multiply(Dpsi, multiply(eta, pxx) + inner) + Dx(multiply(ex, multiply(ex, ex))) * (0.5 * kappa);
    return r;
}

Field2D mean_curvature(const Field2D& eta, double kappa)
{
    const Field2D ex = Dx(eta), exx = apply(mult::dxx(), eta);
    return collocate(
        {&ex, &exx},
        [kappa](const cd* v) {
            const cd q = 1.0 + v[0] * v[0];
            return kappa * v[1] / (q * std::sqrt(q));
        },
        eta.L(), eta.J(), eta.is_real());
}

std::vector<StatePair> taylor_coefficients(const std::function<StatePair(cd)>& map, int nmax,
                                           double radius, int nodes)
{
    std::vector<StatePair> c(static_cast<std::size_t>(nmax) + 1);
    for (int k = 0; k < nodes; ++k) {
        const double th = 2.0 * kPi * k / nodes;
        const StatePair v = map(radius * std::exp(cd(0.0, th)));
        for (int n = 0; n <= nmax; ++n) {
            const cd w = std::exp(cd(0.0, -n * th)) / (nodes * std::pow(radius, n));
            if (k == 0)
                c[n] = v * w;
            else
                c[n] += v * w;
        }
    }
    for (auto& x : c) x = x.re();
    return c;
}

}  // namespace sww
