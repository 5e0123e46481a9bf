#include "sww/bifurcation.hpp"

#include "sww/numerics.hpp"

#include <cmath>
#include <string>

namespace sww {

ResonanceError::ResonanceError(LatticePoint p)
    : std::runtime_error("kappa rejected: near resonance at (l, j) = (" + std::to_string(p.l) + ", " +
                         std::to_string(p.j) + "), |wb^2 l^2 - j(1 + kappa j^2)| = " + std::to_string(p.value)),
      point(p)
{
}

SolvabilityError::SolvabilityError(double d)
    : std::runtime_error("datum not in the range: g11 + wb f11 = " + std::to_string(d)), defect(d)
{
}

TwistError::TwistError(double k, double w2)
    : std::runtime_error("twist condition fails at kappa = " + std::to_string(k) +
                         ": omega2_bar = " + std::to_string(w2)),
      kappa(k), omega2_bar(w2)
{
}

std::vector<LatticePoint> near_resonances(double kappa, int L, int J, double tol)
{
    const double w2 = 1.0 + kappa;
    std::vector<LatticePoint> out;
    for (int j = 1; j <= J; ++j) {
        const double rhs = j * (1.0 + kappa * double(j) * j);
        // Only l near sqrt(rhs / w2) can come close.
        const double l0 = std::sqrt(rhs / w2);
        for (int l = std::max(1, int(std::floor(l0)) - 1); l <= std::min(L, int(std::ceil(l0)) + 1); ++l) {
            const double v = std::abs(w2 * double(l) * l - rhs);
            if (v < tol) out.push_back({l, j, v});
        }
    }
    return out;
}

KernelFrame build_kernel_frame(double kappa, int L, int J, const ScreenOptions& screen)
{
    if (!(kappa > 0.0)) throw std::invalid_argument("kappa must be positive");
    for (const auto& p : near_resonances(kappa, screen.L, screen.J, screen.tol))
        if (p.l != 1 || p.j != 1) throw ResonanceError(p);
    KernelFrame k;
    k.kappa = kappa;
    k.omega_bar = std::sqrt(1.0 + kappa);
    const double w = k.omega_bar;
    auto cc = [&](double a) { return Field2D::trig(L, J, true, 1, true, 1, a); };
    auto sc = [&](double a) { return Field2D::trig(L, J, false, 1, true, 1, a); };
    k.v0 = {cc(1.0), sc(-w)};
    k.w0 = {cc(w), sc(1.0)};
    k.r0 = {sc(-1.0), cc(w)};
    k.z0 = {sc(1.0), cc(w)};
    return k;
}

StatePair invert_L_baromega(const Field2D& f, const Field2D& g, double kappa, double tol)
{
    const int L = std::max(f.L(), g.L()), J = std::max(f.J(), g.J());
    const Field2D F = f.resized(L, J), G = g.resized(L, J);
    const double w = std::sqrt(1.0 + kappa);
    const double scale = std::max(1.0, std::max(F.max_abs(), G.max_abs()));
    StatePair out{Field2D(L, J, F.is_real() && G.is_real()), Field2D(L, J, F.is_real() && G.is_real())};
    double defect = 0.0;
    for (int l = -L; l <= L; ++l)
        for (int j = -J; j <= J; ++j) {
            const cd fh = F(l, j), gh = G(l, j);
            if (l == 0 && j == 0) {
                out.eta(0, 0) = gh;
                continue;
            }
            if (std::abs(l) == 1 && std::abs(j) == 1) {
                defect = std::max(defect, 4.0 * std::abs(gh + cd(0.0, w * l) * fh));
                out.psi(l, j) = -fh;
                continue;
            }
            const double aj = std::abs(j), cap = 1.0 + kappa * aj * aj;
            const double D = w * w * l * l - aj * cap;
            if (std::abs(D) < tol) throw ResonanceError({std::abs(l), std::abs(j), std::abs(D)});
            const cd il(0.0, w * l);
            out.eta(l, j) = -(il * fh + aj * gh) / D;
            out.psi(l, j) = -(il * gh - cap * fh) / D;
        }
    if (defect > tol * scale) throw SolvabilityError(defect);
    return out;
}

std::pair<double, double> project_mode11(double p, double q, double omega_bar)
{
    return {-0.5 * p + q / (2.0 * omega_bar), 0.5 * p + q / (2.0 * omega_bar)};
}

std::pair<double, double> mode11_coordinates(const StatePair& u)
{
    const double p = (cd(0.0, 4.0) * u.eta.at(1, 1)).real();
    const double q = 4.0 * u.psi.at(1, 1).real();
    return {p, q};
}

double alpha02(double k) { return (1.0 + k) / (4.0 * (1.0 + 4.0 * k)); }
double alpha22(double k) { return (1.0 + k) / (4.0 * (1.0 - 2.0 * k)); }
double beta22(double k) { return -std::sqrt(1.0 + k) * alpha22(k); }

double omega2_bar_formula(double k)
{
    const double w = std::sqrt(1.0 + k);
    return -(w / 32.0) * (4.0 * (1.0 + k) / (1.0 + 4.0 * k) - 2.0 * (1.0 + k) / (1.0 - 2.0 * k) + 1.0 +
                          (2.0 + 11.0 * k) / (2.0 * (1.0 + k)));
}

double twist_polynomial(double k) { return ((136.0 * k + 66.0) * k + 3.0) * k - 8.0; }

double twist_root() { return bisect_poly({-8.0, 3.0, 66.0, 136.0}, 0.0, 1.0); }

ApproxSolution build_approx_solution(double kappa, double eps, double xi, const ApproxOptions& opt)
{
    const int Lw = std::max(opt.L, 6), Jw = std::max(opt.J, 6);
    ApproxSolution a;
    a.kappa = kappa;
    a.eps = eps;
    a.xi = xi;
    a.frame = build_kernel_frame(kappa, Lw, Jw, opt.screen);
    const KernelFrame& fr = a.frame;
    const double wb = fr.omega_bar;
    a.omega_bar = wb;

    const double a1 = std::sqrt(xi);
    std::vector<StatePair> u(5, StatePair::zeros(Lw, Jw));
    std::vector<double> om(5, 0.0);  // omega_k with powers of xi included
    u[1] = fr.v0 * a1;
    std::vector<double> b(5, 0.0);

    DNConfig dn;
    dn.check_smallness = false;
    for (int k = 2; k <= 4; ++k) {
        // Everything at order eps^k that does not involve u_k or omega_{k-1}.
        auto path = [&](cd e) {
            StatePair v = StatePair::zeros(Lw, Jw);
            cd p = 1.0;
            for (int i = 1; i < k; ++i) {
                p *= e;
                v += u[i] * p;
            }
            // omega is real along the real axis; keep it complex along the contour through
            // the eps-polynomial multiplying d_t.
            StatePair F = evaluate_F(v, wb, kappa, dn);
            cd q = 1.0;
            for (int i = 1; i <= k - 2; ++i) {
                q *= e;
                if (om[i] == 0.0) continue;
                StatePair dt{apply(mult::dt(), v.eta), apply(mult::dt(), v.psi)};
                F += dt * (om[i] * q);
            }
            return F;
        };
        const StatePair Q = taylor_coefficients(path, k, opt.radius, opt.nodes)[k];
        const auto [p, q] = mode11_coordinates(Q);
        const auto [lr, lz] = project_mode11(p, q, wb);
        om[k - 1] = lz / a1;
        b[k] = -lr / (2.0 + kappa);
        const StatePair rest = Q - fr.r0 * lr - fr.z0 * lz;
        const StatePair wk = invert_L_baromega(-rest.eta, -rest.psi, kappa);
        u[k] = fr.w0 * b[k] + wk;
        const double s = std::pow(xi, 0.5 * k);
        if (k == 2) a.w2 = wk * (1.0 / s);
        if (k == 3) a.w3 = wk * (1.0 / s);
        if (k == 4) a.w4 = wk * (1.0 / s);
    }
    a.omega2_bar = om[2] / xi;
    a.omega3_bar = om[3] / std::pow(xi, 1.5);
    a.b3 = b[3] / std::pow(xi, 1.5);
    a.b4 = b[4] / (xi * xi);
    if (std::abs(a.omega2_bar) < opt.twist_tol) throw TwistError(kappa, a.omega2_bar);

    a.orders.assign(5, StatePair::zeros(opt.L, opt.J));
    a.u_bar = StatePair::zeros(opt.L, opt.J);
    for (int k = 1; k <= 4; ++k) {
        a.orders[k] = u[k].resized(opt.L, opt.J);
        a.u_bar += a.orders[k] * std::pow(eps, k);
    }
    a.frame = build_kernel_frame(kappa, opt.L, opt.J, opt.screen);
    a.omega = frequency(a, eps, xi);
    return a;
}

double frequency(const ApproxSolution& a, double eps, double xi)
{
    return a.omega_bar + eps * eps * xi * a.omega2_bar + std::pow(eps, 3) * std::pow(xi, 1.5) * a.omega3_bar;
}

}  // namespace sww
