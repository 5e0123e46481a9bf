#include "sww/conjugation.hpp"

#include <algorithm>
#include <cmath>

namespace sww {

namespace {

Field2D Dt(const Field2D& f) { return apply(mult::dt(), f); }
Field2D Dx(const Field2D& f) { return apply(mult::dx(), f); }
Field2D H(const Field2D& f) { return apply(mult::hilbert(), f); }
Field2D absD(const Field2D& f, double r) { return apply(mult::abs_dx(r), f); }

Field2D one_like(const Field2D& f) { return Field2D::constant(f.L(), f.J(), 1.0); }

Field2D quotient(const Field2D& p, const Field2D& q)
{
    return collocate({&p, &q}, [](const cd* v) { return v[0] / v[1]; }, p.L(), p.J(), true);
}

double grid_max(const Field2D& f)
{
    const Grid g = to_grid(f, fft_size(4 * (2 * f.L() + 1)), fft_size(4 * (2 * f.J() + 1)));
    double m = 0.0;
    for (const cd& v : g.v) m = std::max(m, std::abs(v));
    return m;
}

// Values at t_a of the time series sum_l c(l) e^{i l t}.
std::vector<double> time_values(const Field2D& f, int nt)
{
    std::vector<double> v(static_cast<std::size_t>(nt));
    for (int a = 0; a < nt; ++a) {
        const double t = 2.0 * kPi * a / nt;
        cd acc = 0.0;
        for (int l = -f.L(); l <= f.L(); ++l) acc += f(l, 0) * std::polar(1.0, l * t);
        v[static_cast<std::size_t>(a)] = acc.real();
    }
    return v;
}

// Coefficients in x at each t_a: rows[a][j + J].
std::vector<std::vector<cd>> space_rows(const Field2D& f, int nt)
{
    const int L = f.L(), J = f.J();
    std::vector<std::vector<cd>> rows(static_cast<std::size_t>(nt), std::vector<cd>(2 * J + 1));
    for (int a = 0; a < nt; ++a) {
        const double t = 2.0 * kPi * a / nt;
        auto& r = rows[static_cast<std::size_t>(a)];
        for (int l = -L; l <= L; ++l) {
            const cd e = std::polar(1.0, l * t);
            for (int j = -J; j <= J; ++j) r[static_cast<std::size_t>(j + J)] += f(l, j) * e;
        }
    }
    return rows;
}

cd row_value(const std::vector<cd>& r, int J, double x)
{
    const cd z = std::polar(1.0, x);
    cd p = std::polar(1.0, -J * x), acc = 0.0;
    for (int j = -J; j <= J; ++j) {
        acc += r[static_cast<std::size_t>(j + J)] * p;
        p *= z;
    }
    return acc;
}

// Newton solve of s + shift(s) = target for each target, given value and derivative.
template <class F, class DF>
double invert_point(double target, F value, DF deriv, double tol)
{
    double s = target - value(target);
    for (int it = 0; it < 60; ++it) {
        const double r = s + value(s) - target;
        if (std::abs(r) < tol) break;
        s -= r / (1.0 + deriv(s));
    }
    return s - target;
}

}  // namespace

DiffeoError::DiffeoError(const std::string& which, double m)
    : std::runtime_error("change of variables out of range: max |" + which + "| = " + std::to_string(m) +
                         " exceeds 1/2"),
      measured(m)
{
}

Field2D compose_space(const Field2D& h, const Field2D& shift)
{
    const int L = std::max(h.L(), shift.L()), J = std::max(h.J(), shift.J());
    const int nt = fft_size(4 * (2 * L + 1)), nx = fft_size(4 * (2 * J + 1));
    const Grid s = to_grid(shift, nt, nx);
    const auto rows = space_rows(h, nt);
    Grid out(nt, nx);
    for (int a = 0; a < nt; ++a)
        for (int b = 0; b < nx; ++b) {
            const double x = 2.0 * kPi * b / nx + s(a, b).real();
            out(a, b) = row_value(rows[static_cast<std::size_t>(a)], h.J(), x);
        }
    return from_grid(out, h.L(), h.J(), h.is_real());
}

Field2D compose_time(const Field2D& h, const Field2D& shift)
{
    const int L = h.L(), J = h.J();
    const int nt = fft_size(4 * (2 * std::max(L, shift.L()) + 1));
    const std::vector<double> s = time_values(shift, nt);
    // g[a][j] = sum_l h(l, j) e^{i l (t_a + s_a)}
    std::vector<cd> g(static_cast<std::size_t>(nt) * (2 * J + 1));
    for (int a = 0; a < nt; ++a) {
        const double t = 2.0 * kPi * a / nt + s[static_cast<std::size_t>(a)];
        for (int l = -L; l <= L; ++l) {
            const cd e = std::polar(1.0, l * t);
            for (int j = -J; j <= J; ++j) g[static_cast<std::size_t>(a) * (2 * J + 1) + (j + J)] += h(l, j) * e;
        }
    }
    Field2D out(L, J, h.is_real());
    for (int l = -L; l <= L; ++l)
        for (int a = 0; a < nt; ++a) {
            const cd e = std::polar(1.0 / nt, -l * 2.0 * kPi * a / nt);
            for (int j = -J; j <= J; ++j) out(l, j) += g[static_cast<std::size_t>(a) * (2 * J + 1) + (j + J)] * e;
        }
    if (h.is_real()) out.symmetrize();
    return out;
}

ChangeOfVariables compute_changes(const StatePair& u, double, double, double newton_tol)
{
    const Field2D& eta = u.eta;
    const int L = eta.L(), J = eta.J();
    ChangeOfVariables cv;
    const Field2D ex = Dx(eta);
    // c^{-1/3} = sqrt(1 + eta_x^2)
    const Field2D s = collocate(ex, [](cd v) { return std::sqrt(1.0 + v * v); });
    const Field2D m = apply(mult::pi0(), s);
    const Field2D w = collocate(m, [](cd v) { return std::pow(v, -1.5); });
    const double sqrt_mu = w(0, 0).real();
    cv.mu = sqrt_mu * sqrt_mu;

    const Field2D adot = w * (1.0 / sqrt_mu) - one_like(w);
    cv.alpha = apply(mult::dt_inv(), adot);
    const Field2D bx = collocate({&s, &m}, [](const cd* v) { return v[0] / v[1] - 1.0; }, L, J, true);
    cv.beta = apply(mult::dx_inv(), bx);

    cv.max_beta_x = grid_max(bx);
    cv.max_alpha_dot = grid_max(adot);
    if (cv.max_beta_x > 0.5) throw DiffeoError("beta_x", cv.max_beta_x);
    if (cv.max_alpha_dot > 0.5) throw DiffeoError("alpha'", cv.max_alpha_dot);

    // Space inverse, row by row.
    {
        const int nt = fft_size(4 * (2 * L + 1)), nx = fft_size(4 * (2 * J + 1));
        const auto rb = space_rows(cv.beta, nt), rbx = space_rows(Dx(cv.beta), nt);
        Grid g(nt, nx);
        for (int a = 0; a < nt; ++a) {
            const auto& r0 = rb[static_cast<std::size_t>(a)];
            const auto& r1 = rbx[static_cast<std::size_t>(a)];
            for (int b = 0; b < nx; ++b) {
                const double y = 2.0 * kPi * b / nx;
                g(a, b) = invert_point(
                    y, [&](double x) { return row_value(r0, J, x).real(); },
                    [&](double x) { return row_value(r1, J, x).real(); }, newton_tol);
            }
        }
        cv.beta_inv = from_grid(g, L, J, true);
    }
    // Time inverse.
    {
        const int nt = fft_size(4 * (2 * L + 1));
        const Field2D ad = Dt(cv.alpha);
        auto series = [](const Field2D& f, double t) {
            cd acc = 0.0;
            for (int l = -f.L(); l <= f.L(); ++l) acc += f(l, 0) * std::polar(1.0, l * t);
            return acc.real();
        };
        std::vector<double> vals(static_cast<std::size_t>(nt));
        for (int a = 0; a < nt; ++a)
            vals[static_cast<std::size_t>(a)] = invert_point(
                2.0 * kPi * a / nt, [&](double t) { return series(cv.alpha, t); },
                [&](double t) { return series(ad, t); }, newton_tol);
        cv.alpha_inv = Field2D(L, J);
        for (int l = -L; l <= L; ++l) {
            cd acc = 0.0;
            for (int a = 0; a < nt; ++a)
                acc += vals[static_cast<std::size_t>(a)] * std::polar(1.0 / nt, -l * 2.0 * kPi * a / nt);
            cv.alpha_inv(l, 0) = acc;
        }
        cv.alpha_inv.symmetrize();
    }
    return cv;
}

L3Stage conjugate_to_L3(const StatePair& u, double omega, double kappa, const DNConfig& cfg)
{
    L3Stage st;
    st.op = build_linearized(u, omega, kappa, cfg);
    st.cv = compute_changes(u, omega, kappa);
    const ChangeOfVariables& cv = st.cv;
    const LinearizedOp& op = st.op;
    CoefficientChain& ch = st.chain;
    ch.omega = omega;
    ch.kappa = kappa;
    ch.mu = cv.mu;
    ch.lambda = std::sqrt(cv.mu * kappa);

    const Field2D one = one_like(u.eta);
    const Field2D bx = Dx(cv.beta), bt = Dt(cv.beta), bxx = Dx(bx);
    const Field2D jb = one + bx;
    auto& a = ch.a;
    a[1] = cv.B_inv(bt * omega + multiply(op.V, jb));
    a[2] = cv.B_inv(Dx(op.V));
    a[3] = cv.B_inv(jb);
    a[4] = cv.B_inv(multiply(op.c, multiply(jb, jb)));
    a[5] = cv.B_inv(multiply(op.c, bxx) + multiply(Dx(op.c), jb));
    a[6] = cv.B_inv(op.a);
    a[7] = cv.A_inv(one + Dt(cv.alpha));
    for (int k = 8; k <= 13; ++k) a[static_cast<std::size_t>(k)] = cv.A_inv(a[static_cast<std::size_t>(k - 7)]);

    const Field2D q = quotient(a[7], a[10]);
    const Field2D qy = Dx(q), qt = Dt(q);
    a[14] = quotient(a[8], a[7]);
    a[15] = quotient(a[9], a[7]);
    a[16] = -quotient(qy, q);
    a[17] = -quotient(a[12], a[11]);
    a[18] = quotient(a[13], a[11]);
    a[19] = multiply(quotient(a[7], a[11]), qt) * (cv.mu * omega) + multiply(quotient(a[8], a[11]), qy) * cv.mu;
    a[0] = Field2D(u.eta.L(), u.eta.J());

    st.proportionality = grid_max(multiply(a[7], a[7]) * cv.mu - multiply(a[10], a[11]));
    if (st.proportionality > 1e-8)
        throw std::runtime_error("proportionality residual " + std::to_string(st.proportionality) +
                                 " signals a bad change of variables");
    fill_top_coefficients(ch);
    return st;
}

StatePair apply_L1(const CoefficientChain& c, const StatePair& h)
{
    const double om = c.omega, k = c.kappa;
    return {Dt(h.eta) * om + multiply(c[1], Dx(h.eta)) + multiply(c[2], h.eta) - multiply(c[3], absD(h.psi, 1.0)),
            -multiply(c[4], Dx(Dx(h.eta))) * k - multiply(c[5], Dx(h.eta)) * k + multiply(c[6], h.eta) +
                Dt(h.psi) * om + multiply(c[1], Dx(h.psi))};
}

StatePair apply_L2(const CoefficientChain& c, const StatePair& h)
{
    const double om = c.omega, k = c.kappa;
    return {multiply(c[7], Dt(h.eta)) * om + multiply(c[8], Dx(h.eta)) + multiply(c[9], h.eta) -
                multiply(c[10], absD(h.psi, 1.0)),
            -multiply(c[11], Dx(Dx(h.eta))) * k - multiply(c[12], Dx(h.eta)) * k + multiply(c[13], h.eta) +
                multiply(c[7], Dt(h.psi)) * om + multiply(c[8], Dx(h.psi))};
}

StatePair apply_L3(const CoefficientChain& c, const StatePair& h)
{
    const double om = c.omega, mk = c.mu * c.kappa;
    const Field2D q = quotient(c[7], c[10]);
    // -(a10/a7) d_y [H, q]
    const Field2D comm = H(multiply(q, h.psi)) - multiply(q, H(h.psi));
    const Field2D r3 = -quotient(Dx(comm), q);
    return {Dt(h.eta) * om + multiply(c[14], Dx(h.eta)) + multiply(c[15], h.eta) - absD(h.psi, 1.0) +
                multiply(c[16], H(h.psi)) + r3,
            -Dx(Dx(h.eta)) * mk + multiply(c[17], Dx(h.eta)) * mk + multiply(c[18], h.eta) * c.mu +
                Dt(h.psi) * om + multiply(c[14], Dx(h.psi)) + multiply(c[19], h.psi)};
}

StatePair apply_P(const CoefficientChain& c, const StatePair& h)
{
    return {multiply(c[7], h.eta), multiply(c[11], h.psi) * (1.0 / c.mu)};
}

StatePair apply_Q(const CoefficientChain& c, const StatePair& h)
{
    return {h.eta, multiply(quotient(c[7], c[10]), h.psi)};
}

double top_symbol(double xi, double kappa)
{
    const double ax = std::abs(xi);
    if (ax <= 1.0 / 3.0) return 1.0;
    auto exact = [kappa](double z) { return std::sqrt((1.0 + kappa * z * z) / z); };
    if (ax >= 2.0 / 3.0) return exact(ax);
    // Quintic smoothstep between the two branches.
    const double s = 3.0 * ax - 1.0;
    const double w = s * s * s * (10.0 - 15.0 * s + 6.0 * s * s);
    return (1.0 - w) + w * exact(ax);
}

double capillary_tail(int j, double kappa)
{
    const double a = std::abs(static_cast<double>(j)), sk = std::sqrt(kappa);
    return std::sqrt(1.0 + kappa * a * a) - sk * a - 1.0 / (2.0 * sk * a);
}

StatePair TopSymmetrizer::S(const StatePair& h) const
{
    return {h.eta, apply(Lambda, h.psi) * std::sqrt(mu)};
}

StatePair TopSymmetrizer::S_inv(const StatePair& h) const
{
    return {h.eta, apply(Lambda_inv, h.psi) * (1.0 / std::sqrt(mu))};
}

TopSymmetrizer symmetrize_top(double kappa, double mu)
{
    TopSymmetrizer s;
    s.mu = mu;
    s.kappa = kappa;
    s.Lambda = {[kappa](int, int j) { return cd(top_symbol(j, kappa)); }, true};
    s.Lambda_inv = {[kappa](int, int j) { return cd(1.0 / top_symbol(j, kappa)); }, true};
    const double sm = std::sqrt(mu);
    s.T = {[sm, kappa](int, int j) {
               const double a = std::abs(static_cast<double>(j));
               return cd(sm * std::sqrt(a * (1.0 + kappa * a * a)));
           },
           true};
    return s;
}

void fill_top_coefficients(CoefficientChain& c)
{
    const double sm = std::sqrt(c.mu), sk = std::sqrt(c.kappa);
    const Field2D one = one_like(c[18]);
    c.a25 = (c[18] - one) * (sm / sk) - Dx(c[17]) * (0.5 * c.lambda);
    c.a27 = c[19] - Dx(c[14]) * 0.5;
    c.a28 = Dx(Dx(c[14])) * 0.75 - Dx(c[19]) * 0.5;
}

StatePair apply_L4(const CoefficientChain& c, const TopSymmetrizer& s, const StatePair& h)
{
    const double om = c.omega, lm = c.lambda;
    const Field2D A4 = Dt(h.eta) * om + multiply(c[14], Dx(h.eta)) + multiply(c[15], h.eta);
    const Field2D B4 = -apply(s.T, h.psi) + multiply(c[16], absD(H(h.psi), 0.5)) * lm;
    const Field2D C4 =
        apply(s.T, h.eta) - multiply(c[17], absD(H(h.eta), 0.5)) * lm + multiply(c.a25, absD(h.eta, -0.5));
    const Field2D D4 = Dt(h.psi) * om + multiply(c[14], Dx(h.psi)) + multiply(c.a27, h.psi) +
                       multiply(c.a28, absD(H(h.psi), -1.0));
    return {A4 + B4, C4 + D4};
}

void symmetrize_lower(CoefficientChain& c)
{
    const double lm = c.lambda, om = c.omega;
    c.v2 = (c[16] - c[17]) * 0.5;
    c.a31 = (c[16] + c[17]) * (-0.5 * lm);
    c.a29 = (c[15] + c.a27) * 0.5;
    c.g3 = (c[15] - c.a27) * (0.5 / lm);
    const Field2D v2y = Dx(c.v2);
    c.v4 = (v2y * (1.5 * lm) + multiply(c.v2, c.a31 - c[16] * lm) + c.a25) * (0.5 / lm);
    c.a32 = (multiply(c[16] * lm + c.a31, c.v2) - v2y * (1.5 * lm) + c.a25) * 0.5;
    const Field2D common = Dt(c.v2) * om + Dx(multiply(c[14], c.v2)) + multiply(c.v2, c.a27 - c.a29) + c.a28 +
                           Dx(c.g3) * (1.5 * lm);
    c.g5 = (common + multiply(c.g3, c.a31 - c[17] * lm)) * (-0.5 / lm);
    c.a30 = (common - multiply(c.g3, c.a31 + c[17] * lm)) * 0.5;
}

std::array<double, 8> symmetrization_defects(const CoefficientChain& c)
{
    const double lm = c.lambda, om = c.omega;
    std::array<double, 8> d{};
    d[0] = (c[15] - c.a29 - c.g3 * lm).max_abs();
    d[1] = (c.a30 + c.g5 * lm + multiply(c.g3, c.a31)).max_abs();
    d[2] = ((c[16] - c.v2) * lm + c.a31).max_abs();
    d[3] = ((Dx(c.v2) * 1.5 - c.v4 - multiply(c[16], c.v2)) * lm + c.a32).max_abs();
    d[4] = (c[17] * lm + c.a31 + c.v2 * lm).max_abs();
    d[5] = (c.a25 - c.a32 + multiply(c.v2, c.a31) - c.v4 * lm).max_abs();
    d[6] = (c.a27 - c.a29 + c.g3 * lm).max_abs();
    d[7] = (Dt(c.v2) * om + Dx(multiply(c[14], c.v2)) + multiply(c.v2, c.a27 - c.a29) + c.a28 - c.a30 +
            Dx(c.g3) * (1.5 * lm) + c.g5 * lm - multiply(c[17], c.g3) * lm)
               .max_abs();
    return d;
}

StatePair apply_M(const CoefficientChain& c, const StatePair& h)
{
    const Field2D g = multiply(c.g3, absD(h.psi, -1.5)) + multiply(c.g5, absD(H(h.psi), -2.5));
    const Field2D v = h.psi + multiply(c.v2, absD(H(h.psi), -1.0)) + multiply(c.v4, absD(h.psi, -2.0));
    return {h.eta + g, v};
}

namespace {

Field2D A5(const CoefficientChain& c, const Field2D& h)
{
    return Dt(h) * c.omega + multiply(c[14], Dx(h)) + multiply(c.a29, h) + multiply(c.a30, absD(H(h), -1.0));
}

Field2D C5(const CoefficientChain& c, const TopSymmetrizer& s, const Field2D& h)
{
    return apply(s.T, h) + multiply(c.a31, absD(H(h), 0.5)) + multiply(c.a32, absD(h, -0.5));
}

}  // namespace

StatePair apply_L5(const CoefficientChain& c, const TopSymmetrizer& s, const StatePair& h)
{
    return {A5(c, h.eta) - C5(c, s, h.psi), C5(c, s, h.eta) + A5(c, h.psi)};
}

Field2D apply_L5_complex(const CoefficientChain& c, const TopSymmetrizer& s, const Field2D& h)
{
    return A5(c, h) + C5(c, s, h) * cd(0.0, 1.0);
}

ReductionChain build_reduction(const StatePair& u, double omega, double kappa, const DNConfig& cfg)
{
    ReductionChain r;
    r.stage = conjugate_to_L3(u, omega, kappa, cfg);
    r.top = symmetrize_top(kappa, r.stage.chain.mu);
    symmetrize_lower(r.stage.chain);
    return r;
}

}  // namespace sww
