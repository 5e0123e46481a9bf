#include "sww/descent.hpp"

#include "sww/numerics.hpp"

#include <algorithm>
#include <cmath>

namespace sww {

namespace {

const cd I(0.0, 1.0);

Field2D Dt(const Field2D& f) { return apply(mult::dt(), f); }
Field2D Dx(const Field2D& f) { return apply(mult::dx(), f); }
Field2D Dxinv(const Field2D& f) { return apply(mult::dx_inv(), f); }
Field2D Dtinv(const Field2D& f) { return apply(mult::dt_inv(), f); }
Field2D mean_x(const Field2D& f) { return apply(mult::pi0(), f); }
Field2D mul(const Field2D& a, const Field2D& b) { return multiply(a, b); }

Field2D constant_like(const Field2D& f, cd v)
{
    Field2D r(f.L(), f.J(), v.imag() == 0.0);
    r(0, 0) = v;
    return r;
}

void require_zero_mean(const Field2D& f, const char* step, double tol)
{
    const double m = mean_x(f).max_abs();
    if (m > tol) throw DescentError(step, m);
}

// Second-order operator v2 d_xx + v1 d_x + v0 - i shift.
struct XOperator {
    Field2D v2, v1, v0;
    double shift = 0.0;

    // e^{-f} T[e^f g]
    Field2D twisted(const Field2D& f, const Field2D& g) const
    {
        const Field2D fx = Dx(f), gx = Dx(g);
        Field2D r = mul(v1, gx + mul(fx, g)) + mul(v0, g) - g * (I * shift);
        if (v2.max_abs() > 0.0)
            r += mul(v2, Dx(gx) + mul(fx, gx) * 2.0 + mul(Dx(fx) + mul(fx, fx), g));
        return r;
    }
};

struct SignCoefficients {
    // T^{(1)}: v11 d_x + v10 - i lambda1; T^{(0)}: omega d_t + v01 d_x + v00.
    Field2D v10, v01, v00;
    double v11 = 0.0;
    XOperator m1, m2;
};

SignCoefficients coefficients_for_sign(const CoefficientChain& c, const PhaseData& ph, int s)
{
    const double lm = c.lambda, om = c.omega;
    const Field2D bx = Dx(ph.beta), bt = Dt(ph.beta), bxx = Dx(bx), bxxx = Dx(bxx);
    const Field2D bx2 = mul(bx, bx), bx3 = mul(bx2, bx), bx4 = mul(bx3, bx), bx5 = mul(bx4, bx);
    const Field2D& a14 = c[14];
    SignCoefficients v;
    v.v11 = s * 1.5 * lm;
    v.v10 = c.a31 * double(s) + (bt * om + bx2 * (3.0 * lm / 8.0) + mul(a14, bx)) * I;
    v.v01 = bx * (0.75 * lm) + a14;
    v.v00 = bxx * (3.0 * lm / 8.0) + mul(c.a31, bx) * 0.5 + c.a29 - bx3 * (I * (s * lm / 16.0));

    v.m1.v2 = constant_like(a14, -I * (3.0 * lm / 8.0));
    v.m1.v1 = bx2 * (-s * 3.0 * lm / 16.0) - c.a31 * (0.5 * I);
    v.m1.v0 = (mul(bx, bxx) * (3.0 * lm / 16.0) + mul(c.a31, bx2) * 0.125) * double(-s) +
              (bx4 * (3.0 * lm / 128.0) + c.a32) * I;

    const double tail = std::sqrt(c.mu) / (4.0 * std::sqrt(c.kappa));
    v.m2.v2 = bx * (I * (s * 3.0 * lm / 16.0));
    v.m2.v1 = bx3 * (3.0 * lm / 32.0) + (bxx * (3.0 * lm / 16.0) + mul(c.a31, bx) * 0.25) * (I * double(s));
    v.m2.v0 = mul(bx2, bxx) * (9.0 * lm / 64.0) + mul(c.a31, bx3) * (1.0 / 16.0) +
              (bx5 * (-3.0 * lm / 256.0) + bxxx * (lm / 16.0) + mul(c.a31, bxx) * 0.125 - mul(c.a32, bx) * 0.5 -
               c.a30 - bx * tail) *
                  (I * double(s));
    return v;
}

// x-coefficients of f at each t_a: rows[a][j + J].
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

// Values of the operator's kernel pieces on a grid.
struct FioGrid {
    int nt = 0, nx = 0;
    Grid beta;
    std::array<Grid, 4> pos, neg;
    int orders = 0;

    FioGrid(const FioOp& A, int nt_, int nx_) : nt(nt_), nx(nx_), orders(A.orders)
    {
        beta = to_grid(A.beta, nt, nx);
        for (int m = 0; m < orders; ++m) {
            pos[static_cast<std::size_t>(m)] = to_grid(A.layers[static_cast<std::size_t>(m)].pos, nt, nx);
            neg[static_cast<std::size_t>(m)] = to_grid(A.layers[static_cast<std::size_t>(m)].neg, nt, nx);
        }
    }

    // p(t_a, x_b, j) e^{i(j x_b + |j|^{1/2} beta)}
    cd column(int a, int b, int j) const
    {
        const double x = 2.0 * kPi * b / nx;
        if (j == 0) return 1.0;
        const double aj = std::abs(static_cast<double>(j));
        cd p = orders == 0 ? cd(1.0) : cd(0.0);
        const auto& layer = j > 0 ? pos : neg;
        double w = 1.0;
        for (int m = 0; m < orders; ++m) {
            p += w * layer[static_cast<std::size_t>(m)](a, b);
            w /= std::sqrt(aj);
        }
        return p * std::polar(1.0, j * x + std::sqrt(aj) * beta(a, b).real());
    }
};

}  // namespace

DescentError::DescentError(const std::string& step, double avg)
    : std::runtime_error("descent step '" + step + "' needs a zero space average, found " + std::to_string(avg)),
      average(avg)
{
}

NeumannDivergence::NeumannDivergence(double d)
    : std::runtime_error("normal matrix is too far from the identity for the Neumann series: defect " +
                         std::to_string(d)),
      defect(d)
{
}

std::pair<Field2D, Field2D> SignedField::split_sign_imag() const
{
    return {(pos + neg) * 0.5, (pos - neg) * (-0.5 * I)};
}

std::pair<Field2D, Field2D> SignedField::split_sign_real() const
{
    return {(pos - neg) * 0.5, (pos + neg) * (-0.5 * I)};
}

PhaseData build_phase(const Field2D& a14, double lambda, double omega)
{
    if (parity_distance(a14, ParityClass::OddT_OddX) > 1e-10 * std::max(1.0, a14.max_abs()))
        throw std::invalid_argument("build_phase: a14 must be odd in t and odd in x");
    PhaseData ph;
    ph.beta1 = Dxinv(a14) * (-2.0 / (3.0 * lambda));
    ph.rho = mean_x(mul(a14, a14)) * (-0.5 / lambda);
    ph.lambda1 = ph.rho(0, 0).real();
    Field2D centred = ph.rho;
    centred(0, 0) = 0.0;
    ph.beta0 = Dtinv(centred) * (-1.0 / omega);
    ph.beta = ph.beta0 + ph.beta1;
    return ph;
}

AmplitudeData build_amplitude(const CoefficientChain& c, const PhaseData& ph, double tol)
{
    const double lm = c.lambda, om = c.omega;
    AmplitudeData am;
    std::array<SignCoefficients, 2> vs{coefficients_for_sign(c, ph, 1), coefficients_for_sign(c, ph, -1)};
    std::array<Field2D, 2> g1x, raw_r1;
    double lm1[2] = {0.0, 0.0};

    // Orders 1/2 and 0.
    for (int k = 0; k < 2; ++k) {
        const int s = k == 0 ? 1 : -1;
        const SignCoefficients& v = vs[static_cast<std::size_t>(k)];
        const Field2D t1 = v.v10 - constant_like(v.v10, I * ph.lambda1);
        require_zero_mean(t1, "order 1/2", tol);
        const Field2D f1 = Dxinv(t1) * (-2.0 * s / (3.0 * lm));
        const Field2D q = Dt(f1) * om + mul(v.v01, Dx(f1)) + v.v00;
        const Field2D qm = mean_x(q);
        if (std::abs(qm(0, 0)) > tol) throw DescentError("order 0 time mean", std::abs(qm(0, 0)));
        const Field2D f0 = Dtinv(qm) * (-1.0 / om);
        const Field2D f = f0 + f1;
        const Field2D b0 = Dt(f) * om + mul(v.v01, Dx(f)) + v.v00;
        require_zero_mean(b0, "order 0", tol);
        const Field2D g11 = Dxinv(b0) * (-2.0 * s / (3.0 * lm));
        XOperator m1 = v.m1;
        m1.shift = 0.0;
        const Field2D r = mul(b0, g11) + Dt(g11) * om + mul(v.v01, Dx(g11)) +
                          m1.twisted(f, constant_like(f, 1.0));
        am.f.at(s) = f;
        am.b0.at(s) = b0;
        g1x[static_cast<std::size_t>(k)] = g11;
        raw_r1[static_cast<std::size_t>(k)] = r;
        lm1[k] = r(0, 0).imag();
    }
    am.lambda_m1 = 0.5 * (lm1[0] + lm1[1]);
    am.sign_mismatch = lm1[0] - lm1[1];

    // Orders -1/2 and -1.
    for (int k = 0; k < 2; ++k) {
        const int s = k == 0 ? 1 : -1;
        SignCoefficients v = vs[static_cast<std::size_t>(k)];
        v.m1.shift = am.lambda_m1;
        const Field2D& f = am.f.at(s);
        const Field2D& b0 = am.b0.at(s);
        const Field2D r1 = raw_r1[static_cast<std::size_t>(k)] - constant_like(f, I * am.lambda_m1);
        const Field2D r1m = mean_x(r1);
        if (std::abs(r1m(0, 0)) > tol) throw DescentError("order -1/2 time mean", std::abs(r1m(0, 0)));
        const Field2D g10 = Dtinv(r1m) * (-1.0 / om);
        const Field2D g1 = g10 + g1x[static_cast<std::size_t>(k)];
        const Field2D bm1 = mul(b0, g10) + Dt(g10) * om + r1;
        require_zero_mean(bm1, "order -1/2", tol);
        const Field2D g21 = Dxinv(bm1) * (-2.0 * s / (3.0 * lm));

        const Field2D r2 = mul(b0, g21) + Dt(g21) * om + mul(v.v01, Dx(g21)) + v.m1.twisted(f, g1) +
                           v.m2.twisted(f, constant_like(f, 1.0));
        const Field2D r2m = mean_x(r2);
        if (std::abs(r2m(0, 0)) > tol) throw DescentError("order -1 time mean", std::abs(r2m(0, 0)));
        const Field2D g20 = Dtinv(r2m) * (-1.0 / om);
        const Field2D g2 = g20 + g21;
        const Field2D bm2 = mul(b0, g20) + Dt(g20) * om + r2;
        require_zero_mean(bm2, "order -1", tol);
        const Field2D g3 = Dxinv(bm2) * (-2.0 * s / (3.0 * lm));

        am.r1.at(s) = r1;
        am.g[0].at(s) = g1;
        am.g[1].at(s) = g2;
        am.g[2].at(s) = g3;
        const Field2D ef = collocate(f, [](cd z) { return std::exp(z); });
        am.layers[0].at(s) = ef;
        am.layers[1].at(s) = mul(ef, g1);
        am.layers[2].at(s) = mul(ef, g2);
        am.layers[3].at(s) = mul(ef, g3);
    }
    return am;
}

FioOp FioOp::identity(int L, int J)
{
    FioOp A;
    A.beta = Field2D(L, J);
    A.orders = 0;
    return A;
}

cd FioOp::amplitude(double t, double x, int j) const
{
    if (j == 0 || orders == 0) return 1.0;
    const double aj = std::abs(static_cast<double>(j));
    cd p = 0.0;
    double w = 1.0;
    for (int m = 0; m < orders; ++m) {
        p += w * evaluate(layers[static_cast<std::size_t>(m)].at(j > 0 ? 1 : -1), t, x);
        w /= std::sqrt(aj);
    }
    return p;
}

FioOp make_fio(const PhaseData& ph, const AmplitudeData& am)
{
    FioOp A;
    A.beta = ph.beta;
    A.layers = am.layers;
    A.orders = 4;
    return A;
}

Field2D fio_apply(const FioOp& A, const Field2D& h, int L, int J)
{
    const int Lg = std::max({L, A.L(), h.L()}), Jg = std::max({J, A.J(), h.J()});
    const int nt = fft_size(4 * (2 * Lg + 1)), nx = fft_size(4 * (2 * Jg + 1));
    const FioGrid fg(A, nt, nx);
    const auto rows = space_rows(h, nt);
    Grid out(nt, nx);
    for (int j = -h.J(); j <= h.J(); ++j) {
        bool any = false;
        for (int l = -h.L(); l <= h.L() && !any; ++l) any = h(l, j) != cd(0.0);
        if (!any) continue;
        for (int a = 0; a < nt; ++a) {
            const cd hj = rows[static_cast<std::size_t>(a)][static_cast<std::size_t>(j + h.J())];
            for (int b = 0; b < nx; ++b) out(a, b) += hj * fg.column(a, b, j);
        }
    }
    return from_grid(out, L, J, false);
}

Field2D fio_invert(const FioOp& A, const Field2D& h, FioInverseReport* report, double tol)
{
    const int L = h.L(), J = h.J();
    const int Lg = std::max(L, A.L()), Jg = std::max(J, A.J());
    const int nt = fft_size(4 * (2 * Lg + 1)), nx = fft_size(4 * (2 * Jg + 1));
    const FioGrid fg(A, nt, nx);
    const Grid hv = to_grid(h, nt, nx);
    const int n = 2 * J + 1;
    Eigen::MatrixXcd coef(nt, n);
    Eigen::MatrixXcd W(nx, n);
    for (int a = 0; a < nt; ++a) {
        Eigen::VectorXcd rhs(nx);
        for (int b = 0; b < nx; ++b) {
            rhs(b) = hv(a, b);
            for (int j = -J; j <= J; ++j) W(b, j + J) = fg.column(a, b, j);
        }
        const Eigen::MatrixXcd M = W.adjoint() * W;
        coef.row(a) = M.ldlt().solve(W.adjoint() * rhs).transpose();
    }
    Field2D out(L, J, false);
    for (int l = -L; l <= L; ++l)
        for (int a = 0; a < nt; ++a) {
            const cd e = std::polar(1.0 / nt, -l * 2.0 * kPi * a / nt);
            for (int j = -J; j <= J; ++j) out(l, j) += coef(a, j + J) * e;
        }
    if (report) {
        const double hn = std::max(sobolev_norm(h, 0), 1e-300);
        report->certificate = sobolev_norm(fio_apply(A, out, L, J) - h, 0) / hn;
        report->certified = report->certificate < tol;
    }
    return out;
}

Eigen::MatrixXcd fio_columns(const Field2D& beta, int K, int n, const Field2D* b)
{
    Eigen::MatrixXcd W(n, 2 * K + 1);
    std::vector<double> bv(static_cast<std::size_t>(n)), av(static_cast<std::size_t>(n), 1.0);
    for (int q = 0; q < n; ++q) {
        const double x = 2.0 * kPi * q / n;
        bv[static_cast<std::size_t>(q)] = evaluate(beta, 0.0, x).real();
        if (b) av[static_cast<std::size_t>(q)] += evaluate(*b, 0.0, x).real();
    }
    for (int k = -K; k <= K; ++k) {
        const double f = std::sqrt(std::abs(static_cast<double>(k)));
        for (int q = 0; q < n; ++q) {
            const double x = 2.0 * kPi * q / n;
            W(q, k + K) = av[static_cast<std::size_t>(q)] * std::polar(1.0, k * x + f * bv[static_cast<std::size_t>(q)]);
        }
    }
    return W;
}

NormalMatrixReport fio_normal_matrix(const Field2D& beta, int K, const Field2D* b)
{
    const int n = fft_size(std::max(8 * (2 * K + 1), 16 * (2 * beta.J() + 1)));
    const Eigen::MatrixXcd W = fio_columns(beta, K, n, b);
    NormalMatrixReport rep;
    // (w_j, w_k) = int w_j conj(w_k): row k, column j.
    rep.M = (W.adjoint() * W) * (2.0 * kPi / n);
    const int d = 2 * K + 1;
    const Eigen::MatrixXcd Id = Eigen::MatrixXcd::Identity(d, d);
    const Eigen::MatrixXcd R = rep.M / (2.0 * kPi) - Id;
    rep.defect = R.colwise().norm().maxCoeff();
    Eigen::MatrixXcd term = Id, sum = Id;
    double last = 1.0;
    for (int k = 1; k <= 400; ++k) {
        term = -R * term;
        sum += term;
        const double tn = term.norm();
        rep.neumann_terms = k;
        if (tn < 1e-15) break;
        if (k > 5 && tn > last) throw NeumannDivergence(rep.defect);
        last = tn;
        if (k == 400) throw NeumannDivergence(rep.defect);
    }
    rep.M_inv = sum;
    rep.inverse_defect = (sum - Id).colwise().norm().maxCoeff();
    return rep;
}

CompositionProbe fio_compose_Dr(const Field2D& beta, double r, double m, int N, const std::vector<int>& modes,
                                bool with_hilbert, double s0)
{
    if (N < 2.0 * (m + r + 1.0) + s0)
        throw std::invalid_argument("fio_compose_Dr: expansion length below the admissible threshold");
    CompositionProbe p;
    p.modes = modes;
    p.norms.assign(static_cast<std::size_t>(N), {});
    double bmax = 0.0;
    for (const cd& v : beta.data()) bmax += std::abs(v);
    for (int k : modes) {
        const double f = std::sqrt(std::abs(static_cast<double>(k)));
        // Band of a e^{i f beta}: Bessel decay past f * sum |beta_j| * J.
        const int band = static_cast<int>(f * bmax * std::max(1, beta.J())) + 8 * std::max(1, beta.J()) + 16;
        const int M = std::min(band, 4096);
        const int n = fft_size(4 * (2 * M + 1));
        Grid g(1, n);
        for (int q = 0; q < n; ++q)
            g(0, q) = std::polar(1.0, f * evaluate(beta, 0.0, 2.0 * kPi * q / n).real());
        const Field2D z = from_grid(g, 0, M, false);
        // B_alpha e_k, up to the unit factor e^{ikx}(-i sgn k)^alpha.
        double binom = 1.0;
        Field2D dz = z;
        for (int al = 0; al < N; ++al) {
            if (al > 0) {
                binom *= (r - al + 1) / al;
                dz = Dx(dz);
            }
            p.norms[static_cast<std::size_t>(al)].push_back(std::abs(binom) *
                                                            std::pow(std::abs(double(k)), r - al) *
                                                            sobolev_norm(dz, 0));
        }
        // Remainder on the exact spectrum.
        const double sk = k > 0 ? 1.0 : -1.0, ak = std::abs(double(k));
        double acc = 0.0;
        for (int q = -M; q <= M; ++q) {
            const cd zq = z(0, q);
            if (zq == cd(0.0)) continue;
            const int kq = k + q;
            cd exact = kq == 0 ? cd(0.0) : cd(std::pow(std::abs(double(kq)), r));
            if (with_hilbert) exact *= kq == 0 ? cd(0.0) : cd(0.0, kq > 0 ? -1.0 : 1.0);
            cd taylor = 0.0;
            double bc = 1.0;
            for (int al = 0; al < N; ++al) {
                if (al > 0) bc *= (r - al + 1) / al;
                taylor += bc * std::pow(ak, r - al) * std::pow(sk * q, al);
            }
            if (with_hilbert) taylor *= cd(0.0, -sk);
            acc += std::norm(zq * (exact - taylor));
        }
        p.remainder.push_back(std::sqrt(acc) * std::pow(ak, m));
    }
    std::vector<double> ks;
    for (int k : modes) ks.push_back(std::abs(double(k)));
    for (int al = 0; al < N; ++al) p.orders.push_back(fit_loglog(ks, p.norms[static_cast<std::size_t>(al)]).slope);
    return p;
}

double DiagonalData::mu(int j) const
{
    if (j == 0) return 0.0;
    const double a = std::abs(static_cast<double>(j));
    return lambda3 * std::sqrt(a + kappa * a * a * a) + lambda1 * std::sqrt(a) + lambda_m1 / std::sqrt(a);
}

std::vector<double> DiagonalData::table(int J) const
{
    std::vector<double> t(static_cast<std::size_t>(J + 1));
    for (int j = 0; j <= J; ++j) t[static_cast<std::size_t>(j)] = mu(j);
    return t;
}

Field2D DiagonalData::apply(const Field2D& h) const
{
    Field2D r(h.L(), h.J(), false);
    for (int l = -h.L(); l <= h.L(); ++l)
        for (int j = -h.J(); j <= h.J(); ++j) r(l, j) = I * (omega * l + mu(j)) * h(l, j);
    return r;
}

Field2D DiagonalData::apply_inv(const Field2D& h, double floor) const
{
    Field2D r(h.L(), h.J(), false);
    for (int l = -h.L(); l <= h.L(); ++l)
        for (int j = -h.J(); j <= h.J(); ++j) {
            const double d = omega * l + mu(j);
            if (std::abs(d) <= floor || d == 0.0) continue;
            r(l, j) = h(l, j) / (I * d);
        }
    return r;
}

DiagonalData assemble_diagonal(double lambda3, double lambda1, double lambda_m1, double kappa, double omega)
{
    DiagonalData d;
    d.lambda3 = lambda3;
    d.lambda1 = lambda1;
    d.lambda_m1 = lambda_m1;
    d.kappa = kappa;
    d.omega = omega;
    return d;
}

DescentResult build_descent(const StatePair& u, double omega, double kappa, const DNConfig& cfg)
{
    DescentResult d;
    d.reduction = build_reduction(u, omega, kappa, cfg);
    const CoefficientChain& c = d.reduction.chain();
    d.phase = build_phase(c[14], c.lambda, omega);
    d.amplitude = build_amplitude(c, d.phase);
    d.A = make_fio(d.phase, d.amplitude);
    d.diag = assemble_diagonal(std::sqrt(c.mu), d.phase.lambda1, d.amplitude.lambda_m1, kappa, omega);
    return d;
}

double lambda1_from_state(const StatePair& u, double omega, double kappa, const DNConfig& cfg)
{
    const LinearizedOp op = build_linearized(u, omega, kappa, cfg);
    const ChangeOfVariables cv = compute_changes(u, omega, kappa);
    const Field2D one = Field2D::constant(u.eta.L(), u.eta.J(), 1.0);
    const Field2D jb = one + Dx(cv.beta);
    const Field2D w = Dt(cv.beta) * omega + mul(op.V, jb);
    const Field2D ad = one + Dt(cv.alpha);
    const Field2D integrand = collocate({&jb, &ad, &w}, [](const cd* v) { return v[0] / v[1] * v[2] * v[2]; },
                                        u.eta.L(), u.eta.J(), true);
    // (2 pi)^2 times the (0,0) coefficient is the double integral.
    const double lam3 = std::sqrt(cv.mu);
    return -integrand(0, 0).real() * 4.0 * kPi * kPi / (8.0 * kPi * kPi * std::sqrt(kappa) * lam3);
}

DescentProbe descent_remainder_probe(const DescentResult& d, const std::vector<int>& ls, const std::vector<int>& js,
                                     int L, int J)
{
    DescentProbe p;
    const CoefficientChain& c = d.reduction.chain();
    for (int l : ls)
        for (int j : js) {
            double worst = 0.0;
            for (int s : {1, -1}) {
                const Field2D e = Field2D::exponential(L, J, l, s * j, std::pow(j, 1.5));
                const Field2D Ae = fio_apply(d.A, e, L, J);
                const Field2D lhs = apply_L5_complex(c, d.reduction.top, Ae);
                const Field2D rhs = fio_apply(d.A, d.diag.apply(e), L, J);
                worst = std::max(worst, sobolev_norm(lhs.resized(L, J) - rhs, 0));
            }
            p.l.push_back(l);
            p.j.push_back(j);
            p.residual.push_back(worst);
        }
    return p;
}

}  // namespace sww
