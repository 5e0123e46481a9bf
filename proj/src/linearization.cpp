#include "sww/linearization.hpp"

#include "sww/bifurcation.hpp"

#include <cmath>
#include <sstream>

namespace sww {

namespace {
Field2D Dt(const Field2D& f) { return apply(mult::dt(), f); }
Field2D Dx(const Field2D& f) { return apply(mult::dx(), f); }
}  // namespace

LinearizedOp build_linearized(const StatePair& u, double omega, double kappa, const DNConfig& cfg)
{
    LinearizedOp op;
    op.u = u;
    op.omega = omega;
    op.kappa = kappa;
    op.dn = cfg;
    const BVData bv = compute_BV(u.eta, u.psi, cfg);
    op.B = bv.B;
    op.V = bv.V;
    op.a = Field2D::constant(u.eta.L(), u.eta.J(), 1.0) + Dt(op.B) * omega + multiply(op.V, Dx(op.B));
    const Field2D ex = Dx(u.eta);
    op.c = collocate(
        {&ex}, [](const cd* v) { return std::pow(1.0 + v[0] * v[0], -1.5); }, u.eta.L(), u.eta.J(),
        u.eta.is_real());
    return op;
}

StatePair LinearizedOp::apply(const StatePair& h) const
{
    const Field2D Beta = multiply(B, h.eta);
    const Field2D Gd = G(h.psi - Beta);
    StatePair r;
    r.eta = Dt(h.eta) * omega + Dx(multiply(V, h.eta)) - Gd;
    const Field2D Vx = Dx(V);
    r.psi = h.eta + multiply(multiply(B, Vx), h.eta) - Dx(multiply(c, Dx(h.eta))) * kappa + Dt(h.psi) * omega +
            multiply(V, Dx(h.psi)) - multiply(B, Gd);
    return r;
}

StatePair LinearizedOp::Z(const StatePair& h) const { return {h.eta, h.psi + multiply(B, h.eta)}; }

StatePair LinearizedOp::Z_inv(const StatePair& h) const { return {h.eta, h.psi - multiply(B, h.eta)}; }

StatePair LinearizedOp::L0(const StatePair& h) const
{
    StatePair r;
    r.eta = Dt(h.eta) * omega + Dx(multiply(V, h.eta)) - G(h.psi);
    r.psi = multiply(a, h.eta) - Dx(multiply(c, Dx(h.eta))) * kappa + Dt(h.psi) * omega + multiply(V, Dx(h.psi));
    return r;
}

StatePair linearized_apply(const StatePair& u, double omega, double kappa, const StatePair& h,
                           const DNConfig& cfg)
{
    return build_linearized(u, omega, kappa, cfg).apply(h);
}

GoodUnknownFactor good_unknown_factor(const StatePair& u, double omega, double kappa, const DNConfig& cfg)
{
    auto op = std::make_shared<LinearizedOp>(build_linearized(u, omega, kappa, cfg));
    GoodUnknownFactor f;
    f.Z = [op](const StatePair& h) { return op->Z(h); };
    f.Z_inv = [op](const StatePair& h) { return op->Z_inv(h); };
    f.L0 = [op](const StatePair& h) { return op->L0(h); };
    f.a = op->a;
    return f;
}

StatePair project_W(const StatePair& h, double wb)
{
    StatePair p{parity_project(h.eta, ParityClass::X), parity_project(h.psi, ParityClass::Y)};
    if (!p.eta.in_range(1, 1) || !p.psi.in_range(1, 1)) return p;
    // (a, b) = coefficients of cos t cos x and sin t cos x; v0 ~ (1, -wb), w0 ~ (wb, 1).
    const double a = 4.0 * p.eta(1, 1).real();
    const double b = (cd(0.0, 4.0) * p.psi(1, 1)).real();
    const double lam = (a - wb * b) / (1.0 + wb * wb);
    p.eta -= Field2D::trig(p.eta.L(), p.eta.J(), true, 1, true, 1, lam);
    p.psi -= Field2D::trig(p.psi.L(), p.psi.J(), false, 1, true, 1, -wb * lam);
    return p;
}

StatePair project_R(const StatePair& f, double wb)
{
    StatePair p{parity_project(f.eta, ParityClass::Y), parity_project(f.psi, ParityClass::X)};
    if (!p.eta.in_range(1, 1) || !p.psi.in_range(1, 1)) return p;
    const auto [pp, qq] = mode11_coordinates(p);
    const double lz = project_mode11(pp, qq, wb).second;
    p.eta -= Field2D::trig(p.eta.L(), p.eta.J(), false, 1, true, 1, lz);
    p.psi -= Field2D::trig(p.psi.L(), p.psi.J(), true, 1, true, 1, wb * lz);
    return p;
}

StatePair low_space(const StatePair& h)
{
    return {space_split(h.eta).first, space_split(h.psi).first};
}

StatePair high_space(const StatePair& h)
{
    return {space_split(h.eta).second, space_split(h.psi).second};
}

NeumannError::NeumannError(double c, int it)
    : std::runtime_error("neumann series for the low-frequency block does not contract: factor " +
                         std::to_string(c) + " after " + std::to_string(it) + " iterations"),
      contraction(c), iterations(it)
{
}

StatePair BlockDecomposition::L01_01(const StatePair& h) const
{
    return low_space(project_R(op.apply(low_space(project_W(h, omega_bar))), omega_bar));
}

StatePair BlockDecomposition::L01_2(const StatePair& h) const
{
    return low_space(project_R(op.apply(high_space(project_W(h, omega_bar))), omega_bar));
}

StatePair BlockDecomposition::L2_01(const StatePair& h) const
{
    return high_space(project_R(op.apply(low_space(project_W(h, omega_bar))), omega_bar));
}

StatePair BlockDecomposition::L2_2(const StatePair& h) const
{
    return high_space(project_R(op.apply(high_space(project_W(h, omega_bar))), omega_bar));
}

StatePair BlockDecomposition::invert_linear01(const StatePair& f0) const
{
    const StatePair f = low_space(project_R(f0, omega_bar));
    const int L = f.eta.L(), J = f.eta.J();
    const double om = op.omega, wb = omega_bar, k = op.kappa;
    StatePair h = StatePair::zeros(L, J);
    for (int l = -L; l <= L; ++l)
        for (int j = -1; j <= 1; ++j) {
            if (!f.eta.in_range(l, j)) continue;
            const cd fh = f.eta(l, j), gh = f.psi(l, j);
            if (l == 0 && j == 0) {
                h.eta(0, 0) = gh;
                continue;
            }
            if (std::abs(l) == 1 && j != 0) continue;
            // i om l eta - |j| psi = f, (1 + k j^2) eta + i om l psi = g.
            const double aj = std::abs(j), cap = 1.0 + k * aj * aj;
            const cd il(0.0, om * l);
            const cd det = il * il + aj * cap;
            h.eta(l, j) = (il * fh + aj * gh) / det;
            h.psi(l, j) = (il * gh - cap * fh) / det;
        }
    if (L >= 1 && J >= 1) {
        // The (1,1) block is one-dimensional: Pi_R L_omega w0 = alpha r0.
        const auto [p, q] = mode11_coordinates(f);
        const double lr = project_mode11(p, q, wb).first;
        const double alpha = (om + wb) * (1.0 + wb * wb) / (2.0 * wb);
        const double s = lr / alpha;
        h.eta += Field2D::trig(L, J, true, 1, true, 1, wb * s);
        h.psi += Field2D::trig(L, J, false, 1, true, 1, s);
    }
    return h;
}

StatePair BlockDecomposition::invert_L0101(const StatePair& f0, NeumannReport* report, double tol,
                                           int max_iter) const
{
    const StatePair f = low_space(project_R(f0, omega_bar));
    StatePair h = invert_linear01(f);
    NeumannReport rep;
    double prev = norm(h, 0.0);
    const double scale = std::max(prev, 1e-300);
    for (int it = 1; it <= max_iter; ++it) {
        const StatePair dh = invert_linear01(f - L01_01(h));
        const double n = norm(dh, 0.0);
        h += dh;
        rep.iterations = it;
        rep.final_correction = n;
        if (prev > 0.0) rep.contraction = std::max(rep.contraction, n / prev);
        if (n <= tol * scale) break;
        if (rep.contraction > 0.9 || it == max_iter) throw NeumannError(rep.contraction, it);
        prev = n;
    }
    if (report) *report = rep;
    return h;
}

StatePair BlockDecomposition::remainder(const StatePair& h) const
{
    const StatePair g = L01_2(h);
    if (g.max_abs() == 0.0) return StatePair::zeros(h.eta.L(), h.eta.J());
    return L2_01(invert_L0101(g)) * -1.0;
}

BlockDecomposition restrict_blocks(const StatePair& u, double omega, double kappa, const DNConfig& cfg)
{
    BlockDecomposition b;
    b.op = build_linearized(u, omega, kappa, cfg);
    b.omega_bar = std::sqrt(1.0 + kappa);
    return b;
}

namespace {
double cos_weight(int l, int j) { return (l == 0 ? 1.0 : 0.5) * (j == 0 ? 1.0 : 0.5); }
}  // namespace

ParityBasis::ParityBasis(Kind kind, int N) : kind_(kind), N_(N)
{
    // Component carrying sin(lt): psi for X x Y, the first entry for Y x X.
    const int sin_comp = kind == Kind::XY ? 1 : 0;
    for (int comp = 0; comp < 2; ++comp)
        for (int l = 0; l < N; ++l)
            for (int j = 0; l + j < N; ++j) {
                if (comp == sin_comp && l == 0) continue;
                items_.push_back({comp, l, j});
            }
}

StatePair ParityBasis::vector(int k, int L, int J) const
{
    const Item& it = item(k);
    const bool is_cos = (kind_ == Kind::XY) == (it.comp == 0);
    StatePair v = StatePair::zeros(L, J);
    (it.comp == 0 ? v.eta : v.psi) = Field2D::trig(L, J, is_cos, it.l, true, it.j);
    return v;
}

StatePair ParityBasis::synthesize(const std::vector<double>& x, int L, int J) const
{
    StatePair v = StatePair::zeros(L, J);
    for (int k = 0; k < size(); ++k) {
        const Item& it = item(k);
        if (x[k] == 0.0 || it.l > L || it.j > J) continue;
        const bool is_cos = (kind_ == Kind::XY) == (it.comp == 0);
        Field2D& f = it.comp == 0 ? v.eta : v.psi;
        const double w = cos_weight(it.l, it.j);
        for (int sl : {1, -1})
            for (int sj : {1, -1}) {
                if ((it.l == 0 && sl < 0) || (it.j == 0 && sj < 0)) continue;
                // sin lt = (e^{ilt} - e^{-ilt}) / 2i
                const cd c = is_cos ? cd(w * x[k]) : cd(0.0, -sl * w * x[k]);
                f(sl * it.l, sj * it.j) += c;
            }
    }
    return v;
}

std::vector<double> ParityBasis::coordinates(const StatePair& u) const
{
    std::vector<double> x(static_cast<std::size_t>(size()));
    for (int k = 0; k < size(); ++k) {
        const Item& it = item(k);
        const bool is_cos = (kind_ == Kind::XY) == (it.comp == 0);
        const cd c = (it.comp == 0 ? u.eta : u.psi).at(it.l, it.j);
        x[k] = (is_cos ? c.real() : (cd(0.0, 1.0) * c).real()) / cos_weight(it.l, it.j);
    }
    return x;
}

std::vector<double> densify(const LinearMap& map, const ParityBasis& in, const ParityBasis& out, int L, int J)
{
    const int rows = out.size(), cols = in.size();
    std::vector<double> m(static_cast<std::size_t>(rows) * cols);
    for (int k = 0; k < cols; ++k) {
        const std::vector<double> col = out.coordinates(map(in.vector(k, L, J)));
        std::copy(col.begin(), col.end(), m.begin() + static_cast<std::ptrdiff_t>(k) * rows);
    }
    return m;
}

std::string matrix_market(const std::vector<double>& m, int rows, int cols, double threshold)
{
    std::ostringstream os;
    os.precision(17);
    std::size_t nnz = 0;
    for (double v : m) nnz += std::abs(v) > threshold;
    os << "%%MatrixMarket matrix coordinate real general\n" << rows << ' ' << cols << ' ' << nnz << '\n';
    for (int c = 0; c < cols; ++c)
        for (int r = 0; r < rows; ++r) {
            const double v = m[static_cast<std::size_t>(c) * rows + r];
            if (std::abs(v) > threshold) os << r + 1 << ' ' << c + 1 << ' ' << v << '\n';
        }
    return os.str();
}

}  // namespace sww
