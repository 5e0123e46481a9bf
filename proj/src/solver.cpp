#include "sww/solver.hpp"

#include "sww/numerics.hpp"
#include "sww/residual.hpp"

#include <Eigen/Dense>
#include <unsupported/Eigen/IterativeSolvers>
#include <boost/math/interpolators/barycentric_rational.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <random>
#include <thread>

namespace sww::detail {

// Matrix-free operator for the Krylov solver; the preconditioner travels with it.
class KrylovOperator;

}  // namespace sww::detail

namespace Eigen::internal {
template <>
struct traits<sww::detail::KrylovOperator> : public Eigen::internal::traits<Eigen::SparseMatrix<double>> {};
}  // namespace Eigen::internal

namespace sww::detail {

using Vec = Eigen::VectorXd;
using VecMap = std::function<Vec(const Vec&)>;

class KrylovOperator : public Eigen::EigenBase<KrylovOperator> {
public:
    using Scalar = double;
    using RealScalar = double;
    using StorageIndex = int;
    enum { ColsAtCompileTime = Eigen::Dynamic, MaxColsAtCompileTime = Eigen::Dynamic, IsRowMajor = false };

    KrylovOperator(int n, VecMap apply, VecMap precondition)
        : n_(n), apply_(std::move(apply)), precondition_(std::move(precondition))
    {
    }
    Eigen::Index rows() const { return n_; }
    Eigen::Index cols() const { return n_; }

    template <typename Rhs>
    Eigen::Product<KrylovOperator, Rhs, Eigen::AliasFreeProduct> operator*(const Eigen::MatrixBase<Rhs>& x) const
    {
        return Eigen::Product<KrylovOperator, Rhs, Eigen::AliasFreeProduct>(*this, x.derived());
    }

    Vec apply(const Vec& x) const { return apply_(x); }
    Vec precondition(const Vec& x) const { return precondition_(x); }

private:
    int n_;
    VecMap apply_;
    VecMap precondition_;
};

class KrylovPreconditioner {
public:
    KrylovPreconditioner() = default;
    template <typename M>
    KrylovPreconditioner& analyzePattern(const M&)
    {
        return *this;
    }
    template <typename M>
    KrylovPreconditioner& factorize(const M& m)
    {
        op_ = &m;
        return *this;
    }
    template <typename M>
    KrylovPreconditioner& compute(const M& m)
    {
        op_ = &m;
        return *this;
    }
    template <typename Rhs>
    Vec solve(const Rhs& b) const
    {
        return op_->precondition(b);
    }
    Eigen::ComputationInfo info() { return Eigen::Success; }

private:
    const KrylovOperator* op_ = nullptr;
};

}  // namespace sww::detail

namespace Eigen::internal {
template <typename Rhs>
struct generic_product_impl<sww::detail::KrylovOperator, Rhs, SparseShape, DenseShape, GemvProduct>
    : generic_product_impl_base<sww::detail::KrylovOperator, Rhs,
                                generic_product_impl<sww::detail::KrylovOperator, Rhs>> {
    using Scalar = typename Product<sww::detail::KrylovOperator, Rhs>::Scalar;
    template <typename Dest>
    static void scaleAndAddTo(Dest& dst, const sww::detail::KrylovOperator& lhs, const Rhs& rhs, const Scalar& alpha)
    {
        dst.noalias() += alpha * lhs.apply(rhs);
    }
};
}  // namespace Eigen::internal

namespace sww {

namespace {

using detail::Vec;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

Field2D quotient(const Field2D& a, const Field2D& b)
{
    return collocate({&a, &b}, [](const cd* v) { return v[0] / v[1]; }, std::max(a.L(), b.L()),
                     std::max(a.J(), b.J()), a.is_real() && b.is_real());
}

StatePair map_both(const StatePair& h, const std::function<Field2D(const Field2D&)>& f) { return {f(h.eta), f(h.psi)}; }

Vec to_vec(const std::vector<double>& x) { return Eigen::Map<const Vec>(x.data(), static_cast<Eigen::Index>(x.size())); }
std::vector<double> to_std(const Vec& x) { return {x.data(), x.data() + x.size()}; }

// Divisors of D restricted to |j| >= 2; everything else is dropped.
Field2D divide_high(const DiagonalData& D, const Field2D& h)
{
    Field2D r(h.L(), h.J(), false);
    for (int l = -h.L(); l <= h.L(); ++l)
        for (int j = -h.J(); j <= h.J(); ++j) {
            if (std::abs(j) < 2) continue;
            const double d = D.omega * l + D.mu(j);
            if (d != 0.0) r(l, j) = h(l, j) / cd(0.0, d);
        }
    return r;
}

// Galerkin system with the kernel bordering: in the (1,1) block of X x Y the two basis
// vectors are replaced by U (truncated to the box) and w0.
struct Bordered {
    ParityBasis in, out;
    int kc = -1, ks = -1;
    StatePair UN, w0;
    int L, J;
    double w0p = 0.0, w0q = 0.0;

    Bordered(const InversionSetup& s)
        : in(ParityBasis::Kind::XY, s.N), out(ParityBasis::Kind::YX, s.N), L(s.L), J(s.J)
    {
        for (int k = 0; k < in.size(); ++k) {
            const auto& it = in.item(k);
            if (it.l == 1 && it.j == 1) (it.comp == 0 ? kc : ks) = k;
        }
        UN = in.synthesize(in.coordinates(s.U.resized(L, J)), L, J);
        w0 = s.w0.resized(L, J);
        if (bordered()) {
            const auto c = in.coordinates(w0);
            w0p = c[static_cast<std::size_t>(kc)];
            w0q = c[static_cast<std::size_t>(ks)];
        }
    }
    bool bordered() const { return kc >= 0 && ks >= 0; }
    int size() const { return in.size(); }

    StatePair column(int k) const
    {
        if (bordered() && k == kc) return UN;
        if (bordered() && k == ks) return w0;
        return in.vector(k, L, J);
    }
    StatePair synthesize(const Vec& x) const
    {
        std::vector<double> y = to_std(x);
        StatePair h = StatePair::zeros(L, J);
        if (bordered()) {
            h += UN * y[static_cast<std::size_t>(kc)] + w0 * y[static_cast<std::size_t>(ks)];
            y[static_cast<std::size_t>(kc)] = y[static_cast<std::size_t>(ks)] = 0.0;
        }
        return h + in.synthesize(y, L, J);
    }
    // Coordinates of a U + ht with ht in W.
    Vec coordinates(double a, const StatePair& ht) const
    {
        std::vector<double> y = in.coordinates(ht);
        if (bordered()) {
            const double p = y[static_cast<std::size_t>(kc)], q = y[static_cast<std::size_t>(ks)];
            y[static_cast<std::size_t>(ks)] = (p * w0p + q * w0q) / (w0p * w0p + w0q * w0q);
            y[static_cast<std::size_t>(kc)] = a;
        }
        return to_vec(y);
    }
    Vec rhs(const StatePair& f) const { return to_vec(out.coordinates(f)); }
};

// Approximate inverse of F'(u) through the conjugation chain and the descent operator.
struct ConjugatedInverse {
    BlockDecomposition blocks;
    DescentResult descent;
    double kappa;

    ConjugatedInverse(const StatePair& u, const InversionSetup& s)
        : blocks(restrict_blocks(u, s.omega, s.kappa, s.dn)),
          descent(build_descent(u, s.omega, s.kappa, s.dn)),
          kappa(s.kappa)
    {
    }

    StatePair M_inv(const StatePair& h) const
    {
        const CoefficientChain& c = descent.reduction.chain();
        const Field2D zero(h.psi.L(), h.psi.J());
        Field2D x = h.psi;
        for (int k = 0; k < 8; ++k) x = h.psi - (apply_M(c, {zero, x}).psi - x);
        return {h.eta - apply_M(c, {zero, x}).eta, x};
    }

    // High-mode block: Z B A Q S M [A D^{-1} A^{-1}] M^{-1} S^{-1} P^{-1} A^{-1} B^{-1} Z^{-1}.
    StatePair high(const StatePair& g) const
    {
        const ReductionChain& r = descent.reduction;
        const ChangeOfVariables& cv = r.stage.cv;
        const CoefficientChain& c = r.chain();
        const LinearizedOp& op = blocks.op;
        StatePair y = op.Z_inv(g);
        y = map_both(y, [&](const Field2D& f) { return cv.B_inv(f); });
        y = map_both(y, [&](const Field2D& f) { return cv.A_inv(f); });
        y = {quotient(y.eta, c[7]), quotient(y.psi, c[11]) * c.mu};
        y = r.top.S_inv(y);
        y = M_inv(y);
        const Field2D w = fio_invert(descent.A, to_complex(y));
        y = from_complex(fio_apply(descent.A, divide_high(descent.diag, w)));
        y = apply_M(c, y);
        y = r.top.S(y);
        y = apply_Q(c, y);
        y = map_both(y, [&](const Field2D& f) { return cv.A(f); });
        y = map_both(y, [&](const Field2D& f) { return cv.B(f); });
        return high_space(op.Z(y));
    }
};

}  // namespace

// ---- screening ------------------------------------------------------------------

MelnikovReport melnikov_screen(double omega, const std::vector<double>& mu, double gamma, double tau, int J_max,
                               int L_max)
{
    MelnikovReport rep;
    rep.omega = omega;
    rep.gamma = gamma;
    rep.tau = tau;
    rep.margin = std::numeric_limits<double>::infinity();
    const int Jtop = std::min(J_max, static_cast<int>(mu.size()) - 1);
    for (int j = 2; j <= Jtop; ++j) {
        const double m = mu[static_cast<std::size_t>(j)];
        const double wj = std::pow(j, tau);
        const long l0 = std::lround(m / omega);
        for (long l = l0 - 1; l <= l0 + 1; ++l) {
            if (l < 0 || l > L_max) continue;
            const double d = std::abs(omega * l - m);
            if (d * wj < rep.margin) {
                rep.margin = d * wj;
                rep.margin_l = static_cast<int>(l);
                rep.margin_j = j;
            }
            if (d <= gamma / wj)
                rep.violations.push_back({static_cast<int>(l), j, gamma > 0.0 ? d * wj / gamma : 0.0});
        }
    }
    return rep;
}

DiophantineReport kappa_diophantine(double kappa, double tau_star, int J_max)
{
    const double wb = std::sqrt(1.0 + kappa);
    std::vector<double> mu(static_cast<std::size_t>(J_max + 1));
    for (int j = 0; j <= J_max; ++j) mu[static_cast<std::size_t>(j)] = std::sqrt(j + kappa * j * double(j) * j);
    const MelnikovReport r = melnikov_screen(wb, mu, 0.0, tau_star, J_max, std::numeric_limits<int>::max());
    return {r.margin, r.margin_l, r.margin_j};
}

// ---- diagonal plus remainder ----------------------------------------------------

ContractionError::ContractionError(double p)
    : std::runtime_error("Neumann series for the remainder does not contract: proxy " + std::to_string(p)), proxy(p)
{
}

MelnikovError::MelnikovError(MelnikovViolation v)
    : std::runtime_error("small divisor below the Melnikov bound at l = " + std::to_string(v.l) +
                         ", j = " + std::to_string(v.j)),
      violation(v)
{
}

Field2D invert_diag_plus_remainder(const DiagonalData& D, const ComplexMap& R, const Field2D& h, double gamma,
                                   double tau, DiagRemainderReport* report, double tol, int max_iter)
{
    for (int l = -h.L(); l <= h.L(); ++l)
        for (int j = -h.J(); j <= h.J(); ++j) {
            const int aj = std::abs(j);
            if (aj < 2) continue;
            const double d = std::abs(D.omega * l + D.mu(j));
            if (d <= gamma / std::pow(aj, tau)) throw MelnikovError({l, j, gamma > 0 ? d * std::pow(aj, tau) / gamma : 0.0});
        }
    const double hn = std::max(sobolev_norm(h, 0), 1e-300);
    DiagRemainderReport rep;
    Field2D y = h;
    double last = -1.0;
    for (int k = 0; k < max_iter; ++k) {
        const Field2D next = h - R(D.apply_inv(y));
        const double c = sobolev_norm(next - y, 0);
        y = next;
        rep.iterations = k + 1;
        if (last > 0.0) {
            rep.contraction = std::max(rep.contraction, c / last);
            if (rep.contraction >= 0.5) throw ContractionError(rep.contraction);
        }
        last = c;
        if (c <= tol * hn) break;
    }
    const Field2D x = D.apply_inv(y);
    // Modes with a zero divisor are not in the range of D and are left out of the residual.
    Field2D res = D.apply(x) + R(x) - h;
    for (int l = -res.L(); l <= res.L(); ++l)
        for (int j = -res.J(); j <= res.J(); ++j)
            if (D.omega * l + D.mu(j) == 0.0) res(l, j) = 0.0;
    rep.residual = sobolev_norm(res, 0) / hn;
    if (report) *report = rep;
    return x;
}

// ---- linearized inversion -------------------------------------------------------

TwistFailure::TwistFailure(double p)
    : std::runtime_error("bordered pivot " + std::to_string(p) + " is below the threshold"), pivot(p)
{
}

CertificationError::CertificationError(const std::string& what, double r)
    : std::runtime_error(what + ": residual " + std::to_string(r)), residual(r)
{
}

double z0_coordinate(const StatePair& f, double omega_bar)
{
    const auto [p, q] = mode11_coordinates(f);
    return project_mode11(p, q, omega_bar).second;
}

InversionSetup inversion_setup(const ApproxSolution& a, int N)
{
    InversionSetup s;
    s.kappa = a.kappa;
    s.omega = a.omega;
    s.omega_bar = a.omega_bar;
    s.L = a.u_bar.eta.L();
    s.J = a.u_bar.eta.J();
    s.N = N;
    s.U = a.orders[1] + a.orders[2] * (2.0 * a.eps) + a.orders[3] * (3.0 * a.eps * a.eps);
    s.v0 = a.frame.v0.resized(s.L, s.J);
    s.w0 = a.frame.w0.resized(s.L, s.J);
    s.z0 = a.frame.z0.resized(s.L, s.J);
    return s;
}

StatePair invert_linearized(const StatePair& u, const StatePair& f, const InversionSetup& s, InversionMode mode,
                            InversionReport* report)
{
    const Bordered G(s);
    const int n = G.size();
    const LinearizedOp op = build_linearized(u, s.omega, s.kappa, s.dn);
    auto apply = [&](const Vec& x) { return G.rhs(op.apply(G.synthesize(x))); };
    const Vec b = G.rhs(f);
    const double bn = std::max(b.norm(), 1e-300);
    InversionReport rep;
    rep.mode = mode;
    rep.size = n;
    Vec x;
    Vec z0c = G.rhs(s.z0);

    if (mode == InversionMode::Direct) {
        Eigen::MatrixXd M(n, n);
        for (int k = 0; k < n; ++k) M.col(k) = G.rhs(op.apply(G.column(k)));
        const Eigen::PartialPivLU<Eigen::MatrixXd> lu(M);
        x = lu.solve(b);
        if (G.bordered()) rep.pivot = 1.0 / lu.solve(z0c)(G.kc);
        rep.residual = (M * x - b).norm() / bn;
    } else {
        const ConjugatedInverse K(u, s);
        const StatePair FU = op.apply(G.UN);
        const double lzU = G.bordered() ? z0_coordinate(FU, s.omega_bar) : 1.0;
        const StatePair RFU = project_R(FU, s.omega_bar);
        auto precondition = [&](const Vec& r) {
            const StatePair fs = G.out.synthesize(to_std(r), s.L, s.J);
            const double a = G.bordered() ? z0_coordinate(fs, s.omega_bar) / lzU : 0.0;
            const StatePair g = project_R(fs, s.omega_bar) - RFU * a;
            const StatePair h01 = K.blocks.invert_L0101(low_space(g));
            const StatePair r2 = high_space(g) - K.blocks.L2_01(h01);
            const StatePair h2 = high_space(project_W(K.high(r2), s.omega_bar));
            return G.coordinates(a, project_W(h01, s.omega_bar) + h2);
        };
        detail::KrylovOperator A(n, apply, precondition);
        Eigen::GMRES<detail::KrylovOperator, detail::KrylovPreconditioner> gm;
        gm.set_restart(s.krylov_restart);
        gm.setMaxIterations(s.krylov_max_iter);
        gm.setTolerance(std::min(1e-3, 0.05 * s.tol));
        gm.compute(A);
        x = gm.solve(b);
        rep.iterations = static_cast<int>(gm.iterations());
        // Tighten on the true residual; the Krylov tolerance is on the preconditioned one.
        for (int k = 0; k < 4 && (apply(x) - b).norm() > 0.1 * s.tol * bn; ++k) {
            x = gm.solveWithGuess(b, x);
            rep.iterations += static_cast<int>(gm.iterations());
        }
        rep.residual = (apply(x) - b).norm() / bn;
        if (G.bordered()) {
            const Vec y = gm.solve(z0c);
            rep.pivot = 1.0 / y(G.kc);
        }
    }
    if (G.bordered()) {
        rep.a = x(G.kc);
        if (std::abs(rep.pivot) < s.pivot_floor) throw TwistFailure(rep.pivot);
    }
    if (!(rep.residual < s.tol)) throw CertificationError("linearized inversion", rep.residual);
    if (report) *report = rep;
    return G.synthesize(x);
}

// ---- Nash-Moser -----------------------------------------------------------------

NashMoserConfig NashMoserConfig::from_sigma(int sigma)
{
    NashMoserConfig c;
    c.sigma = sigma;
    c.delta = 0.5;
    c.chi = 1.5;
    c.alpha0 = 6.0 + sigma;
    c.rho1 = 9.0 * c.alpha0;
    c.alpha1 = c.rho1;
    c.rho0 = 1.0 / c.rho1;
    c.kappa1 = 3.0 * (sigma + 4.0 + 2.0 * c.rho1) + 1.0;
    c.beta1 = 3.0 + sigma + c.alpha1 + 2.0 / 3.0 * c.kappa1 + 4.0 * c.rho1;
    return c;
}

double NashMoserConfig::analytic_N0(double eps) const { return std::pow(eps, -rho0); }

int NashMoserConfig::box(int n, double eps) const
{
    const double N0 = N0_practical > 0.0 ? N0_practical : analytic_N0(eps);
    const double Nn = std::pow(N0, std::pow(chi, n));
    if (!std::isfinite(Nn) || Nn >= N_max) return N_max;
    return std::max(1, static_cast<int>(std::ceil(Nn)));
}

std::vector<double> RunRecord::log_ratios() const
{
    std::vector<double> r;
    double prev = initial_residual;
    for (const StepRecord& s : steps) {
        r.push_back(std::log(s.residual) / std::log(prev));
        prev = s.residual;
    }
    return r;
}

namespace {

double parity_defect_XY(const StatePair& u)
{
    return std::max(parity_distance(u.eta, ParityClass::X), parity_distance(u.psi, ParityClass::Y));
}

DiagonalData eigenvalues_at(const StatePair& u, double omega, double kappa, const DNConfig& dn)
{
    return build_descent(u, omega, kappa, dn).diag;
}

}  // namespace

NashMoserResult nash_moser_run(double kappa, double eps, double xi, const NashMoserConfig& c)
{
    const auto t0 = Clock::now();
    NashMoserResult res;
    RunRecord& rec = res.record;
    rec.kappa = kappa;
    rec.eps = eps;
    rec.xi = xi;
    if (eps == 0.0) {
        res.u = StatePair::zeros(c.table, c.table);
        rec.omega = std::sqrt(1.0 + kappa);
        rec.converged = true;
        rec.message = "zero amplitude";
        res.diag = assemble_diagonal(1.0, 0.0, 0.0, kappa, rec.omega);
        return res;
    }
    ApproxOptions opt;
    opt.L = opt.J = c.table;
    const ApproxSolution a = build_approx_solution(kappa, eps, xi, opt);
    rec.omega = a.omega;
    const double gamma = std::pow(eps, c.gamma_exponent);
    const int Lscreen = std::numeric_limits<int>::max();

    StatePair u = a.u_bar;
    StatePair F = evaluate_F(u, a.omega, kappa, c.dn);
    rec.initial_residual = norm(F, c.s0);
    DiagonalData prev = eigenvalues_at(u, a.omega, kappa, c.dn);
    res.diag = prev;
    double r = rec.initial_residual;

    for (int n = 0; n < c.max_iter && r >= c.tol; ++n) {
        const auto ts = Clock::now();
        // Melnikov at u_n decides whether xi survives into the next set.
        const MelnikovReport mel = melnikov_screen(a.omega, prev.table(c.table), gamma, c.tau, c.table, Lscreen);
        if (!mel.admissible()) {
            rec.excluded = true;
            rec.violation = mel.violations.front();
            rec.message = "xi excluded by the Melnikov screen";
            break;
        }
        const int N = c.box(n + 1, eps);
        InversionSetup s = inversion_setup(a, N);
        s.dn = c.dn;
        InversionReport ir;
        StatePair h;
        try {
            h = invert_linearized(u, F * -1.0, s, c.mode, &ir);
        } catch (const std::exception& e) {
            rec.message = e.what();
            break;
        }
        u += h;
        F = evaluate_F(u, a.omega, kappa, c.dn);
        const double rn = norm(F, c.s0);
        const DiagonalData next = eigenvalues_at(u, a.omega, kappa, c.dn);
        double shift = 0.0;
        for (int j = 2; j <= c.table; ++j) shift = std::max(shift, std::abs(next.mu(j) - prev.mu(j)) / std::pow(j, 1.5));

        StepRecord st;
        st.n = n + 1;
        st.N = N;
        st.residual = rn;
        st.step_norm = norm(h, c.s0);
        st.pivot = ir.pivot;
        st.melnikov_margin = mel.margin;
        st.eigen_shift = shift;
        st.seconds = seconds_since(ts);
        rec.steps.push_back(st);
        prev = next;
        res.diag = next;
        // At the cap only Newton progress remains; stop once it stalls.
        const bool stalled = N == c.N_max && rn > 0.5 * r;
        r = rn;
        if (stalled) break;
    }
    rec.converged = !rec.excluded && r < c.tol;
    if (rec.converged) rec.message = "converged";
    else if (rec.message.empty()) rec.message = "residual did not reach the tolerance";
    rec.parity_defect = parity_defect_XY(u);
    rec.seconds = seconds_since(t0);
    res.u = u;
    return res;
}

std::optional<double> find_admissible_xi(double kappa, double eps, const std::vector<double>& candidates,
                                         const NashMoserConfig& c)
{
    if (candidates.empty()) return std::nullopt;
    ApproxOptions opt;
    opt.L = opt.J = std::min(c.table, 16);
    const ApproxSolution base = build_approx_solution(kappa, eps, 1.0, opt);
    const double gamma = std::pow(eps, c.gamma_exponent);
    for (double xi : candidates) {
        ApproxSolution a = base;
        a.u_bar = StatePair::zeros(opt.L, opt.J);
        for (int k = 1; k <= 4; ++k) a.u_bar += a.orders[static_cast<std::size_t>(k)] * std::pow(eps * std::sqrt(xi), k);
        const double omega = frequency(base, eps, xi);
        const DiagonalData d = eigenvalues_at(a.u_bar, omega, kappa, c.dn);
        if (melnikov_screen(omega, d.table(c.table), gamma, c.tau, c.table, std::numeric_limits<int>::max())
                .admissible())
            return xi;
    }
    return std::nullopt;
}

// ---- measure --------------------------------------------------------------------

EigenvalueModel EigenvalueModel::build(double kappa, double eta_lo, double eta_hi, int nodes, int table)
{
    EigenvalueModel m;
    m.kappa = kappa;
    m.eta_lo = eta_lo;
    m.eta_hi = eta_hi;
    ApproxOptions opt;
    opt.L = opt.J = table;
    m.base = build_approx_solution(kappa, eta_hi, 1.0, opt);
    for (int i = 0; i < nodes; ++i) {
        const double th = kPi * (2.0 * i + 1.0) / (2.0 * nodes);
        const double eta = 0.5 * (eta_lo + eta_hi) + 0.5 * (eta_hi - eta_lo) * std::cos(th);
        StatePair u = StatePair::zeros(table, table);
        for (int k = 1; k <= 4; ++k) u += m.base.orders[static_cast<std::size_t>(k)] * std::pow(eta, k);
        const DiagonalData d = eigenvalues_at(u, frequency(m.base, eta, 1.0), kappa, {});
        m.nodes.push_back(eta);
        m.values[0].push_back(d.lambda3 - 1.0);
        m.values[1].push_back(d.lambda1);
        m.values[2].push_back(d.lambda_m1);
    }
    // Nodes in increasing order for the interpolator.
    std::vector<std::size_t> idx(m.nodes.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = idx.size() - 1 - i;
    std::vector<double> x;
    std::array<std::vector<double>, 3> y;
    for (std::size_t i : idx) {
        x.push_back(m.nodes[i]);
        for (std::size_t k = 0; k < 3; ++k) y[k].push_back(m.values[k][i]);
    }
    m.nodes = x;
    m.values = y;
    return m;
}

std::array<double, 3> EigenvalueModel::lambdas(double eta) const
{
    std::array<double, 3> out{};
    const std::size_t order = nodes.size() - 1;
    for (std::size_t k = 0; k < 3; ++k) {
        std::vector<double> x = nodes, y = values[k];
        const boost::math::barycentric_rational<double> f(std::move(x), std::move(y), order);
        out[k] = f(eta);
    }
    return out;
}

DiagonalData EigenvalueModel::diagonal(double eps, double xi) const
{
    const auto l = lambdas(eps * std::sqrt(xi));
    return assemble_diagonal(1.0 + l[0], l[1], l[2], kappa, omega(eps, xi));
}

MeasureReport measure_estimate(double kappa, const std::vector<double>& eps_list, const MeasureConfig& cfg)
{
    MeasureReport rep;
    if (eps_list.empty()) return rep;
    const double emin = *std::min_element(eps_list.begin(), eps_list.end());
    const double emax = *std::max_element(eps_list.begin(), eps_list.end());
    const EigenvalueModel model = EigenvalueModel::build(kappa, emin, emax * std::sqrt(2.0), cfg.nodes, cfg.table);
    const DiophantineReport dio = kappa_diophantine(kappa, cfg.tau_star, cfg.J_max);
    rep.gamma_star = dio.gamma_star;
    const double wb = std::sqrt(1.0 + kappa);

    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> jitter(0.0, 1.0);
    std::vector<double> xis(static_cast<std::size_t>(cfg.samples));
    for (int i = 0; i < cfg.samples; ++i) xis[static_cast<std::size_t>(i)] = 1.0 + (i + jitter(rng)) / cfg.samples;

    std::vector<double> bare(static_cast<std::size_t>(cfg.J_max + 1));
    for (int j = 0; j <= cfg.J_max; ++j) bare[static_cast<std::size_t>(j)] = std::sqrt(j + kappa * j * double(j) * j);

    for (double eps : eps_list) {
        MeasurePoint p;
        p.eps = eps;
        p.gamma = cfg.gamma_exponent > 0.0 ? std::pow(eps, cfg.gamma_exponent) : 0.0;
        p.samples = cfg.samples;
        struct Sample {
            bool excluded = false;
            int min_j = 0;
            double perturbation = 0.0;
        };
        std::vector<Sample> out(xis.size());
        auto run = [&](std::size_t lo, std::size_t hi) {
            for (std::size_t i = lo; i < hi; ++i) {
                const DiagonalData d = model.diagonal(eps, xis[i]);
                const std::vector<double> mu = d.table(cfg.J_max);
                const MelnikovReport m =
                    melnikov_screen(d.omega, mu, p.gamma, cfg.tau, cfg.J_max, std::numeric_limits<int>::max());
                Sample& s = out[i];
                s.excluded = !m.admissible();
                for (const auto& v : m.violations)
                    if (s.min_j == 0 || v.j < s.min_j) s.min_j = v.j;
                for (int j = 2; j <= cfg.J_max; ++j) {
                    const double mj = mu[static_cast<std::size_t>(j)];
                    const double l = std::round(mj / d.omega);
                    const double dev = std::abs(d.omega - wb) * l + std::abs(mj - bare[static_cast<std::size_t>(j)]);
                    s.perturbation = std::max(s.perturbation, dev / (eps * eps * std::pow(j, 1.5)));
                }
            }
        };
        // Samples are independent; the reduction below runs in sample order, so the
        // result does not depend on the thread count.
        const std::size_t nt = static_cast<std::size_t>(std::max(1, cfg.threads));
        std::vector<std::thread> pool;
        const std::size_t chunk = (xis.size() + nt - 1) / nt;
        for (std::size_t t = 0; t < nt; ++t) {
            const std::size_t lo = t * chunk, hi = std::min(xis.size(), lo + chunk);
            if (lo < hi) pool.emplace_back(run, lo, hi);
        }
        for (auto& th : pool) th.join();
        for (const Sample& s : out) {
            if (s.excluded) ++p.excluded;
            if (s.min_j > 0 && (p.min_violating_j == 0 || s.min_j < p.min_violating_j)) p.min_violating_j = s.min_j;
            p.perturbation = std::max(p.perturbation, s.perturbation);
        }
        p.fraction = static_cast<double>(p.excluded) / p.samples;
        // gamma*/j^{3/2} - c eps^2 j^{3/2} > gamma/j^{3/2} for j^3 < (gamma* - gamma)/(c eps^2).
        const double room = rep.gamma_star - p.gamma;
        p.cutoff_j = room > 0.0 ? std::cbrt(room / (p.perturbation * eps * eps)) : 0.0;
        rep.points.push_back(p);
    }

    std::vector<MeasurePoint> sorted = rep.points;
    std::sort(sorted.begin(), sorted.end(), [](const auto& x, const auto& y) { return x.eps < y.eps; });
    rep.monotone = true;
    for (std::size_t i = 1; i < sorted.size(); ++i) rep.monotone = rep.monotone && sorted[i - 1].fraction <= sorted[i].fraction;
    rep.C0 = std::numeric_limits<double>::infinity();
    rep.cutoff_respected = true;
    std::vector<double> le, lf;
    bool all_positive = true;
    for (const MeasurePoint& p : sorted) {
        rep.fit_C = std::max(rep.fit_C, p.fraction / std::pow(p.eps, 1.0 / 18.0));
        rep.C0 = std::min(rep.C0, p.cutoff_j * std::pow(p.eps, 2.0 / 3.0));
        if (p.min_violating_j > 0 && p.min_violating_j <= p.cutoff_j) rep.cutoff_respected = false;
        all_positive = all_positive && p.fraction > 0.0;
        le.push_back(p.eps);
        lf.push_back(p.fraction);
    }
    rep.fitted_exponent = all_positive && le.size() > 1 ? fit_loglog(le, lf).slope : std::nan("");
    return rep;
}

}  // namespace sww
