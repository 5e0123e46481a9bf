#include "sww/verify.hpp"

#include "sww/numerics.hpp"
#include "sww/solver.hpp"

#include <boost/math/tools/roots.hpp>
#include <fmt/format.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <map>
#include <random>
#include <stdexcept>

namespace sww {

bool ProbeResult::pass() const
{
    return !checks.empty() && std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
}

namespace {

Check check(std::string name, double measured, const std::string& rel, double bound, double extra = 0.0)
{
    Check c;
    c.name = std::move(name);
    c.measured = measured;
    c.bound = bound;
    c.relation = rel;
    if (rel == "<") c.pass = measured < bound;
    else if (rel == "<=") c.pass = measured <= bound;
    else if (rel == ">") c.pass = measured > bound;
    else if (rel == ">=") c.pass = measured >= bound;
    else if (rel == "==") {
        c.tol = extra;
        c.pass = std::abs(measured - bound) <= extra;
    } else if (rel == "in") {
        c.upper = extra;
        c.pass = measured >= bound && measured <= extra;
    } else
        throw std::invalid_argument("unknown relation " + rel);
    // NaN never passes.
    c.pass = c.pass && !std::isnan(measured);
    return c;
}

ProbeResult timed(int id, std::string title, double budget, const std::function<void(std::vector<Check>&)>& body)
{
    ProbeResult r;
    r.id = id;
    r.title = std::move(title);
    r.budget = budget;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        body(r.checks);
    } catch (const std::exception& e) {
        // A throwing probe fails with the exception text as the check name.
        Check c;
        c.name = std::string("exception: ") + e.what();
        c.measured = std::nan("");
        r.checks.push_back(c);
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return r;
}

ApproxSolution approx(double kappa, double eps, int n, double xi = 1.5)
{
    ApproxOptions opt;
    opt.L = opt.J = n;
    return build_approx_solution(kappa, eps, xi, opt);
}

// Descent states are shared between the descent and eigenvalue probes.
const DescentResult& descent_at(double kappa, double eps)
{
    static std::map<std::pair<double, double>, DescentResult> cache;
    const auto key = std::make_pair(kappa, eps);
    auto it = cache.find(key);
    if (it == cache.end()) {
        const ApproxSolution a = approx(kappa, eps, 32);
        it = cache.emplace(key, build_descent(a.u_bar, a.omega, kappa)).first;
    }
    return it->second;
}

Field2D random_field(int L, int J, std::mt19937_64& rng, double amp, int band, double decay)
{
    std::normal_distribution<double> n(0.0, 1.0);
    Field2D f(L, J, false);
    const int bl = std::min(band, L), bj = std::min(band, J);
    for (int l = -bl; l <= bl; ++l)
        for (int j = -bj; j <= bj; ++j) f(l, j) = amp * cd(n(rng), n(rng)) / std::pow(bracket(l, j), decay);
    f.symmetrize();
    return f;
}

StatePair random_xy(int L, int J, std::mt19937_64& rng)
{
    return {parity_project(random_field(L, J, rng, 1.0, 6, 2.0), ParityClass::X),
            parity_project(random_field(L, J, rng, 1.0, 6, 2.0), ParityClass::Y)};
}

// The outer tenth of the table is polluted by truncation of the products.
StatePair interior(const StatePair& u)
{
    StatePair r = u;
    const int L = u.eta.L(), J = u.eta.J();
    for (int l = -L; l <= L; ++l)
        for (int j = -J; j <= J; ++j)
            if (std::abs(l) > 0.9 * L || std::abs(j) > 0.9 * J) r.eta(l, j) = r.psi(l, j) = 0.0;
    return r;
}

Field2D cos_x(int J, double a, int j)
{
    Field2D b(0, J);
    b(0, j) = b(0, -j) = a / 2.0;
    return b;
}

double spread(const std::vector<double>& v)
{
    return *std::max_element(v.begin(), v.end()) / *std::min_element(v.begin(), v.end());
}

}  // namespace

ProbeResult probe_approx_order(const VerifyOptions& o)
{
    return timed(1, "approximate-solution residual order", 30.0, [&](std::vector<Check>& out) {
        std::vector<double> es, rs;
        for (double e : {1e-3, 2e-3, 4e-3, 8e-3}) {
            const ApproxSolution a = approx(o.kappa, e, 12);
            es.push_back(e);
            rs.push_back(norm(evaluate_F(a.u_bar, a.omega, o.kappa), NashMoserConfig{}.s0));
        }
        out.push_back(check("residual_slope", fit_loglog(es, rs).slope, "in", 4.7, 5.3));
    });
}

ProbeResult probe_twist_root(const VerifyOptions&)
{
    return timed(2, "twist root", 1.0, [&](std::vector<Check>& out) {
        const double r = twist_root();
        boost::uintmax_t it = 200;
        const auto z = boost::math::tools::bisect([](double k) { return omega2_bar_formula(k); }, 0.2, 0.3,
                                                  boost::math::tools::eps_tolerance<double>(50), it);
        out.push_back(check("cubic_root", r, "in", 0.265, 0.266));
        out.push_back(check("frequency_zero_vs_cubic", std::abs(0.5 * (z.first + z.second) - r), "<", 1e-6));
    });
}

ProbeResult probe_kernel_uniqueness(const VerifyOptions& o)
{
    return timed(3, "kernel uniqueness", 1.0, [&](std::vector<Check>& out) {
        const auto pts = near_resonances(o.kappa, 200, 200, 1e-6);
        out.push_back(check("resonant_points", static_cast<double>(pts.size()), "==", 1.0, 0.0));
        const bool at11 = pts.size() == 1 && pts[0].l == 1 && pts[0].j == 1;
        out.push_back(check("resonance_at_1_1", at11 ? 1.0 : 0.0, "==", 1.0, 0.0));
    });
}

ProbeResult probe_shape_derivative(const VerifyOptions& o)
{
    return timed(4, "shape derivative oracle", 10.0, [&](std::vector<Check>& out) {
        std::mt19937_64 rng(o.seed);
        const int L = 20, J = 24;
        const Field2D psi = random_field(L, J, rng, 0.01, 2, 3.0);
        const Field2D var = random_field(L, J, rng, 1.0, 2, 3.0);
        for (double amp : {1e-3, 2e-3, 3e-3}) {
            const Field2D eta = random_field(L, J, rng, amp, 2, 3.0);
            const double d = 1e-5;
            const Field2D fd = (dn_apply(eta + var * d, psi) - dn_apply(eta - var * d, psi)) * (0.5 / d);
            const Field2D sd = dn_shape_derivative(eta, psi, var);
            out.push_back(check(fmt::format("relative_error_amp_{:g}", amp),
                                sobolev_norm(sd - fd, 0) / sobolev_norm(fd, 0), "<", 1e-6));
        }
    });
}

ProbeResult probe_normal_matrix(const VerifyOptions&)
{
    return timed(5, "FIO normal equations", 60.0, [&](std::vector<Check>& out) {
        const int K = 48;
        const Field2D shape = cos_x(4, 1.0, 1) + cos_x(4, 0.3, 3);
        const double s3 = sobolev_norm(shape, 3);
        std::vector<double> ratios;
        for (double target : {1e-3, 1e-2, 1e-1}) {
            const Field2D beta = shape * (target / s3);
            ratios.push_back(fio_normal_matrix(beta, K).defect / sobolev_norm(beta, 3));
        }
        out.push_back(check("defect_over_phase_spread", spread(ratios), "<", 2.0));
    });
}

ProbeResult probe_composition(const VerifyOptions&)
{
    return timed(6, "composition ladder", 60.0, [&](std::vector<Check>& out) {
        const double r = 0.5;
        std::vector<int> modes;
        for (double k = 1000.0; k <= 100000.0; k *= 1.8) modes.push_back(static_cast<int>(k));
        const CompositionProbe p = fio_compose_Dr(cos_x(4, 0.25, 1), r, 0.0, 8, modes, false, 1.0);
        for (int al = 0; al <= 3; ++al)
            out.push_back(check(fmt::format("order_B{}", al), p.orders[static_cast<std::size_t>(al)], "==", r - al / 2.0,
                                0.1));
    });
}

ProbeResult probe_descent(const VerifyOptions& o)
{
    return timed(7, "descent effectiveness", 300.0, [&](std::vector<Check>& out) {
        const int Jmax = 32;
        std::vector<int> js;
        for (int j = 4; j <= Jmax / 2; ++j) js.push_back(j);
        std::vector<double> es, sizes;
        for (double e : {2.5e-3, 5e-3, 1e-2}) {
            const DescentProbe p = descent_remainder_probe(descent_at(o.kappa, e), {0, 1}, js, 12, Jmax);
            out.push_back(check(fmt::format("spread_eps_{:g}", e), spread(p.residual), "<", 3.0));
            es.push_back(e);
            sizes.push_back(*std::max_element(p.residual.begin(), p.residual.end()));
        }
        out.push_back(check("eps_slope", fit_loglog(es, sizes).slope, ">=", 1.0));
    });
}

ProbeResult probe_eigenvalues(const VerifyOptions& o)
{
    return timed(8, "eigenvalue perturbation", 120.0, [&](std::vector<Check>& out) {
        const int Jmax = 32;
        std::vector<double> es, shifts;
        for (double e : {2.5e-3, 5e-3, 1e-2}) {
            const DiagonalData& d = descent_at(o.kappa, e).diag;
            double m = 0.0;
            for (int j = 2; j <= Jmax / 2; ++j)
                m = std::max(m, std::abs(d.mu(j) - std::sqrt(j + o.kappa * j * j * double(j))) / std::pow(j, 1.5));
            es.push_back(e);
            shifts.push_back(m);
        }
        out.push_back(check("eps_slope", fit_loglog(es, shifts).slope, "==", 2.0, 0.2));
    });
}

ProbeResult probe_nash_moser(const VerifyOptions& o)
{
    return timed(9, "Nash-Moser convergence", 600.0, [&](std::vector<Check>& out) {
        const double eps = 5e-3;
        const NashMoserConfig cfg = NashMoserConfig::from_sigma(6);
        std::vector<double> grid;
        for (int i = 0; i <= 10; ++i) grid.push_back(1.0 + 0.1 * i);
        const auto xi = find_admissible_xi(o.kappa, eps, grid, cfg);
        out.push_back(check("admissible_xi_found", xi ? 1.0 : 0.0, "==", 1.0, 0.0));
        if (!xi) return;
        const NashMoserResult r = nash_moser_run(o.kappa, eps, *xi, cfg);
        const RunRecord& rec = r.record;
        out.push_back(check("final_residual", rec.final_residual(), "<", 1e-10));
        int run = 0, best = 0, Nmax = 0;
        for (double q : rec.log_ratios()) {
            run = q >= 1.3 ? run + 1 : 0;
            best = std::max(best, run);
        }
        for (const StepRecord& s : rec.steps) Nmax = std::max(Nmax, s.N);
        out.push_back(check("consecutive_superlinear_steps", best, ">=", 2.0));
        out.push_back(check("largest_box", Nmax, "<=", 48.0));
        out.push_back(check("parity_defect", rec.parity_defect, "<", 1e-12));
    });
}

ProbeResult probe_measure(const VerifyOptions& o)
{
    return timed(10, "measure trend", 600.0, [&](std::vector<Check>& out) {
        MeasureConfig cfg;
        cfg.samples = o.samples;
        cfg.J_max = o.measure_J_max;
        cfg.seed = o.seed;
        cfg.threads = o.threads;
        const MeasureReport r = measure_estimate(o.kappa, {2e-3, 4e-3, 8e-3}, cfg);
        out.push_back(check("monotone_in_eps", r.monotone ? 1.0 : 0.0, "==", 1.0, 0.0));
        // The fitted bound C eps^{1/18} only says something when it is below one.
        out.push_back(check("fitted_C", r.fit_C, "<", 1.0));
        out.push_back(check("fitted_exponent", r.fitted_exponent, ">=", 1.0 / 18.0));
        for (const MeasurePoint& p : r.points) {
            const double floor = r.C0 * std::pow(p.eps, -2.0 / 3.0);
            const double minj = p.min_violating_j > 0 ? p.min_violating_j : std::numeric_limits<double>::infinity();
            out.push_back(check(fmt::format("min_violating_j_eps_{:g}", p.eps), minj, ">", floor));
        }
    });
}

ProbeResult probe_identities(const VerifyOptions& o)
{
    return timed(11, "algebraic identities", 60.0, [&](std::vector<Check>& out) {
        std::mt19937_64 rng(o.seed);
        const ApproxSolution a = approx(o.kappa, 8e-3, 20);
        const GoodUnknownFactor g = good_unknown_factor(a.u_bar, a.omega, o.kappa);
        const LinearizedOp op = build_linearized(a.u_bar, a.omega, o.kappa);
        double conj = 0.0;
        for (int k = 0; k < 3; ++k) {
            const StatePair h = random_xy(20, 20, rng);
            conj = std::max(conj, norm(interior(op.apply(g.Z(h)) - g.Z(g.L0(h))), 0) / norm(h, 0));
        }
        out.push_back(check("good_unknown_conjugation", conj, "<", 1e-9));

        const ApproxSolution b = approx(o.kappa, 1e-2, 16);
        const ReductionChain rc = build_reduction(b.u_bar, b.omega, o.kappa);
        out.push_back(check("mu_proportionality", rc.stage.proportionality, "<", 1e-9));
        const auto defects = symmetrization_defects(rc.chain());
        out.push_back(check("symmetrization_formulas", *std::max_element(defects.begin(), defects.end()), "<", 1e-9));

        const KernelFrame kf = build_kernel_frame(o.kappa, 3, 3);
        std::normal_distribution<double> n(0.0, 1.0);
        double proj = 0.0;
        for (int k = 0; k < 8; ++k) {
            const double p = n(rng), q = n(rng);
            const auto [lr, lz] = project_mode11(p, q, kf.omega_bar);
            const auto [p2, q2] = mode11_coordinates(kf.r0 * lr + kf.z0 * lz);
            proj = std::max(proj, std::hypot(p2 - p, q2 - q) / std::hypot(p, q));
        }
        out.push_back(check("projection_rule", proj, "<", 1e-9));
    });
}

ProbeResult probe_screening(const VerifyOptions& o)
{
    return timed(0, "small-divisor screening", 10.0, [&](std::vector<Check>& out) {
        std::vector<double> mu(41);
        for (int j = 0; j <= 40; ++j) mu[static_cast<std::size_t>(j)] = std::sqrt(j + o.kappa * j * j * double(j));
        const MelnikovReport r = melnikov_screen(mu[5] / 3.0, mu, 1e-6, 1.5, 40, 1000);
        bool planted = false;
        for (const auto& v : r.violations) planted = planted || (v.l == 3 && v.j == 5);
        out.push_back(check("planted_resonance_found", planted ? 1.0 : 0.0, "==", 1.0, 0.0));
        const DiophantineReport d = kappa_diophantine(o.kappa, 1.5, 10000);
        out.push_back(check("diophantine_constant", d.gamma_star, ">", std::pow(5e-3, 5.0 / 6.0)));
    });
}

const std::vector<std::string>& suite_names()
{
    static const std::vector<std::string> names{"bifurcation", "dn", "conjugation", "fio", "melnikov", "measure", "all"};
    return names;
}

std::vector<ProbeResult> run_suite(const std::string& suite, const VerifyOptions& o)
{
    using Probe = ProbeResult (*)(const VerifyOptions&);
    static const std::map<std::string, std::vector<Probe>> table{
        {"bifurcation", {probe_approx_order, probe_twist_root, probe_kernel_uniqueness}},
        {"dn", {probe_shape_derivative}},
        {"conjugation", {probe_identities}},
        {"fio", {probe_normal_matrix, probe_composition, probe_descent, probe_eigenvalues}},
        {"melnikov", {probe_screening, probe_nash_moser}},
        {"measure", {probe_measure}},
    };
    std::vector<Probe> probes;
    if (suite == "all") {
        probes = {probe_approx_order, probe_twist_root,  probe_kernel_uniqueness, probe_shape_derivative,
                  probe_normal_matrix, probe_composition, probe_descent,           probe_eigenvalues,
                  probe_nash_moser,    probe_measure,     probe_identities,        probe_screening};
    } else {
        const auto it = table.find(suite);
        if (it == table.end()) throw std::invalid_argument("unknown suite '" + suite + "'");
        probes = it->second;
    }
    std::vector<ProbeResult> out;
    for (Probe p : probes) out.push_back(p(o));
    return out;
}

std::string checks_csv(const std::vector<ProbeResult>& results)
{
    std::string s = "# sww.verify/1\ncheck,measured,bound,pass\n";
    for (const ProbeResult& r : results)
        for (const Check& c : r.checks) {
            std::string bound;
            if (c.relation == "in") bound = fmt::format("in [{:.17g}, {:.17g}]", c.bound, c.upper);
            else if (c.relation == "==") bound = fmt::format("{:.17g} +- {:.17g}", c.bound, c.tol);
            else bound = fmt::format("{} {:.17g}", c.relation, c.bound);
            std::string name = c.name;
            std::replace(name.begin(), name.end(), ',', ';');
            s += fmt::format("{}.{},{:.17g},{},{}\n", r.id, name, c.measured, bound, c.pass ? 1 : 0);
        }
    return s;
}

}  // namespace sww
