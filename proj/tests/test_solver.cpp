#include "doctest.h"

#include "sww/numerics.hpp"
#include "sww/residual.hpp"
#include "sww/solver.hpp"

#include <cmath>
#include <map>

using namespace sww;

namespace {

const double kKappa = std::sqrt(2.0) - 1.0;
const double kXi = 1.5;

const ApproxSolution& approx(double eps)
{
    static std::map<double, ApproxSolution> cache;
    auto it = cache.find(eps);
    if (it == cache.end()) {
        ApproxOptions opt;
        opt.L = opt.J = 16;
        it = cache.emplace(eps, build_approx_solution(kKappa, eps, kXi, opt)).first;
    }
    return it->second;
}

std::vector<double> bare_table(double kappa, int J)
{
    std::vector<double> mu(static_cast<std::size_t>(J + 1));
    for (int j = 0; j <= J; ++j) mu[static_cast<std::size_t>(j)] = std::sqrt(j + kappa * j * j * double(j));
    return mu;
}

// Smooth complex field used as a perturbation and as data.
Field2D bump(int L, int J, double amp)
{
    Field2D f(L, J, false);
    for (int l = -L; l <= L; ++l)
        for (int j = -J; j <= J; ++j) f(l, j) = cd(amp * std::exp(-0.7 * (std::abs(l) + std::abs(j))), 0.3 * amp * std::exp(-std::abs(l - j)));
    return f;
}

}  // namespace

TEST_CASE("planted resonance is caught at the right lattice point")
{
    const std::vector<double> mu = bare_table(0.3, 40);
    const double omega = mu[5] / 3.0;
    const MelnikovReport r = melnikov_screen(omega, mu, 1e-6, 1.5, 40, 1000);
    REQUIRE_FALSE(r.admissible());
    bool found = false;
    for (const auto& v : r.violations) found = found || (v.l == 3 && v.j == 5);
    CHECK(found);
    CHECK(r.margin_j == 5);
    CHECK(r.margin_l == 3);

    // Shifting omega well past the bound clears (3, 5).
    const MelnikovReport s = melnikov_screen(omega + 1e-3, mu, 1e-6, 1.5, 40, 1000);
    for (const auto& v : s.violations) CHECK_FALSE((v.l == 3 && v.j == 5));

    // Restricting l below the resonant one also clears it.
    const MelnikovReport t = melnikov_screen(omega, mu, 1e-6, 1.5, 40, 2);
    for (const auto& v : t.violations) CHECK(v.l <= 2);
}

TEST_CASE("Diophantine constant of the unperturbed frequencies against a brute-force scan")
{
    const int J = 400;
    const DiophantineReport d = kappa_diophantine(kKappa, 1.5, J);
    const double wb = std::sqrt(1.0 + kKappa);
    double best = 1e300;
    for (int j = 2; j <= J; ++j) {
        const double m = std::sqrt(j + kKappa * j * j * double(j));
        for (int l = 0; l <= static_cast<int>(m / wb) + 2; ++l) best = std::min(best, std::abs(wb * l - m) * std::pow(j, 1.5));
    }
    CHECK(d.gamma_star == doctest::Approx(best).epsilon(1e-12));
    CHECK(d.gamma_star > 0.1);
    CHECK(d.j == 2);
}

TEST_CASE("diagonal plus remainder inversion")
{
    const DiagonalData D = assemble_diagonal(1.0, 0.0, 0.0, kKappa, std::sqrt(1.0 + kKappa) + 1e-3);
    const Field2D h = bump(10, 10, 1.0);

    SUBCASE("zero remainder is plain division")
    {
        DiagRemainderReport rep;
        const Field2D x = invert_diag_plus_remainder(D, [](const Field2D& f) { return f * 0.0; }, h, 1e-4, 1.5, &rep);
        CHECK(sobolev_norm(x - D.apply_inv(h), 0) < 1e-14);
        CHECK(rep.residual < 1e-12);
        // |j|^{-3/2} gamma / |D| stays below one on the screened modes
        double worst = 0.0;
        for (int l = -10; l <= 10; ++l)
            for (int j = 2; j <= 10; ++j) worst = std::max(worst, 1e-4 / (std::pow(j, 1.5) * std::abs(D.omega * l + D.mu(j))));
        CHECK(worst <= 1.0);
    }
    SUBCASE("small smooth remainder contracts")
    {
        // R D^{-1} is multiplication by c, so the contraction does not depend on the divisors.
        const Field2D c = bump(4, 4, 0.02);
        const ComplexMap R = [&](const Field2D& f) { return multiply_report(c, D.apply(f), f.L(), f.J()).value; };
        DiagRemainderReport rep;
        const Field2D x = invert_diag_plus_remainder(D, R, h, 1e-4, 1.5, &rep);
        CHECK(rep.contraction < 0.5);
        CHECK(rep.residual < 1e-9);
        const Field2D x0 = invert_diag_plus_remainder(D, [](const Field2D& f) { return f * 0.0; }, h, 1e-4, 1.5);
        CHECK(sobolev_norm(x - x0, 0) > 1e-3 * sobolev_norm(x0, 0));
    }
    SUBCASE("large remainder is refused")
    {
        const ComplexMap R = [&](const Field2D& f) { return D.apply(f) * 3.0; };
        CHECK_THROWS_AS(invert_diag_plus_remainder(D, R, h, 1e-4, 1.5), ContractionError);
    }
    SUBCASE("small divisor is refused")
    {
        const std::vector<double> mu = bare_table(kKappa, 10);
        const DiagonalData R = assemble_diagonal(1.0, 0.0, 0.0, kKappa, mu[4] / 2.0);
        try {
            invert_diag_plus_remainder(R, [](const Field2D& f) { return f * 0.0; }, h, 1e-3, 1.5);
            FAIL("expected a Melnikov failure");
        } catch (const MelnikovError& e) {
            CHECK(std::abs(e.violation.j) == 4);
            CHECK(std::abs(e.violation.l) == 2);
        }
    }
}

TEST_CASE("linearized inversion at the approximate solution")
{
    const double eps = 5e-3;
    const ApproxSolution& a = approx(eps);
    const StatePair f = evaluate_F(a.u_bar, a.omega, kKappa) * -1.0;
    InversionSetup s = inversion_setup(a, 6);
    InversionReport rd, rp;
    const StatePair hd = invert_linearized(a.u_bar, f, s, InversionMode::Direct, &rd);
    const StatePair hp = invert_linearized(a.u_bar, f, s, InversionMode::Pipeline, &rp);
    CHECK(rd.residual < 1e-12);
    CHECK(rp.residual < s.tol);
    CHECK(norm(hd - hp, 0) < 1e-7 * norm(hd, 0));
    CHECK(rp.pivot == doctest::Approx(rd.pivot).epsilon(1e-6));
    // Solution lives in X x Y.
    CHECK(parity_distance(hd.eta, ParityClass::X) < 1e-14);
    CHECK(parity_distance(hd.psi, ParityClass::Y) < 1e-14);

    // The truncated equation holds on the box.
    const StatePair r = truncate(build_linearized(a.u_bar, a.omega, kKappa).apply(hd) - f, 6);
    CHECK(norm(r, 0) < 1e-8 * norm(f, 0));
}

TEST_CASE("bordered pivot follows the frequency twist")
{
    std::vector<double> es, ps;
    for (double eps : {2.5e-3, 5e-3}) {
        const ApproxSolution& a = approx(eps);
        InversionReport rep;
        invert_linearized(a.u_bar, evaluate_F(a.u_bar, a.omega, kKappa), inversion_setup(a, 6), InversionMode::Direct,
                          &rep);
        const double expected = 2.0 * eps * eps * std::pow(kXi, 1.5) * a.omega2_bar;
        CHECK(rep.pivot / expected == doctest::Approx(1.0).epsilon(0.05));
        es.push_back(eps);
        ps.push_back(std::abs(rep.pivot));
    }
    CHECK(fit_loglog(es, ps).slope == doctest::Approx(2.0).epsilon(0.05));
}

TEST_CASE("flat state has no twist")
{
    const ApproxSolution& a = approx(5e-3);
    InversionSetup s = inversion_setup(a, 6);
    s.omega = a.omega_bar;
    s.pivot_floor = 1e-10;
    const StatePair zero = StatePair::zeros(s.L, s.J);
    CHECK_THROWS_AS(invert_linearized(zero, project_R(evaluate_F(a.u_bar, a.omega, kKappa), a.omega_bar), s,
                                      InversionMode::Direct),
                    std::runtime_error);
}

TEST_CASE("Nash-Moser configuration")
{
    const NashMoserConfig c = NashMoserConfig::from_sigma(6);
    CHECK(c.alpha0 == 12.0);
    CHECK(c.rho1 == 108.0);
    CHECK(c.alpha1 == 108.0);
    CHECK(c.kappa1 == 3.0 * (6 + 4 + 216) + 1);
    CHECK(c.beta1 == doctest::Approx(3 + 6 + 108 + 2.0 / 3.0 * c.kappa1 + 432));
    CHECK(c.analytic_N0(1e-3) == doctest::Approx(std::pow(1e3, 1.0 / 108.0)));
    CHECK(c.box(1, 1e-3) == 13);
    CHECK(c.box(2, 1e-3) == 24);
    CHECK(c.box(5, 1e-3) == 24);
    NashMoserConfig d = c;
    d.N0_practical = 0.0;
    CHECK(d.box(1, 1e-3) == 2);
}

TEST_CASE("zero amplitude is trivial")
{
    const NashMoserResult r = nash_moser_run(kKappa, 0.0, kXi);
    CHECK(r.record.converged);
    CHECK(r.record.steps.empty());
    CHECK(r.u.max_abs() == 0.0);
    CHECK(r.record.omega == doctest::Approx(std::sqrt(1.0 + kKappa)));
}

TEST_CASE("Nash-Moser converges superlinearly at small amplitude")
{
    const NashMoserResult r = nash_moser_run(kKappa, 5e-3, kXi, NashMoserConfig::from_sigma(6));
    const RunRecord& rec = r.record;
    REQUIRE(rec.converged);
    CHECK(rec.final_residual() < 1e-11);
    CHECK(rec.parity_defect < 1e-13);
    for (double q : rec.log_ratios()) CHECK(q > 1.2);
    for (const StepRecord& s : rec.steps) {
        CHECK(s.melnikov_margin > std::pow(5e-3, 5.0 / 6.0));
        CHECK(s.eigen_shift < 1e-6);
    }
    REQUIRE(rec.steps.size() >= 2);
    CHECK(rec.steps[1].step_norm < 1e-2 * rec.steps[0].step_norm);
}

TEST_CASE("admissible xi search")
{
    const auto xi = find_admissible_xi(kKappa, 5e-3, {1.0, 1.5});
    REQUIRE(xi.has_value());
    CHECK(*xi == 1.0);
    CHECK_FALSE(find_admissible_xi(kKappa, 5e-3, {}).has_value());
}

TEST_CASE("eigenvalue model interpolates the descent eigenvalues")
{
    const EigenvalueModel m = EigenvalueModel::build(kKappa, 1e-3, 1.2e-2);
    const double eta = 7.3e-3;
    StatePair u = StatePair::zeros(12, 12);
    for (int k = 1; k <= 4; ++k) u += m.base.orders[static_cast<std::size_t>(k)] * std::pow(eta, k);
    const DiagonalData d = build_descent(u, frequency(m.base, eta, 1.0), kKappa).diag;
    const auto l = m.lambdas(eta);
    CHECK(std::abs(l[0] - (d.lambda3 - 1.0)) < 1e-10);
    CHECK(std::abs(l[1] - d.lambda1) < 1e-10);
    CHECK(std::abs(l[2] - d.lambda_m1) < 1e-10);
    CHECK(m.omega(eta, 1.0) == doctest::Approx(d.omega).epsilon(1e-15));
}

TEST_CASE("excluded-parameter estimate on a small sample")
{
    MeasureConfig cfg;
    cfg.samples = 200;
    cfg.J_max = 300;
    const std::vector<double> eps = {1e-3, 3e-3, 8e-3};
    const MeasureReport r = measure_estimate(kKappa, eps, cfg);
    REQUIRE(r.points.size() == 3);
    CHECK(r.gamma_star > 0.1);
    CHECK(r.cutoff_respected);
    CHECK(r.C0 > 0.0);
    for (const MeasurePoint& p : r.points) {
        CHECK(p.fraction >= 0.0);
        CHECK(p.fraction <= 1.0);
        CHECK(p.cutoff_j > 2.0);
        CHECK(p.perturbation > 0.0);
    }
    // Same seed, same answer, whatever the thread count.
    cfg.threads = 3;
    const MeasureReport again = measure_estimate(kKappa, eps, cfg);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(again.points[i].excluded == r.points[i].excluded);
        CHECK(again.points[i].perturbation == r.points[i].perturbation);
    }
}
