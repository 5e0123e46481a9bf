#include "doctest.h"

#include "sww/bifurcation.hpp"
#include "sww/numerics.hpp"

#include <boost/math/tools/roots.hpp>

#include <cmath>
#include <random>

using namespace sww;

namespace {

const double kKappa = std::sqrt(2.0) - 1.0;

StatePair dt(const StatePair& u) { return {apply(mult::dt(), u.eta), apply(mult::dt(), u.psi)}; }

Field2D random_parity(int L, int J, unsigned seed, ParityClass c)
{
    std::mt19937 rng(seed);
    std::normal_distribution<double> n(0.0, 1.0);
    Field2D f(L, J, false);
    for (auto& v : f.data()) v = cd(n(rng), n(rng));
    f.symmetrize();
    return parity_project(f, c);
}

}  // namespace

TEST_CASE("kernel frame identities")
{
    const KernelFrame k = build_kernel_frame(kKappa, 3, 3);
    const double wb = k.omega_bar;
    CHECK(wb == doctest::Approx(std::sqrt(1.0 + kKappa)));
    CHECK(linear_L(k.v0, wb, kKappa).max_abs() < 1e-15);
    CHECK((linear_L(k.w0, wb, kKappa) - k.r0 * (2.0 + kKappa)).max_abs() < 1e-15);
    CHECK((dt(k.v0) + k.z0).max_abs() < 1e-15);
    CHECK(parity_distance(k.v0.eta, ParityClass::X) == 0.0);
    CHECK(parity_distance(k.v0.psi, ParityClass::Y) == 0.0);
}

TEST_CASE("lattice screen")
{
    const auto roots = near_resonances(kKappa, 200, 200, 1e-6);
    REQUIRE(roots.size() == 1);
    CHECK(roots[0].l == 1);
    CHECK(roots[0].j == 1);
    // kappa = 1/2: 3 l^2 = 2 j + j^3 also holds at (2, 2).
    const auto half = near_resonances(0.5, 50, 50, 1e-8);
    bool found = false;
    for (const auto& p : half) found = found || (p.l == 2 && p.j == 2);
    CHECK(found);
    CHECK_THROWS_AS(build_kernel_frame(0.5, 3, 3), ResonanceError);
}

TEST_CASE("inverse on the range")
{
    const int L = 6, J = 6;
    Field2D f = random_parity(L, J, 1, ParityClass::Y), g = random_parity(L, J, 2, ParityClass::X);
    // Make the (1,1) block solvable: g11 = -wb f11.
    const double wb = std::sqrt(1.0 + kKappa);
    const auto [p, q] = mode11_coordinates({f, g});
    g -= Field2D::trig(L, J, true, 1, true, 1, q + wb * p);
    const StatePair h = invert_L_baromega(f, g, kKappa);
    const StatePair back = linear_L(h, wb, kKappa);
    CHECK((back.eta - f).max_abs() < 1e-10);
    CHECK((back.psi - g).max_abs() < 1e-10);
    CHECK(h.eta(0, 0) == g(0, 0));
    CHECK(h.psi(0, 0) == cd(0.0));
}

TEST_CASE("range vector and solvability error")
{
    const KernelFrame k = build_kernel_frame(kKappa, 3, 3);
    const StatePair h = invert_L_baromega(k.r0.eta, k.r0.psi, kKappa);
    CHECK(h.eta.max_abs() < 1e-15);
    CHECK((h.psi - Field2D::trig(3, 3, false, 1, true, 1)).max_abs() < 1e-15);
    try {
        invert_L_baromega(k.z0.eta, k.z0.psi, kKappa);
        CHECK(false);
    } catch (const SolvabilityError& e) {
        // z0 has f11 = 1, g11 = wb.
        CHECK(e.defect == doctest::Approx(2.0 * k.omega_bar));
    }
}

TEST_CASE("projection rule")
{
    const KernelFrame k = build_kernel_frame(kKappa, 3, 3);
    CHECK(project_mode11(0, 0, k.omega_bar) == std::pair<double, double>{0.0, 0.0});
    for (auto [p, q] : {std::pair{0.3, -1.2}, std::pair{2.0, 0.5}}) {
        const auto [lr, lz] = project_mode11(p, q, k.omega_bar);
        const StatePair rec = k.r0 * lr + k.z0 * lz;
        const auto [p2, q2] = mode11_coordinates(rec);
        CHECK(p2 == doctest::Approx(p).epsilon(1e-14));
        CHECK(q2 == doctest::Approx(q).epsilon(1e-14));
    }
    const StatePair t2 = quadratic_T2(k.v0, k.v0);
    const auto [p, q] = mode11_coordinates(t2);
    CHECK(std::abs(p) + std::abs(q) < 1e-15);
}

TEST_CASE("second order matches the closed forms")
{
    const ApproxSolution a = build_approx_solution(kKappa, 0.01, 1.0);
    const int L = a.w2.eta.L(), J = a.w2.eta.J();
    const double k = kKappa;
    const StatePair w2{Field2D::trig(L, J, true, 0, true, 2, alpha02(k)) + Field2D::trig(L, J, true, 2, true, 2, alpha22(k)),
                       Field2D::trig(L, J, false, 2, true, 2, beta22(k))};
    CHECK((a.w2 - w2).max_abs() < 1e-10);
    CHECK(a.omega2_bar == doctest::Approx(omega2_bar_formula(k)).epsilon(1e-10));
    // Fourth-order (1,1) projection vanishes by parity of the modes.
    CHECK(std::abs(a.omega3_bar) < 1e-10);
    CHECK(std::abs(a.b4) < 1e-10);
}

TEST_CASE("frequency coefficients depend only on kappa")
{
    const ApproxSolution a = build_approx_solution(kKappa, 0.004, 1.3);
    const ApproxSolution b = build_approx_solution(kKappa, 0.009, 1.9);
    CHECK(a.omega2_bar == doctest::Approx(b.omega2_bar).epsilon(1e-12));
    CHECK(std::abs(a.omega3_bar - b.omega3_bar) < 1e-12);
    CHECK(a.b3 == doctest::Approx(b.b3).epsilon(1e-10));
    CHECK((a.w3 - b.w3).max_abs() < 1e-10);
}

TEST_CASE("twist polynomial root")
{
    const double r = twist_root();
    CHECK(r > 0.265);
    CHECK(r < 0.266);
    CHECK(std::abs(twist_polynomial(r)) < 1e-12);
    boost::uintmax_t it = 200;
    auto z = boost::math::tools::bisect([](double k) { return omega2_bar_formula(k); }, 0.2, 0.3,
                                        boost::math::tools::eps_tolerance<double>(50), it);
    CHECK(std::abs(0.5 * (z.first + z.second) - r) < 1e-10);
    CHECK_THROWS_AS(build_approx_solution(r, 0.01, 1.0), TwistError);
}

TEST_CASE("approximate solution structure")
{
    ApproxOptions opt;
    opt.L = opt.J = 10;
    const ApproxSolution a = build_approx_solution(kKappa, 0.005, 1.5, opt);
    for (int k = 1; k <= 4; ++k) {
        CHECK(parity_distance(a.orders[k].eta, ParityClass::X) < 1e-12);
        CHECK(parity_distance(a.orders[k].psi, ParityClass::Y) < 1e-12);
        for (int l = -10; l <= 10; ++l)
            for (int j = -10; j <= 10; ++j)
                if (std::abs(l) > 5 || std::abs(j) > 5) {
                    CHECK(std::abs(a.orders[k].eta(l, j)) < 1e-14);
                    CHECK(std::abs(a.orders[k].psi(l, j)) < 1e-14);
                }
    }
    CHECK(a.omega == doctest::Approx(a.omega_bar + 0.005 * 0.005 * 1.5 * a.omega2_bar));
}

TEST_CASE("residual of the approximate solution is fifth order")
{
    ApproxOptions opt;
    opt.L = opt.J = 12;
    std::vector<double> es, rs;
    for (double e : {0.002, 0.004, 0.008}) {
        const ApproxSolution a = build_approx_solution(kKappa, e, 1.5, opt);
        es.push_back(e);
        rs.push_back(norm(evaluate_F(a.u_bar, a.omega, kKappa), 4.0));
    }
    CHECK(fit_loglog(es, rs).slope == doctest::Approx(5.0).epsilon(0.06));
}
