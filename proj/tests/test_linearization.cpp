#include "doctest.h"

#include "sww/bifurcation.hpp"
#include "sww/linearization.hpp"
#include "sww/numerics.hpp"

#include <cmath>
#include <random>

using namespace sww;

namespace {

const double kKappa = std::sqrt(2.0) - 1.0;

Field2D random_band(int L, int J, unsigned seed, double amp, int band, ParityClass c)
{
    std::mt19937 rng(seed);
    std::normal_distribution<double> n(0.0, 1.0);
    Field2D f(L, J, false);
    for (int l = -std::min(band, L); l <= std::min(band, L); ++l)
        for (int j = -std::min(band, J); j <= std::min(band, J); ++j)
            f(l, j) = amp * cd(n(rng), n(rng)) / std::pow(bracket(l, j), 2);
    f.symmetrize();
    return parity_project(f, c);
}

StatePair random_xy(int L, int J, unsigned seed, double amp = 1.0, int band = 3)
{
    return {random_band(L, J, seed, amp, band, ParityClass::X), random_band(L, J, seed + 50, amp, band, ParityClass::Y)};
}

// Zero the modes in the outer tenth of the table.
StatePair interior(const StatePair& u)
{
    StatePair r = u;
    const int L = u.eta.L(), J = u.eta.J();
    for (int l = -L; l <= L; ++l)
        for (int j = -J; j <= J; ++j)
            if (std::abs(l) > 0.9 * L || std::abs(j) > 0.9 * J) r.eta(l, j) = r.psi(l, j) = 0.0;
    return r;
}

ApproxSolution approx(double eps, int n = 16)
{
    ApproxOptions opt;
    opt.L = opt.J = n;
    return build_approx_solution(kKappa, eps, 1.5, opt);
}

}  // namespace

TEST_CASE("linearization at zero is the constant-coefficient operator")
{
    const StatePair z = StatePair::zeros(6, 8);
    const StatePair h = random_xy(6, 8, 1);
    const LinearizedOp op = build_linearized(z, 1.3, kKappa);
    CHECK((op.apply(h) - linear_L(h, 1.3, kKappa)).max_abs() < 1e-14);
    CHECK((op.a - Field2D::constant(6, 8, 1.0)).max_abs() < 1e-15);
    CHECK((op.c - Field2D::constant(6, 8, 1.0)).max_abs() < 1e-15);
    CHECK((op.Z(h) - h).max_abs() == 0.0);
}

TEST_CASE("linearized operator matches a finite difference of F")
{
    const ApproxSolution a = approx(0.005);
    const StatePair h = random_xy(16, 16, 3);
    const double d = 1e-6;
    const StatePair fd = (evaluate_F(a.u_bar + h * d, a.omega, kKappa) - evaluate_F(a.u_bar - h * d, a.omega, kKappa)) *
                         (0.5 / d);
    const StatePair lin = linearized_apply(a.u_bar, a.omega, kKappa, h);
    CHECK(norm(lin - fd, 0) < 1e-6 * norm(fd, 0));
}

TEST_CASE("linearized operator maps X x Y to Y x X")
{
    const ApproxSolution a = approx(0.005, 10);
    const StatePair r = linearized_apply(a.u_bar, a.omega, kKappa, random_xy(10, 10, 5));
    CHECK(parity_distance(r.eta, ParityClass::Y) < 1e-12);
    CHECK(parity_distance(r.psi, ParityClass::X) < 1e-12);
}

TEST_CASE("good unknown conjugation")
{
    const ApproxSolution a = approx(0.008, 20);
    const GoodUnknownFactor g = good_unknown_factor(a.u_bar, a.omega, kKappa);
    const LinearizedOp op = build_linearized(a.u_bar, a.omega, kKappa);
    for (unsigned seed : {7u, 8u, 9u}) {
        const StatePair h = random_xy(20, 20, seed, 1.0, 6);
        const StatePair lhs = op.apply(g.Z(h));
        const StatePair rhs = g.Z(g.L0(h));
        CHECK(norm(interior(lhs - rhs), 0) < 1e-9);
        CHECK((g.Z_inv(g.Z(h)) - h).max_abs() < 1e-15);
    }
}

TEST_CASE("space projections")
{
    const double wb = std::sqrt(1.0 + kKappa);
    const KernelFrame k = build_kernel_frame(kKappa, 4, 4);
    CHECK(project_W(k.v0, wb).max_abs() < 1e-15);
    CHECK((project_W(k.w0, wb) - k.w0).max_abs() < 1e-15);
    CHECK(project_R(k.z0, wb).max_abs() < 1e-15);
    CHECK((project_R(k.r0, wb) - k.r0).max_abs() < 1e-15);
    const StatePair h = random_xy(4, 4, 11);
    CHECK((project_W(project_W(h, wb), wb) - project_W(h, wb)).max_abs() < 1e-15);
    CHECK((low_space(h) + high_space(h) - h).max_abs() == 0.0);
}

TEST_CASE("low-frequency linear inverse follows the closed form")
{
    const int L = 6, J = 6;
    const double om = 1.21, wb = std::sqrt(1.0 + kKappa);
    const BlockDecomposition b = restrict_blocks(StatePair::zeros(L, J), om, kKappa);
    for (int l = 2; l <= 4; ++l) {
        const double fl = 0.7, gl = -0.3;
        const StatePair f{Field2D::trig(L, J, false, l, true, 1, fl), Field2D::trig(L, J, true, l, true, 1, gl)};
        const StatePair h = b.invert_linear01(f);
        const double den = om * om * l * l - wb * wb;
        const StatePair expect{Field2D::trig(L, J, true, l, true, 1, (-om * l * fl - gl) / den),
                               Field2D::trig(L, J, false, l, true, 1, (wb * wb * fl + om * l * gl) / den)};
        CHECK((h - expect).max_abs() < 1e-15);
    }
    // Mean-in-space part is the triangular system.
    const StatePair f0{Field2D::trig(L, J, false, 2, true, 0, 1.0), Field2D::trig(L, J, true, 3, true, 0, 1.0)};
    const StatePair h0 = b.invert_linear01(f0);
    CHECK((linear_L(h0, om, kKappa) - f0).max_abs() < 1e-15);
    // Kernel block: r0 comes from alpha^{-1} w0.
    const KernelFrame k = build_kernel_frame(kKappa, L, J);
    const double alpha = (om + wb) * (1.0 + wb * wb) / (2.0 * wb);
    CHECK((b.invert_linear01(k.r0) - k.w0 * (1.0 / alpha)).max_abs() < 1e-15);
}

TEST_CASE("low-frequency block inverse")
{
    const ApproxSolution a = approx(0.005, 12);
    const BlockDecomposition b = restrict_blocks(a.u_bar, a.omega, kKappa);
    const StatePair h = low_space(project_W(random_xy(12, 12, 13), b.omega_bar));
    NeumannReport rep;
    const StatePair back = b.invert_L0101(b.L01_01(h), &rep);
    CHECK(norm(back - h, 0) < 1e-9 * norm(h, 0));
    CHECK(rep.contraction < 0.5);
    CHECK(rep.iterations >= 1);
}

TEST_CASE("Schur remainder")
{
    const StatePair h = high_space(project_W(random_xy(10, 10, 17), std::sqrt(1.0 + kKappa)));
    const BlockDecomposition zero = restrict_blocks(StatePair::zeros(10, 10), 1.2, kKappa);
    CHECK(zero.remainder(h).max_abs() < 1e-15 * h.max_abs());

    // Size on |D|^{3/2}-weighted modes scales at least linearly with the amplitude.
    std::vector<double> es, rs;
    for (double e : {0.002, 0.004, 0.008}) {
        const ApproxSolution a = approx(e, 12);
        const BlockDecomposition b = restrict_blocks(a.u_bar, a.omega, kKappa);
        double worst = 0.0;
        for (int j = 2; j <= 6; ++j) {
            const StatePair ej{Field2D::trig(12, 12, true, 1, true, j, std::pow(j, 1.5)), Field2D(12, 12)};
            worst = std::max(worst, norm(b.remainder(ej), 0));
        }
        es.push_back(e);
        rs.push_back(worst);
    }
    MESSAGE("remainder slope " << fit_loglog(es, rs).slope);
    CHECK(fit_loglog(es, rs).slope >= 1.0);
}

TEST_CASE("parity basis and densification")
{
    const ParityBasis xy(ParityBasis::Kind::XY, 5), yx(ParityBasis::Kind::YX, 5);
    CHECK(xy.size() == 15 + 10);
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> U(-1, 1);
    std::vector<double> x(static_cast<std::size_t>(xy.size()));
    for (auto& v : x) v = U(rng);
    const StatePair s = xy.synthesize(x, 6, 6);
    CHECK(parity_distance(s.eta, ParityClass::X) < 1e-15);
    CHECK(parity_distance(s.psi, ParityClass::Y) < 1e-15);
    const std::vector<double> back = xy.coordinates(s);
    for (int k = 0; k < xy.size(); ++k) CHECK(back[k] == doctest::Approx(x[k]).epsilon(1e-14));
    for (int k = 0; k < xy.size(); ++k) {
        std::vector<double> e(static_cast<std::size_t>(xy.size()));
        e[k] = 1.0;
        CHECK((xy.vector(k, 6, 6) - xy.synthesize(e, 6, 6)).max_abs() < 1e-16);
    }

    // Dense matrix of L_omega acts like the operator itself.
    const double om = 1.1;
    const std::vector<double> M = densify([&](const StatePair& h) { return linear_L(h, om, kKappa); }, xy, yx, 6, 6);
    const std::vector<double> y = yx.coordinates(linear_L(s, om, kKappa));
    for (int r = 0; r < yx.size(); ++r) {
        double acc = 0.0;
        for (int c = 0; c < xy.size(); ++c) acc += M[static_cast<std::size_t>(c) * yx.size() + r] * x[c];
        CHECK(acc == doctest::Approx(y[r]).epsilon(1e-12));
    }
    const std::string mm = matrix_market({1.0, 0.0, 0.0, 2.0}, 2, 2);
    CHECK(mm.rfind("%%MatrixMarket", 0) == 0);
    CHECK(mm.find("2 2 2\n") != std::string::npos);
}
