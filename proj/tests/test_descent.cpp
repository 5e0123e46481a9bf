#include "doctest.h"

#include "sww/bifurcation.hpp"
#include "sww/descent.hpp"
#include "sww/numerics.hpp"

#include <cmath>
#include <map>
#include <random>

using namespace sww;

namespace {

const double kKappa = std::sqrt(2.0) - 1.0;

ApproxSolution approx(double eps, int n = 12)
{
    ApproxOptions opt;
    opt.L = opt.J = n;
    return build_approx_solution(kKappa, eps, 1.5, opt);
}

const DescentResult& descent_at(double eps)
{
    static std::map<double, DescentResult> cache;
    auto it = cache.find(eps);
    if (it == cache.end()) {
        const ApproxSolution a = approx(eps);
        it = cache.emplace(eps, build_descent(a.u_bar, a.omega, kKappa)).first;
    }
    return it->second;
}

Field2D random_complex(int L, int J, unsigned seed)
{
    std::mt19937 rng(seed);
    std::normal_distribution<double> n(0.0, 1.0);
    Field2D f(L, J, false);
    for (int l = -L; l <= L; ++l)
        for (int j = -J; j <= J; ++j) f(l, j) = cd(n(rng), n(rng)) / bracket(l, j);
    return f;
}

// Direct sum over modes, independent of the grid implementation.
cd fio_point(const FioOp& A, const Field2D& h, double t, double x)
{
    cd s = 0.0;
    const double b = evaluate(A.beta, t, x).real();
    for (int l = -h.L(); l <= h.L(); ++l)
        for (int j = -h.J(); j <= h.J(); ++j) {
            if (h(l, j) == cd(0.0)) continue;
            const double f = std::sqrt(std::abs(double(j)));
            s += h(l, j) * A.amplitude(t, x, j) * std::polar(1.0, l * t + j * x + (j == 0 ? 0.0 : f * b));
        }
    return s;
}

double spread(const std::vector<double>& v)
{
    return *std::max_element(v.begin(), v.end()) / *std::min_element(v.begin(), v.end());
}

Field2D cos_x(int J, double a, int j = 1)
{
    Field2D b(0, J);
    b(0, j) = b(0, -j) = a / 2.0;
    return b;
}

}  // namespace

TEST_CASE("flat state gives the bare dispersion and the identity operator")
{
    const StatePair z = StatePair::zeros(6, 6);
    const DescentResult d = build_descent(z, 1.3, kKappa);
    CHECK(d.phase.beta.max_abs() == 0.0);
    CHECK(d.phase.lambda1 == 0.0);
    CHECK(d.amplitude.lambda_m1 == doctest::Approx(0.0).epsilon(1e-15));
    for (int s : {1, -1}) {
        CHECK((d.amplitude.layers[0].at(s) - Field2D::constant(6, 6, 1.0)).max_abs() < 1e-14);
        for (int m = 1; m < 4; ++m) CHECK(d.amplitude.layers[static_cast<std::size_t>(m)].at(s).max_abs() < 1e-14);
    }
    for (int j : {1, 2, 5, 30})
        CHECK(d.diag.mu(j) == doctest::Approx(std::sqrt(j + kKappa * j * j * j)).epsilon(1e-14));
    const Field2D h = random_complex(4, 6, 3);
    CHECK((fio_apply(d.A, h) - h).max_abs() < 1e-13);
}

TEST_CASE("lambda1 is non-positive, quadratic in the amplitude and matches the state formula")
{
    std::vector<double> es, l1, lm1;
    for (double e : {0.0025, 0.005, 0.01}) {
        const DescentResult& d = descent_at(e);
        const ApproxSolution a = approx(e);
        CHECK(d.phase.lambda1 <= 0.0);
        CHECK(std::abs(d.phase.lambda1 - lambda1_from_state(a.u_bar, a.omega, kKappa)) < 1e-8);
        CHECK(std::abs(d.amplitude.sign_mismatch) < 1e-12);
        es.push_back(e);
        l1.push_back(std::abs(d.phase.lambda1));
        lm1.push_back(std::abs(d.phase.lambda1) + std::abs(d.amplitude.lambda_m1));
    }
    CHECK(fit_loglog(es, l1).slope == doctest::Approx(2.0).epsilon(0.1));
    CHECK(fit_loglog(es, lm1).slope == doctest::Approx(2.0).epsilon(0.1));
}

TEST_CASE("phase and amplitude parities")
{
    const DescentResult& d = descent_at(0.01);
    const double tol = 1e-10;
    // The phase is odd in t and even in x.
    CHECK(parity_distance(d.phase.beta1, ParityClass::Y) < tol);
    CHECK(parity_distance(d.phase.beta0, ParityClass::Y) < tol);
    CHECK(d.phase.beta0.resized(d.phase.beta0.L(), 0).max_abs() == doctest::Approx(d.phase.beta0.max_abs()));
    CHECK(d.phase.beta.hermitian_defect() < tol);
    // f = a + i sign(j) b with a in X and b even in t, odd in x.
    const auto [a, b] = d.amplitude.f.split_sign_imag();
    CHECK(a.hermitian_defect() < tol);
    CHECK(b.hermitian_defect() < tol);
    CHECK(parity_distance(a, ParityClass::X) < tol);
    CHECK(parity_distance(b, ParityClass::EvenT_OddX) < tol);
    for (int s : {1, -1}) {
        CHECK(apply(mult::pi0(), d.amplitude.b0.at(s)).max_abs() < tol);
        CHECK(std::abs(d.amplitude.r1.at(s)(0, 0)) < 1e-12);
    }
}

TEST_CASE("mismatched averages are rejected")
{
    const DescentResult& d = descent_at(0.005);
    PhaseData bad = d.phase;
    bad.lambda1 += 1e-3;
    CHECK_THROWS_AS(build_amplitude(d.reduction.chain(), bad), DescentError);
}

TEST_CASE("operator apply agrees with the direct mode sum and is bounded")
{
    const DescentResult& d = descent_at(0.01);
    const Field2D h = random_complex(3, 8, 11);
    const Field2D Ah = fio_apply(d.A, h, 10, 24);
    double err = 0.0;
    for (double t : {0.3, 1.7, 4.1})
        for (double x : {0.2, 2.9, 5.5}) err = std::max(err, std::abs(evaluate(Ah, t, x) - fio_point(d.A, h, t, x)));
    CHECK(err < 1e-9);
    CHECK(sobolev_norm(Ah, 0) <= 2.0 * sobolev_norm(h, 0));

    const FioOp I = FioOp::identity(3, 8);
    CHECK((fio_apply(I, h) - h).max_abs() < 1e-13);
}

TEST_CASE("inverse round trip is certified")
{
    const DescentResult& d = descent_at(0.01);
    const Field2D g = random_complex(4, 10, 5);
    // Output table wide enough to hold the spreading of every mode.
    const Field2D h = fio_apply(d.A, g, 24, 64);
    FioInverseReport rep;
    const Field2D back = fio_invert(d.A, h, &rep);
    CHECK(rep.certified);
    CHECK(rep.certificate < 1e-8);
    CHECK(sobolev_norm(back - g.resized(24, 64), 0) < 1e-8 * sobolev_norm(g, 0));

    const Field2D k = random_complex(3, 6, 9);
    CHECK((fio_invert(FioOp::identity(3, 6), k) - k).max_abs() < 1e-12);
}

TEST_CASE("normal matrix is a small perturbation of 2 pi I")
{
    const int K = 48;
    std::vector<double> sizes, defects;
    for (double a : {1e-3, 1e-2, 1e-1}) {
        const Field2D beta = cos_x(4, a) + cos_x(4, 0.3 * a, 3);
        const NormalMatrixReport r = fio_normal_matrix(beta, K);
        for (int k = 0; k < 2 * K + 1; ++k) CHECK(std::abs(r.M(k, k) - 2.0 * kPi) < 1e-10);
        sizes.push_back(sobolev_norm(beta, 3));
        defects.push_back(r.defect);
        const Eigen::MatrixXcd Id = Eigen::MatrixXcd::Identity(2 * K + 1, 2 * K + 1);
        CHECK((r.M / (2.0 * kPi) * r.M_inv - Id).norm() < 1e-12);
    }
    const double r0 = defects[0] / sizes[0];
    for (std::size_t i = 1; i < sizes.size(); ++i) {
        CHECK(defects[i] / sizes[i] < 2.0 * r0);
        CHECK(defects[i] / sizes[i] > 0.5 * r0);
    }
}

TEST_CASE("normal matrix off-diagonal entries decay like |k - j|^-2")
{
    const int K = 48;
    const Field2D beta = cos_x(4, 0.05) + cos_x(4, 0.02, 2);
    const NormalMatrixReport r = fio_normal_matrix(beta, K);
    double worst = 0.0;
    for (int k = -K; k <= K; ++k)
        for (int j = -K; j <= K; ++j) {
            if (j == k) continue;
            const double d = std::abs(double(k - j));
            worst = std::max(worst, std::abs(r.M(k + K, j + K)) * d * d);
        }
    CHECK(worst < 10.0 * sobolev_norm(beta, 3));

    // Amplitude perturbation keeps the diagonal at the weighted mean.
    const Field2D b = cos_x(4, 0.1, 2);
    const NormalMatrixReport rb = fio_normal_matrix(beta, 8, &b);
    CHECK(std::abs(rb.M(8, 8) - 2.0 * kPi * (1.0 + 0.005)) < 1e-10);
}

TEST_CASE("a large phase makes the Neumann series diverge")
{
    const Field2D beta = cos_x(4, 3.0) + cos_x(4, 2.0, 3);
    CHECK_THROWS_AS(fio_normal_matrix(beta, 24), NeumannDivergence);
}

TEST_CASE("composition with |D|^r follows the symbol expansion")
{
    const Field2D beta = cos_x(4, 0.25);
    std::vector<int> modes;
    for (double k = 1000.0; k <= 100000.0; k *= 1.8) modes.push_back(static_cast<int>(k));
    const double r = 1.5, m = 0.0;
    const CompositionProbe p = fio_compose_Dr(beta, r, m, 8, modes, false, 1.0);
    for (std::size_t i = 0; i < modes.size(); ++i) {
        // B_0 e_k = |k|^r A e_k, and |A e_k| = 1 pointwise.
        CHECK(p.norms[0][i] == doctest::Approx(std::pow(double(modes[i]), r)).epsilon(1e-10));
    }
    for (int al = 0; al <= 3; ++al) {
        INFO("alpha " << al);
        CHECK(std::abs(p.orders[static_cast<std::size_t>(al)] - (r - al / 2.0)) < 0.1);
    }
    // R_N is of order r - N/2; times |k|^m it stays bounded on this range.
    double rmax = 0.0;
    for (double v : p.remainder) rmax = std::max(rmax, v);
    CHECK(rmax < 1.0);

    const CompositionProbe ph = fio_compose_Dr(beta, 0.5, 0.0, 6, modes, true, 1.0);
    CHECK(ph.orders[1] == doctest::Approx(0.0).epsilon(0.1));
    for (double v : ph.remainder) CHECK(v < 1.0);

    CHECK_THROWS_AS(fio_compose_Dr(beta, r, 2.0, 8, modes, false, 1.0), std::invalid_argument);
}

TEST_CASE("diagonal operator")
{
    const DiagonalData d = assemble_diagonal(1.01, -0.02, 0.003, kKappa, 1.4);
    CHECK(d.mu(0) == 0.0);
    CHECK(d.mu(-3) == d.mu(3));
    CHECK(d.mu(4) == doctest::Approx(1.01 * std::sqrt(4.0 + kKappa * 64.0) - 0.02 * 2.0 + 0.003 / 2.0).epsilon(1e-15));
    const std::vector<double> t = d.table(5);
    CHECK(t.size() == 6);
    CHECK(t[5] == d.mu(5));
    const Field2D h = random_complex(3, 5, 2);
    const Field2D Dh = d.apply(h);
    CHECK(Dh(2, -3) == h(2, -3) * cd(0.0, 1.4 * 2 + d.mu(3)));
    const Field2D back = d.apply_inv(Dh);
    CHECK(back(0, 0) == cd(0.0));
    Field2D hz = h;
    hz(0, 0) = 0.0;
    CHECK((back - hz).max_abs() < 1e-13);
}

TEST_CASE("descent remainder is of order -3/2 uniformly in j and first order in the amplitude")
{
    std::vector<double> es, sizes;
    for (double e : {0.0025, 0.005, 0.01}) {
        const DescentResult& d = descent_at(e);
        const DescentProbe p = descent_remainder_probe(d, {0, 1}, {4, 6, 8, 11, 16}, 12, 40);
        INFO("eps " << e);
        CHECK(spread(p.residual) < 3.0);
        es.push_back(e);
        sizes.push_back(*std::max_element(p.residual.begin(), p.residual.end()));
    }
    CHECK(fit_loglog(es, sizes).slope >= 1.0 - 0.05);
}

TEST_CASE("each amplitude layer gains half an order")
{
    const DescentResult& d = descent_at(0.01);
    const std::vector<int> js{8, 12, 16, 24, 32};
    std::vector<double> slopes;
    for (int orders = -1; orders <= 4; ++orders) {
        DescentResult v = d;
        if (orders < 0)
            v.A = FioOp::identity(12, 12);
        else
            v.A.orders = orders;
        const DescentProbe p = descent_remainder_probe(v, {0}, js, 12, 64);
        std::vector<double> xs, unweighted;
        for (std::size_t i = 0; i < js.size(); ++i) {
            xs.push_back(js[i]);
            unweighted.push_back(p.residual[i] / std::pow(js[i], 1.5));
        }
        slopes.push_back(fit_loglog(xs, unweighted).slope);
    }
    const double expect[] = {1.0, 0.5, 0.0, -0.5, -1.0, -1.5};
    for (std::size_t i = 0; i < slopes.size(); ++i) {
        INFO("layers " << int(i) - 1 << " slope " << slopes[i]);
        CHECK(std::abs(slopes[i] - expect[i]) < 0.2);
    }
}
