#include <doctest.h>

#include <cmath>

#include "robustgan/errors.hpp"
#include "robustgan/rng.hpp"
#include "robustgan/robust_baselines.hpp"
#include "robustgan/sim_harness.hpp"

using namespace robustgan;

TEST_SUITE("robust_baselines") {

TEST_CASE("kendall_tau on perfectly ordered sequences") {
    CHECK(kendall_tau(Vector{1, 2, 3}, Vector{1, 2, 3}) == 1.0);
    CHECK(kendall_tau(Vector{1, 2, 3}, Vector{3, 2, 1}) == -1.0);
    CHECK_THROWS_AS(kendall_tau(Vector{1.0}, Vector{1.0}), InvalidInput);
    CHECK_THROWS_AS(kendall_tau(Vector{1, 2}, Vector{1, 2, 3}), InvalidInput);
}

TEST_CASE("sine-transformed tau recovers the Gaussian correlation") {
    // Greiner identity: tau = (2/pi) arcsin(rho) for bivariate Gaussians.
    Rng rng(404);
    const std::size_t n = 20000;
    const double rho = 0.5;
    Vector x(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double a = rng.normal(), b = rng.normal();
        x[i] = a;
        y[i] = rho * a + std::sqrt(1.0 - rho * rho) * b;
    }
    const double tau = kendall_tau(x, y);
    CHECK(std::abs(std::sin(M_PI * tau / 2.0) - rho) < 0.03);
}

TEST_CASE("tau is invariant to strictly increasing marginal transforms") {
    Rng rng(405);
    Vector x(200), y(200), ex(200);
    for (std::size_t i = 0; i < 200; ++i) {
        x[i] = rng.normal();
        y[i] = 0.3 * x[i] + rng.normal();
        ex[i] = std::exp(x[i]);
    }
    CHECK(kendall_tau(x, y) == kendall_tau(ex, y));
}

TEST_CASE("mad examples") {
    CHECK(mad(Vector{1, 1, 1}) == 0.0);
    CHECK(mad(Vector{1, 2, 3, 4, 5}) == doctest::Approx(1.4826));
    CHECK(mad(Vector{1, 2, 3, 4, 5}, 1.0) == doctest::Approx(1.0));
}

TEST_CASE("mad is Gaussian-consistent for the scale") {
    Rng rng(406);
    Vector x(20000);
    for (double& v : x) v = 2.0 * rng.normal();  // N(0, 4), scale 2
    CHECK(std::abs(mad(x) - 2.0) < 0.06);
}

TEST_CASE("median handles even lengths by averaging") {
    CHECK(median(Vector{3, 1, 2, 4}) == doctest::Approx(2.5));
    CHECK(median(Vector{5}) == 5.0);
    CHECK_THROWS_AS(median(Vector{}), InvalidInput);
}

TEST_CASE("kendall_mad_cov on independent standard normals") {
    Rng rng(407);
    const Matrix data = sample_std_normal(5000, 3, rng);
    const PairwiseCovEstimate est = kendall_mad_cov(data);
    for (std::size_t a = 0; a < 3; ++a)
        for (std::size_t b = 0; b < 3; ++b) {
            const double target = a == b ? 1.0 : 0.0;
            CHECK(std::abs(est.sigma(a, b) - target) < 0.05);
        }
    CHECK(est.degenerate_cols.empty());
}

TEST_CASE("kendall_mad_cov structure") {
    Rng rng(408);
    const Matrix data = sample_std_normal(300, 4, rng);
    const PairwiseCovEstimate est = kendall_mad_cov(data);
    // exact symmetry, diagonal = scales^2, |sin transform| <= 1
    for (std::size_t a = 0; a < 4; ++a) {
        CHECK(est.sigma(a, a) ==
              doctest::Approx(est.scales[a] * est.scales[a]).epsilon(1e-14));
        CHECK(est.tau_matrix(a, a) == 1.0);
        for (std::size_t b = 0; b < 4; ++b) {
            CHECK(est.sigma(a, b) == est.sigma(b, a));
            CHECK(std::abs(est.tau_matrix(a, b)) <= 1.0);
        }
    }
}

TEST_CASE("kendall_mad_cov in one dimension is the squared MAD") {
    Rng rng(409);
    Matrix data(50, 1);
    Vector col(50);
    for (std::size_t i = 0; i < 50; ++i) {
        data(i, 0) = rng.normal();
        col[i] = data(i, 0);
    }
    const PairwiseCovEstimate est = kendall_mad_cov(data);
    CHECK(est.sigma(0, 0) == doctest::Approx(mad(col) * mad(col)).epsilon(1e-14));
}

TEST_CASE("degenerate column is flagged and floored") {
    Matrix data(6, 2);
    for (std::size_t i = 0; i < 6; ++i) {
        data(i, 0) = 2.0;
        data(i, 1) = static_cast<double>(i);
    }
    const PairwiseCovEstimate est = kendall_mad_cov(data);
    REQUIRE(est.degenerate_cols.size() == 1);
    CHECK(est.degenerate_cols[0] == 0);
    CHECK(est.scales[0] == 1e-6);
}

TEST_CASE("contaminated Q1 run lands in the published error band") {
    // eps = 0.10, p = 10, n = 2000 against the Toeplitz truth.
    ContaminationSpec spec;
    spec.eps = 0.10;
    spec.q_kind = QKind::alt_corner;
    const LabeledSample sample = generate(2000, 10, spec, 31415);
    const PairwiseCovEstimate est = kendall_mad_cov(sample.x);
    const Matrix truth = toeplitz(10, 0.5);
    Matrix diff = est.sigma;
    for (std::size_t a = 0; a < 10; ++a)
        for (std::size_t b = 0; b < 10; ++b) diff(a, b) -= truth(a, b);
    const double err = max_norm(diff);
    CHECK(err >= 0.30);
    CHECK(err <= 0.55);
}

}  // TEST_SUITE
