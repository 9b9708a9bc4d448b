#include <doctest.h>

#include <cmath>

#include "robustgan/errors.hpp"
#include "robustgan/rng.hpp"
#include "robustgan/spline.hpp"
#include "test_support.hpp"

using namespace robustgan;

namespace {

SplineCoeffs random_coeffs(std::size_t m, Rng& rng, double scale = 0.5) {
    SplineCoeffs c = SplineCoeffs::zeros(m);
    c.gamma0 = scale * rng.normal();
    for (double& v : c.gamma1) v = scale * rng.normal();
    for (double& v : c.gamma2_packed) v = 0.3 * scale * rng.normal();
    return c;
}

}  // namespace

TEST_SUITE("spline_disc") {

TEST_CASE("basis at the default knots") {
    SplineBasisConfig cfg;
    cfg.p = 1;
    const Vector phi = basis(cfg, Vector{0.0});
    REQUIRE(phi.size() == 5);
    CHECK(phi[0] == 2.0);
    CHECK(phi[1] == 1.0);
    CHECK(phi[2] == 0.0);
    CHECK(phi[3] == 0.0);
    CHECK(phi[4] == 0.0);

    SplineBasisConfig cfg2;
    cfg2.p = 2;
    const Vector phi2 = basis(cfg2, Vector{3.0, -3.0});
    const Vector expect{5, 0, 4, 0, 3, 0, 2, 0, 1, 0};
    REQUIRE(phi2.size() == expect.size());
    for (std::size_t i = 0; i < expect.size(); ++i) CHECK(phi2[i] == expect[i]);

    // a coordinate exactly at a knot contributes zero at that hinge
    const Vector phi3 = basis(cfg, Vector{-1.0});
    CHECK(phi3[1] == 0.0);
}

TEST_CASE("eval examples") {
    SplineBasisConfig cfg;
    cfg.p = 1;
    const std::size_t m = cfg.n_features();

    const SplineCoeffs zero = SplineCoeffs::zeros(m);
    CHECK(eval_point(cfg, zero, Vector{0.7}) == 0.0);

    SplineCoeffs c = SplineCoeffs::zeros(m);
    c.gamma0 = 1.0;
    c.gamma1[0] = 1.0;  // knot -2, coordinate 1
    CHECK(eval_point(cfg, c, Vector{0.0}) == doctest::Approx(3.0));
}

TEST_CASE("eval matches a naive double loop over ordered pairs") {
    SplineBasisConfig cfg;
    cfg.p = 3;
    const std::size_t m = cfg.n_features();
    Rng rng(31);
    for (int rep = 0; rep < 10; ++rep) {
        const SplineCoeffs c = random_coeffs(m, rng);
        const Vector x{rng.normal(), rng.normal(), rng.normal()};
        const Vector phi = basis(cfg, x);
        double expect = c.gamma0;
        for (std::size_t a = 0; a < m; ++a) expect += c.gamma1[a] * phi[a];
        for (std::size_t a = 0; a < m; ++a)
            for (std::size_t b = 0; b < m; ++b) expect += c.gamma2_at(a, b) * phi[a] * phi[b];
        CHECK(eval_point(cfg, c, x) == doctest::Approx(expect).epsilon(1e-12));
    }
}

TEST_CASE("grad_input slopes") {
    SplineBasisConfig cfg;
    cfg.p = 1;
    SplineCoeffs c = SplineCoeffs::zeros(cfg.n_features());
    c.gamma1[0] = 1.0;  // hinge at -2
    CHECK(grad_input(cfg, c, Vector{0.0})[0] == 1.0);
    CHECK(grad_input(cfg, c, Vector{-3.0})[0] == 0.0);
    CHECK(grad_input(cfg, c, Vector{-2.0})[0] == 0.0);  // exactly at the knot
}

TEST_CASE("grad_input matches central finite differences off-knot") {
    SplineBasisConfig cfg;
    cfg.p = 2;
    const std::size_t m = cfg.n_features();
    Rng rng(32);
    int tested = 0;
    while (tested < 12) {
        const SplineCoeffs c = random_coeffs(m, rng);
        Vector x{1.7 * rng.normal(), 1.7 * rng.normal()};
        bool off = true;
        for (double v : x)
            for (double knot : cfg.knots)
                if (std::abs(v - knot) < 1e-3) off = false;
        if (!off) continue;
        ++tested;
        const Vector g = grad_input(cfg, c, x);
        for (std::size_t j = 0; j < 2; ++j) {
            Vector xp = x, xm = x;
            xp[j] += 1e-6;
            xm[j] -= 1e-6;
            const double fd = (eval_point(cfg, c, xp) - eval_point(cfg, c, xm)) / 2e-6;
            CHECK(g[j] == doctest::Approx(fd).epsilon(1e-5));
        }
    }
}

TEST_CASE("eval_batch equals per-row eval") {
    SplineBasisConfig cfg;
    cfg.p = 2;
    Rng rng(33);
    const SplineCoeffs c = random_coeffs(cfg.n_features(), rng);
    const Matrix x = test::random_matrix(1000, 2, rng, 1.4);
    const Vector batch = eval_batch(cfg, c, x);
    REQUIRE(batch.size() == 1000);
    for (std::size_t i = 0; i < x.rows(); ++i) {
        const Vector row{x(i, 0), x(i, 1)};
        CHECK(batch[i] == eval_point(cfg, c, row));
    }
}

TEST_CASE("design_row dotted with the flat coefficients equals eval") {
    SplineBasisConfig cfg;
    cfg.p = 2;
    const std::size_t m = cfg.n_features();
    Rng rng(34);
    for (int rep = 0; rep < 10; ++rep) {
        const SplineCoeffs c = random_coeffs(m, rng);
        const Vector x{rng.normal(), rng.normal()};
        const Vector row = design_row(cfg, x);
        double dot = row[0] * c.gamma0;
        for (std::size_t a = 0; a < m; ++a) dot += row[1 + a] * c.gamma1[a];
        for (std::size_t k = 0; k < c.gamma2_packed.size(); ++k)
            dot += row[1 + m + k] * c.gamma2_packed[k];
        CHECK(dot == doctest::Approx(eval_point(cfg, c, x)).epsilon(1e-12));
    }
}

TEST_CASE("evaluation is exactly linear in gamma") {
    SplineBasisConfig cfg;
    cfg.p = 2;
    const std::size_t m = cfg.n_features();
    Rng rng(35);
    const SplineCoeffs ca = random_coeffs(m, rng);
    const SplineCoeffs cb = random_coeffs(m, rng);
    const double a = 1.7, b = -0.4;
    for (int rep = 0; rep < 8; ++rep) {
        const Vector x{rng.normal(), rng.normal()};
        SplineCoeffs mix = SplineCoeffs::zeros(m);
        mix.gamma0 = a * ca.gamma0 + b * cb.gamma0;
        for (std::size_t k = 0; k < m; ++k) mix.gamma1[k] = a * ca.gamma1[k] + b * cb.gamma1[k];
        for (std::size_t k = 0; k < mix.gamma2_packed.size(); ++k)
            mix.gamma2_packed[k] = a * ca.gamma2_packed[k] + b * cb.gamma2_packed[k];
        const double lhs = eval_point(cfg, mix, x);
        const double rhs = a * eval_point(cfg, ca, x) + b * eval_point(cfg, cb, x);
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
    }
}

TEST_CASE("packed upper triangle agrees with a full symmetric matrix") {
    SplineBasisConfig cfg;
    cfg.p = 1;
    const std::size_t m = cfg.n_features();
    Rng rng(36);
    Matrix full(m, m);
    for (std::size_t a = 0; a < m; ++a)
        for (std::size_t b = a; b < m; ++b) full(a, b) = full(b, a) = 0.3 * rng.normal();
    const SplineCoeffs from_full = SplineCoeffs::from_full(0.2, Vector(m, 0.1), full);
    for (int rep = 0; rep < 8; ++rep) {
        const Vector x{1.5 * rng.normal()};
        const Vector phi = basis(cfg, x);
        double quad = 0.0;
        for (std::size_t a = 0; a < m; ++a)
            for (std::size_t b = 0; b < m; ++b) quad += full(a, b) * phi[a] * phi[b];
        double lin = 0.2;
        for (std::size_t a = 0; a < m; ++a) lin += 0.1 * phi[a];
        CHECK(eval_point(cfg, from_full, x) == doctest::Approx(lin + quad).epsilon(1e-12));
    }
}

TEST_CASE("ramp is exactly representable with two gamma1 entries") {
    // ramp(t) = (t+1)_+ / 2 - (t-1)_+ / 2; knots -1 and +1 are indices 1, 3.
    SplineBasisConfig cfg;
    cfg.p = 1;
    SplineCoeffs c = SplineCoeffs::zeros(cfg.n_features());
    c.gamma1[1] = 0.5;
    c.gamma1[3] = -0.5;
    for (double t = -3.0; t <= 3.0; t += 0.125) {
        const double ramp = 0.5 * std::max(t + 1.0, 0.0) - 0.5 * std::max(t - 1.0, 0.0);
        CHECK(eval_point(cfg, c, Vector{t}) == doctest::Approx(ramp).epsilon(1e-15));
    }
}

TEST_CASE("optional raw-coordinate features extend the basis") {
    SplineBasisConfig cfg;
    cfg.p = 2;
    cfg.include_linear = true;
    CHECK(cfg.n_features() == 12);
    const Vector phi = basis(cfg, Vector{0.5, -0.75});
    CHECK(phi[10] == 0.5);
    CHECK(phi[11] == -0.75);
}

TEST_CASE("knots must increase strictly") {
    SplineBasisConfig cfg;
    cfg.p = 1;
    cfg.knots = {0.0, 0.0, 1.0};
    CHECK_THROWS_AS(basis(cfg, Vector{0.0}), InvalidInput);
}

}  // TEST_SUITE
