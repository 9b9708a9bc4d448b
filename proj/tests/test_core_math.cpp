#include <doctest.h>

#include <cmath>
#include <limits>

#include "robustgan/core_math.hpp"
#include "robustgan/errors.hpp"
#include "robustgan/rng.hpp"
#include "test_support.hpp"

using namespace robustgan;

TEST_SUITE("core_math") {

TEST_CASE("chol_factor identity and diagonal cases") {
    const LowerFactor li = chol_factor(SymMatrix(Matrix::identity(3)), 1e-8);
    CHECK(li.mat() == Matrix::identity(3));

    Matrix d(2, 2);
    d(0, 0) = 4.0;
    d(1, 1) = 9.0;
    const LowerFactor ld = chol_factor(SymMatrix(d), 1e-8);
    CHECK(ld(0, 0) == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(ld(1, 1) == doctest::Approx(3.0).epsilon(1e-14));
    CHECK(ld(1, 0) == 0.0);
}

TEST_CASE("chol_factor repairs an indefinite matrix by clamping eigenvalues") {
    Matrix s(2, 2);
    s(0, 0) = 1.0;
    s(0, 1) = 2.0;
    s(1, 0) = 2.0;
    s(1, 1) = 1.0;  // eigenvalues 3 and -1
    const double eps_min = 1e-6;
    const LowerFactor l = chol_factor(SymMatrix(s), eps_min);
    const Matrix repaired = l.sigma();
    // 2x2 closed-form eigenvalues of L L^T must be (eps_min, 3).
    const auto [lo, hi] = test::eig2x2(repaired(0, 0), repaired(0, 1), repaired(1, 1));
    CHECK(lo == doctest::Approx(eps_min).epsilon(1e-6));
    CHECK(hi == doctest::Approx(3.0).epsilon(1e-10));
}

TEST_CASE("chol_factor rejects non-finite input") {
    Matrix s = Matrix::identity(2);
    s(0, 1) = s(1, 0) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(SymMatrix{s}, InvalidInput);
}

TEST_CASE("repaired factors stay PSD with clamped spectrum") {
    Rng rng(11);
    for (int rep = 0; rep < 20; ++rep) {
        Matrix a = test::random_matrix(4, 4, rng);
        const Matrix s = symmetrized(a);  // indefinite in general
        const LowerFactor l = chol_factor(SymMatrix(s), 1e-8);
        const EigenSym es = jacobi_eigen_sym(SymMatrix(l.sigma()));
        CHECK(es.values.front() >= 1e-8 * (1.0 - 1e-8));
    }
}

TEST_CASE("sym_inv_apply examples and multiply-back oracle") {
    const LowerFactor id(Matrix::identity(2));
    const Vector r = sym_inv_apply(id, Vector{1.0, 2.0});
    CHECK(r[0] == 1.0);
    CHECK(r[1] == 2.0);

    Matrix d(2, 2);
    d(0, 0) = 2.0;
    d(1, 1) = 4.0;
    const Vector r2 = sym_inv_apply(LowerFactor(d), Vector{2.0, 4.0});
    CHECK(r2[0] == doctest::Approx(1.0));
    CHECK(r2[1] == doctest::Approx(1.0));

    Rng rng(7);
    for (int rep = 0; rep < 10; ++rep) {
        Matrix lm(3, 3);
        for (std::size_t i = 0; i < 3; ++i) {
            lm(i, i) = 0.5 + rng.uniform01();
            for (std::size_t j = 0; j < i; ++j) lm(i, j) = rng.normal();
        }
        const LowerFactor l(lm);
        Vector v{rng.normal(), rng.normal(), rng.normal()};
        const Vector x = sym_inv_apply(l, v);
        // multiply back
        for (std::size_t i = 0; i < 3; ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j <= i; ++j) s += lm(i, j) * x[j];
            CHECK(std::abs(s - v[i]) < 1e-12);
        }
    }
}

TEST_CASE("solve_lower_transpose inverts L^T") {
    Rng rng(13);
    Matrix lm(3, 3);
    for (std::size_t i = 0; i < 3; ++i) {
        lm(i, i) = 1.0 + rng.uniform01();
        for (std::size_t j = 0; j < i; ++j) lm(i, j) = rng.normal();
    }
    const LowerFactor l(lm);
    const Vector v{0.3, -1.2, 2.0};
    const Vector x = solve_lower_transpose(l, v);
    for (std::size_t i = 0; i < 3; ++i) {
        double s = 0.0;
        for (std::size_t j = i; j < 3; ++j) s += lm(j, i) * x[j];
        CHECK(std::abs(s - v[i]) < 1e-12);
    }
}

TEST_CASE("op_norm examples and SVD oracle") {
    Matrix d(2, 2);
    d(0, 0) = 3.0;
    d(1, 1) = 1.0;
    CHECK(op_norm(d) == doctest::Approx(3.0).epsilon(1e-10));
    CHECK(op_norm(Matrix(3, 3)) == 0.0);

    Rng rng(5);
    for (int rep = 0; rep < 8; ++rep) {
        const Matrix a = test::random_matrix(5, 5, rng);
        const double oracle = test::svd_op_norm_oracle(a);
        CHECK(op_norm(a) == doctest::Approx(oracle).epsilon(1e-8));
    }
}

TEST_CASE("max_norm and fro_norm") {
    Matrix a(2, 2);
    a(0, 0) = 1.0;
    a(0, 1) = -2.0;
    a(1, 0) = 3.0;
    a(1, 1) = 0.0;
    CHECK(max_norm(a) == 3.0);
    CHECK(fro_norm(a) == doctest::Approx(std::sqrt(14.0)).epsilon(1e-15));
    CHECK(max_norm(Matrix(2, 2)) == 0.0);
    CHECK(fro_norm(Matrix(2, 2)) == 0.0);
    CHECK(max_norm(Matrix::identity(4)) == 1.0);
    CHECK(fro_norm(Matrix::identity(4)) == doctest::Approx(2.0));
}

TEST_CASE("op_norm dominates max_norm; fro squared is the entry sum") {
    Rng rng(3);
    for (int rep = 0; rep < 10; ++rep) {
        const Matrix a = test::random_matrix(4, 6, rng);
        CHECK(op_norm(a) >= max_norm(a) - 1e-12);
        double ss = 0.0;
        for (std::size_t i = 0; i < a.rows(); ++i)
            for (std::size_t j = 0; j < a.cols(); ++j) ss += a(i, j) * a(i, j);
        CHECK(fro_norm(a) * fro_norm(a) == doctest::Approx(ss).epsilon(1e-14));
    }
}

TEST_CASE("factor solve composed with factor multiply is the identity") {
    Rng rng(17);
    for (int rep = 0; rep < 10; ++rep) {
        const Matrix s = test::random_spd(4, rng);
        const LowerFactor l = chol_factor(SymMatrix(symmetrized(s)), 1e-8);
        Vector v{rng.normal(), rng.normal(), rng.normal(), rng.normal()};
        const Vector x = sym_inv_apply(l, v);
        for (std::size_t i = 0; i < 4; ++i) {
            double s2 = 0.0;
            for (std::size_t j = 0; j <= i; ++j) s2 += l(i, j) * x[j];
            CHECK(std::abs(s2 - v[i]) < 1e-10);
        }
    }
}

}  // TEST_SUITE

TEST_SUITE("rng") {

TEST_CASE("sampling is bit-reproducible for a fixed seed") {
    Rng a(42), b(42);
    const Matrix ma = sample_std_normal(50, 3, a);
    const Matrix mb = sample_std_normal(50, 3, b);
    CHECK(ma == mb);

    Rng c(43);
    const Matrix mc = sample_std_normal(50, 3, c);
    CHECK_FALSE(ma == mc);
}

TEST_CASE("derived streams differ and are stable") {
    CHECK(derive_seed(1, 0) != derive_seed(1, 1));
    CHECK(derive_seed(1, 0) != derive_seed(2, 0));
    CHECK(derive_seed(123, 7) == derive_seed(123, 7));
}

TEST_CASE("standard normal moments at n = 1e5") {
    Rng rng(2024);
    const std::size_t n = 100000;
    const Matrix m = sample_std_normal(n, 1, rng);
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += m(i, 0);
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (std::size_t i = 0; i < n; ++i) var += (m(i, 0) - mean) * (m(i, 0) - mean);
    var /= static_cast<double>(n - 1);
    CHECK(std::abs(mean) < 0.02);
    CHECK(std::abs(var - 1.0) < 0.03);
}

TEST_CASE("independent columns are uncorrelated at n = 1e5") {
    Rng rng(77);
    const std::size_t n = 100000;
    const Matrix m = sample_std_normal(n, 2, rng);
    double m0 = 0.0, m1 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        m0 += m(i, 0);
        m1 += m(i, 1);
    }
    m0 /= n;
    m1 /= n;
    double c01 = 0.0, v0 = 0.0, v1 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        c01 += (m(i, 0) - m0) * (m(i, 1) - m1);
        v0 += (m(i, 0) - m0) * (m(i, 0) - m0);
        v1 += (m(i, 1) - m1) * (m(i, 1) - m1);
    }
    CHECK(std::abs(c01 / std::sqrt(v0 * v1)) < 0.02);
}

}  // TEST_SUITE
