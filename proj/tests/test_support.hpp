#ifndef ROBUSTGAN_TEST_SUPPORT_HPP
#define ROBUSTGAN_TEST_SUPPORT_HPP

#include <cmath>

#include "robustgan/core_math.hpp"
#include "robustgan/rng.hpp"

namespace robustgan::test {

// Eigenvalues of a symmetric 2x2 matrix by the characteristic polynomial;
// independent of the library's Jacobi path.
inline std::pair<double, double> eig2x2(double a, double b, double c) {
    const double tr = a + c;
    const double disc = std::sqrt((a - c) * (a - c) + 4.0 * b * b);
    return {0.5 * (tr - disc), 0.5 * (tr + disc)};
}

// Largest singular value via the library's Jacobi eigensolver on A^T A; used
// as the dense oracle against the power-iteration implementation.
inline double svd_op_norm_oracle(const Matrix& a) {
    const std::size_t n = a.cols();
    Matrix ata(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < a.rows(); ++k) s += a(k, i) * a(k, j);
            ata(i, j) = s;
        }
    const EigenSym es = jacobi_eigen_sym(SymMatrix(symmetrized(ata)));
    return std::sqrt(std::max(0.0, es.values.back()));
}

inline Matrix random_matrix(std::size_t r, std::size_t c, Rng& rng, double scale = 1.0) {
    Matrix m(r, c);
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j) m(i, j) = scale * rng.normal();
    return m;
}

inline Matrix random_spd(std::size_t p, Rng& rng) {
    Matrix a = random_matrix(p, p, rng);
    Matrix s(p, p);
    for (std::size_t i = 0; i < p; ++i)
        for (std::size_t j = 0; j < p; ++j) {
            double v = 0.0;
            for (std::size_t k = 0; k < p; ++k) v += a(i, k) * a(j, k);
            s(i, j) = v + (i == j ? 0.5 : 0.0);
        }
    return s;
}

}  // namespace robustgan::test

#endif
