#ifndef ROBUSTGAN_SPLINE_HPP
#define ROBUSTGAN_SPLINE_HPP

#include <cstddef>

#include "robustgan/matrix.hpp"

namespace robustgan {

// Pairwise linear spline discriminator class: truncated-linear features
// (x_j - xi_l)_+ per coordinate and knot, with an intercept, a linear term in
// the features, and a symmetric quadratic term over feature pairs.
struct SplineBasisConfig {
    std::size_t p = 1;
    Vector knots{-2.0, -1.0, 0.0, 1.0, 2.0};
    bool include_linear = false;  // optionally add raw coordinates as features

    std::size_t n_features() const { return (knots.size() + (include_linear ? 1 : 0)) * p; }
    void validate() const;
};

// Coefficients gamma = (gamma0, gamma1, gamma2). The quadratic block is a
// symmetric matrix stored as its packed upper triangle (row-major); mirrored
// entries are implied, and norms over gamma2 count the full mirrored matrix.
struct SplineCoeffs {
    double gamma0 = 0.0;
    Vector gamma1;         // length m
    Vector gamma2_packed;  // length m (m + 1) / 2

    static SplineCoeffs zeros(std::size_t m);
    std::size_t n_features() const { return gamma1.size(); }

    double gamma2_at(std::size_t a, std::size_t b) const;
    Matrix gamma2_full() const;
    static SplineCoeffs from_full(double g0, const Vector& g1, const Matrix& g2_full);

    double gamma1_l1() const;
    double gamma1_l2() const;
    double gamma2_l1() const;  // vectorized L1 over the mirrored matrix
    double gamma2_l2() const;  // Frobenius norm over the mirrored matrix
};

// Packed upper-triangle indexing for an m x m symmetric matrix.
inline std::size_t packed_size(std::size_t m) { return m * (m + 1) / 2; }
inline std::size_t packed_index(std::size_t a, std::size_t b, std::size_t m) {
    // requires a <= b
    return a * m - a * (a - 1) / 2 + (b - a);
}

// Feature map phi(x); block l holds (x_j - xi_l)_+ for j = 1..p.
Vector basis(const SplineBasisConfig& cfg, const Vector& x);
void basis_into(const SplineBasisConfig& cfg, const double* x, double* out);

// h_gamma(x) given precomputed phi.
double eval(const SplineCoeffs& coeffs, const Vector& phi);
double eval_point(const SplineBasisConfig& cfg, const SplineCoeffs& coeffs, const Vector& x);

// Subgradient of h with respect to the input x; hinge slope is 0 exactly at
// a knot.
Vector grad_input(const SplineBasisConfig& cfg, const SplineCoeffs& coeffs, const Vector& x);

// Row-wise evaluation over an n x p data matrix.
Vector eval_batch(const SplineBasisConfig& cfg, const SplineCoeffs& coeffs, const Matrix& x);

// Flat feature tuple (1, phi, packed phi (x) phi with mirror weights) whose dot
// product with the flat coefficient vector (gamma0, gamma1, gamma2_packed)
// equals eval; this is the coefficient gradient of h since h is linear in
// gamma.
Vector design_row(const SplineBasisConfig& cfg, const Vector& x);

}  // namespace robustgan

#endif
