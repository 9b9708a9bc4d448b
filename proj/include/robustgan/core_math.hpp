#ifndef ROBUSTGAN_CORE_MATH_HPP
#define ROBUSTGAN_CORE_MATH_HPP

#include "robustgan/matrix.hpp"

namespace robustgan {

// Square matrix validated to be symmetric within 1e-12 relative tolerance.
class SymMatrix {
public:
    explicit SymMatrix(Matrix m);
    std::size_t dim() const { return mat_.rows(); }
    const Matrix& mat() const { return mat_; }
    double operator()(std::size_t i, std::size_t j) const { return mat_(i, j); }

private:
    Matrix mat_;
};

// Lower-triangular factor with strictly positive diagonal, Sigma = L L^T.
class LowerFactor {
public:
    explicit LowerFactor(Matrix entries);
    std::size_t dim() const { return mat_.rows(); }
    const Matrix& mat() const { return mat_; }
    double operator()(std::size_t i, std::size_t j) const { return mat_(i, j); }
    Matrix sigma() const;  // L L^T

private:
    Matrix mat_;
};

bool all_finite(const Matrix& a);
bool is_symmetric(const Matrix& a, double rel_tol = 1e-12);
Matrix symmetrized(const Matrix& a);

double max_norm(const Matrix& a);
double fro_norm(const Matrix& a);

// Largest singular value by power iteration on A^T A (10 deterministic
// restarts). Returns 0 for the zero matrix.
double op_norm(const Matrix& a, double tol = 1e-10, int max_iter = 10000);

struct EigenSym {
    Vector values;   // ascending
    Matrix vectors;  // columns are eigenvectors, same order
};

// Cyclic Jacobi eigendecomposition of a symmetric matrix.
EigenSym jacobi_eigen_sym(const SymMatrix& s, double tol = 1e-13, int max_sweeps = 64);

// Cholesky factor of S; if the smallest eigenvalue is below eps_min the
// spectrum is clamped at eps_min before factoring.
LowerFactor chol_factor(const SymMatrix& s, double eps_min = 1e-8);

// L^{-1} v by forward substitution.
Vector solve_lower(const LowerFactor& l, const Vector& v);
// L^{-T} v by back substitution.
Vector solve_lower_transpose(const LowerFactor& l, const Vector& v);

inline Vector sym_inv_apply(const LowerFactor& l, const Vector& v) { return solve_lower(l, v); }

}  // namespace robustgan

#endif
