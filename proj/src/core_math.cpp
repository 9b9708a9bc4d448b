#include "robustgan/core_math.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "robustgan/errors.hpp"

namespace robustgan {

Matrix transpose(const Matrix& a) {
    Matrix out(a.cols(), a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) out(j, i) = a(i, j);
    return out;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) throw InvalidInput("matmul: dimension mismatch");
    Matrix out(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            if (aik == 0.0) continue;
            const double* brow = b.row(k);
            double* orow = out.row(i);
            for (std::size_t j = 0; j < b.cols(); ++j) orow[j] += aik * brow[j];
        }
    }
    return out;
}

Vector mat_vec(const Matrix& a, const Vector& v) {
    if (a.cols() != v.size()) throw InvalidInput("mat_vec: dimension mismatch");
    Vector out(a.rows(), 0.0);
    for (std::size_t i = 0; i < a.rows(); ++i) {
        const double* row = a.row(i);
        double s = 0.0;
        for (std::size_t j = 0; j < a.cols(); ++j) s += row[j] * v[j];
        out[i] = s;
    }
    return out;
}

bool all_finite(const Matrix& a) {
    const double* d = a.data();
    for (std::size_t i = 0; i < a.rows() * a.cols(); ++i)
        if (!std::isfinite(d[i])) return false;
    return true;
}

bool is_symmetric(const Matrix& a, double rel_tol) {
    if (a.rows() != a.cols()) return false;
    double scale = std::max(max_norm(a), 1.0);
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = i + 1; j < a.cols(); ++j)
            if (std::abs(a(i, j) - a(j, i)) > rel_tol * scale) return false;
    return true;
}

Matrix symmetrized(const Matrix& a) {
    if (a.rows() != a.cols()) throw InvalidInput("symmetrized: matrix not square");
    Matrix out(a.rows(), a.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) out(i, j) = 0.5 * (a(i, j) + a(j, i));
    return out;
}

SymMatrix::SymMatrix(Matrix m) : mat_(std::move(m)) {
    if (mat_.rows() == 0 || mat_.rows() != mat_.cols())
        throw InvalidInput("SymMatrix: matrix must be square and non-empty");
    if (!all_finite(mat_)) throw InvalidInput("SymMatrix: non-finite entries");
    if (!is_symmetric(mat_)) throw InvalidInput("SymMatrix: matrix not symmetric");
}

LowerFactor::LowerFactor(Matrix entries) : mat_(std::move(entries)) {
    if (mat_.rows() == 0 || mat_.rows() != mat_.cols())
        throw InvalidInput("LowerFactor: matrix must be square and non-empty");
    if (!all_finite(mat_)) throw InvalidInput("LowerFactor: non-finite entries");
    for (std::size_t i = 0; i < mat_.rows(); ++i) {
        if (mat_(i, i) <= 0.0) throw InvalidInput("LowerFactor: non-positive diagonal");
        for (std::size_t j = i + 1; j < mat_.cols(); ++j)
            if (mat_(i, j) != 0.0) throw InvalidInput("LowerFactor: strictly upper entries must be zero");
    }
}

Matrix LowerFactor::sigma() const {
    const std::size_t p = dim();
    Matrix out(p, p);
    for (std::size_t i = 0; i < p; ++i)
        for (std::size_t j = 0; j <= i; ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k <= j; ++k) s += mat_(i, k) * mat_(j, k);
            out(i, j) = s;
            out(j, i) = s;
        }
    return out;
}

double max_norm(const Matrix& a) {
    double m = 0.0;
    const double* d = a.data();
    for (std::size_t i = 0; i < a.rows() * a.cols(); ++i) m = std::max(m, std::abs(d[i]));
    return m;
}

double fro_norm(const Matrix& a) {
    double s = 0.0;
    const double* d = a.data();
    for (std::size_t i = 0; i < a.rows() * a.cols(); ++i) s += d[i] * d[i];
    return std::sqrt(s);
}

double op_norm(const Matrix& a, double tol, int max_iter) {
    if (!all_finite(a)) throw InvalidInput("op_norm: non-finite entries");
    const std::size_t m = a.rows(), n = a.cols();
    if (m == 0 || n == 0) return 0.0;
    if (max_norm(a) == 0.0) return 0.0;

    // B = A^T A applied implicitly: v -> A^T (A v).
    auto apply = [&](const Vector& v, Vector& av, Vector& out) {
        for (std::size_t i = 0; i < m; ++i) {
            const double* row = a.row(i);
            double s = 0.0;
            for (std::size_t j = 0; j < n; ++j) s += row[j] * v[j];
            av[i] = s;
        }
        std::fill(out.begin(), out.end(), 0.0);
        for (std::size_t i = 0; i < m; ++i) {
            const double* row = a.row(i);
            const double c = av[i];
            for (std::size_t j = 0; j < n; ++j) out[j] += c * row[j];
        }
    };

    // Deterministic pseudo-random restarts.
    std::uint64_t state = 0x9e3779b97f4a7c15ULL;
    auto next01 = [&state]() {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        return static_cast<double>(state >> 11) * 0x1.0p-53;
    };

    double best = 0.0;
    Vector v(n), av(m), bv(n);
    const int restarts = 10;
    for (int r = 0; r < restarts; ++r) {
        for (std::size_t j = 0; j < n; ++j) v[j] = next01() - 0.5;
        double nv = 0.0;
        for (double x : v) nv += x * x;
        nv = std::sqrt(nv);
        if (nv == 0.0) continue;
        for (double& x : v) x /= nv;

        double lambda = 0.0;
        for (int it = 0; it < max_iter; ++it) {
            apply(v, av, bv);
            double nb = 0.0;
            for (double x : bv) nb += x * x;
            nb = std::sqrt(nb);
            if (nb == 0.0) {
                lambda = 0.0;
                break;
            }
            double lam = 0.0;
            for (std::size_t j = 0; j < n; ++j) lam += v[j] * bv[j];
            for (std::size_t j = 0; j < n; ++j) v[j] = bv[j] / nb;
            if (std::abs(lam - lambda) <= tol * std::max(std::abs(lam), 1e-300)) {
                lambda = lam;
                break;
            }
            lambda = lam;
        }
        best = std::max(best, lambda);
    }
    return std::sqrt(std::max(best, 0.0));
}

EigenSym jacobi_eigen_sym(const SymMatrix& s, double tol, int max_sweeps) {
    const std::size_t n = s.dim();
    Matrix a = s.mat();
    Matrix v = Matrix::identity(n);

    auto off_diag = [&a, n]() {
        double m = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) m = std::max(m, std::abs(a(i, j)));
        return m;
    };

    const double scale = std::max(max_norm(s.mat()), 1e-300);
    for (int sweep = 0; sweep < max_sweeps && off_diag() > tol * scale; ++sweep) {
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (std::abs(apq) <= 1e-300) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double sn = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a(k, p), akq = a(k, q);
                    a(k, p) = c * akp - sn * akq;
                    a(k, q) = sn * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a(p, k), aqk = a(q, k);
                    a(p, k) = c * apk - sn * aqk;
                    a(q, k) = sn * apk + c * aqk;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double vkp = v(k, p), vkq = v(k, q);
                    v(k, p) = c * vkp - sn * vkq;
                    v(k, q) = sn * vkp + c * vkq;
                }
            }
        }
    }

    EigenSym out;
    out.values.resize(n);
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) {
        out.values[i] = a(i, i);
        order[i] = i;
    }
    std::sort(order.begin(), order.end(),
              [&](std::size_t x, std::size_t y) { return a(x, x) < a(y, y); });
    EigenSym sorted;
    sorted.values.resize(n);
    sorted.vectors = Matrix(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        sorted.values[j] = a(order[j], order[j]);
        for (std::size_t i = 0; i < n; ++i) sorted.vectors(i, j) = v(i, order[j]);
    }
    return sorted;
}

namespace {

// Plain Cholesky of a PD matrix; pivots floored for roundoff safety.
Matrix cholesky_pd(const Matrix& s, double pivot_floor) {
    const std::size_t n = s.rows();
    Matrix l(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            double sum = s(i, j);
            for (std::size_t k = 0; k < j; ++k) sum -= l(i, k) * l(j, k);
            if (i == j) {
                l(i, i) = std::sqrt(std::max(sum, pivot_floor));
            } else {
                l(i, j) = sum / l(j, j);
            }
        }
    }
    return l;
}

}  // namespace

LowerFactor chol_factor(const SymMatrix& s, double eps_min) {
    if (eps_min <= 0.0) throw InvalidInput("chol_factor: eps_min must be positive");
    const std::size_t n = s.dim();

    EigenSym es = jacobi_eigen_sym(s);
    if (es.values.front() >= eps_min) {
        return LowerFactor(cholesky_pd(s.mat(), eps_min * 1e-6));
    }

    // Eigendecomposition repair: clamp eigenvalues below eps_min, refactor.
    Matrix repaired(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            double sum = 0.0;
            for (std::size_t k = 0; k < n; ++k) {
                const double lam = std::max(es.values[k], eps_min);
                sum += es.vectors(i, k) * lam * es.vectors(j, k);
            }
            repaired(i, j) = sum;
            repaired(j, i) = sum;
        }
    }
    return LowerFactor(cholesky_pd(repaired, eps_min * 1e-6));
}

Vector solve_lower(const LowerFactor& l, const Vector& v) {
    const std::size_t n = l.dim();
    if (v.size() != n) throw InvalidInput("solve_lower: dimension mismatch");
    Vector x(n);
    for (std::size_t i = 0; i < n; ++i) {
        double s = v[i];
        for (std::size_t j = 0; j < i; ++j) s -= l(i, j) * x[j];
        x[i] = s / l(i, i);
    }
    return x;
}

Vector solve_lower_transpose(const LowerFactor& l, const Vector& v) {
    const std::size_t n = l.dim();
    if (v.size() != n) throw InvalidInput("solve_lower_transpose: dimension mismatch");
    Vector x(n);
    for (std::size_t ii = n; ii-- > 0;) {
        double s = v[ii];
        for (std::size_t j = ii + 1; j < n; ++j) s -= l(j, ii) * x[j];
        x[ii] = s / l(ii, ii);
    }
    return x;
}

}  // namespace robustgan
