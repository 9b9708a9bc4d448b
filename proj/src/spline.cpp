#include "robustgan/spline.hpp"

#include <cmath>

#include "robustgan/errors.hpp"

namespace robustgan {

void SplineBasisConfig::validate() const {
    if (p == 0) throw InvalidInput("SplineBasisConfig: p must be positive");
    if (knots.empty()) throw InvalidInput("SplineBasisConfig: knots must be non-empty");
    for (std::size_t l = 1; l < knots.size(); ++l)
        if (!(knots[l] > knots[l - 1]))
            throw InvalidInput("SplineBasisConfig: knots must be strictly increasing");
}

SplineCoeffs SplineCoeffs::zeros(std::size_t m) {
    SplineCoeffs c;
    c.gamma1.assign(m, 0.0);
    c.gamma2_packed.assign(packed_size(m), 0.0);
    return c;
}

double SplineCoeffs::gamma2_at(std::size_t a, std::size_t b) const {
    const std::size_t m = gamma1.size();
    if (a > b) std::swap(a, b);
    return gamma2_packed[packed_index(a, b, m)];
}

Matrix SplineCoeffs::gamma2_full() const {
    const std::size_t m = gamma1.size();
    Matrix g(m, m);
    for (std::size_t a = 0; a < m; ++a)
        for (std::size_t b = a; b < m; ++b) {
            const double v = gamma2_packed[packed_index(a, b, m)];
            g(a, b) = v;
            g(b, a) = v;
        }
    return g;
}

SplineCoeffs SplineCoeffs::from_full(double g0, const Vector& g1, const Matrix& g2_full) {
    if (g2_full.rows() != g1.size() || g2_full.cols() != g1.size())
        throw InvalidInput("SplineCoeffs::from_full: dimension mismatch");
    SplineCoeffs c;
    c.gamma0 = g0;
    c.gamma1 = g1;
    const std::size_t m = g1.size();
    c.gamma2_packed.resize(packed_size(m));
    for (std::size_t a = 0; a < m; ++a)
        for (std::size_t b = a; b < m; ++b)
            c.gamma2_packed[packed_index(a, b, m)] = 0.5 * (g2_full(a, b) + g2_full(b, a));
    return c;
}

double SplineCoeffs::gamma1_l1() const {
    double s = 0.0;
    for (double v : gamma1) s += std::abs(v);
    return s;
}

double SplineCoeffs::gamma1_l2() const {
    double s = 0.0;
    for (double v : gamma1) s += v * v;
    return std::sqrt(s);
}

double SplineCoeffs::gamma2_l1() const {
    const std::size_t m = gamma1.size();
    double s = 0.0;
    for (std::size_t a = 0; a < m; ++a)
        for (std::size_t b = a; b < m; ++b) {
            const double v = std::abs(gamma2_packed[packed_index(a, b, m)]);
            s += (a == b) ? v : 2.0 * v;
        }
    return s;
}

double SplineCoeffs::gamma2_l2() const {
    const std::size_t m = gamma1.size();
    double s = 0.0;
    for (std::size_t a = 0; a < m; ++a)
        for (std::size_t b = a; b < m; ++b) {
            const double v = gamma2_packed[packed_index(a, b, m)];
            s += (a == b) ? v * v : 2.0 * v * v;
        }
    return std::sqrt(s);
}

void basis_into(const SplineBasisConfig& cfg, const double* x, double* out) {
    const std::size_t p = cfg.p;
    const std::size_t k = cfg.knots.size();
    for (std::size_t l = 0; l < k; ++l) {
        const double knot = cfg.knots[l];
        double* block = out + l * p;
        for (std::size_t j = 0; j < p; ++j) {
            const double t = x[j] - knot;
            block[j] = t > 0.0 ? t : 0.0;
        }
    }
    if (cfg.include_linear) {
        double* block = out + k * p;
        for (std::size_t j = 0; j < p; ++j) block[j] = x[j];
    }
}

Vector basis(const SplineBasisConfig& cfg, const Vector& x) {
    cfg.validate();
    if (x.size() != cfg.p) throw InvalidInput("basis: x has wrong dimension");
    for (double v : x)
        if (!std::isfinite(v)) throw InvalidInput("basis: non-finite input");
    Vector out(cfg.n_features());
    basis_into(cfg, x.data(), out.data());
    return out;
}

double eval(const SplineCoeffs& coeffs, const Vector& phi) {
    const std::size_t m = coeffs.gamma1.size();
    if (phi.size() != m) throw InvalidInput("eval: feature dimension mismatch");
    double h = coeffs.gamma0;
    for (std::size_t a = 0; a < m; ++a) h += coeffs.gamma1[a] * phi[a];
    const double* packed = coeffs.gamma2_packed.data();
    for (std::size_t a = 0; a < m; ++a) {
        const double pa = phi[a];
        if (pa == 0.0) continue;
        const std::size_t base = packed_index(a, a, m);
        h += packed[base] * pa * pa;
        double cross = 0.0;
        for (std::size_t b = a + 1; b < m; ++b) cross += packed[base + (b - a)] * phi[b];
        h += 2.0 * pa * cross;
    }
    return h;
}

double eval_point(const SplineBasisConfig& cfg, const SplineCoeffs& coeffs, const Vector& x) {
    return eval(coeffs, basis(cfg, x));
}

Vector grad_input(const SplineBasisConfig& cfg, const SplineCoeffs& coeffs, const Vector& x) {
    cfg.validate();
    const std::size_t p = cfg.p;
    const std::size_t k = cfg.knots.size();
    const std::size_t m = cfg.n_features();
    if (x.size() != p) throw InvalidInput("grad_input: x has wrong dimension");
    if (coeffs.gamma1.size() != m) throw InvalidInput("grad_input: coefficient dimension mismatch");

    Vector phi(m);
    basis_into(cfg, x.data(), phi.data());

    // w = Gamma2 phi over the packed storage.
    Vector w(m, 0.0);
    const double* packed = coeffs.gamma2_packed.data();
    for (std::size_t a = 0; a < m; ++a) {
        const std::size_t base = packed_index(a, a, m);
        w[a] += packed[base] * phi[a];
        for (std::size_t b = a + 1; b < m; ++b) {
            const double v = packed[base + (b - a)];
            w[a] += v * phi[b];
            w[b] += v * phi[a];
        }
    }

    Vector g(p, 0.0);
    for (std::size_t l = 0; l < k; ++l) {
        const double knot = cfg.knots[l];
        for (std::size_t j = 0; j < p; ++j) {
            if (x[j] > knot) {
                const std::size_t idx = l * p + j;
                g[j] += coeffs.gamma1[idx] + 2.0 * w[idx];
            }
        }
    }
    if (cfg.include_linear) {
        for (std::size_t j = 0; j < p; ++j) {
            const std::size_t idx = k * p + j;
            g[j] += coeffs.gamma1[idx] + 2.0 * w[idx];
        }
    }
    return g;
}

Vector eval_batch(const SplineBasisConfig& cfg, const SplineCoeffs& coeffs, const Matrix& x) {
    cfg.validate();
    if (x.cols() != cfg.p) throw InvalidInput("eval_batch: data has wrong dimension");
    const std::size_t m = cfg.n_features();
    Vector out(x.rows());
    Vector phi(m);
    for (std::size_t i = 0; i < x.rows(); ++i) {
        basis_into(cfg, x.row(i), phi.data());
        out[i] = eval(coeffs, phi);
    }
    return out;
}

Vector design_row(const SplineBasisConfig& cfg, const Vector& x) {
    const Vector phi = basis(cfg, x);
    const std::size_t m = phi.size();
    Vector row(1 + m + packed_size(m));
    row[0] = 1.0;
    for (std::size_t a = 0; a < m; ++a) row[1 + a] = phi[a];
    double* quad = row.data() + 1 + m;
    for (std::size_t a = 0; a < m; ++a)
        for (std::size_t b = a; b < m; ++b)
            quad[packed_index(a, b, m)] = (a == b) ? phi[a] * phi[a] : 2.0 * phi[a] * phi[b];
    return row;
}

}  // namespace robustgan
