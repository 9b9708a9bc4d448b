#include "robustgan/robust_baselines.hpp"

#include <algorithm>
#include <cmath>

#include "robustgan/errors.hpp"

namespace robustgan {

double median(Vector values) {
    if (values.empty()) throw InvalidInput("median: empty vector");
    const std::size_t n = values.size();
    const std::size_t mid = n / 2;
    std::nth_element(values.begin(), values.begin() + mid, values.end());
    if (n % 2 == 1) return values[mid];
    const double hi = values[mid];
    const double lo = *std::max_element(values.begin(), values.begin() + mid);
    return 0.5 * (lo + hi);
}

Vector column_medians(const Matrix& data) {
    Vector out(data.cols());
    Vector col(data.rows());
    for (std::size_t j = 0; j < data.cols(); ++j) {
        for (std::size_t i = 0; i < data.rows(); ++i) col[i] = data(i, j);
        out[j] = median(col);
    }
    return out;
}

double kendall_tau(const Vector& x, const Vector& y) {
    if (x.size() != y.size()) throw InvalidInput("kendall_tau: length mismatch");
    const std::size_t n = x.size();
    if (n < 2) throw InvalidInput("kendall_tau: need at least two observations");
    long long concordant = 0, discordant = 0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double dx = x[i] - x[j];
            const double dy = y[i] - y[j];
            const double s = dx * dy;
            if (s > 0.0)
                ++concordant;
            else if (s < 0.0)
                ++discordant;
            // ties count as neither (tau-a)
        }
    }
    const double pairs = 0.5 * static_cast<double>(n) * static_cast<double>(n - 1);
    return static_cast<double>(concordant - discordant) / pairs;
}

double mad(const Vector& x, double consistency) {
    if (x.empty()) throw InvalidInput("mad: empty vector");
    const double med = median(x);
    Vector dev(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) dev[i] = std::abs(x[i] - med);
    return consistency * median(std::move(dev));
}

PairwiseCovEstimate kendall_mad_cov(const Matrix& data) {
    const std::size_t n = data.rows(), p = data.cols();
    if (n < 3) throw InvalidInput("kendall_mad_cov: need at least three rows");

    PairwiseCovEstimate est;
    est.tau_matrix = Matrix::identity(p);
    est.scales.resize(p);

    std::vector<Vector> cols(p, Vector(n));
    for (std::size_t j = 0; j < p; ++j)
        for (std::size_t i = 0; i < n; ++i) cols[j][i] = data(i, j);

    for (std::size_t j = 0; j < p; ++j) {
        est.scales[j] = mad(cols[j]);
        if (est.scales[j] == 0.0) {
            est.scales[j] = 1e-6;
            est.degenerate_cols.push_back(j);
        }
    }

    const double half_pi = std::asin(1.0);
    Matrix corr = Matrix::identity(p);
    for (std::size_t a = 0; a < p; ++a) {
        for (std::size_t b = a + 1; b < p; ++b) {
            const double tau = kendall_tau(cols[a], cols[b]);
            est.tau_matrix(a, b) = tau;
            est.tau_matrix(b, a) = tau;
            const double r = std::sin(half_pi * tau);
            corr(a, b) = r;
            corr(b, a) = r;
        }
    }

    est.sigma = Matrix(p, p);
    for (std::size_t a = 0; a < p; ++a)
        for (std::size_t b = a; b < p; ++b) {
            const double v = est.scales[a] * corr(a, b) * est.scales[b];
            est.sigma(a, b) = v;
            est.sigma(b, a) = v;
        }
    return est;
}

}  // namespace robustgan
