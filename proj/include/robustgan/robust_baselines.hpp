#ifndef ROBUSTGAN_ROBUST_BASELINES_HPP
#define ROBUSTGAN_ROBUST_BASELINES_HPP

#include "robustgan/matrix.hpp"

namespace robustgan {

double median(Vector values);  // even lengths average the two central order statistics
Vector column_medians(const Matrix& data);

// Kendall's tau-a: (concordant - discordant) / (n(n-1)/2), pairwise O(n^2).
double kendall_tau(const Vector& x, const Vector& y);

// consistency * median(|x - median(x)|); 1.4826 is the Gaussian-consistent factor.
double mad(const Vector& x, double consistency = 1.4826);

struct PairwiseCovEstimate {
    Matrix sigma;        // S_hat K_hat S_hat
    Matrix tau_matrix;   // Kendall's tau, unit diagonal
    Vector scales;       // MAD per column
    std::vector<std::size_t> degenerate_cols;  // columns where MAD was zero
};

// Sine-transformed Kendall correlation with MAD scales. No PSD repair is
// applied here; callers decide. Degenerate columns (MAD = 0) get scale 1e-6
// and are flagged.
PairwiseCovEstimate kendall_mad_cov(const Matrix& data);

}  // namespace robustgan

#endif
