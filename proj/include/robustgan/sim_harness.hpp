#ifndef ROBUSTGAN_SIM_HARNESS_HPP
#define ROBUSTGAN_SIM_HARNESS_HPP

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

#include "robustgan/estimator.hpp"

namespace robustgan {

Matrix toeplitz(std::size_t p, double rho);

enum class QKind { alt_corner, far_cluster, custom };
std::string q_kind_str(QKind q);

// Huber contamination design: clean rows from N(mu*, Sigma*), contaminated
// rows from Q, labels iid Bernoulli(eps). Q1 (alt_corner) is N(2.25 c, I/3)
// with c alternating +-1; Q2 (far_cluster) is N(5 1, 5 I).
struct ContaminationSpec {
    double eps = 0.0;
    QKind q_kind = QKind::alt_corner;
    Vector custom_mu_q;      // custom only
    Matrix custom_sigma_q;   // custom only
    double toeplitz_rho = 0.5;
    std::optional<Matrix> custom_sigma_star;
    Vector custom_mu_star;   // empty means zero

    void validate(std::size_t p) const;
    Vector mu_star(std::size_t p) const;
    Matrix sigma_star(std::size_t p) const;
    Vector q_mean(std::size_t p) const;
    Matrix q_cov(std::size_t p) const;
};

struct LabeledSample {
    Matrix x;
    std::vector<std::uint8_t> labels;  // 1 = contaminated
};

LabeledSample generate(std::size_t n, std::size_t p, const ContaminationSpec& spec,
                       std::uint64_t seed);

struct ErrorReport {
    double max_norm = 0.0;
    double fro_norm = 0.0;
    double op_norm = 0.0;
    double mu_l2 = 0.0;
    double mu_linf = 0.0;
    double fro_scaled = 0.0;  // fro / sqrt(p)
};

struct PointEstimate {
    Vector mu;
    Matrix sigma;
};

ErrorReport evaluate(const Vector& mu_hat, const Matrix& sigma_hat, const Vector& mu_star,
                     const Matrix& sigma_star);

enum class Method { gan, kendall_mad, sample_cov };
std::string method_str(Method m);

struct Experiment {
    std::string label;
    Method method = Method::gan;
    TrainConfig train;        // gan only
    ContaminationSpec spec;
    std::size_t n = 2000;
    std::size_t p = 10;
};

PointEstimate run_method(const Experiment& exp, const Matrix& data, std::uint64_t train_seed);

struct RepRow {
    int rep = 0;
    bool failed = false;
    ErrorReport err;
};

struct ReplicateResult {
    Experiment exp;
    int reps = 0;
    int failures = 0;
    double lambda0 = 0.0;  // resolved base penalty level (gan only)
    std::vector<RepRow> rows;
    ErrorReport mean;
    ErrorReport sd;  // sample sd, divisor (successes - 1)
};

// Independent seeded replications; parallel and serial execution agree
// bit-for-bit (per-rep seeds derive from base_seed + rep index, aggregation
// folds in rep order).
ReplicateResult replicate(const Experiment& exp, int reps, std::uint64_t base_seed, int jobs = 0);

void write_rep_csv(std::ostream& os, const std::vector<ReplicateResult>& results);
void write_summary_csv(std::ostream& os, const std::vector<ReplicateResult>& results);

// "mean (sd)" table with 4 decimal places, one row per experiment.
std::string format_table(const std::vector<ReplicateResult>& results);

}  // namespace robustgan

#endif
