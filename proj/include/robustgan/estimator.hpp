#ifndef ROBUSTGAN_ESTIMATOR_HPP
#define ROBUSTGAN_ESTIMATOR_HPP

#include <cstdint>
#include <optional>
#include <string>

#include "robustgan/core_math.hpp"
#include "robustgan/divergences.hpp"
#include "robustgan/inner_solver.hpp"
#include "robustgan/spline.hpp"

namespace robustgan {

struct GaussianParams {
    Vector mu;
    LowerFactor scale;  // Sigma = L L^T
    std::size_t dim() const { return mu.size(); }
    Matrix sigma() const { return scale.sigma(); }
};

enum class ObjectiveKind { hinge, logit_f };

struct TrainObjective {
    ObjectiveKind kind = ObjectiveKind::logit_f;
    DivName divergence = DivName::rKL;

    static TrainObjective hinge() { return {ObjectiveKind::hinge, DivName::TV}; }
    static TrainObjective logit_f(DivName d) { return {ObjectiveKind::logit_f, d}; }
    bool is_rkl() const { return kind == ObjectiveKind::logit_f && divergence == DivName::rKL; }
    std::string str() const;
};

TrainObjective parse_objective(const std::string& s);

enum class Transform { location_only, full };

struct TrainConfig {
    TrainObjective objective{};              // rKL logit f-GAN
    Transform transform = Transform::full;   // full data transformation
    PenaltyKind penalty_kind = PenaltyKind::L1;
    std::optional<double> lambda0;           // defaults to default_lambda0(objective)
    std::optional<PenaltyConfig> penalty_override;  // explicit levels, bypasses the schedule
    bool two_objective = false;
    int iterations = 100;
    double alpha0 = 1.0;
    double decay = 0.05;        // learning rate alpha0 exp(-decay t)
    double clip_linf = 0.1;     // componentwise gradient clipping
    double rkl_cap = 10.0;      // cap on the rKL outer objective
    double fake_per_real = 1.0;
    std::uint64_t seed = 0;
    double early_stop_tol = 0.0;   // stop when the L-inf step drops below; 0 disables
    double final_eig_clamp = 0.0;  // clamp Sigma eigenvalues above this after training; 0 disables
    Vector knots{-2.0, -1.0, 0.0, 1.0, 2.0};
    bool include_linear_features = false;
    SolverConfig inner{};

    void validate() const;
    SplineBasisConfig basis(std::size_t p) const;
};

struct IterRecord {
    double outer_objective;  // penalized outer value (capped for rKL)
    double inner_value;      // penalized inner optimum
    int inner_iterations;
    double gamma1_l1, gamma2_l1, gamma1_l2, gamma2_l2;
    double step_linf;
    bool cap_active;
};

struct TrainingTrace {
    std::vector<IterRecord> iters;
};

// Base penalty levels from the tuning study: 0.1 hinge, 0.025 JS, 0.3 rKL.
double default_lambda0(const TrainObjective& obj);

PenaltyConfig resolve_penalty(const TrainConfig& cfg, std::size_t n, std::size_t p);

// mu0 = coordinatewise median; Sigma0 = MAD-scaled sine-transformed Kendall
// correlation, repaired to PSD by the eigenvalue clamp and factored.
GaussianParams init_params(const Matrix& data);

struct OuterEval {
    double value;       // unpenalized objective (capped for one-objective rKL)
    Vector grad_mu;     // d value / d mu
    Matrix grad_scale;  // d value / d L, lower triangle
    bool cap_active;
};

// Objective and theta-gradient for one outer step, at fixed discriminator.
// In full mode the real term scores L^{-1}(x - mu) and the fake term scores z
// directly; in location mode the real term scores x - mu and the fake term
// scores L z with reparameterized gradient. Two-objective mode swaps the
// fake term of the gradient to -mean h (G(h) = h).
OuterEval outer_objective(const GaussianParams& theta, const SplineCoeffs& gamma,
                          const Matrix& data, const Matrix& z_fake, const TrainConfig& cfg);

struct FitResult {
    GaussianParams params;
    TrainingTrace trace;
};

FitResult fit(const Matrix& data, const TrainConfig& cfg);
FitResult fit_two_objective(const Matrix& data, const TrainConfig& cfg);

// --- discriminator-objective plumbing, shared with the check suites ---

struct FeatureBatch {
    std::size_t n = 0, m = 0;
    std::vector<double> values;  // row-major n x m
    const double* row(std::size_t i) const { return values.data() + i * m; }
};

FeatureBatch make_features(const SplineBasisConfig& cfg, const Matrix& rows);

struct ScoreFuncs {
    double (*T)(double);
    double (*dT)(double);
    double (*ddT)(double);
    double (*Fsharp)(double);
    double (*dFsharp)(double);
    double (*ddFsharp)(double);
};

// T/F# for a logit family, or min(1,u)/max(-1,u) for the hinge.
ScoreFuncs score_funcs(const TrainObjective& obj);

// Empirical GAN objective as a concave function of the flat coefficient
// vector (gamma0, gamma1, gamma2 packed). Rows are stored in compact
// nonzero form (hinge features vanish below their knots) and the per-feature
// second moments provide a diagonal preconditioner for the solver.
class DiscObjective : public ConcaveObjective {
public:
    DiscObjective(FeatureBatch real, FeatureBatch fake, ScoreFuncs scores);
    double value(const Vector& x) const override;
    double value_and_grad(const Vector& x, Vector& grad) const override;
    std::size_t dim() const { return 1 + m_ + packed_size(m_); }
    // Feature-curvature metric aligned with the flat coefficient vector.
    const Vector& metric() const { return metric_; }

    // Coordinate-descent maximization of the L1-penalized objective
    // (prox-Newton coordinate steps, active-set sweeps). Equivalent optimum
    // to the proximal-gradient path, much faster on the ill-conditioned
    // pairwise-spline design.
    SolveResult solve_l1_cd(const CoeffLayout& layout, const PenaltyConfig& pen,
                            const Vector& init, const SolverConfig& cfg) const;

private:
    // Per-row sparse design: linear features plus packed-index pair features
    // (diagonal pairs first, then off-diagonal pairs of the same row).
    struct DesignRows {
        std::size_t n = 0;
        std::vector<std::uint32_t> lin_start;   // n + 1
        std::vector<std::uint16_t> lin_idx;
        std::vector<double> lin_val;
        std::vector<std::uint32_t> pair_start;  // n + 1
        std::vector<std::uint32_t> pair_idx;    // packed gamma2 indices
        std::vector<double> pair_val;           // phi_a phi_b
    };
    DesignRows build(const FeatureBatch& fb) const;
    double accumulate(const Vector& x, Vector* grad) const;
    void compute_h(const Vector& x, Vector& h) const;

    // Column view of the stacked design (real rows first), h-convention
    // values (mirror factor folded in); built lazily for coordinate descent.
    struct Columns {
        std::vector<std::uint32_t> start;  // dim + 1
        std::vector<std::uint32_t> row;
        std::vector<double> val;
        std::vector<double> sq;  // per-column sum of val^2 / batch size
        bool built = false;
    };
    void build_columns() const;

    std::size_t m_;
    ScoreFuncs scores_;
    DesignRows real_, fake_;
    Vector metric_;
    mutable Columns cols_;
};

CoeffLayout spline_coeff_layout(std::size_t m);
Vector flatten_coeffs(const SplineCoeffs& c);
SplineCoeffs unflatten_coeffs(const Vector& flat, std::size_t m);

// Production inner solve: coordinate descent for the L1 penalty, proximal
// gradient for the group-L2 penalty.
SolveResult solve_discriminator(const DiscObjective& obj, const CoeffLayout& layout,
                                const PenaltyConfig& pen, const Vector& init,
                                const SolverConfig& cfg);

// --- result serialization (versioned key-value record) ---

struct TraceSummary {
    int iterations = 0;
    double final_outer = 0.0;
    double final_inner = 0.0;
    int cap_hits = 0;
    double mean_inner_iters = 0.0;
};

TraceSummary summarize(const TrainingTrace& trace);
std::string config_digest(const TrainConfig& cfg);

struct EstimateRecord {
    Vector mu;
    Matrix sigma;
    std::string config_digest;
    TraceSummary summary;
};

std::string serialize_estimate(const GaussianParams& params, const TrainConfig& cfg,
                               const TrainingTrace& trace);
EstimateRecord parse_estimate(const std::string& text);

}  // namespace robustgan

#endif
