#ifndef ROBUSTGAN_INNER_SOLVER_HPP
#define ROBUSTGAN_INNER_SOLVER_HPP

#include <cstdint>
#include <optional>

#include "robustgan/matrix.hpp"

namespace robustgan {

enum class PenaltyKind { L1, L2Group };

struct PenaltyProvenance {
    double lambda0;
    std::size_t n;
    std::size_t p;
};

// Penalty on the discriminator coefficients, excluding the intercept.
// L1: lambda1 (||gamma1||_1 + ||gamma2||_1); group-L2: lambda2 ||gamma1||_2 +
// lambda3 ||gamma2||_2, all norms over the full mirrored gamma2 matrix.
struct PenaltyConfig {
    PenaltyKind kind = PenaltyKind::L1;
    double lambda1 = 0.0;
    double lambda2 = 0.0;
    double lambda3 = 0.0;
    std::optional<PenaltyProvenance> derived_from;

    static PenaltyConfig l1(double lambda1);
    static PenaltyConfig l2_group(double lambda2, double lambda3);
    // lambda1 = lambda0 sqrt(log(p)/n), lambda2 = lambda0 sqrt(p/n),
    // lambda3 = lambda0 sqrt(p^2/n).
    static PenaltyConfig from_lambda0(PenaltyKind kind, double lambda0, std::size_t n,
                                      std::size_t p);
    void validate() const;
};

struct SolverConfig {
    int max_iter = 1000;
    double rel_tol = 1e-7;
    double line_search_shrink = 0.5;
    double init_step = 1.0;
    bool acceleration = true;
    bool record_trace = false;
    void validate() const;
};

// Block structure of a flat coefficient vector. `weight` is the inner-product
// multiplicity of each coordinate (2 for packed off-diagonal gamma2 entries,
// 1 otherwise) so that all norms and dot products agree with the full
// mirrored-matrix geometry. `block` is 0 for unpenalized coordinates
// (intercept), 1 for the gamma1 group, 2 for the gamma2 group. `metric`, when
// non-empty, is a diagonal preconditioner (per-coordinate curvature scale);
// it changes the solver's path, never the optimum.
struct CoeffLayout {
    std::vector<double> weight;
    std::vector<std::uint8_t> block;
    std::vector<double> metric;

    std::size_t size() const { return weight.size(); }
    static CoeffLayout dense(std::size_t n, std::uint8_t block = 1);

    double dot(const Vector& a, const Vector& b) const;
    double norm2(const Vector& a) const;
    double metric_at(std::size_t i) const { return metric.empty() ? 1.0 : metric[i]; }
};

// Concave objective with exact gradient in the flat coefficient vector.
class ConcaveObjective {
public:
    virtual ~ConcaveObjective() = default;
    virtual double value(const Vector& x) const = 0;
    // Returns the value and fills grad (full-matrix gradient convention for
    // mirrored coordinates).
    virtual double value_and_grad(const Vector& x, Vector& grad) const = 0;
};

// Componentwise sign(v) max(|v| - tau, 0).
Vector soft_threshold(const Vector& v, double tau);
void soft_threshold_inplace(Vector& v, double tau);

// max(0, 1 - tau/||v||_2) v; the zero vector when ||v||_2 <= tau.
Vector group_shrink(const Vector& v, double tau);

double penalty_value(const PenaltyConfig& pen, const CoeffLayout& layout, const Vector& x);
// Proximal map of step * penalty at point x (in place).
void penalty_prox(const PenaltyConfig& pen, const CoeffLayout& layout, Vector& x, double step);

struct SolverDiagnostics {
    int iterations = 0;
    double final_residual = 0.0;
    bool converged = false;
    bool max_iter_reached = false;
    Vector objective_trace;  // penalized objective per iteration (record_trace)
};

struct SolveResult {
    Vector x;
    double value;  // penalized objective at x
    SolverDiagnostics diag;
};

// Proximal gradient ascent (FISTA acceleration with monotone restart) for
// max_x obj(x) - pen(x). Deterministic given its inputs.
SolveResult maximize_discriminator(const ConcaveObjective& obj, const CoeffLayout& layout,
                                   const PenaltyConfig& pen, const Vector& init,
                                   const SolverConfig& cfg = {});

// Norm of the proximal-gradient map at x (probe step through the prox);
// vanishes exactly at first-order optimal points.
double prox_gradient_residual(const ConcaveObjective& obj, const CoeffLayout& layout,
                              const PenaltyConfig& pen, const Vector& x,
                              double probe_step = 1e-4);

}  // namespace robustgan

#endif
