#ifndef ROBUSTGAN_DIVERGENCES_HPP
#define ROBUSTGAN_DIVERGENCES_HPP

#include <functional>
#include <string>

#include "robustgan/matrix.hpp"

namespace robustgan {

enum class DivName { rKL, JS, H2, rChi2, KL, mKL, Chi2, TV };

std::string div_name_str(DivName name);
DivName parse_div_name(const std::string& s);

// An f-divergence family. T(u) = f'(e^u) and Fsharp(u) = f#(e^u) with
// f#(t) = t f'(t) - f(t); dT and dFsharp are their u-derivatives. Arguments
// to T/Fsharp/dT/dFsharp are clamped to [-50, 50] before exponentiation
// (documented saturation, no error is signalled). TV carries no logit forms;
// its variational treatment goes through the hinge objective.
struct FDivergence {
    DivName name;
    double (*f)(double t);
    double (*T)(double u);
    double (*Fsharp)(double u);
    double (*dT)(double u);
    double (*dFsharp)(double u);
    double (*ddT)(double u);
    double (*ddFsharp)(double u);
    bool has_logit_forms;
};

FDivergence catalog(DivName name);
// Same, but rejects families without logit-f transforms (TV).
FDivergence catalog_logit(DivName name);

// Empirical logit f-GAN objective: mean T over real scores minus mean Fsharp
// over fake scores.
double k_f_empirical(const FDivergence& fd, const Vector& h_real, const Vector& h_fake);

// Empirical hinge objective: mean min(1, h) over real plus mean min(1, -h)
// over fake; bounded above by 2.
double k_hinge_empirical(const Vector& h_real, const Vector& h_fake);

struct QuadratureConfig {
    enum class Rule { adaptive_simpson, fixed_simpson };
    double lower = -12.0;
    double upper = 12.0;
    int n_points = 2001;  // fixed rule; odd, >= 101
    Rule rule = Rule::adaptive_simpson;
    double abs_tol = 1e-10;
    void validate() const;
};

using Density = std::function<double(double)>;
using ScoreFn = std::function<double(double)>;

// One-dimensional quadrature of an arbitrary integrand.
double integrate(const std::function<double(double)>& fn, const QuadratureConfig& quad);

// D_f(P || Q) = int f(p/q) q dx by quadrature; TV uses int |p - q| / 2 dx.
double population_df_1d(const FDivergence& fd, const Density& p_density, const Density& q_density,
                        const QuadratureConfig& quad);

// Population K_f(P, Q; h) by quadrature.
double k_f_population(const FDivergence& fd, const Density& p_density, const Density& q_density,
                      const ScoreFn& h, const QuadratureConfig& quad);
double k_hinge_population(const Density& p_density, const Density& q_density, const ScoreFn& h,
                          const QuadratureConfig& quad);

// D_f - K_f(P, Q; h); nonnegative up to quadrature error for any h.
double variational_gap(const FDivergence& fd, const Density& p_density, const Density& q_density,
                       const ScoreFn& h, const QuadratureConfig& quad);

// Numerical verdicts for the divergence-family conditions. The non-increasing
// verdict is taken in the relaxed sense (f' bounded above, i.e. f can be made
// non-increasing by adding c(t-1) without changing the divergence). The
// Lipschitz verdict compares the growth of |dFsharp| between the inner half
// of the grid and the full grid.
struct AssumptionReport {
    DivName name;
    bool has_logit_forms;
    bool f_nonincreasing;
    bool fprime_concave;       // concavity of f'(t) in t
    bool T_concave;            // concavity of f'(e^u) in u
    double fsharp_lipschitz_bound;  // max |dFsharp| on the grid; +inf verdict when unbounded
    bool fsharp_lipschitz_bounded;
};

AssumptionReport assumption_report(const FDivergence& fd, const Vector& u_grid);
Vector default_u_grid();  // covers [-10, 10]

}  // namespace robustgan

#endif
