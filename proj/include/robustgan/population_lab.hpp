#ifndef ROBUSTGAN_POPULATION_LAB_HPP
#define ROBUSTGAN_POPULATION_LAB_HPP

#include <iosfwd>
#include <vector>

#include "robustgan/divergences.hpp"

namespace robustgan {

// One-dimensional Huber mixture (1-eps) N(mu*, sigma*^2) + eps N(mu_Q, sigma_Q^2).
struct Mixture1D {
    double eps = 0.0;
    double mu_star = 0.0;
    double sigma_star = 1.0;
    double mu_q = 5.0;
    double sigma_q = 0.5;

    void validate() const;
    double density(double x) const;
    // Window covering both components out to 12 standard deviations.
    QuadratureConfig default_quadrature() const;
};

double normal_density(double x, double mu, double sigma);

struct MinDivFit {
    double mu_bar = 0.0;
    double sigma_bar = 1.0;
    double d_min = 0.0;
    int evals = 0;
};

// Minimizes D_f(P_eps || N(mu, sigma^2)) over (mu, log sigma) by Nelder-Mead
// started at the clean parameters, then polishes on a 0.001 grid. Throws
// OptFailure (best iterate attached) after 2000 objective evaluations without
// convergence.
MinDivFit min_divergence_fit(const FDivergence& fd, const Mixture1D& mix,
                             const QuadratureConfig* quad = nullptr);

struct SweepRow {
    DivName divergence;
    double eps;
    double mu_q;
    double mu_err;
    double sigma_err;
    bool failed;
};

// Error curves over contamination fraction; eps_grid must lie in [0, 0.05].
std::vector<SweepRow> sweep_epsilon(const std::vector<DivName>& divergences,
                                    const Vector& eps_grid, const Mixture1D& mix_template);

// Error curves over contamination location; grid within [0, 10].
std::vector<SweepRow> sweep_location(const std::vector<DivName>& divergences,
                                     const Vector& muq_grid, double eps,
                                     const Mixture1D& mix_template);

void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows);

}  // namespace robustgan

#endif
