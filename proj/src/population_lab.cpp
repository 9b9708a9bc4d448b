#include "robustgan/population_lab.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "robustgan/errors.hpp"

namespace robustgan {

double normal_density(double x, double mu, double sigma) {
    const double z = (x - mu) / sigma;
    return std::exp(-0.5 * z * z) / (sigma * 2.5066282746310002);  // sqrt(2 pi)
}

void Mixture1D::validate() const {
    if (!(eps >= 0.0 && eps < 0.5)) throw InvalidInput("Mixture1D: eps must be in [0, 0.5)");
    if (!(sigma_star > 0.0 && sigma_q > 0.0))
        throw InvalidInput("Mixture1D: standard deviations must be positive");
}

double Mixture1D::density(double x) const {
    return (1.0 - eps) * normal_density(x, mu_star, sigma_star) +
           eps * normal_density(x, mu_q, sigma_q);
}

QuadratureConfig Mixture1D::default_quadrature() const {
    const double smax = std::max(sigma_star, sigma_q);
    QuadratureConfig quad;
    quad.lower = std::min(mu_star, mu_q) - 12.0 * smax;
    quad.upper = std::max(mu_star, mu_q) + 12.0 * smax;
    return quad;
}

namespace {

struct Point {
    double mu;
    double log_sigma;
};

double eval_objective(const FDivergence& fd, const Mixture1D& mix, const QuadratureConfig& quad,
                      const Point& pt, int& evals) {
    ++evals;
    const double sigma = std::exp(pt.log_sigma);
    auto q = [&](double x) { return normal_density(x, pt.mu, sigma); };
    auto p = [&](double x) { return mix.density(x); };
    try {
        return population_df_1d(fd, p, q, quad);
    } catch (const QuadratureFailure&) {
        // Candidate density underflowed somewhere on the window; steer the
        // search away instead of aborting the whole fit.
        return 1e6;
    }
}

}  // namespace

namespace {

struct NmResult {
    Point best;
    double value;
    bool converged;
};

// Standard-coefficient Nelder-Mead on (mu, log sigma).
NmResult nelder_mead(const std::function<double(const Point&)>& obj, Point start, int& evals,
                     int max_evals) {
    std::array<Point, 3> simplex{start, Point{start.mu + 0.25, start.log_sigma},
                                 Point{start.mu, start.log_sigma + 0.25}};
    std::array<double, 3> fv{obj(simplex[0]), obj(simplex[1]), obj(simplex[2])};

    auto order = [&]() {
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2 - i; ++j)
                if (fv[j + 1] < fv[j]) {
                    std::swap(fv[j], fv[j + 1]);
                    std::swap(simplex[j], simplex[j + 1]);
                }
    };

    bool converged = false;
    while (evals < max_evals) {
        order();
        const double size = std::max(
            std::max(std::abs(simplex[1].mu - simplex[0].mu),
                     std::abs(simplex[2].mu - simplex[0].mu)),
            std::max(std::abs(simplex[1].log_sigma - simplex[0].log_sigma),
                     std::abs(simplex[2].log_sigma - simplex[0].log_sigma)));
        if (size < 1e-9 && std::abs(fv[2] - fv[0]) < 1e-12 * (1.0 + std::abs(fv[0]))) {
            converged = true;
            break;
        }

        const Point centroid{0.5 * (simplex[0].mu + simplex[1].mu),
                             0.5 * (simplex[0].log_sigma + simplex[1].log_sigma)};
        const Point worst = simplex[2];
        const Point refl{2.0 * centroid.mu - worst.mu,
                         2.0 * centroid.log_sigma - worst.log_sigma};
        const double fr = obj(refl);
        if (fr < fv[0]) {
            const Point exp_pt{centroid.mu + 2.0 * (refl.mu - centroid.mu),
                               centroid.log_sigma + 2.0 * (refl.log_sigma - centroid.log_sigma)};
            const double fe = obj(exp_pt);
            if (fe < fr) {
                simplex[2] = exp_pt;
                fv[2] = fe;
            } else {
                simplex[2] = refl;
                fv[2] = fr;
            }
        } else if (fr < fv[1]) {
            simplex[2] = refl;
            fv[2] = fr;
        } else {
            const Point contr{centroid.mu + 0.5 * (worst.mu - centroid.mu),
                              centroid.log_sigma + 0.5 * (worst.log_sigma - centroid.log_sigma)};
            const double fc = obj(contr);
            if (fc < fv[2]) {
                simplex[2] = contr;
                fv[2] = fc;
            } else {
                for (int i = 1; i < 3; ++i) {
                    simplex[i].mu = 0.5 * (simplex[i].mu + simplex[0].mu);
                    simplex[i].log_sigma = 0.5 * (simplex[i].log_sigma + simplex[0].log_sigma);
                    fv[i] = obj(simplex[i]);
                }
            }
        }
    }
    order();
    return NmResult{simplex[0], fv[0], converged};
}

}  // namespace

MinDivFit min_divergence_fit(const FDivergence& fd, const Mixture1D& mix,
                             const QuadratureConfig* quad_in) {
    mix.validate();
    const QuadratureConfig quad = quad_in ? *quad_in : mix.default_quadrature();

    int evals = 0;
    const int max_evals = 2000;
    auto obj = [&](const Point& pt) { return eval_objective(fd, mix, quad, pt, evals); };

    // Two starts: the clean parameters and the mixture moments. Mass-covering
    // divergences (KL-type) have their minimum in the moment basin while the
    // robust ones stay near the truth; a single local search can stall in the
    // wrong basin.
    const double mix_mean = (1.0 - mix.eps) * mix.mu_star + mix.eps * mix.mu_q;
    const double mix_second =
        (1.0 - mix.eps) * (mix.sigma_star * mix.sigma_star + mix.mu_star * mix.mu_star) +
        mix.eps * (mix.sigma_q * mix.sigma_q + mix.mu_q * mix.mu_q);
    const double mix_sd = std::sqrt(std::max(mix_second - mix_mean * mix_mean, 1e-12));

    const Point starts[2] = {Point{mix.mu_star, std::log(mix.sigma_star)},
                             Point{mix_mean, std::log(mix_sd)}};
    bool any_converged = false;
    Point best_pt = starts[0];
    double best_nm = 1e300;
    for (const Point& start : starts) {
        int run_evals = 0;
        const NmResult res = nelder_mead(obj, start, run_evals, max_evals);
        evals += run_evals;
        if (res.converged && res.value < best_nm) {
            best_nm = res.value;
            best_pt = res.best;
            any_converged = true;
        }
    }
    if (!any_converged)
        throw OptFailure("min_divergence_fit: no convergence within the evaluation budget",
                         best_pt.mu, std::exp(best_pt.log_sigma), best_nm);

    // Grid polish around the optimum, starting on the 0.001 grid and refining
    // below it, in case the simplex stalled on a flat or kinked patch.
    double best_mu = best_pt.mu;
    double best_sigma = std::exp(best_pt.log_sigma);
    double best_val = best_nm;
    for (double step : {1e-3, 2.5e-4, 6e-5, 1.5e-5}) {
        for (int round = 0; round < 25; ++round) {
            double cand_mu = best_mu, cand_sigma = best_sigma, cand_val = best_val;
            for (int dm = -1; dm <= 1; ++dm) {
                for (int ds = -1; ds <= 1; ++ds) {
                    if (dm == 0 && ds == 0) continue;
                    const double mu = best_mu + dm * step;
                    const double sigma = best_sigma + ds * step;
                    if (sigma <= 1e-6) continue;
                    int scratch = 0;
                    const double v =
                        eval_objective(fd, mix, quad, Point{mu, std::log(sigma)}, scratch);
                    if (v < cand_val) {
                        cand_val = v;
                        cand_mu = mu;
                        cand_sigma = sigma;
                    }
                }
            }
            if (cand_val >= best_val) break;
            best_mu = cand_mu;
            best_sigma = cand_sigma;
            best_val = cand_val;
        }
    }

    MinDivFit fit;
    fit.mu_bar = best_mu;
    fit.sigma_bar = best_sigma;
    fit.d_min = best_val;
    fit.evals = evals;
    return fit;
}

namespace {

std::vector<SweepRow> run_sweep(const std::vector<DivName>& divergences,
                                const std::vector<Mixture1D>& cells) {
    std::vector<SweepRow> rows;
    rows.reserve(divergences.size() * cells.size());
    for (DivName d : divergences) {
        const FDivergence fd = catalog(d);
        for (const Mixture1D& mix : cells) {
            SweepRow row{d, mix.eps, mix.mu_q, 0.0, 0.0, false};
            try {
                const MinDivFit fit = min_divergence_fit(fd, mix);
                row.mu_err = std::abs(fit.mu_bar - mix.mu_star);
                row.sigma_err = std::abs(fit.sigma_bar - mix.sigma_star);
            } catch (const OptFailure&) {
                row.failed = true;
            }
            rows.push_back(row);
        }
    }
    return rows;
}

}  // namespace

std::vector<SweepRow> sweep_epsilon(const std::vector<DivName>& divergences,
                                    const Vector& eps_grid, const Mixture1D& mix_template) {
    std::vector<Mixture1D> cells;
    for (double e : eps_grid) {
        if (!(e >= 0.0 && e <= 0.05))
            throw InvalidInput("sweep_epsilon: grid must lie in [0, 0.05]");
        Mixture1D mix = mix_template;
        mix.eps = e;
        cells.push_back(mix);
    }
    return run_sweep(divergences, cells);
}

std::vector<SweepRow> sweep_location(const std::vector<DivName>& divergences,
                                     const Vector& muq_grid, double eps,
                                     const Mixture1D& mix_template) {
    std::vector<Mixture1D> cells;
    for (double mq : muq_grid) {
        if (!(mq >= 0.0 && mq <= 10.0))
            throw InvalidInput("sweep_location: grid must lie in [0, 10]");
        Mixture1D mix = mix_template;
        mix.eps = eps;
        mix.mu_q = mq;
        cells.push_back(mix);
    }
    return run_sweep(divergences, cells);
}

void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
    os << "divergence,eps,mu_q,mu_err,sigma_err,failed\n";
    char buf[160];
    for (const SweepRow& r : rows) {
        std::snprintf(buf, sizeof(buf), "%s,%.17g,%.17g,%.17g,%.17g,%d\n",
                      div_name_str(r.divergence).c_str(), r.eps, r.mu_q, r.mu_err, r.sigma_err,
                      r.failed ? 1 : 0);
        os << buf;
    }
}

}  // namespace robustgan
