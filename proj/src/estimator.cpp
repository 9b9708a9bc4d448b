#include "robustgan/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "robustgan/digest.hpp"
#include "robustgan/errors.hpp"
#include "robustgan/rng.hpp"
#include "robustgan/robust_baselines.hpp"

namespace robustgan {

namespace {

double hinge_T(double u) { return std::min(1.0, u); }
double hinge_dT(double u) { return u < 1.0 ? 1.0 : 0.0; }
double hinge_ddT(double) { return 0.0; }
double hinge_Fs(double u) { return std::max(-1.0, u); }
double hinge_dFs(double u) { return u > -1.0 ? 1.0 : 0.0; }
double hinge_ddFs(double) { return 0.0; }

double identity_G(double u) { return u; }
double identity_dG(double) { return 1.0; }

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

std::string TrainObjective::str() const {
    if (kind == ObjectiveKind::hinge) return "hinge";
    return div_name_str(divergence);
}

TrainObjective parse_objective(const std::string& s) {
    std::string t = s;
    std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return std::tolower(c); });
    if (t == "hinge") return TrainObjective::hinge();
    return TrainObjective::logit_f(parse_div_name(t));
}

void TrainConfig::validate() const {
    if (iterations < 0) throw InvalidInput("TrainConfig: iterations must be nonnegative");
    if (!(alpha0 > 0.0)) throw InvalidInput("TrainConfig: alpha0 must be positive");
    if (!(clip_linf > 0.0)) throw InvalidInput("TrainConfig: clip_linf must be positive");
    if (!(fake_per_real > 0.0)) throw InvalidInput("TrainConfig: fake_per_real must be positive");
    if (lambda0 && *lambda0 < 0.0) throw InvalidInput("TrainConfig: lambda0 must be nonnegative");
    if (objective.kind == ObjectiveKind::logit_f) (void)catalog_logit(objective.divergence);
}

SplineBasisConfig TrainConfig::basis(std::size_t p) const {
    SplineBasisConfig cfg;
    cfg.p = p;
    cfg.knots = knots;
    cfg.include_linear = include_linear_features;
    cfg.validate();
    return cfg;
}

double default_lambda0(const TrainObjective& obj) {
    if (obj.kind == ObjectiveKind::hinge) return 0.1;
    if (obj.divergence == DivName::JS) return 0.025;
    if (obj.divergence == DivName::rKL) return 0.3;
    throw MissingDefault("no default lambda0 for objective '" + obj.str() +
                         "'; pass lambda0 explicitly");
}

PenaltyConfig resolve_penalty(const TrainConfig& cfg, std::size_t n, std::size_t p) {
    if (cfg.penalty_override) {
        PenaltyConfig pen = *cfg.penalty_override;
        pen.validate();
        return pen;
    }
    const double lambda0 = cfg.lambda0 ? *cfg.lambda0 : default_lambda0(cfg.objective);
    return PenaltyConfig::from_lambda0(cfg.penalty_kind, lambda0, n, p);
}

GaussianParams init_params(const Matrix& data) {
    if (data.rows() < 3) throw InvalidData("init_params: need at least three rows");
    if (!all_finite(data)) throw InvalidData("init_params: non-finite data");
    Vector mu0 = column_medians(data);
    PairwiseCovEstimate pw = kendall_mad_cov(data);
    LowerFactor L = chol_factor(SymMatrix(symmetrized(pw.sigma)), 1e-8);
    return GaussianParams{std::move(mu0), std::move(L)};
}

FeatureBatch make_features(const SplineBasisConfig& cfg, const Matrix& rows) {
    FeatureBatch fb;
    fb.n = rows.rows();
    fb.m = cfg.n_features();
    fb.values.resize(fb.n * fb.m);
    for (std::size_t i = 0; i < fb.n; ++i)
        basis_into(cfg, rows.row(i), fb.values.data() + i * fb.m);
    return fb;
}

ScoreFuncs score_funcs(const TrainObjective& obj) {
    if (obj.kind == ObjectiveKind::hinge)
        return {hinge_T, hinge_dT, hinge_ddT, hinge_Fs, hinge_dFs, hinge_ddFs};
    const FDivergence fd = catalog_logit(obj.divergence);
    return {fd.T, fd.dT, fd.ddT, fd.Fsharp, fd.dFsharp, fd.ddFsharp};
}

DiscObjective::DesignRows DiscObjective::build(const FeatureBatch& fb) const {
    DesignRows rows;
    rows.n = fb.n;
    rows.lin_start.reserve(fb.n + 1);
    rows.pair_start.reserve(fb.n + 1);
    rows.lin_start.push_back(0);
    rows.pair_start.push_back(0);

    std::vector<std::uint16_t> nz;
    nz.reserve(fb.m);
    for (std::size_t i = 0; i < fb.n; ++i) {
        const double* phi = fb.row(i);
        nz.clear();
        for (std::size_t a = 0; a < fb.m; ++a)
            if (phi[a] != 0.0) nz.push_back(static_cast<std::uint16_t>(a));

        for (std::uint16_t a : nz) {
            rows.lin_idx.push_back(a);
            rows.lin_val.push_back(phi[a]);
        }
        // diagonal pairs first, then the strict upper pairs
        for (std::uint16_t a : nz) {
            rows.pair_idx.push_back(static_cast<std::uint32_t>(packed_index(a, a, fb.m)));
            rows.pair_val.push_back(phi[a] * phi[a]);
        }
        for (std::size_t k = 0; k < nz.size(); ++k) {
            const std::size_t a = nz[k];
            const std::size_t base = packed_index(a, a, fb.m) - a;
            for (std::size_t l = k + 1; l < nz.size(); ++l) {
                const std::size_t b = nz[l];
                rows.pair_idx.push_back(static_cast<std::uint32_t>(base + b));
                rows.pair_val.push_back(phi[a] * phi[b]);
            }
        }
        rows.lin_start.push_back(static_cast<std::uint32_t>(rows.lin_idx.size()));
        rows.pair_start.push_back(static_cast<std::uint32_t>(rows.pair_idx.size()));
    }
    return rows;
}

DiscObjective::DiscObjective(FeatureBatch real, FeatureBatch fake, ScoreFuncs scores)
    : m_(real.m), scores_(scores) {
    if (fake.m != m_) throw InvalidInput("DiscObjective: feature dimension mismatch");
    if (m_ > 65535) throw InvalidInput("DiscObjective: feature dimension too large");
    real_ = build(real);
    fake_ = build(fake);

    // Per-feature second moments over both batches, used as the solver's
    // diagonal preconditioner. Dead features get the floor so their prox
    // thresholds stay finite.
    metric_.assign(dim(), 0.0);
    metric_[0] = 1.0;
    const double inv_total = 1.0 / static_cast<double>(real_.n + fake_.n);
    double* m1 = metric_.data() + 1;
    double* m2 = metric_.data() + 1 + m_;
    for (const DesignRows* rows : {&real_, &fake_}) {
        for (std::size_t k = 0; k < rows->lin_idx.size(); ++k)
            m1[rows->lin_idx[k]] += rows->lin_val[k] * rows->lin_val[k] * inv_total;
        for (std::size_t k = 0; k < rows->pair_idx.size(); ++k)
            m2[rows->pair_idx[k]] += rows->pair_val[k] * rows->pair_val[k] * inv_total;
    }
    for (std::size_t i = 1; i < metric_.size(); ++i) metric_[i] = std::max(metric_[i], 1e-4);
}

double DiscObjective::value(const Vector& x) const { return accumulate(x, nullptr); }

double DiscObjective::value_and_grad(const Vector& x, Vector& grad) const {
    grad.assign(dim(), 0.0);
    return accumulate(x, &grad);
}

double DiscObjective::accumulate(const Vector& x, Vector* grad) const {
    if (x.size() != dim()) throw InvalidInput("DiscObjective: coefficient size mismatch");
    const double gamma0 = x[0];
    const double* g1 = x.data() + 1;
    const double* g2p = x.data() + 1 + m_;

    double total = 0.0;
    auto run_batch = [&](const DesignRows& rows, bool is_real) {
        const double inv_n = 1.0 / static_cast<double>(rows.n);
        double sum = 0.0;
        for (std::size_t i = 0; i < rows.n; ++i) {
            const std::uint32_t llo = rows.lin_start[i], lhi = rows.lin_start[i + 1];
            const std::uint32_t plo = rows.pair_start[i], phi_end = rows.pair_start[i + 1];
            const std::size_t nnz = lhi - llo;

            double h = gamma0;
            {
                const std::uint16_t* idx = rows.lin_idx.data() + llo;
                const double* val = rows.lin_val.data() + llo;
                for (std::size_t k = 0; k < nnz; ++k) h += g1[idx[k]] * val[k];
            }
            {
                const std::uint32_t* pidx = rows.pair_idx.data() + plo;
                const double* pval = rows.pair_val.data() + plo;
                const std::size_t np = phi_end - plo;
                double diag = 0.0, off = 0.0;
                for (std::size_t q = 0; q < nnz; ++q) diag += g2p[pidx[q]] * pval[q];
                for (std::size_t q = nnz; q < np; ++q) off += g2p[pidx[q]] * pval[q];
                h += diag + 2.0 * off;
            }

            sum += is_real ? scores_.T(h) : scores_.Fsharp(h);

            if (grad) {
                const double c = (is_real ? scores_.dT(h) : -scores_.dFsharp(h)) * inv_n;
                if (c != 0.0) {
                    double* gout = grad->data();
                    gout[0] += c;
                    double* gl = gout + 1;
                    double* gq = gout + 1 + m_;
                    const std::uint16_t* idx = rows.lin_idx.data() + llo;
                    const double* val = rows.lin_val.data() + llo;
                    for (std::size_t k = 0; k < nnz; ++k) gl[idx[k]] += c * val[k];
                    const std::uint32_t* pidx = rows.pair_idx.data() + plo;
                    const double* pval = rows.pair_val.data() + plo;
                    const std::size_t np = phi_end - plo;
                    for (std::size_t q = 0; q < np; ++q) gq[pidx[q]] += c * pval[q];
                }
            }
        }
        return sum * inv_n;
    };

    total += run_batch(real_, true);
    total -= run_batch(fake_, false);
    if (!std::isfinite(total)) throw NonFiniteObjective("discriminator objective non-finite");
    return total;
}

void DiscObjective::compute_h(const Vector& x, Vector& h) const {
    const double gamma0 = x[0];
    const double* g1 = x.data() + 1;
    const double* g2p = x.data() + 1 + m_;
    h.resize(real_.n + fake_.n);
    std::size_t out = 0;
    for (const DesignRows* rows : {&real_, &fake_}) {
        for (std::size_t i = 0; i < rows->n; ++i, ++out) {
            const std::uint32_t llo = rows->lin_start[i], lhi = rows->lin_start[i + 1];
            const std::uint32_t plo = rows->pair_start[i], phi_end = rows->pair_start[i + 1];
            const std::size_t nnz = lhi - llo;
            double hh = gamma0;
            for (std::uint32_t k = llo; k < lhi; ++k) hh += g1[rows->lin_idx[k]] * rows->lin_val[k];
            double diag = 0.0, off = 0.0;
            for (std::uint32_t q = plo; q < plo + nnz; ++q)
                diag += g2p[rows->pair_idx[q]] * rows->pair_val[q];
            for (std::uint32_t q = plo + static_cast<std::uint32_t>(nnz); q < phi_end; ++q)
                off += g2p[rows->pair_idx[q]] * rows->pair_val[q];
            h[out] = hh + diag + 2.0 * off;
        }
    }
}

void DiscObjective::build_columns() const {
    if (cols_.built) return;
    const std::size_t dim_total = dim();
    const std::size_t n_real = real_.n;
    const double inv_nr = 1.0 / static_cast<double>(real_.n);
    const double inv_nf = 1.0 / static_cast<double>(fake_.n);

    std::vector<std::uint32_t> count(dim_total, 0);
    auto count_rows = [&](const DesignRows& rows) {
        count[0] += static_cast<std::uint32_t>(rows.n);
        for (std::uint16_t a : rows.lin_idx) ++count[1 + a];
        for (std::uint32_t q : rows.pair_idx) ++count[1 + m_ + q];
    };
    count_rows(real_);
    count_rows(fake_);

    cols_.start.assign(dim_total + 1, 0);
    for (std::size_t j = 0; j < dim_total; ++j) cols_.start[j + 1] = cols_.start[j] + count[j];
    const std::size_t total = cols_.start.back();
    cols_.row.resize(total);
    cols_.val.resize(total);
    std::vector<std::uint32_t> cursor(cols_.start.begin(), cols_.start.end() - 1);

    // Diagonal pair coordinates carry mirror weight 1, off-diagonal 2 (the
    // h-convention); identify them via the packed diagonal index set.
    std::vector<std::uint8_t> is_diag(packed_size(m_), 0);
    for (std::size_t a = 0; a < m_; ++a) is_diag[packed_index(a, a, m_)] = 1;

    std::size_t row_base = 0;
    for (const DesignRows* rows : {&real_, &fake_}) {
        for (std::size_t i = 0; i < rows->n; ++i) {
            const std::uint32_t r = static_cast<std::uint32_t>(row_base + i);
            std::uint32_t& c0 = cursor[0];
            cols_.row[c0] = r;
            cols_.val[c0] = 1.0;
            ++c0;
            for (std::uint32_t k = rows->lin_start[i]; k < rows->lin_start[i + 1]; ++k) {
                std::uint32_t& c = cursor[1 + rows->lin_idx[k]];
                cols_.row[c] = r;
                cols_.val[c] = rows->lin_val[k];
                ++c;
            }
            for (std::uint32_t q = rows->pair_start[i]; q < rows->pair_start[i + 1]; ++q) {
                const std::uint32_t pj = rows->pair_idx[q];
                std::uint32_t& c = cursor[1 + m_ + pj];
                cols_.row[c] = r;
                cols_.val[c] = (is_diag[pj] ? 1.0 : 2.0) * rows->pair_val[q];
                ++c;
            }
        }
        row_base += rows->n;
    }

    cols_.sq.assign(dim_total, 0.0);
    for (std::size_t j = 0; j < dim_total; ++j) {
        double s = 0.0;
        for (std::uint32_t k = cols_.start[j]; k < cols_.start[j + 1]; ++k) {
            const double v = cols_.val[k];
            s += v * v * (cols_.row[k] < n_real ? inv_nr : inv_nf);
        }
        cols_.sq[j] = s;
    }
    cols_.built = true;
}

SolveResult DiscObjective::solve_l1_cd(const CoeffLayout& layout, const PenaltyConfig& pen,
                                       const Vector& init, const SolverConfig& cfg) const {
    cfg.validate();
    pen.validate();
    if (pen.kind != PenaltyKind::L1)
        throw InvalidInput("solve_l1_cd: only the L1 penalty is supported");
    const std::size_t D = dim();
    if (init.size() != D || layout.size() != D)
        throw InvalidInput("solve_l1_cd: dimension mismatch");
    build_columns();

    const std::size_t n_real = real_.n;
    const double inv_nr = 1.0 / static_cast<double>(real_.n);
    const double inv_nf = 1.0 / static_cast<double>(fake_.n);

    Vector x = init;
    Vector h;
    compute_h(x, h);

    auto row_value = [&](std::uint32_t r, double hh) {
        return r < n_real ? scores_.T(hh) * inv_nr : -scores_.Fsharp(hh) * inv_nf;
    };
    auto full_smooth = [&]() {
        double s = 0.0;
        for (std::size_t r = 0; r < h.size(); ++r)
            s += row_value(static_cast<std::uint32_t>(r), h[r]);
        if (!std::isfinite(s)) throw NonFiniteObjective("discriminator objective non-finite");
        return s;
    };

    double F = full_smooth() - penalty_value(pen, layout, x);

    Vector g0(D);
    value_and_grad(init, g0);
    const double residual_tol = 1e-4 * (1.0 + layout.norm2(g0));

    // One coordinate prox-Newton step with exact backtracking over the
    // coordinate's rows; returns the objective gain.
    auto update = [&](std::size_t j) {
        const std::uint32_t lo = cols_.start[j], hi = cols_.start[j + 1];
        if (lo == hi) return 0.0;
        double g = 0.0, a = 0.0;
        for (std::uint32_t k = lo; k < hi; ++k) {
            const std::uint32_t r = cols_.row[k];
            const double v = cols_.val[k];
            if (r < n_real) {
                g += scores_.dT(h[r]) * v * inv_nr;
                a -= scores_.ddT(h[r]) * v * v * inv_nr;
            } else {
                g -= scores_.dFsharp(h[r]) * v * inv_nf;
                a += scores_.ddFsharp(h[r]) * v * v * inv_nf;
            }
        }
        // Curvature floor covers the piecewise-linear hinge and the
        // non-concave tails of reverse chi^2.
        a = std::max({a, 0.25 * cols_.sq[j], 1e-10});

        const double lam = layout.block[j] != 0 ? pen.lambda1 * layout.weight[j] : 0.0;
        const double z = x[j] + g / a;
        double target = z;
        if (lam > 0.0) {
            const double t = std::abs(z) - lam / a;
            target = t > 0.0 ? (z > 0.0 ? t : -t) : 0.0;
        }
        double delta = target - x[j];
        if (std::abs(delta) < 1e-15 * (1.0 + std::abs(x[j]))) return 0.0;

        for (int bt = 0; bt < 40; ++bt) {
            double dk = 0.0;
            for (std::uint32_t k = lo; k < hi; ++k) {
                const std::uint32_t r = cols_.row[k];
                dk += row_value(r, h[r] + cols_.val[k] * delta) - row_value(r, h[r]);
            }
            const double dpen =
                lam > 0.0 ? lam * (std::abs(x[j] + delta) - std::abs(x[j])) : 0.0;
            const double df = dk - dpen;
            if (df >= 0.0) {
                if (df == 0.0) return 0.0;
                for (std::uint32_t k = lo; k < hi; ++k) h[cols_.row[k]] += cols_.val[k] * delta;
                x[j] += delta;
                return df;
            }
            delta *= 0.5;
            if (std::abs(delta) < 1e-15) break;
        }
        return 0.0;
    };

    std::vector<std::uint8_t> active(D, 0);
    active[0] = 1;
    for (std::size_t j = 1; j < D; ++j) active[j] = x[j] != 0.0;

    SolveResult result;
    result.diag.objective_trace.reserve(cfg.record_trace ? cfg.max_iter : 0);
    int sweeps = 0;
    while (sweeps < cfg.max_iter) {
        // Full sweep: updates everything and admits new actives.
        ++sweeps;
        double gain_full = 0.0;
        for (std::size_t j = 0; j < D; ++j) {
            gain_full += update(j);
            if (x[j] != 0.0) active[j] = 1;
        }
        // Re-anchor the tracked objective to kill incremental drift.
        F = full_smooth() - penalty_value(pen, layout, x);
        if (cfg.record_trace) result.diag.objective_trace.push_back(F);
        const bool full_small = gain_full <= cfg.rel_tol * (1.0 + std::abs(F));

        // Active-set sweeps until they stall.
        for (int guard = 0; guard < 50 && sweeps < cfg.max_iter; ++guard) {
            ++sweeps;
            double gain = 0.0;
            for (std::size_t j = 0; j < D; ++j)
                if (active[j]) gain += update(j);
            F += gain;
            if (cfg.record_trace) result.diag.objective_trace.push_back(F);
            if (gain <= cfg.rel_tol * (1.0 + std::abs(F))) break;
        }
        for (std::size_t j = 1; j < D; ++j) active[j] = x[j] != 0.0;

        if (full_small) {
            const double res = prox_gradient_residual(*this, layout, pen, x, 1e-4);
            if (res <= residual_tol) {
                result.diag.final_residual = res;
                result.diag.converged = true;
                break;
            }
        }
    }

    if (!result.diag.converged) {
        result.diag.final_residual = prox_gradient_residual(*this, layout, pen, x, 1e-4);
        result.diag.converged = result.diag.final_residual <= residual_tol;
        result.diag.max_iter_reached = !result.diag.converged;
    }
    result.diag.iterations = sweeps;
    result.value = full_smooth() - penalty_value(pen, layout, x);
    result.x = std::move(x);
    return result;
}

SolveResult solve_discriminator(const DiscObjective& obj, const CoeffLayout& layout,
                                const PenaltyConfig& pen, const Vector& init,
                                const SolverConfig& cfg) {
    if (pen.kind == PenaltyKind::L1) return obj.solve_l1_cd(layout, pen, init, cfg);
    return maximize_discriminator(obj, layout, pen, init, cfg);
}

CoeffLayout spline_coeff_layout(std::size_t m) {
    CoeffLayout layout;
    const std::size_t dim = 1 + m + packed_size(m);
    layout.weight.assign(dim, 1.0);
    layout.block.assign(dim, 0);
    for (std::size_t a = 0; a < m; ++a) layout.block[1 + a] = 1;
    for (std::size_t a = 0; a < m; ++a)
        for (std::size_t b = a; b < m; ++b) {
            const std::size_t idx = 1 + m + packed_index(a, b, m);
            layout.block[idx] = 2;
            layout.weight[idx] = (a == b) ? 1.0 : 2.0;
        }
    return layout;
}

Vector flatten_coeffs(const SplineCoeffs& c) {
    const std::size_t m = c.gamma1.size();
    Vector flat(1 + m + packed_size(m));
    flat[0] = c.gamma0;
    std::copy(c.gamma1.begin(), c.gamma1.end(), flat.begin() + 1);
    std::copy(c.gamma2_packed.begin(), c.gamma2_packed.end(), flat.begin() + 1 + m);
    return flat;
}

SplineCoeffs unflatten_coeffs(const Vector& flat, std::size_t m) {
    if (flat.size() != 1 + m + packed_size(m))
        throw InvalidInput("unflatten_coeffs: size mismatch");
    SplineCoeffs c;
    c.gamma0 = flat[0];
    c.gamma1.assign(flat.begin() + 1, flat.begin() + 1 + m);
    c.gamma2_packed.assign(flat.begin() + 1 + m, flat.end());
    return c;
}

namespace {

struct ModeInputs {
    Matrix real_rows;  // inputs to the discriminator for the real term
    Matrix fake_rows;  // inputs for the fake term
};

ModeInputs transform_inputs(const GaussianParams& theta, const Matrix& data, const Matrix& z_fake,
                            Transform transform) {
    const std::size_t n = data.rows(), p = data.cols(), nf = z_fake.rows();
    ModeInputs mi;
    mi.real_rows = Matrix(n, p);
    if (transform == Transform::full) {
        Vector r(p);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < p; ++j) r[j] = data(i, j) - theta.mu[j];
            Vector y = solve_lower(theta.scale, r);
            for (std::size_t j = 0; j < p; ++j) mi.real_rows(i, j) = y[j];
        }
        mi.fake_rows = z_fake;
    } else {
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < p; ++j) mi.real_rows(i, j) = data(i, j) - theta.mu[j];
        mi.fake_rows = Matrix(nf, p);
        const Matrix& L = theta.scale.mat();
        for (std::size_t i = 0; i < nf; ++i) {
            const double* z = z_fake.row(i);
            for (std::size_t a = 0; a < p; ++a) {
                double s = 0.0;
                for (std::size_t b = 0; b <= a; ++b) s += L(a, b) * z[b];
                mi.fake_rows(i, a) = s;
            }
        }
    }
    return mi;
}

}  // namespace

OuterEval outer_objective(const GaussianParams& theta, const SplineCoeffs& gamma,
                          const Matrix& data, const Matrix& z_fake, const TrainConfig& cfg) {
    cfg.validate();
    const std::size_t n = data.rows(), p = data.cols(), nf = z_fake.rows();
    if (theta.dim() != p || z_fake.cols() != p)
        throw InvalidInput("outer_objective: dimension mismatch");
    if (n == 0 || nf == 0) throw InvalidInput("outer_objective: empty sample");

    const SplineBasisConfig basis_cfg = cfg.basis(p);
    const ScoreFuncs sf = score_funcs(cfg.objective);
    const ModeInputs mi = transform_inputs(theta, data, z_fake, cfg.transform);

    OuterEval out;
    out.grad_mu.assign(p, 0.0);
    out.grad_scale = Matrix(p, p);
    out.cap_active = false;

    // Real term: mean T(h(u_i)); theta enters through the transformed inputs.
    double real_sum = 0.0;
    Vector u(p);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < p; ++j) u[j] = mi.real_rows(i, j);
        const double h = eval_point(basis_cfg, gamma, u);
        real_sum += sf.T(h);
        const double c = sf.dT(h) / static_cast<double>(n);
        if (c == 0.0) continue;
        const Vector g = grad_input(basis_cfg, gamma, u);
        if (cfg.transform == Transform::full) {
            const Vector v = solve_lower_transpose(theta.scale, g);
            for (std::size_t a = 0; a < p; ++a) out.grad_mu[a] -= c * v[a];
            for (std::size_t a = 0; a < p; ++a)
                for (std::size_t b = 0; b <= a; ++b) out.grad_scale(a, b) -= c * v[a] * u[b];
        } else {
            for (std::size_t a = 0; a < p; ++a) out.grad_mu[a] -= c * g[a];
        }
    }

    // Fake term: mean F#(h) in one-objective mode, mean G(h) = mean h in
    // two-objective mode. In full mode the fake inputs are theta-free.
    double (*fake_fn)(double) = cfg.two_objective ? identity_G : sf.Fsharp;
    double (*fake_dfn)(double) = cfg.two_objective ? identity_dG : sf.dFsharp;
    double fake_sum = 0.0;
    Vector v(p);
    for (std::size_t i = 0; i < nf; ++i) {
        for (std::size_t j = 0; j < p; ++j) v[j] = mi.fake_rows(i, j);
        const double h = eval_point(basis_cfg, gamma, v);
        fake_sum += fake_fn(h);
        if (cfg.transform == Transform::location_only) {
            const double c = fake_dfn(h) / static_cast<double>(nf);
            if (c == 0.0) continue;
            const Vector g = grad_input(basis_cfg, gamma, v);
            for (std::size_t a = 0; a < p; ++a)
                for (std::size_t b = 0; b <= a; ++b)
                    out.grad_scale(a, b) -= c * g[a] * z_fake(i, b);
        }
    }

    out.value = real_sum / static_cast<double>(n) - fake_sum / static_cast<double>(nf);
    if (!std::isfinite(out.value)) throw NonFiniteObjective("outer objective non-finite");

    // rKL cap: flat region of min(K, cap), so the gradient is zeroed there.
    if (!cfg.two_objective && cfg.objective.is_rkl() && out.value > cfg.rkl_cap) {
        out.value = cfg.rkl_cap;
        out.cap_active = true;
        out.grad_mu.assign(p, 0.0);
        out.grad_scale = Matrix(p, p);
    }
    return out;
}

FitResult fit(const Matrix& data, const TrainConfig& cfg) {
    cfg.validate();
    const std::size_t n = data.rows(), p = data.cols();
    if (n < 10) throw InvalidData("fit: need at least 10 rows");
    if (p < 1) throw InvalidData("fit: need at least one column");
    if (!all_finite(data)) throw InvalidData("fit: non-finite data");

    GaussianParams theta = init_params(data);
    const PenaltyConfig pen = resolve_penalty(cfg, n, p);
    const SplineBasisConfig basis_cfg = cfg.basis(p);
    const std::size_t m = basis_cfg.n_features();
    CoeffLayout layout = spline_coeff_layout(m);
    const ScoreFuncs sf = score_funcs(cfg.objective);

    const std::size_t nf = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::lround(cfg.fake_per_real * static_cast<double>(n))));

    Rng rng = Rng::stream(cfg.seed, 0);
    Vector warm(1 + m + packed_size(m), 0.0);

    TrainingTrace trace;
    trace.iters.reserve(cfg.iterations);

    Matrix L = theta.scale.mat();
    for (int t = 1; t <= cfg.iterations; ++t) {
        const Matrix z = sample_std_normal(nf, p, rng);
        const ModeInputs mi = transform_inputs(theta, data, z, cfg.transform);

        DiscObjective dobj(make_features(basis_cfg, mi.real_rows),
                           make_features(basis_cfg, mi.fake_rows), sf);
        layout.metric = dobj.metric();
        SolveResult inner = solve_discriminator(dobj, layout, pen, warm, cfg.inner);
        warm = inner.x;
        const SplineCoeffs gamma = unflatten_coeffs(inner.x, m);

        OuterEval outer = outer_objective(theta, gamma, data, z, cfg);

        const double alpha = cfg.alpha0 * std::exp(-cfg.decay * static_cast<double>(t));
        auto clip = [&](double g) { return std::clamp(g, -cfg.clip_linf, cfg.clip_linf); };

        double step_linf = 0.0;
        for (std::size_t j = 0; j < p; ++j) {
            const double d = alpha * clip(outer.grad_mu[j]);
            theta.mu[j] -= d;
            step_linf = std::max(step_linf, std::abs(d));
        }
        for (std::size_t a = 0; a < p; ++a) {
            for (std::size_t b = 0; b <= a; ++b) {
                const double d = alpha * clip(outer.grad_scale(a, b));
                L(a, b) -= d;
                step_linf = std::max(step_linf, std::abs(d));
            }
            L(a, a) = std::max(L(a, a), 1e-6);
        }
        theta.scale = LowerFactor(L);

        IterRecord rec;
        rec.outer_objective = outer.value - penalty_value(pen, layout, inner.x);
        rec.inner_value = inner.value;
        rec.inner_iterations = inner.diag.iterations;
        rec.gamma1_l1 = gamma.gamma1_l1();
        rec.gamma2_l1 = gamma.gamma2_l1();
        rec.gamma1_l2 = gamma.gamma1_l2();
        rec.gamma2_l2 = gamma.gamma2_l2();
        rec.step_linf = step_linf;
        rec.cap_active = outer.cap_active;
        trace.iters.push_back(rec);

        if (cfg.early_stop_tol > 0.0 && step_linf < cfg.early_stop_tol) break;
    }

    if (cfg.final_eig_clamp > 0.0) {
        EigenSym es = jacobi_eigen_sym(SymMatrix(theta.scale.sigma()));
        const std::size_t pp = theta.dim();
        Matrix clamped(pp, pp);
        for (std::size_t i = 0; i < pp; ++i)
            for (std::size_t j = 0; j <= i; ++j) {
                double s = 0.0;
                for (std::size_t k = 0; k < pp; ++k)
                    s += es.vectors(i, k) * std::min(es.values[k], cfg.final_eig_clamp) *
                         es.vectors(j, k);
                clamped(i, j) = s;
                clamped(j, i) = s;
            }
        theta.scale = chol_factor(SymMatrix(clamped), 1e-12);
    }

    return FitResult{std::move(theta), std::move(trace)};
}

FitResult fit_two_objective(const Matrix& data, const TrainConfig& cfg) {
    TrainConfig two = cfg;
    two.two_objective = true;
    return fit(data, two);
}

TraceSummary summarize(const TrainingTrace& trace) {
    TraceSummary s;
    s.iterations = static_cast<int>(trace.iters.size());
    if (trace.iters.empty()) return s;
    double inner_iters = 0.0;
    for (const IterRecord& r : trace.iters) {
        inner_iters += r.inner_iterations;
        if (r.cap_active) ++s.cap_hits;
    }
    s.final_outer = trace.iters.back().outer_objective;
    s.final_inner = trace.iters.back().inner_value;
    s.mean_inner_iters = inner_iters / static_cast<double>(trace.iters.size());
    return s;
}

std::string config_digest(const TrainConfig& cfg) {
    std::ostringstream os;
    os << cfg.objective.str() << '|' << (cfg.transform == Transform::full ? "full" : "location")
       << '|' << (cfg.penalty_kind == PenaltyKind::L1 ? "l1" : "l2") << '|'
       << (cfg.lambda0 ? fmt17(*cfg.lambda0) : "default") << '|' << cfg.two_objective << '|'
       << cfg.iterations << '|' << fmt17(cfg.alpha0) << '|' << fmt17(cfg.decay) << '|'
       << fmt17(cfg.clip_linf) << '|' << fmt17(cfg.rkl_cap) << '|' << fmt17(cfg.fake_per_real)
       << '|' << cfg.seed << '|' << fmt17(cfg.early_stop_tol) << '|' << fmt17(cfg.final_eig_clamp)
       << '|' << cfg.include_linear_features;
    for (double k : cfg.knots) os << ',' << fmt17(k);
    if (cfg.penalty_override)
        os << "|ovr:" << fmt17(cfg.penalty_override->lambda1) << ','
           << fmt17(cfg.penalty_override->lambda2) << ',' << fmt17(cfg.penalty_override->lambda3);
    return fnv1a64_hex(os.str());
}

std::string serialize_estimate(const GaussianParams& params, const TrainConfig& cfg,
                               const TrainingTrace& trace) {
    const TraceSummary s = summarize(trace);
    const Matrix sigma = params.sigma();
    std::ostringstream os;
    os << "robustgan-estimate v1\n";
    os << "p = " << params.dim() << "\n";
    os << "mu =";
    for (double v : params.mu) os << ' ' << fmt17(v);
    os << "\n";
    for (std::size_t i = 0; i < sigma.rows(); ++i) {
        os << "sigma_row_" << i << " =";
        for (std::size_t j = 0; j < sigma.cols(); ++j) os << ' ' << fmt17(sigma(i, j));
        os << "\n";
    }
    os << "config_digest = " << config_digest(cfg) << "\n";
    os << "iterations = " << s.iterations << "\n";
    os << "final_outer = " << fmt17(s.final_outer) << "\n";
    os << "final_inner = " << fmt17(s.final_inner) << "\n";
    os << "cap_hits = " << s.cap_hits << "\n";
    os << "mean_inner_iters = " << fmt17(s.mean_inner_iters) << "\n";
    return os.str();
}

EstimateRecord parse_estimate(const std::string& text) {
    std::istringstream is(text);
    std::string line;
    if (!std::getline(is, line) || line != "robustgan-estimate v1")
        throw InvalidInput("parse_estimate: unknown record version");

    EstimateRecord rec;
    std::size_t p = 0;
    while (std::getline(is, line)) {
        const auto eq = line.find(" = ");
        if (eq == std::string::npos) continue;
        const std::string key = line.substr(0, eq);
        std::istringstream vs(line.substr(eq + 3));
        if (key == "p") {
            vs >> p;
            rec.sigma = Matrix(p, p);
        } else if (key == "mu") {
            double v;
            while (vs >> v) rec.mu.push_back(v);
        } else if (key.rfind("sigma_row_", 0) == 0) {
            const std::size_t i = std::stoul(key.substr(10));
            for (std::size_t j = 0; j < p; ++j) vs >> rec.sigma(i, j);
        } else if (key == "config_digest") {
            vs >> rec.config_digest;
        } else if (key == "iterations") {
            vs >> rec.summary.iterations;
        } else if (key == "final_outer") {
            vs >> rec.summary.final_outer;
        } else if (key == "final_inner") {
            vs >> rec.summary.final_inner;
        } else if (key == "cap_hits") {
            vs >> rec.summary.cap_hits;
        } else if (key == "mean_inner_iters") {
            vs >> rec.summary.mean_inner_iters;
        }
    }
    if (rec.mu.size() != p) throw InvalidInput("parse_estimate: malformed record");
    return rec;
}

}  // namespace robustgan
