#include "robustgan/inner_solver.hpp"

#include <cmath>

#include "robustgan/errors.hpp"

namespace robustgan {

PenaltyConfig PenaltyConfig::l1(double lambda1) {
    PenaltyConfig pen;
    pen.kind = PenaltyKind::L1;
    pen.lambda1 = lambda1;
    pen.validate();
    return pen;
}

PenaltyConfig PenaltyConfig::l2_group(double lambda2, double lambda3) {
    PenaltyConfig pen;
    pen.kind = PenaltyKind::L2Group;
    pen.lambda2 = lambda2;
    pen.lambda3 = lambda3;
    pen.validate();
    return pen;
}

PenaltyConfig PenaltyConfig::from_lambda0(PenaltyKind kind, double lambda0, std::size_t n,
                                          std::size_t p) {
    if (lambda0 < 0.0) throw InvalidInput("PenaltyConfig: lambda0 must be nonnegative");
    if (n == 0 || p == 0) throw InvalidInput("PenaltyConfig: n and p must be positive");
    const double dn = static_cast<double>(n), dp = static_cast<double>(p);
    PenaltyConfig pen;
    pen.kind = kind;
    if (kind == PenaltyKind::L1) {
        pen.lambda1 = lambda0 * std::sqrt(std::log(dp) / dn);
    } else {
        pen.lambda2 = lambda0 * std::sqrt(dp / dn);
        pen.lambda3 = lambda0 * std::sqrt(dp * dp / dn);
    }
    pen.derived_from = PenaltyProvenance{lambda0, n, p};
    pen.validate();
    return pen;
}

void PenaltyConfig::validate() const {
    if (lambda1 < 0.0 || lambda2 < 0.0 || lambda3 < 0.0)
        throw InvalidInput("PenaltyConfig: penalty levels must be nonnegative");
}

void SolverConfig::validate() const {
    if (max_iter < 1) throw InvalidInput("SolverConfig: max_iter must be positive");
    if (!(rel_tol > 0.0 && rel_tol < 1e-3))
        throw InvalidInput("SolverConfig: rel_tol must be in (0, 1e-3)");
    if (!(line_search_shrink > 0.0 && line_search_shrink < 1.0))
        throw InvalidInput("SolverConfig: line_search_shrink must be in (0, 1)");
    if (!(init_step > 0.0)) throw InvalidInput("SolverConfig: init_step must be positive");
}

CoeffLayout CoeffLayout::dense(std::size_t n, std::uint8_t blk) {
    CoeffLayout layout;
    layout.weight.assign(n, 1.0);
    layout.block.assign(n, blk);
    return layout;
}

double CoeffLayout::dot(const Vector& a, const Vector& b) const {
    double s = 0.0;
    for (std::size_t i = 0; i < weight.size(); ++i) s += weight[i] * a[i] * b[i];
    return s;
}

double CoeffLayout::norm2(const Vector& a) const { return std::sqrt(dot(a, a)); }

Vector soft_threshold(const Vector& v, double tau) {
    Vector out = v;
    soft_threshold_inplace(out, tau);
    return out;
}

void soft_threshold_inplace(Vector& v, double tau) {
    if (tau < 0.0) throw InvalidInput("soft_threshold: tau must be nonnegative");
    for (double& x : v) {
        const double a = std::abs(x) - tau;
        x = a > 0.0 ? (x > 0.0 ? a : -a) : 0.0;
    }
}

Vector group_shrink(const Vector& v, double tau) {
    if (tau < 0.0) throw InvalidInput("group_shrink: tau must be nonnegative");
    double norm = 0.0;
    for (double x : v) norm += x * x;
    norm = std::sqrt(norm);
    Vector out(v.size(), 0.0);
    if (norm > tau) {
        const double factor = 1.0 - tau / norm;
        for (std::size_t i = 0; i < v.size(); ++i) out[i] = factor * v[i];
    }
    return out;
}

double penalty_value(const PenaltyConfig& pen, const CoeffLayout& layout, const Vector& x) {
    if (pen.kind == PenaltyKind::L1) {
        double s = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i)
            if (layout.block[i] != 0) s += layout.weight[i] * std::abs(x[i]);
        return pen.lambda1 * s;
    }
    double s1 = 0.0, s2 = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (layout.block[i] == 1) s1 += layout.weight[i] * x[i] * x[i];
        if (layout.block[i] == 2) s2 += layout.weight[i] * x[i] * x[i];
    }
    return pen.lambda2 * std::sqrt(s1) + pen.lambda3 * std::sqrt(s2);
}

namespace {

// Group-L2 prox under the diagonal metric diag(w_i m_i):
//   argmin_z sum_i w_i m_i (z_i - v_i)^2 / (2 step) + lambda sqrt(sum_i w_i z_i^2).
// The solution is z_i = v_i m_i t / (m_i t + step lambda) where t = ||z||_w
// solves a scalar fixed point; with a uniform metric it reduces to the plain
// block shrink.
void group_prox_metric(const CoeffLayout& layout, Vector& x, std::uint8_t blk, double lambda,
                       double step) {
    if (lambda == 0.0) return;
    const double sl = step * lambda;

    bool uniform = true;
    double m0 = -1.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (layout.block[i] != blk) continue;
        const double m = layout.metric_at(i);
        if (m0 < 0.0) m0 = m;
        if (m != m0) {
            uniform = false;
            break;
        }
    }
    if (m0 < 0.0) return;  // empty block

    if (uniform) {
        double norm = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i)
            if (layout.block[i] == blk) norm += layout.weight[i] * x[i] * x[i];
        norm = std::sqrt(norm);
        const double tau = sl / m0;
        const double factor = norm > tau ? 1.0 - tau / norm : 0.0;
        for (std::size_t i = 0; i < x.size(); ++i)
            if (layout.block[i] == blk) x[i] *= factor;
        return;
    }

    // h(t) = || z(t) ||_w is increasing and concave-ish; a nonzero fixed point
    // exists iff sqrt(sum w v^2 m^2) > step lambda.
    auto h = [&](double t) {
        double s = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            if (layout.block[i] != blk) continue;
            const double m = layout.metric_at(i);
            const double z = x[i] * m * t / (m * t + sl);
            s += layout.weight[i] * z * z;
        }
        return std::sqrt(s);
    };

    double slope0 = 0.0, hi = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (layout.block[i] != blk) continue;
        const double m = layout.metric_at(i);
        slope0 += layout.weight[i] * x[i] * x[i] * m * m;
        hi += layout.weight[i] * x[i] * x[i];
    }
    slope0 = std::sqrt(slope0);
    hi = std::sqrt(hi);
    if (slope0 <= sl || hi == 0.0) {
        for (std::size_t i = 0; i < x.size(); ++i)
            if (layout.block[i] == blk) x[i] = 0.0;
        return;
    }
    double lo = 0.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (h(mid) > mid)
            lo = mid;
        else
            hi = mid;
        if (hi - lo <= 1e-14 * (1.0 + hi)) break;
    }
    const double t = 0.5 * (lo + hi);
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (layout.block[i] != blk) continue;
        const double m = layout.metric_at(i);
        x[i] = x[i] * m * t / (m * t + sl);
    }
}

}  // namespace

void penalty_prox(const PenaltyConfig& pen, const CoeffLayout& layout, Vector& x, double step) {
    if (pen.kind == PenaltyKind::L1) {
        if (pen.lambda1 == 0.0) return;
        for (std::size_t i = 0; i < x.size(); ++i) {
            if (layout.block[i] == 0) continue;
            const double tau = step * pen.lambda1 / layout.metric_at(i);
            const double a = std::abs(x[i]) - tau;
            x[i] = a > 0.0 ? (x[i] > 0.0 ? a : -a) : 0.0;
        }
        return;
    }
    group_prox_metric(layout, x, 1, pen.lambda2, step);
    group_prox_metric(layout, x, 2, pen.lambda3, step);
}

namespace {

// Proximal-gradient residual at x with probe step s (metric map).
double prox_residual(const ConcaveObjective& obj, const CoeffLayout& layout,
                     const PenaltyConfig& pen, const Vector& x, double s, Vector& grad,
                     Vector& scratch) {
    obj.value_and_grad(x, grad);
    scratch = x;
    for (std::size_t i = 0; i < x.size(); ++i) scratch[i] += s / layout.metric_at(i) * grad[i];
    penalty_prox(pen, layout, scratch, s);
    for (std::size_t i = 0; i < x.size(); ++i) scratch[i] = (scratch[i] - x[i]) / s;
    return layout.norm2(scratch);
}

}  // namespace

double prox_gradient_residual(const ConcaveObjective& obj, const CoeffLayout& layout,
                              const PenaltyConfig& pen, const Vector& x, double probe_step) {
    Vector grad(x.size()), scratch(x.size());
    return prox_residual(obj, layout, pen, x, probe_step, grad, scratch);
}

SolveResult maximize_discriminator(const ConcaveObjective& obj, const CoeffLayout& layout,
                                   const PenaltyConfig& pen, const Vector& init,
                                   const SolverConfig& cfg) {
    cfg.validate();
    pen.validate();
    const std::size_t dim = layout.size();
    if (init.size() != dim) throw InvalidInput("maximize_discriminator: init size mismatch");

    Vector x = init;
    Vector y = x;
    Vector x_prev = x;
    Vector grad(dim), cand(dim), diff(dim), scratch(dim);

    double fx = obj.value(x);
    if (!std::isfinite(fx)) throw NonFiniteObjective("inner objective non-finite at init");
    double Fx = fx - penalty_value(pen, layout, x);

    // Residual scale fixed from the initial gradient.
    obj.value_and_grad(x, grad);
    const double grad0_norm = layout.norm2(grad);
    const double residual_tol = 1e-4 * (1.0 + grad0_norm);

    SolveResult result;
    result.diag.objective_trace.reserve(cfg.record_trace ? cfg.max_iter : 0);

    double t_momentum = 1.0;
    double step = cfg.init_step;
    int iter = 0;
    int stall = 0;

    for (iter = 1; iter <= cfg.max_iter; ++iter) {
        const double fy = obj.value_and_grad(y, grad);
        if (!std::isfinite(fy)) throw NonFiniteObjective("inner objective non-finite");

        // Backtracking on the smooth part: accept when the concave upper
        // quadratic model (in the preconditioned metric) holds with
        // sufficient-ascent slack 1e-4.
        step = std::min(step * 2.0, cfg.init_step);
        double fc = 0.0;
        for (;;) {
            cand = y;
            for (std::size_t i = 0; i < dim; ++i)
                cand[i] += step / layout.metric_at(i) * grad[i];
            penalty_prox(pen, layout, cand, step);
            fc = obj.value(cand);
            if (!std::isfinite(fc)) throw NonFiniteObjective("inner objective non-finite");
            for (std::size_t i = 0; i < dim; ++i) diff[i] = cand[i] - y[i];
            double lin = 0.0, quad = 0.0;
            for (std::size_t i = 0; i < dim; ++i) {
                lin += layout.weight[i] * grad[i] * diff[i];
                quad += layout.weight[i] * layout.metric_at(i) * diff[i] * diff[i];
            }
            if (fc >= fy + lin - (1.0 - 1e-4) / (2.0 * step) * quad) break;
            step *= cfg.line_search_shrink;
            if (step < 1e-18) break;
        }
        const double Fc = fc - penalty_value(pen, layout, cand);

        // Monotone acceleration: keep the better of (candidate, previous
        // iterate) but carry the momentum sequence through either way.
        x_prev.swap(x);
        double F_prev = Fx;
        if (Fc >= F_prev) {
            x = cand;
            Fx = Fc;
        } else {
            x = x_prev;  // reject the candidate, objective stays put
        }

        if (cfg.acceleration) {
            const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t_momentum * t_momentum));
            const double b1 = t_momentum / t_next;
            const double b2 = (t_momentum - 1.0) / t_next;
            // Gradient-style restart: momentum pointing against ascent.
            double along = 0.0;
            for (std::size_t i = 0; i < dim; ++i)
                along += layout.weight[i] * grad[i] * (cand[i] - x_prev[i]);
            if (along < 0.0) {
                t_momentum = 1.0;
                y = x;
            } else {
                for (std::size_t i = 0; i < dim; ++i)
                    y[i] = x[i] + b1 * (cand[i] - x[i]) + b2 * (x[i] - x_prev[i]);
                t_momentum = t_next;
            }
        } else {
            y = x;
        }
        if (cfg.record_trace) result.diag.objective_trace.push_back(Fx);

        const bool small_change = std::abs(Fx - F_prev) <= cfg.rel_tol * std::max(1.0, std::abs(Fx));
        stall = small_change ? stall + 1 : 0;
        if (stall >= 3) {
            const double res = prox_residual(obj, layout, pen, x, 1e-4, grad, scratch);
            if (res <= residual_tol) {
                result.diag.final_residual = res;
                result.diag.converged = true;
                break;
            }
            stall = 0;
        }
    }

    if (!result.diag.converged) {
        result.diag.final_residual = prox_residual(obj, layout, pen, x, 1e-4, grad, scratch);
        result.diag.converged = result.diag.final_residual <= residual_tol;
        result.diag.max_iter_reached = !result.diag.converged;
    }
    result.diag.iterations = std::min(iter, cfg.max_iter);
    result.x = std::move(x);
    result.value = Fx;
    return result;
}

}  // namespace robustgan
