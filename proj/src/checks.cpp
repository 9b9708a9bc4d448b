#include "robustgan/checks.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "robustgan/core_math.hpp"
#include "robustgan/divergences.hpp"
#include "robustgan/errors.hpp"
#include "robustgan/estimator.hpp"
#include "robustgan/population_lab.hpp"
#include "robustgan/rng.hpp"
#include "robustgan/sim_harness.hpp"

namespace robustgan {

namespace {

std::string fmt(const char* format, double a, double b = 0.0) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), format, a, b);
    return buf;
}

struct RandomInstance {
    Matrix data;
    Matrix z_fake;
    GaussianParams theta;
    SplineCoeffs gamma;
    std::size_t p, n;
};

RandomInstance random_instance(Rng& rng, std::size_t p_max, std::size_t n_max,
                               double gamma_scale) {
    std::size_t p = 1 + static_cast<std::size_t>(rng.uniform01() * static_cast<double>(p_max));
    p = std::min(p, p_max);
    const std::size_t n =
        20 + static_cast<std::size_t>(rng.uniform01() * static_cast<double>(n_max - 20));

    Matrix data(n, p);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < p; ++j) data(i, j) = 1.3 * rng.normal() + 0.2;
    Matrix z_fake = sample_std_normal(n, p, rng);

    Vector mu(p);
    for (double& v : mu) v = 0.4 * (rng.uniform01() - 0.5);
    Matrix l(p, p);
    for (std::size_t a = 0; a < p; ++a) {
        l(a, a) = 0.8 + 0.6 * rng.uniform01();
        for (std::size_t b = 0; b < a; ++b) l(a, b) = 0.4 * (rng.uniform01() - 0.5);
    }

    const std::size_t m = 5 * p;
    SplineCoeffs gamma = SplineCoeffs::zeros(m);
    gamma.gamma0 = gamma_scale * (rng.uniform01() - 0.5);
    for (double& v : gamma.gamma1)
        v = gamma_scale * (rng.uniform01() - 0.5) / std::sqrt(static_cast<double>(m));
    for (double& v : gamma.gamma2_packed)
        v = 0.5 * gamma_scale * (rng.uniform01() - 0.5) / static_cast<double>(m);

    return RandomInstance{std::move(data), std::move(z_fake),
                          GaussianParams{std::move(mu), LowerFactor(std::move(l))},
                          std::move(gamma), p, n};
}

// Keep finite-difference probes away from hinge knots and score kinks.
bool off_knot(const RandomInstance& inst, const TrainConfig& cfg, double margin) {
    const SplineBasisConfig basis_cfg = cfg.basis(inst.p);
    auto rows_ok = [&](const Matrix& rows) {
        for (std::size_t i = 0; i < rows.rows(); ++i) {
            for (std::size_t j = 0; j < rows.cols(); ++j)
                for (double knot : cfg.knots)
                    if (std::abs(rows(i, j) - knot) < margin) return false;
            if (cfg.objective.kind == ObjectiveKind::hinge) {
                Vector x(rows.cols());
                for (std::size_t j = 0; j < rows.cols(); ++j) x[j] = rows(i, j);
                const double h = eval_point(basis_cfg, inst.gamma, x);
                if (std::abs(h - 1.0) < margin || std::abs(h + 1.0) < margin) return false;
            }
        }
        return true;
    };

    Matrix real_rows(inst.n, inst.p), fake_rows(inst.z_fake.rows(), inst.p);
    Vector r(inst.p);
    for (std::size_t i = 0; i < inst.n; ++i) {
        for (std::size_t j = 0; j < inst.p; ++j) r[j] = inst.data(i, j) - inst.theta.mu[j];
        Vector u = cfg.transform == Transform::full ? solve_lower(inst.theta.scale, r) : r;
        for (std::size_t j = 0; j < inst.p; ++j) real_rows(i, j) = u[j];
    }
    const Matrix& l = inst.theta.scale.mat();
    for (std::size_t i = 0; i < inst.z_fake.rows(); ++i) {
        for (std::size_t a = 0; a < inst.p; ++a) {
            if (cfg.transform == Transform::full) {
                fake_rows(i, a) = inst.z_fake(i, a);
            } else {
                double s = 0.0;
                for (std::size_t b = 0; b <= a; ++b) s += l(a, b) * inst.z_fake(i, b);
                fake_rows(i, a) = s;
            }
        }
    }
    return rows_ok(real_rows) && rows_ok(fake_rows);
}

double fd_gradient_max_rel_err(const RandomInstance& inst, const TrainConfig& cfg) {
    const OuterEval eval0 =
        outer_objective(inst.theta, inst.gamma, inst.data, inst.z_fake, cfg);
    const double delta = 1e-6;
    const std::size_t p = inst.p;

    double max_abs_diff = 0.0, max_fd = 0.0;
    auto probe = [&](auto mutate, double analytic) {
        GaussianParams plus = inst.theta, minus = inst.theta;
        mutate(plus, delta);
        mutate(minus, -delta);
        const double fp = outer_objective(plus, inst.gamma, inst.data, inst.z_fake, cfg).value;
        const double fm = outer_objective(minus, inst.gamma, inst.data, inst.z_fake, cfg).value;
        const double fd = (fp - fm) / (2.0 * delta);
        max_abs_diff = std::max(max_abs_diff, std::abs(fd - analytic));
        max_fd = std::max(max_fd, std::abs(fd));
    };

    for (std::size_t j = 0; j < p; ++j)
        probe([j](GaussianParams& t, double d) { t.mu[j] += d; }, eval0.grad_mu[j]);
    for (std::size_t a = 0; a < p; ++a)
        for (std::size_t b = 0; b <= a; ++b)
            probe(
                [a, b](GaussianParams& t, double d) {
                    Matrix l = t.scale.mat();
                    l(a, b) += d;
                    t.scale = LowerFactor(std::move(l));
                },
                eval0.grad_scale(a, b));
    return max_abs_diff / std::max(max_fd, 1e-6);
}

}  // namespace

std::vector<CheckResult> check_gradients(std::uint64_t seed, int instances, double tol) {
    std::vector<CheckResult> out;
    const std::vector<TrainObjective> objectives = {
        TrainObjective::hinge(), TrainObjective::logit_f(DivName::rKL),
        TrainObjective::logit_f(DivName::JS), TrainObjective::logit_f(DivName::H2),
        TrainObjective::logit_f(DivName::rChi2)};
    const std::vector<Transform> transforms = {Transform::full, Transform::location_only};
    const std::vector<PenaltyKind> penalties = {PenaltyKind::L1, PenaltyKind::L2Group};

    std::uint64_t combo_id = 0;
    for (const TrainObjective& obj : objectives) {
        for (Transform tr : transforms) {
            for (PenaltyKind pk : penalties) {
                for (int two_obj = 0; two_obj <= (tr == Transform::location_only ? 1 : 0);
                     ++two_obj) {
                    TrainConfig cfg;
                    cfg.objective = obj;
                    cfg.transform = tr;
                    cfg.penalty_kind = pk;
                    cfg.lambda0 = 0.1;
                    cfg.two_objective = two_obj == 1;

                    Rng rng = Rng::stream(seed, combo_id++);
                    double worst = 0.0;
                    int done = 0, attempts = 0;
                    while (done < instances && attempts < instances * 60) {
                        ++attempts;
                        RandomInstance inst = random_instance(rng, 5, 100, 0.6);
                        if (!off_knot(inst, cfg, 2e-3)) continue;
                        if (!cfg.two_objective && obj.is_rkl()) {
                            const OuterEval ev = outer_objective(inst.theta, inst.gamma,
                                                                 inst.data, inst.z_fake, cfg);
                            if (ev.cap_active) continue;
                        }
                        worst = std::max(worst, fd_gradient_max_rel_err(inst, cfg));
                        ++done;
                    }
                    std::ostringstream name;
                    name << "gradients " << obj.str() << '/'
                         << (tr == Transform::full ? "full" : "location") << '/'
                         << (pk == PenaltyKind::L1 ? "l1" : "l2")
                         << (cfg.two_objective ? "/two-obj" : "");
                    out.push_back({name.str(), done == instances && worst <= tol,
                                   fmt("max rel err %.3g over instances", worst)});
                }
            }
        }
    }
    return out;
}

std::vector<CheckResult> check_bounds(std::uint64_t seed, int n_splines) {
    std::vector<CheckResult> out;
    auto p_density = [](double x) { return normal_density(x, 0.0, 1.0); };
    auto q_density = [](double x) { return normal_density(x, 0.5, 1.0); };
    auto log_ratio = [](double x) { return 0.125 - 0.5 * x; };

    QuadratureConfig quad;
    quad.lower = -12.0;
    quad.upper = 12.5;

    for (DivName d : {DivName::rKL, DivName::JS, DivName::H2, DivName::rChi2}) {
        const FDivergence fd = catalog(d);
        const double df = population_df_1d(fd, p_density, q_density, quad);
        const double kf = k_f_population(fd, p_density, q_density, log_ratio, quad);
        out.push_back({"bounds " + div_name_str(d) + " tight at log ratio",
                       std::abs(df - kf) <= 1e-6, fmt("|D_f - K_f| = %.3g", std::abs(df - kf))});
    }

    SplineBasisConfig basis_cfg;
    basis_cfg.p = 1;
    Rng rng = Rng::stream(seed, 0);
    auto random_spline = [&]() {
        SplineCoeffs c = SplineCoeffs::zeros(basis_cfg.n_features());
        c.gamma0 = rng.uniform01() - 0.5;
        for (double& v : c.gamma1) v = 0.6 * (rng.uniform01() - 0.5);
        for (double& v : c.gamma2_packed) v = 0.2 * (rng.uniform01() - 0.5);
        return c;
    };

    for (DivName d : {DivName::rKL, DivName::JS, DivName::H2, DivName::rChi2}) {
        const FDivergence fd = catalog(d);
        const double df = population_df_1d(fd, p_density, q_density, quad);
        double worst_excess = -1e300;
        for (int i = 0; i < n_splines; ++i) {
            const SplineCoeffs c = random_spline();
            auto h = [&](double x) { return eval_point(basis_cfg, c, Vector{x}); };
            const double kf = k_f_population(fd, p_density, q_density, h, quad);
            worst_excess = std::max(worst_excess, kf - df);
        }
        out.push_back({"bounds " + div_name_str(d) + " random splines below D_f",
                       worst_excess <= 1e-8, fmt("max K_f - D_f = %.3g", worst_excess)});
    }

    // Hinge against 2 TV; densities cross at x = 0.25, so split the window
    // there for the discontinuous sign discriminator.
    const double tv_exact = std::erf(0.25 / std::sqrt(2.0));  // 2 Phi(0.25) - 1
    {
        QuadratureConfig left = quad, right = quad;
        left.upper = 0.25;
        right.lower = 0.25;
        auto integrate_sign = [&](const Density& dens) {
            return integrate([&](double x) { return dens(x); }, left) -
                   integrate([&](double x) { return dens(x); }, right);
        };
        // h = sign(p - q) = +1 below the crossing, -1 above.
        const double k_hg = integrate_sign(p_density) - integrate_sign(q_density);
        out.push_back({"bounds hinge tight at sign(p-q)",
                       std::abs(k_hg - 2.0 * tv_exact) <= 1e-4,
                       fmt("|K_HG - 2 TV| = %.3g", std::abs(k_hg - 2.0 * tv_exact))});

        const double tv_quad = population_df_1d(catalog(DivName::TV), p_density, q_density, quad);
        out.push_back({"bounds TV quadrature matches closed form",
                       std::abs(tv_quad - tv_exact) <= 1e-6,
                       fmt("|TV_quad - TV| = %.3g", std::abs(tv_quad - tv_exact))});
    }
    {
        double worst_excess = -1e300;
        for (int i = 0; i < n_splines; ++i) {
            const SplineCoeffs c = random_spline();
            auto h = [&](double x) { return eval_point(basis_cfg, c, Vector{x}); };
            const double k_hg = k_hinge_population(p_density, q_density, h, quad);
            worst_excess = std::max(worst_excess, k_hg - 2.0 * tv_exact);
        }
        out.push_back({"bounds hinge random splines below 2 TV", worst_excess <= 1e-8,
                       fmt("max K_HG - 2 TV = %.3g", worst_excess)});
    }
    return out;
}

std::vector<CheckResult> check_assumptions() {
    struct Expected {
        DivName name;
        bool noninc, fprime_concave, t_concave, lipschitz;
    };
    // Check-mark matrix for the eight catalog rows (non-increasing in the
    // relaxed sense of f' bounded above).
    const std::vector<Expected> expected = {
        {DivName::TV, true, false, false, false},
        {DivName::rKL, true, true, true, true},
        {DivName::JS, true, true, true, true},
        {DivName::H2, true, true, true, false},
        {DivName::rChi2, true, true, true, false},
        {DivName::KL, false, true, true, false},
        {DivName::mKL, false, true, true, false},
        {DivName::Chi2, false, true, false, false},
    };

    std::vector<CheckResult> out;
    const Vector grid = default_u_grid();
    for (const Expected& e : expected) {
        const AssumptionReport rep = assumption_report(catalog(e.name), grid);
        bool ok = rep.f_nonincreasing == e.noninc;
        if (rep.has_logit_forms) {
            ok = ok && rep.fprime_concave == e.fprime_concave &&
                 rep.T_concave == e.t_concave && rep.fsharp_lipschitz_bounded == e.lipschitz;
        } else {
            ok = ok && !e.fprime_concave && !e.t_concave && !e.lipschitz;
        }
        std::ostringstream detail;
        detail << "got (" << rep.f_nonincreasing << rep.fprime_concave << rep.T_concave
               << rep.fsharp_lipschitz_bounded << ") expected (" << e.noninc << e.fprime_concave
               << e.t_concave << e.lipschitz << ")";
        out.push_back({"assumptions " + div_name_str(e.name), ok, detail.str()});
    }
    return out;
}

std::vector<CheckResult> check_solver(std::uint64_t seed, int instances) {
    std::vector<CheckResult> out;
    const std::vector<TrainObjective> objectives = {TrainObjective::logit_f(DivName::rKL),
                                                    TrainObjective::logit_f(DivName::JS),
                                                    TrainObjective::hinge()};

    Rng rng = Rng::stream(seed, 0);
    int concavity_fail = 0, monotone_fail = 0, residual_fail = 0;
    double worst_gap = 0.0, worst_violation = 0.0, worst_residual_ratio = 0.0;

    for (int i = 0; i < instances; ++i) {
        const TrainObjective& obj = objectives[i % objectives.size()];
        RandomInstance inst = random_instance(rng, 3, 60, 0.6);

        const SplineBasisConfig basis_cfg = TrainConfig{}.basis(inst.p);
        Matrix real_rows(inst.n, inst.p);
        Vector r(inst.p);
        for (std::size_t k = 0; k < inst.n; ++k) {
            for (std::size_t j = 0; j < inst.p; ++j) r[j] = inst.data(k, j) - inst.theta.mu[j];
            const Vector u = solve_lower(inst.theta.scale, r);
            for (std::size_t j = 0; j < inst.p; ++j) real_rows(k, j) = u[j];
        }
        DiscObjective dobj(make_features(basis_cfg, real_rows),
                           make_features(basis_cfg, inst.z_fake), score_funcs(obj));

        const std::size_t m = basis_cfg.n_features();
        CoeffLayout layout = spline_coeff_layout(m);
        layout.metric = dobj.metric();
        const std::size_t dim = 1 + m + packed_size(m);

        // (a) concavity witness along a random chord
        {
            Vector a(dim), b(dim), mid(dim);
            for (std::size_t k = 0; k < dim; ++k) {
                a[k] = 0.5 * (rng.uniform01() - 0.5);
                b[k] = 0.5 * (rng.uniform01() - 0.5);
            }
            const double t = rng.uniform01();
            for (std::size_t k = 0; k < dim; ++k) mid[k] = (1.0 - t) * a[k] + t * b[k];
            const double lhs = dobj.value(mid);
            const double rhs = (1.0 - t) * dobj.value(a) + t * dobj.value(b);
            if (lhs < rhs - 1e-9) {
                ++concavity_fail;
                worst_gap = std::max(worst_gap, rhs - lhs);
            }
        }

        // (b) + (c) monotone ascent and first-order residual
        PenaltyConfig pen = (i % 2 == 0)
                                ? PenaltyConfig::l1(0.01 + 0.2 * rng.uniform01())
                                : PenaltyConfig::l2_group(0.02 + 0.2 * rng.uniform01(),
                                                          0.02 + 0.4 * rng.uniform01());
        SolverConfig scfg;
        scfg.record_trace = true;
        const SolveResult res =
            maximize_discriminator(dobj, layout, pen, Vector(dim, 0.0), scfg);

        const Vector& trace = res.diag.objective_trace;
        for (std::size_t k = 1; k < trace.size(); ++k) {
            const double slack = 1e-10 * (1.0 + std::abs(trace[k - 1]));
            if (trace[k] < trace[k - 1] - slack) {
                ++monotone_fail;
                worst_violation = std::max(worst_violation, trace[k - 1] - trace[k]);
                break;
            }
        }

        Vector g0(dim);
        dobj.value_and_grad(Vector(dim, 0.0), g0);
        const double residual_tol = 1e-4 * (1.0 + layout.norm2(g0));
        if (res.diag.final_residual > residual_tol) ++residual_fail;
        worst_residual_ratio =
            std::max(worst_residual_ratio, res.diag.final_residual / residual_tol);
    }

    out.push_back({"solver concavity witness", concavity_fail == 0,
                   fmt("violations %.0f, worst gap %.3g", concavity_fail, worst_gap)});
    out.push_back({"solver monotone ascent", monotone_fail == 0,
                   fmt("violations %.0f, worst drop %.3g", monotone_fail, worst_violation)});
    out.push_back({"solver optimality residual", residual_fail == 0,
                   fmt("failures %.0f, worst residual/tol %.3g", residual_fail,
                       worst_residual_ratio)});
    return out;
}

std::vector<CheckResult> check_all() {
    std::vector<CheckResult> out = check_gradients();
    for (auto& r : check_bounds()) out.push_back(std::move(r));
    for (auto& r : check_assumptions()) out.push_back(std::move(r));
    for (auto& r : check_solver()) out.push_back(std::move(r));
    return out;
}

bool all_pass(const std::vector<CheckResult>& results) {
    for (const CheckResult& r : results)
        if (!r.pass) return false;
    return true;
}

}  // namespace robustgan
