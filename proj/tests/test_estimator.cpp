#include <doctest.h>

#include <cmath>

#include "robustgan/errors.hpp"
#include "robustgan/estimator.hpp"
#include "robustgan/rng.hpp"
#include "robustgan/sim_harness.hpp"
#include "test_support.hpp"

using namespace robustgan;

namespace {

Matrix standard_normal_data(std::size_t n, std::size_t p, std::uint64_t seed) {
    Rng rng(seed);
    return sample_std_normal(n, p, rng);
}

TrainConfig quick_config(TrainObjective obj, int iterations = 8) {
    TrainConfig cfg;
    cfg.objective = obj;
    cfg.iterations = iterations;
    cfg.seed = 7;
    return cfg;
}

}  // namespace

TEST_SUITE("estimator") {

TEST_CASE("default lambda0 values") {
    CHECK(default_lambda0(TrainObjective::hinge()) == 0.1);
    CHECK(default_lambda0(TrainObjective::logit_f(DivName::JS)) == 0.025);
    CHECK(default_lambda0(TrainObjective::logit_f(DivName::rKL)) == 0.3);
    CHECK_THROWS_AS(default_lambda0(TrainObjective::logit_f(DivName::H2)), MissingDefault);
}

TEST_CASE("objective parsing round-trips") {
    CHECK(parse_objective("hinge").kind == ObjectiveKind::hinge);
    CHECK(parse_objective("rkl").divergence == DivName::rKL);
    CHECK(parse_objective("js").str() == "js");
    CHECK_THROWS_AS(parse_objective("bogus"), InvalidInput);
}

TEST_CASE("init_params recovers identity-covariance data") {
    const Matrix data = standard_normal_data(5000, 2, 7);
    const GaussianParams theta = init_params(data);
    CHECK(std::abs(theta.mu[0]) < 0.05);
    CHECK(std::abs(theta.mu[1]) < 0.05);
    const Matrix sigma = theta.sigma();
    CHECK(std::abs(sigma(0, 0) - 1.0) < 0.05);
    CHECK(std::abs(sigma(1, 1) - 1.0) < 0.05);
    CHECK(std::abs(sigma(0, 1)) < 0.05);
}

TEST_CASE("init_params survives a MAD-degenerate column") {
    Matrix data(5, 2);
    for (std::size_t i = 0; i < 5; ++i) {
        data(i, 0) = 1.0;  // constant column, MAD = 0
        data(i, 1) = static_cast<double>(i);
    }
    data(3, 0) = 1.0 + 1e-9;
    CHECK_NOTHROW(init_params(data));
}

TEST_CASE("init_params matches the sine-transform consistency oracle on Toeplitz data") {
    ContaminationSpec spec;  // Toeplitz 0.5, no contamination
    const LabeledSample sample = generate(5000, 3, spec, 1234);
    const GaussianParams theta = init_params(sample.x);
    const Matrix sigma = theta.sigma();
    CHECK(std::abs(sigma(0, 1) - 0.5) < 0.06);
    CHECK(std::abs(sigma(1, 2) - 0.5) < 0.06);
    CHECK(std::abs(sigma(0, 2) - 0.25) < 0.06);
}

TEST_CASE("outer objective vanishes with zero discriminator") {
    const Matrix data = standard_normal_data(40, 3, 5);
    const Matrix z = standard_normal_data(40, 3, 6);
    const GaussianParams theta = init_params(data);
    const SplineCoeffs gamma = SplineCoeffs::zeros(15);

    for (const char* name : {"rkl", "js", "hinge"}) {
        TrainConfig cfg = quick_config(parse_objective(name));
        const OuterEval ev = outer_objective(theta, gamma, data, z, cfg);
        CHECK(ev.value == doctest::Approx(0.0).epsilon(1e-14));
        for (double g : ev.grad_mu) CHECK(g == 0.0);
        CHECK(max_norm(ev.grad_scale) == 0.0);
    }
}

TEST_CASE("full-mode transform identity: data built from the fake noise") {
    // data_i = mu + L z_i makes the transformed real rows equal the noise.
    const std::size_t n = 30, p = 2;
    const Matrix z = standard_normal_data(n, p, 17);
    Vector mu{0.3, -0.8};
    Matrix lm(p, p);
    lm(0, 0) = 1.2;
    lm(1, 0) = -0.4;
    lm(1, 1) = 0.9;
    const LowerFactor l(lm);
    Matrix data(n, p);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t a = 0; a < p; ++a) {
            double s = mu[a];
            for (std::size_t b = 0; b <= a; ++b) s += lm(a, b) * z(i, b);
            data(i, a) = s;
        }
    const GaussianParams theta{mu, l};

    Rng grng(3);
    SplineCoeffs gamma = SplineCoeffs::zeros(5 * p);
    gamma.gamma0 = 0.2;
    for (double& v : gamma.gamma1) v = 0.2 * grng.normal();

    TrainConfig cfg = quick_config(TrainObjective::logit_f(DivName::rKL));
    const OuterEval ev = outer_objective(theta, gamma, data, z, cfg);

    // With identical real and fake scores, K_rKL = 1 - mean e^{-h} - mean h.
    const SplineBasisConfig basis_cfg = cfg.basis(p);
    double mean_exp = 0.0, mean_h = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double h = eval_point(basis_cfg, gamma, Vector{z(i, 0), z(i, 1)});
        mean_exp += std::exp(-h);
        mean_h += h;
    }
    mean_exp /= n;
    mean_h /= n;
    CHECK(ev.value == doctest::Approx(1.0 - mean_exp - mean_h).epsilon(1e-12));
}

TEST_CASE("outer gradient matches finite differences on a small instance") {
    const std::size_t n = 40, p = 3;
    const Matrix data = standard_normal_data(n, p, 21);
    const Matrix z = standard_normal_data(n, p, 22);
    const GaussianParams theta = init_params(data);

    Rng grng(9);
    SplineCoeffs gamma = SplineCoeffs::zeros(5 * p);
    gamma.gamma0 = 0.1;
    for (double& v : gamma.gamma1) v = 0.15 * grng.normal();
    for (double& v : gamma.gamma2_packed) v = 0.02 * grng.normal();

    for (const char* name : {"rkl", "js"}) {
        for (Transform tr : {Transform::full, Transform::location_only}) {
            TrainConfig cfg = quick_config(parse_objective(name));
            cfg.transform = tr;
            const OuterEval ev = outer_objective(theta, gamma, data, z, cfg);
            const double delta = 1e-6;
            for (std::size_t j = 0; j < p; ++j) {
                GaussianParams tp = theta, tm = theta;
                tp.mu[j] += delta;
                tm.mu[j] -= delta;
                const double fd = (outer_objective(tp, gamma, data, z, cfg).value -
                                   outer_objective(tm, gamma, data, z, cfg).value) /
                                  (2.0 * delta);
                CHECK(ev.grad_mu[j] == doctest::Approx(fd).epsilon(2e-4));
            }
        }
    }
}

TEST_CASE("fit with zero iterations returns the initializer") {
    const Matrix data = standard_normal_data(200, 2, 31);
    TrainConfig cfg = quick_config(TrainObjective::logit_f(DivName::rKL), 0);
    const FitResult fr = fit(data, cfg);
    const GaussianParams init = init_params(data);
    CHECK(fr.params.mu == init.mu);
    CHECK(fr.params.scale.mat() == init.scale.mat());
    CHECK(fr.trace.iters.empty());
}

TEST_CASE("fit rejects bad input") {
    TrainConfig cfg = quick_config(TrainObjective::hinge());
    CHECK_THROWS_AS(fit(Matrix(5, 2), cfg), InvalidData);  // too few rows
    Matrix bad = standard_normal_data(50, 2, 1);
    bad(10, 1) = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(fit(bad, cfg), InvalidData);
}

TEST_CASE("fit is deterministic given (data, config, seed)") {
    const Matrix data = standard_normal_data(120, 2, 77);
    TrainConfig cfg = quick_config(TrainObjective::logit_f(DivName::rKL), 5);
    const FitResult a = fit(data, cfg);
    const FitResult b = fit(data, cfg);
    CHECK(a.params.mu == b.params.mu);
    CHECK(a.params.scale.mat() == b.params.scale.mat());
    REQUIRE(a.trace.iters.size() == b.trace.iters.size());
    for (std::size_t i = 0; i < a.trace.iters.size(); ++i) {
        CHECK(a.trace.iters[i].outer_objective == b.trace.iters[i].outer_objective);
        CHECK(a.trace.iters[i].inner_value == b.trace.iters[i].inner_value);
    }
}

TEST_CASE("every outer step respects the clipping contract and keeps Sigma PD") {
    const Matrix data = standard_normal_data(150, 3, 41);
    TrainConfig cfg = quick_config(TrainObjective::hinge(), 12);
    const FitResult fr = fit(data, cfg);
    REQUIRE(fr.trace.iters.size() == 12);
    for (std::size_t t = 0; t < fr.trace.iters.size(); ++t) {
        const double alpha = cfg.alpha0 * std::exp(-cfg.decay * static_cast<double>(t + 1));
        CHECK(fr.trace.iters[t].step_linf <= alpha * cfg.clip_linf + 1e-12);
    }
    const EigenSym es = jacobi_eigen_sym(SymMatrix(fr.params.sigma()));
    CHECK(es.values.front() >= 1e-12);
}

TEST_CASE("translating the data translates the location estimate (full transform)") {
    const Matrix data = standard_normal_data(200, 2, 55);
    Matrix shifted(200, 2);
    const Vector c{3.5, -1.25};
    for (std::size_t i = 0; i < 200; ++i)
        for (std::size_t j = 0; j < 2; ++j) shifted(i, j) = data(i, j) + c[j];

    // One outer step tracks the shift to the last ulp; longer runs drift by
    // the inner solver's accuracy once a stopping decision flips on an
    // ulp-perturbed objective, so the long-run bound is solver-level.
    TrainConfig cfg = quick_config(TrainObjective::logit_f(DivName::rKL), 1);
    const FitResult base = fit(data, cfg);
    const FitResult moved = fit(shifted, cfg);
    for (std::size_t j = 0; j < 2; ++j)
        CHECK(std::abs(moved.params.mu[j] - base.params.mu[j] - c[j]) < 1e-6);
    CHECK(std::abs(max_norm(moved.params.scale.mat()) - max_norm(base.params.scale.mat())) <
          1e-6);

    TrainConfig longer = quick_config(TrainObjective::logit_f(DivName::rKL), 6);
    const FitResult base6 = fit(data, longer);
    const FitResult moved6 = fit(shifted, longer);
    for (std::size_t j = 0; j < 2; ++j)
        CHECK(std::abs(moved6.params.mu[j] - base6.params.mu[j] - c[j]) < 5e-4);
}

TEST_CASE("clean-data sanity band for the rKL estimator") {
    const Matrix data = standard_normal_data(2000, 2, 2025);
    TrainConfig cfg;
    cfg.objective = TrainObjective::logit_f(DivName::rKL);
    cfg.seed = 11;
    const FitResult fr = fit(data, cfg);
    CHECK(std::abs(fr.params.mu[0]) <= 0.1);
    CHECK(std::abs(fr.params.mu[1]) <= 0.1);
    const Matrix sigma = fr.params.sigma();
    Matrix diff = sigma;
    diff(0, 0) -= 1.0;
    diff(1, 1) -= 1.0;
    CHECK(max_norm(diff) <= 0.15);
}

TEST_CASE("two-objective generator gradient is zero at gamma = 0") {
    const Matrix data = standard_normal_data(60, 2, 63);
    const Matrix z = standard_normal_data(60, 2, 64);
    const GaussianParams theta = init_params(data);
    const SplineCoeffs gamma = SplineCoeffs::zeros(10);
    TrainConfig cfg = quick_config(TrainObjective::hinge());
    cfg.two_objective = true;
    cfg.transform = Transform::location_only;
    const OuterEval ev = outer_objective(theta, gamma, data, z, cfg);
    for (double g : ev.grad_mu) CHECK(g == 0.0);
    CHECK(max_norm(ev.grad_scale) == 0.0);
}

TEST_CASE("two-objective fake-term gradient matches finite differences (location mode)") {
    const std::size_t n = 50, p = 2;
    const Matrix data = standard_normal_data(n, p, 71);
    const Matrix z = standard_normal_data(n, p, 72);
    const GaussianParams theta = init_params(data);
    Rng grng(73);
    SplineCoeffs gamma = SplineCoeffs::zeros(5 * p);
    gamma.gamma0 = 0.05;
    for (double& v : gamma.gamma1) v = 0.1 * grng.normal();

    TrainConfig cfg = quick_config(TrainObjective::logit_f(DivName::JS));
    cfg.two_objective = true;
    cfg.transform = Transform::location_only;
    const OuterEval ev = outer_objective(theta, gamma, data, z, cfg);
    const double delta = 1e-6;
    for (std::size_t a = 0; a < p; ++a)
        for (std::size_t b = 0; b <= a; ++b) {
            GaussianParams tp = theta, tm = theta;
            Matrix lp = tp.scale.mat(), lm2 = tm.scale.mat();
            lp(a, b) += delta;
            lm2(a, b) -= delta;
            tp.scale = LowerFactor(lp);
            tm.scale = LowerFactor(lm2);
            const double fd = (outer_objective(tp, gamma, data, z, cfg).value -
                               outer_objective(tm, gamma, data, z, cfg).value) /
                              (2.0 * delta);
            CHECK(ev.grad_scale(a, b) == doctest::Approx(fd).epsilon(2e-4));
        }
}

TEST_CASE("estimate record serialization round-trips") {
    const Matrix data = standard_normal_data(80, 2, 81);
    TrainConfig cfg = quick_config(TrainObjective::logit_f(DivName::rKL), 3);
    const FitResult fr = fit(data, cfg);
    const std::string text = serialize_estimate(fr.params, cfg, fr.trace);
    const EstimateRecord rec = parse_estimate(text);
    CHECK(rec.mu == fr.params.mu);
    CHECK(rec.sigma == fr.params.sigma());
    CHECK(rec.config_digest == config_digest(cfg));
    CHECK(rec.summary.iterations == 3);
    CHECK_THROWS_AS(parse_estimate("garbage"), InvalidInput);
}

TEST_CASE("config digest separates configs") {
    TrainConfig a = quick_config(TrainObjective::logit_f(DivName::rKL));
    TrainConfig b = a;
    b.iterations += 1;
    CHECK(config_digest(a) != config_digest(b));
    CHECK(config_digest(a) == config_digest(quick_config(TrainObjective::logit_f(DivName::rKL))));
}

TEST_CASE("rKL cap zeroes the gradient when active") {
    const Matrix data = standard_normal_data(30, 1, 91);
    const Matrix z = standard_normal_data(30, 1, 92);
    const GaussianParams theta = init_params(data);

    Rng grng(93);
    SplineCoeffs gamma = SplineCoeffs::zeros(5);
    for (double& v : gamma.gamma1) v = 0.2 * grng.normal();

    TrainConfig cfg = quick_config(TrainObjective::logit_f(DivName::rKL));
    cfg.rkl_cap = -1e9;  // every value exceeds this cap, so it must bind
    const OuterEval ev = outer_objective(theta, gamma, data, z, cfg);
    CHECK(ev.cap_active);
    CHECK(ev.value == -1e9);
    for (double g : ev.grad_mu) CHECK(g == 0.0);
    CHECK(max_norm(ev.grad_scale) == 0.0);

    // Away from the cap the same instance has a live gradient.
    cfg.rkl_cap = 1e9;
    const OuterEval live = outer_objective(theta, gamma, data, z, cfg);
    CHECK_FALSE(live.cap_active);
    double gnorm = 0.0;
    for (double g : live.grad_mu) gnorm += std::abs(g);
    CHECK(gnorm > 0.0);
}

}  // TEST_SUITE
