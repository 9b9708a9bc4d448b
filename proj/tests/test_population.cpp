#include <doctest.h>

#include <cmath>
#include <sstream>

#include "robustgan/errors.hpp"
#include "robustgan/population_lab.hpp"

using namespace robustgan;

TEST_SUITE("population_lab") {

TEST_CASE("mixture density integrates to one") {
    Mixture1D mix;
    mix.eps = 0.1;
    const QuadratureConfig quad = mix.default_quadrature();
    const double mass = integrate([&](double x) { return mix.density(x); }, quad);
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-10));
    mix.eps = 0.6;
    CHECK_THROWS_AS(mix.validate(), InvalidInput);
}

TEST_CASE("uncontaminated fit recovers the truth with zero divergence") {
    Mixture1D mix;  // eps = 0
    for (DivName d : {DivName::rKL, DivName::JS, DivName::TV, DivName::KL}) {
        const MinDivFit fit = min_divergence_fit(catalog(d), mix);
        CHECK(std::abs(fit.mu_bar - mix.mu_star) < 1e-4);
        CHECK(std::abs(fit.sigma_bar - mix.sigma_star) < 1e-4);
        CHECK(fit.d_min <= 1e-8);
        CHECK(fit.d_min >= -1e-8);
    }
}

TEST_CASE("KL minimization matches mixture moments") {
    Mixture1D mix;
    mix.eps = 0.1;
    mix.mu_q = 10.0;
    mix.sigma_q = 0.5;
    const MinDivFit fit = min_divergence_fit(catalog(DivName::KL), mix);
    // argmin KL(P_eps || N) fits the mixture mean and variance.
    const double mean = (1.0 - mix.eps) * mix.mu_star + mix.eps * mix.mu_q;
    CHECK(std::abs(fit.mu_bar - mean) < 1e-3);
    const double second = (1.0 - mix.eps) * (1.0 + mix.mu_star * mix.mu_star) +
                          mix.eps * (0.25 + mix.mu_q * mix.mu_q);
    const double var = second - mean * mean;
    CHECK(std::abs(fit.sigma_bar - std::sqrt(var)) < 2e-3);
}

TEST_CASE("rKL is redescending at far contamination while mKL is not") {
    Mixture1D mix;
    mix.eps = 0.1;
    const double muqs[] = {6.0, 10.0};
    double mkl_err[2];
    for (int i = 0; i < 2; ++i) {
        mix.mu_q = muqs[i];
        const MinDivFit mkl = min_divergence_fit(catalog(DivName::mKL), mix);
        mkl_err[i] = std::abs(mkl.mu_bar - mix.mu_star);
    }
    mix.mu_q = 10.0;
    const MinDivFit rkl = min_divergence_fit(catalog(DivName::rKL), mix);
    // rKL redescends below 0.1; the mixed KL keeps growing with the
    // contamination location, sitting near eps * mu_q / 2 by the balance of
    // its two KL terms.
    CHECK(std::abs(rkl.mu_bar - mix.mu_star) < 0.1);
    CHECK(mkl_err[1] > mkl_err[0]);
    CHECK(mkl_err[1] > 0.2);
    CHECK(mkl_err[1] == doctest::Approx(0.1 * 10.0 / 2.0).epsilon(0.6));
}

TEST_CASE("robust family dominates KL at small contamination") {
    Mixture1D mix;
    mix.eps = 0.01;  // Q = N(5, 1/4)
    const double err_rkl =
        std::abs(min_divergence_fit(catalog(DivName::rKL), mix).mu_bar - mix.mu_star);
    const double err_kl =
        std::abs(min_divergence_fit(catalog(DivName::KL), mix).mu_bar - mix.mu_star);
    CHECK(err_kl >= err_rkl);
}

TEST_CASE("sweep_epsilon rows and the zero row") {
    Mixture1D mix;
    const auto rows = sweep_epsilon({DivName::rKL, DivName::TV}, Vector{0.0, 0.01}, mix);
    REQUIRE(rows.size() == 4);
    for (const SweepRow& r : rows) {
        CHECK_FALSE(r.failed);
        if (r.eps == 0.0) {
            CHECK(r.mu_err <= 1e-4);
            CHECK(r.sigma_err <= 1e-4);
        } else {
            CHECK(r.mu_err > 0.0);
        }
    }
    CHECK_THROWS_AS(sweep_epsilon({DivName::rKL}, Vector{0.2}, mix), InvalidInput);
}

TEST_CASE("sweep_location covers the grid and flags nothing on sane cells") {
    Mixture1D mix;
    const auto rows = sweep_location({DivName::KL}, Vector{0.0, 10.0}, 0.1, mix);
    REQUIRE(rows.size() == 2);
    // contamination centred at the truth barely moves the estimate
    CHECK(rows[0].mu_err < 0.05);
    // far contamination shifts the KL fit by roughly eps * mu_q
    CHECK(rows[1].mu_err == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("minimizer is stable under quadrature refinement") {
    Mixture1D mix;
    mix.eps = 0.02;
    QuadratureConfig a = mix.default_quadrature();
    a.rule = QuadratureConfig::Rule::fixed_simpson;
    a.n_points = 2001;
    QuadratureConfig b = a;
    b.n_points = 4001;
    const MinDivFit fa = min_divergence_fit(catalog(DivName::rKL), mix, &a);
    const MinDivFit fb = min_divergence_fit(catalog(DivName::rKL), mix, &b);
    CHECK(std::abs(fa.mu_bar - fb.mu_bar) < 1e-5);
    CHECK(std::abs(fa.sigma_bar - fb.sigma_bar) < 1e-5);
}

TEST_CASE("sweep csv format") {
    Mixture1D mix;
    const auto rows = sweep_epsilon({DivName::rKL}, Vector{0.0}, mix);
    std::ostringstream os;
    write_sweep_csv(os, rows);
    const std::string text = os.str();
    CHECK(text.find("divergence,eps,mu_q,mu_err,sigma_err,failed") == 0);
    CHECK(text.find("rkl,") != std::string::npos);
}

}  // TEST_SUITE
