#include "robustgan/divergences.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "robustgan/errors.hpp"

namespace robustgan {

namespace {

constexpr double kUClamp = 50.0;

inline double clamp_u(double u) { return std::min(std::max(u, -kUClamp), kUClamp); }

// Closed forms per family; all verified against numerical differentiation of
// f in the test suite before use.

double f_rkl(double t) { return -std::log(t); }
double T_rkl(double u) { return -std::exp(-clamp_u(u)); }
double Fs_rkl(double u) { return clamp_u(u) - 1.0; }
double dT_rkl(double u) { return std::abs(u) > kUClamp ? 0.0 : std::exp(-u); }
double dFs_rkl(double u) { return std::abs(u) > kUClamp ? 0.0 : 1.0; }
double ddT_rkl(double u) { return std::abs(u) > kUClamp ? 0.0 : -std::exp(-u); }
double ddFs_rkl(double) { return 0.0; }

double f_js(double t) { return t * std::log(t) - (t + 1.0) * std::log(t + 1.0) + std::log(4.0); }
double T_js(double u) { return -std::log1p(std::exp(-clamp_u(u))); }
double Fs_js(double u) { return std::log1p(std::exp(clamp_u(u))) - std::log(4.0); }
double dT_js(double u) { return std::abs(u) > kUClamp ? 0.0 : 1.0 / (1.0 + std::exp(u)); }
double dFs_js(double u) { return std::abs(u) > kUClamp ? 0.0 : 1.0 / (1.0 + std::exp(-u)); }
double sig_prod(double u) {
    const double s = 1.0 / (1.0 + std::exp(-u));
    return s * (1.0 - s);
}
double ddT_js(double u) { return std::abs(u) > kUClamp ? 0.0 : -sig_prod(u); }
double ddFs_js(double u) { return std::abs(u) > kUClamp ? 0.0 : sig_prod(u); }

double f_h2(double t) {
    const double s = std::sqrt(t) - 1.0;
    return s * s;
}
double T_h2(double u) { return 1.0 - std::exp(-clamp_u(u) / 2.0); }
double Fs_h2(double u) { return std::exp(clamp_u(u) / 2.0) - 1.0; }
double dT_h2(double u) { return std::abs(u) > kUClamp ? 0.0 : 0.5 * std::exp(-u / 2.0); }
double dFs_h2(double u) { return std::abs(u) > kUClamp ? 0.0 : 0.5 * std::exp(u / 2.0); }
double ddT_h2(double u) { return std::abs(u) > kUClamp ? 0.0 : -0.25 * std::exp(-u / 2.0); }
double ddFs_h2(double u) { return std::abs(u) > kUClamp ? 0.0 : 0.25 * std::exp(u / 2.0); }

double f_rchi2(double t) { return 1.0 / t - 1.0; }
double T_rchi2(double u) { return -std::exp(-2.0 * clamp_u(u)); }
double Fs_rchi2(double u) { return 1.0 - 2.0 * std::exp(-clamp_u(u)); }
double dT_rchi2(double u) { return std::abs(u) > kUClamp ? 0.0 : 2.0 * std::exp(-2.0 * u); }
double dFs_rchi2(double u) { return std::abs(u) > kUClamp ? 0.0 : 2.0 * std::exp(-u); }
double ddT_rchi2(double u) { return std::abs(u) > kUClamp ? 0.0 : -4.0 * std::exp(-2.0 * u); }
double ddFs_rchi2(double u) { return std::abs(u) > kUClamp ? 0.0 : -2.0 * std::exp(-u); }

double f_kl(double t) { return t * std::log(t); }
double T_kl(double u) { return clamp_u(u) + 1.0; }
double Fs_kl(double u) { return std::exp(clamp_u(u)); }
double dT_kl(double u) { return std::abs(u) > kUClamp ? 0.0 : 1.0; }
double dFs_kl(double u) { return std::abs(u) > kUClamp ? 0.0 : std::exp(u); }
double ddT_kl(double) { return 0.0; }
double ddFs_kl(double u) { return std::abs(u) > kUClamp ? 0.0 : std::exp(u); }

double f_mkl(double t) { return 0.5 * (t - 1.0) * std::log(t); }
double T_mkl(double u) {
    const double uc = clamp_u(u);
    return 0.5 * (uc + 1.0 - std::exp(-uc));
}
double Fs_mkl(double u) {
    const double uc = clamp_u(u);
    return 0.5 * (std::exp(uc) - 1.0 + uc);
}
double dT_mkl(double u) { return std::abs(u) > kUClamp ? 0.0 : 0.5 * (1.0 + std::exp(-u)); }
double dFs_mkl(double u) { return std::abs(u) > kUClamp ? 0.0 : 0.5 * (1.0 + std::exp(u)); }
double ddT_mkl(double u) { return std::abs(u) > kUClamp ? 0.0 : -0.5 * std::exp(-u); }
double ddFs_mkl(double u) { return std::abs(u) > kUClamp ? 0.0 : 0.5 * std::exp(u); }

double f_chi2(double t) {
    const double s = t - 1.0;
    return s * s;
}
double T_chi2(double u) { return 2.0 * (std::exp(clamp_u(u)) - 1.0); }
double Fs_chi2(double u) { return std::exp(2.0 * clamp_u(u)) - 1.0; }
double dT_chi2(double u) { return std::abs(u) > kUClamp ? 0.0 : 2.0 * std::exp(u); }
double dFs_chi2(double u) { return std::abs(u) > kUClamp ? 0.0 : 2.0 * std::exp(2.0 * u); }
double ddT_chi2(double u) { return std::abs(u) > kUClamp ? 0.0 : 2.0 * std::exp(u); }
double ddFs_chi2(double u) { return std::abs(u) > kUClamp ? 0.0 : 4.0 * std::exp(2.0 * u); }

double f_tv(double t) { return 0.5 * std::abs(t - 1.0); }

}  // namespace

std::string div_name_str(DivName name) {
    switch (name) {
        case DivName::rKL: return "rkl";
        case DivName::JS: return "js";
        case DivName::H2: return "h2";
        case DivName::rChi2: return "rchi2";
        case DivName::KL: return "kl";
        case DivName::mKL: return "mkl";
        case DivName::Chi2: return "chi2";
        case DivName::TV: return "tv";
    }
    return "?";
}

DivName parse_div_name(const std::string& s) {
    std::string t = s;
    std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return std::tolower(c); });
    if (t == "rkl") return DivName::rKL;
    if (t == "js") return DivName::JS;
    if (t == "h2") return DivName::H2;
    if (t == "rchi2") return DivName::rChi2;
    if (t == "kl") return DivName::KL;
    if (t == "mkl") return DivName::mKL;
    if (t == "chi2") return DivName::Chi2;
    if (t == "tv") return DivName::TV;
    throw InvalidInput("unknown divergence name: " + s);
}

FDivergence catalog(DivName name) {
    switch (name) {
        case DivName::rKL:
            return {name, f_rkl, T_rkl, Fs_rkl, dT_rkl, dFs_rkl, ddT_rkl, ddFs_rkl, true};
        case DivName::JS: return {name, f_js, T_js, Fs_js, dT_js, dFs_js, ddT_js, ddFs_js, true};
        case DivName::H2: return {name, f_h2, T_h2, Fs_h2, dT_h2, dFs_h2, ddT_h2, ddFs_h2, true};
        case DivName::rChi2:
            return {name,     f_rchi2,   T_rchi2,    Fs_rchi2, dT_rchi2,
                    dFs_rchi2, ddT_rchi2, ddFs_rchi2, true};
        case DivName::KL: return {name, f_kl, T_kl, Fs_kl, dT_kl, dFs_kl, ddT_kl, ddFs_kl, true};
        case DivName::mKL:
            return {name, f_mkl, T_mkl, Fs_mkl, dT_mkl, dFs_mkl, ddT_mkl, ddFs_mkl, true};
        case DivName::Chi2:
            return {name, f_chi2, T_chi2, Fs_chi2, dT_chi2, dFs_chi2, ddT_chi2, ddFs_chi2, true};
        case DivName::TV:
            return {name, f_tv, nullptr, nullptr, nullptr, nullptr, nullptr, nullptr, false};
    }
    throw InvalidInput("catalog: unknown divergence");
}

FDivergence catalog_logit(DivName name) {
    FDivergence fd = catalog(name);
    if (!fd.has_logit_forms)
        throw UnsupportedForLogitF(
            "TV has no tractable logit-f objective; use the hinge objective instead");
    return fd;
}

double k_f_empirical(const FDivergence& fd, const Vector& h_real, const Vector& h_fake) {
    if (h_real.empty() || h_fake.empty()) throw InvalidInput("k_f_empirical: empty score vector");
    if (!fd.has_logit_forms) throw UnsupportedForLogitF("k_f_empirical: family has no logit forms");
    double sr = 0.0;
    for (double u : h_real) sr += fd.T(u);
    double sf = 0.0;
    for (double u : h_fake) sf += fd.Fsharp(u);
    return sr / static_cast<double>(h_real.size()) - sf / static_cast<double>(h_fake.size());
}

double k_hinge_empirical(const Vector& h_real, const Vector& h_fake) {
    if (h_real.empty() || h_fake.empty()) throw InvalidInput("k_hinge_empirical: empty score vector");
    double sr = 0.0;
    for (double u : h_real) sr += std::min(1.0, u);
    double sf = 0.0;
    for (double u : h_fake) sf += std::min(1.0, -u);
    return sr / static_cast<double>(h_real.size()) + sf / static_cast<double>(h_fake.size());
}

void QuadratureConfig::validate() const {
    if (!(lower < upper)) throw InvalidInput("QuadratureConfig: lower must be < upper");
    if (n_points < 101 || n_points % 2 == 0)
        throw InvalidInput("QuadratureConfig: n_points must be odd and >= 101");
    if (abs_tol <= 0.0) throw InvalidInput("QuadratureConfig: abs_tol must be positive");
}

namespace {

double simpson_step(double a, double b, double fa, double fm, double fb) {
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

double adaptive_simpson_rec(const std::function<double(double)>& fn, double a, double m, double b,
                            double fa, double fm, double fb, double whole, double tol, int depth,
                            int force_depth) {
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = fn(lm), frm = fn(rm);
    if (!std::isfinite(flm) || !std::isfinite(frm))
        throw QuadratureFailure("adaptive simpson: non-finite integrand sample");
    const double left = simpson_step(a, m, fa, flm, fm);
    const double right = simpson_step(m, b, fm, frm, fb);
    const double delta = left + right - whole;
    // Subdivide unconditionally for the first few levels: the 5-point error
    // probe can alias oscillating integrands at coarse panels. The relative
    // floor keeps huge integrands from recursing below double rounding.
    const double scale = std::abs(left) + std::abs(right) + std::abs(whole);
    const bool accept = std::abs(delta) <= 15.0 * tol || std::abs(delta) <= 1e-12 * scale;
    if (depth <= 0 || (force_depth <= 0 && accept)) return left + right + delta / 15.0;
    return adaptive_simpson_rec(fn, a, lm, m, fa, flm, fm, left, tol / 2.0, depth - 1,
                                force_depth - 1) +
           adaptive_simpson_rec(fn, m, rm, b, fm, frm, fb, right, tol / 2.0, depth - 1,
                                force_depth - 1);
}

}  // namespace

double integrate(const std::function<double(double)>& fn, const QuadratureConfig& quad) {
    quad.validate();
    if (quad.rule == QuadratureConfig::Rule::fixed_simpson) {
        const int n = quad.n_points;
        const double h = (quad.upper - quad.lower) / (n - 1);
        double s = 0.0;
        for (int i = 0; i < n; ++i) {
            const double x = quad.lower + h * i;
            const double v = fn(x);
            if (!std::isfinite(v)) throw QuadratureFailure("fixed simpson: non-finite integrand sample");
            const double w = (i == 0 || i == n - 1) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
            s += w * v;
        }
        return s * h / 3.0;
    }
    // Adaptive rule, seeded on 16 panels so narrow structure is not missed.
    const int panels = 16;
    const double h = (quad.upper - quad.lower) / panels;
    double total = 0.0;
    for (int i = 0; i < panels; ++i) {
        const double a = quad.lower + i * h;
        const double b = a + h;
        const double m = 0.5 * (a + b);
        const double fa = fn(a), fm = fn(m), fb = fn(b);
        if (!std::isfinite(fa) || !std::isfinite(fm) || !std::isfinite(fb))
            throw QuadratureFailure("adaptive simpson: non-finite integrand sample");
        const double whole = simpson_step(a, b, fa, fm, fb);
        total += adaptive_simpson_rec(fn, a, m, b, fa, fm, fb, whole, quad.abs_tol / panels, 30, 4);
    }
    return total;
}

double population_df_1d(const FDivergence& fd, const Density& p_density, const Density& q_density,
                        const QuadratureConfig& quad) {
    if (fd.name == DivName::TV) {
        return integrate(
            [&](double x) { return 0.5 * std::abs(p_density(x) - q_density(x)); }, quad);
    }
    auto integrand = [&](double x) {
        const double q = q_density(x);
        const double p = p_density(x);
        if (q <= 0.0)
            throw QuadratureFailure("population_df_1d: density not positive on the window");
        return fd.f(std::max(p / q, 1e-300)) * q;
    };
    return integrate(integrand, quad);
}

double k_f_population(const FDivergence& fd, const Density& p_density, const Density& q_density,
                      const ScoreFn& h, const QuadratureConfig& quad) {
    FDivergence logit = catalog_logit(fd.name);
    const double real_term =
        integrate([&](double x) { return logit.T(h(x)) * p_density(x); }, quad);
    const double fake_term =
        integrate([&](double x) { return logit.Fsharp(h(x)) * q_density(x); }, quad);
    return real_term - fake_term;
}

double k_hinge_population(const Density& p_density, const Density& q_density, const ScoreFn& h,
                          const QuadratureConfig& quad) {
    const double real_term =
        integrate([&](double x) { return std::min(1.0, h(x)) * p_density(x); }, quad);
    const double fake_term =
        integrate([&](double x) { return std::min(1.0, -h(x)) * q_density(x); }, quad);
    return real_term + fake_term;
}

double variational_gap(const FDivergence& fd, const Density& p_density, const Density& q_density,
                       const ScoreFn& h, const QuadratureConfig& quad) {
    return population_df_1d(fd, p_density, q_density, quad) -
           k_f_population(fd, p_density, q_density, h, quad);
}

Vector default_u_grid() {
    Vector g(801);
    for (std::size_t i = 0; i < g.size(); ++i) g[i] = -10.0 + 20.0 * static_cast<double>(i) / 800.0;
    return g;
}

AssumptionReport assumption_report(const FDivergence& fd, const Vector& u_grid) {
    if (u_grid.size() < 3 || u_grid.front() > -10.0 + 1e-9 || u_grid.back() < 10.0 - 1e-9)
        throw InvalidInput("assumption_report: grid must cover [-10, 10]");

    AssumptionReport rep{};
    rep.name = fd.name;
    rep.has_logit_forms = fd.has_logit_forms;

    if (!fd.has_logit_forms) {
        // TV: only direct non-increasingness of f is checked; the variational
        // side is carried by the hinge objective.
        bool noninc = true;
        for (std::size_t i = 1; i < u_grid.size(); ++i) {
            const double t0 = std::exp(u_grid[i - 1]), t1 = std::exp(u_grid[i]);
            // f = |t-1|/2 equals (1-t)_+ up to c(t-1); test the latter form.
            auto fpos = [](double t) { return t < 1.0 ? 1.0 - t : 0.0; };
            if (fpos(t1) > fpos(t0) + 1e-12) noninc = false;
        }
        rep.f_nonincreasing = noninc;
        rep.fprime_concave = false;
        rep.T_concave = false;
        rep.fsharp_lipschitz_bound = std::numeric_limits<double>::infinity();
        rep.fsharp_lipschitz_bounded = false;
        return rep;
    }

    // Relaxed non-increasingness: f'(e^u) = T(u) levels off at the right grid
    // edge exactly when f' is bounded above.
    rep.f_nonincreasing = fd.dT(u_grid.back()) <= 0.05;

    // Concavity of f'(t) in t via second differences on a t-grid.
    {
        bool concave = true;
        const int nt = 400;
        for (int i = 1; i + 1 < nt; ++i) {
            const double t = 0.05 + (20.0 - 0.05) * i / (nt - 1);
            const double dt = (20.0 - 0.05) / (nt - 1);
            const double fp0 = fd.T(std::log(t - dt));
            const double fp1 = fd.T(std::log(t));
            const double fp2 = fd.T(std::log(t + dt));
            if (fp0 + fp2 - 2.0 * fp1 > 1e-7 * (1.0 + std::abs(fp1))) concave = false;
        }
        rep.fprime_concave = concave;
    }

    // Concavity of T(u) in u via second differences on the given grid.
    {
        bool concave = true;
        for (std::size_t i = 1; i + 1 < u_grid.size(); ++i) {
            const double t0 = fd.T(u_grid[i - 1]);
            const double t1 = fd.T(u_grid[i]);
            const double t2 = fd.T(u_grid[i + 1]);
            if (t0 + t2 - 2.0 * t1 > 1e-7 * (1.0 + std::abs(t1))) concave = false;
        }
        rep.T_concave = concave;
    }

    // Lipschitz bound of Fsharp: max |dFsharp| on the grid; declared bounded
    // when the sup does not grow from the inner half-grid to the full grid.
    {
        double bound_full = 0.0, bound_half = 0.0;
        for (double u : u_grid) {
            const double d = std::abs(fd.dFsharp(u));
            bound_full = std::max(bound_full, d);
            if (std::abs(u) <= 5.0) bound_half = std::max(bound_half, d);
        }
        rep.fsharp_lipschitz_bounded = bound_full <= 1.1 * bound_half;
        rep.fsharp_lipschitz_bound =
            rep.fsharp_lipschitz_bounded ? bound_full : std::numeric_limits<double>::infinity();
    }
    return rep;
}

}  // namespace robustgan
