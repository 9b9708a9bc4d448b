#include "robustgan/sim_harness.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>
#include <thread>

#include "robustgan/errors.hpp"
#include "robustgan/rng.hpp"
#include "robustgan/robust_baselines.hpp"

namespace robustgan {

Matrix toeplitz(std::size_t p, double rho) {
    Matrix s(p, p);
    for (std::size_t i = 0; i < p; ++i)
        for (std::size_t j = 0; j < p; ++j)
            s(i, j) = std::pow(rho, std::abs(static_cast<double>(i) - static_cast<double>(j)));
    return s;
}

std::string q_kind_str(QKind q) {
    switch (q) {
        case QKind::alt_corner: return "q1";
        case QKind::far_cluster: return "q2";
        case QKind::custom: return "custom";
    }
    return "?";
}

void ContaminationSpec::validate(std::size_t p) const {
    if (!(eps >= 0.0 && eps <= 1.0)) throw InvalidInput("ContaminationSpec: eps must be in [0, 1]");
    if (q_kind == QKind::custom) {
        if (custom_mu_q.size() != p || custom_sigma_q.rows() != p || custom_sigma_q.cols() != p)
            throw InvalidInput("ContaminationSpec: custom contamination dimensions mismatch");
    }
    if (custom_sigma_star &&
        (custom_sigma_star->rows() != p || custom_sigma_star->cols() != p))
        throw InvalidInput("ContaminationSpec: custom sigma_star dimension mismatch");
    if (!custom_mu_star.empty() && custom_mu_star.size() != p)
        throw InvalidInput("ContaminationSpec: custom mu_star dimension mismatch");
}

Vector ContaminationSpec::mu_star(std::size_t p) const {
    if (!custom_mu_star.empty()) return custom_mu_star;
    return Vector(p, 0.0);
}

Matrix ContaminationSpec::sigma_star(std::size_t p) const {
    if (custom_sigma_star) return *custom_sigma_star;
    return toeplitz(p, toeplitz_rho);
}

Vector ContaminationSpec::q_mean(std::size_t p) const {
    switch (q_kind) {
        case QKind::alt_corner: {
            Vector mu(p);
            for (std::size_t j = 0; j < p; ++j) mu[j] = (j % 2 == 0) ? 2.25 : -2.25;
            return mu;
        }
        case QKind::far_cluster: return Vector(p, 5.0);
        case QKind::custom: return custom_mu_q;
    }
    throw InvalidInput("ContaminationSpec: unknown q_kind");
}

Matrix ContaminationSpec::q_cov(std::size_t p) const {
    switch (q_kind) {
        case QKind::alt_corner: {
            Matrix s = Matrix::identity(p);
            for (std::size_t j = 0; j < p; ++j) s(j, j) = 1.0 / 3.0;
            return s;
        }
        case QKind::far_cluster: {
            Matrix s = Matrix::identity(p);
            for (std::size_t j = 0; j < p; ++j) s(j, j) = 5.0;
            return s;
        }
        case QKind::custom: return custom_sigma_q;
    }
    throw InvalidInput("ContaminationSpec: unknown q_kind");
}

LabeledSample generate(std::size_t n, std::size_t p, const ContaminationSpec& spec,
                       std::uint64_t seed) {
    if (n < 1 || p < 1) throw InvalidInput("generate: n and p must be positive");
    spec.validate(p);

    const Vector mu0 = spec.mu_star(p);
    const LowerFactor l0 = chol_factor(SymMatrix(spec.sigma_star(p)), 1e-12);
    const Vector muq = spec.q_mean(p);
    const LowerFactor lq = chol_factor(SymMatrix(symmetrized(spec.q_cov(p))), 1e-12);

    LabeledSample out;
    out.x = Matrix(n, p);
    out.labels.resize(n);

    Rng rng = Rng::stream(seed, 0);
    Vector z(p);
    for (std::size_t i = 0; i < n; ++i) {
        const bool contaminated = rng.uniform01() < spec.eps;
        out.labels[i] = contaminated ? 1 : 0;
        for (std::size_t j = 0; j < p; ++j) z[j] = rng.normal();
        const Vector& mu = contaminated ? muq : mu0;
        const Matrix& l = contaminated ? lq.mat() : l0.mat();
        for (std::size_t a = 0; a < p; ++a) {
            double s = mu[a];
            for (std::size_t b = 0; b <= a; ++b) s += l(a, b) * z[b];
            out.x(i, a) = s;
        }
    }
    return out;
}

ErrorReport evaluate(const Vector& mu_hat, const Matrix& sigma_hat, const Vector& mu_star,
                     const Matrix& sigma_star) {
    const std::size_t p = mu_star.size();
    if (mu_hat.size() != p || sigma_hat.rows() != p || sigma_star.rows() != p)
        throw InvalidInput("evaluate: dimension mismatch");
    Matrix sig_diff(p, p);
    for (std::size_t i = 0; i < p; ++i)
        for (std::size_t j = 0; j < p; ++j) sig_diff(i, j) = sigma_hat(i, j) - sigma_star(i, j);

    ErrorReport rep;
    rep.max_norm = max_norm(sig_diff);
    rep.fro_norm = fro_norm(sig_diff);
    rep.op_norm = op_norm(sig_diff);
    rep.fro_scaled = rep.fro_norm / std::sqrt(static_cast<double>(p));
    double l2 = 0.0, linf = 0.0;
    for (std::size_t j = 0; j < p; ++j) {
        const double d = mu_hat[j] - mu_star[j];
        l2 += d * d;
        linf = std::max(linf, std::abs(d));
    }
    rep.mu_l2 = std::sqrt(l2);
    rep.mu_linf = linf;
    return rep;
}

std::string method_str(Method m) {
    switch (m) {
        case Method::gan: return "gan";
        case Method::kendall_mad: return "kendall_mad";
        case Method::sample_cov: return "sample_cov";
    }
    return "?";
}

PointEstimate run_method(const Experiment& exp, const Matrix& data, std::uint64_t train_seed) {
    switch (exp.method) {
        case Method::gan: {
            TrainConfig cfg = exp.train;
            cfg.seed = train_seed;
            FitResult fr = fit(data, cfg);
            return PointEstimate{fr.params.mu, fr.params.sigma()};
        }
        case Method::kendall_mad: {
            PairwiseCovEstimate pw = kendall_mad_cov(data);
            return PointEstimate{column_medians(data), pw.sigma};
        }
        case Method::sample_cov: {
            const std::size_t n = data.rows(), p = data.cols();
            Vector mean(p, 0.0);
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < p; ++j) mean[j] += data(i, j);
            for (double& v : mean) v /= static_cast<double>(n);
            Matrix cov(p, p);
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t a = 0; a < p; ++a) {
                    const double da = data(i, a) - mean[a];
                    for (std::size_t b = 0; b <= a; ++b)
                        cov(a, b) += da * (data(i, b) - mean[b]);
                }
            for (std::size_t a = 0; a < p; ++a)
                for (std::size_t b = 0; b <= a; ++b) {
                    cov(a, b) /= static_cast<double>(n - 1);
                    cov(b, a) = cov(a, b);
                }
            return PointEstimate{std::move(mean), std::move(cov)};
        }
    }
    throw InvalidInput("run_method: unknown method");
}

ReplicateResult replicate(const Experiment& exp, int reps, std::uint64_t base_seed, int jobs) {
    if (reps < 2) throw InvalidInput("replicate: need at least two replications");
    const Vector mu0 = exp.spec.mu_star(exp.p);
    const Matrix sig0 = exp.spec.sigma_star(exp.p);

    ReplicateResult result;
    result.exp = exp;
    result.reps = reps;
    if (exp.method == Method::gan)
        result.lambda0 =
            exp.train.lambda0 ? *exp.train.lambda0 : default_lambda0(exp.train.objective);
    result.rows.resize(reps);

    auto run_one = [&](int rep) {
        RepRow row;
        row.rep = rep;
        try {
            const std::uint64_t data_seed = derive_seed(base_seed, 2 * static_cast<std::uint64_t>(rep));
            const std::uint64_t train_seed =
                derive_seed(base_seed, 2 * static_cast<std::uint64_t>(rep) + 1);
            const LabeledSample sample = generate(exp.n, exp.p, exp.spec, data_seed);
            const PointEstimate est = run_method(exp, sample.x, train_seed);
            row.err = evaluate(est.mu, est.sigma, mu0, sig0);
        } catch (const std::exception&) {
            row.failed = true;
        }
        return row;
    };

    int workers = jobs > 0 ? jobs : static_cast<int>(std::thread::hardware_concurrency());
    workers = std::max(1, std::min(workers, reps));
    if (workers == 1) {
        for (int r = 0; r < reps; ++r) result.rows[r] = run_one(r);
    } else {
        std::atomic<int> next{0};
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (int w = 0; w < workers; ++w) {
            pool.emplace_back([&]() {
                for (;;) {
                    const int r = next.fetch_add(1);
                    if (r >= reps) return;
                    result.rows[r] = run_one(r);
                }
            });
        }
        for (std::thread& t : pool) t.join();
    }

    // Deterministic fold in rep order; failures excluded from the statistics.
    auto fold = [&](auto pick) {
        double sum = 0.0;
        int k = 0;
        for (const RepRow& r : result.rows)
            if (!r.failed) {
                sum += pick(r.err);
                ++k;
            }
        const double mean = k > 0 ? sum / k : 0.0;
        double ss = 0.0;
        for (const RepRow& r : result.rows)
            if (!r.failed) ss += (pick(r.err) - mean) * (pick(r.err) - mean);
        const double sd = k > 1 ? std::sqrt(ss / (k - 1)) : 0.0;
        return std::pair<double, double>(mean, sd);
    };

    for (const RepRow& r : result.rows)
        if (r.failed) ++result.failures;

    std::tie(result.mean.max_norm, result.sd.max_norm) =
        fold([](const ErrorReport& e) { return e.max_norm; });
    std::tie(result.mean.fro_norm, result.sd.fro_norm) =
        fold([](const ErrorReport& e) { return e.fro_norm; });
    std::tie(result.mean.op_norm, result.sd.op_norm) =
        fold([](const ErrorReport& e) { return e.op_norm; });
    std::tie(result.mean.mu_l2, result.sd.mu_l2) =
        fold([](const ErrorReport& e) { return e.mu_l2; });
    std::tie(result.mean.mu_linf, result.sd.mu_linf) =
        fold([](const ErrorReport& e) { return e.mu_linf; });
    std::tie(result.mean.fro_scaled, result.sd.fro_scaled) =
        fold([](const ErrorReport& e) { return e.fro_scaled; });
    return result;
}

namespace {

std::string csv_prefix(const ReplicateResult& res) {
    std::ostringstream os;
    const Experiment& e = res.exp;
    os << method_str(e.method) << ',';
    if (e.method == Method::gan) {
        char lam[40];
        std::snprintf(lam, sizeof(lam), "%.17g", res.lambda0);
        os << e.train.objective.str() << ','
           << (e.train.penalty_kind == PenaltyKind::L1 ? "l1" : "l2") << ',' << lam << ',';
    } else {
        os << ",none,,";
    }
    char buf[96];
    std::snprintf(buf, sizeof(buf), "%s,%.17g,%zu,%zu", q_kind_str(e.spec.q_kind).c_str(),
                  e.spec.eps, e.n, e.p);
    os << buf;
    return os.str();
}

}  // namespace

void write_rep_csv(std::ostream& os, const std::vector<ReplicateResult>& results) {
    os << "method,objective,penalty,lambda0,q_kind,eps,n,p,rep,max_norm,fro_norm,op_norm,mu_l2,"
          "mu_linf\n";
    char buf[256];
    for (const ReplicateResult& res : results) {
        const std::string prefix = csv_prefix(res);
        for (const RepRow& r : res.rows) {
            if (r.failed) {
                os << prefix << ',' << r.rep << ",fail,fail,fail,fail,fail\n";
                continue;
            }
            std::snprintf(buf, sizeof(buf), ",%d,%.17g,%.17g,%.17g,%.17g,%.17g\n", r.rep,
                          r.err.max_norm, r.err.fro_norm, r.err.op_norm, r.err.mu_l2,
                          r.err.mu_linf);
            os << prefix << buf;
        }
    }
}

void write_summary_csv(std::ostream& os, const std::vector<ReplicateResult>& results) {
    os << "method,objective,penalty,lambda0,q_kind,eps,n,p,reps,failures,max_norm_mean,"
          "max_norm_sd,fro_norm_mean,fro_norm_sd,op_norm_mean,op_norm_sd,mu_l2_mean,mu_l2_sd,"
          "mu_linf_mean,mu_linf_sd\n";
    char buf[384];
    for (const ReplicateResult& res : results) {
        std::snprintf(buf, sizeof(buf),
                      ",%d,%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                      res.reps, res.failures, res.mean.max_norm, res.sd.max_norm,
                      res.mean.fro_norm, res.sd.fro_norm, res.mean.op_norm, res.sd.op_norm,
                      res.mean.mu_l2, res.sd.mu_l2, res.mean.mu_linf, res.sd.mu_linf);
        os << csv_prefix(res) << buf;
    }
}

std::string format_table(const std::vector<ReplicateResult>& results) {
    std::ostringstream os;
    os << "label                          q    eps     max norm          fro norm\n";
    char buf[160];
    for (const ReplicateResult& res : results) {
        std::snprintf(buf, sizeof(buf), "%-30s %-4s %-7.4g %.4f (%.4f)   %.4f (%.4f)\n",
                      res.exp.label.c_str(), q_kind_str(res.exp.spec.q_kind).c_str(),
                      res.exp.spec.eps, res.mean.max_norm, res.sd.max_norm, res.mean.fro_norm,
                      res.sd.fro_norm);
        os << buf;
    }
    return os.str();
}

}  // namespace robustgan
