#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "robustgan/checks.hpp"
#include "robustgan/csv.hpp"
#include "robustgan/digest.hpp"
#include "robustgan/errors.hpp"
#include "robustgan/estimator.hpp"
#include "robustgan/population_lab.hpp"
#include "robustgan/rng.hpp"
#include "robustgan/sim_harness.hpp"
#include "robustgan/version.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace robustgan;

namespace {

int dispatch(const std::vector<std::string>& args);

std::uint64_t seed_or_env(std::uint64_t seed, bool seed_given) {
    if (seed_given) return seed;
    if (const char* env = std::getenv("ROBUSTGAN_SEED")) return std::strtoull(env, nullptr, 10);
    return 0;
}

json make_manifest(const std::vector<std::string>& argv, std::uint64_t seed, json config,
                   json inputs) {
    json m;
    m["version"] = kVersion;
    m["command"] = argv.empty() ? "" : argv[0];
    m["argv"] = argv;
    m["seed"] = seed;
    m["config"] = std::move(config);
    m["inputs"] = std::move(inputs);
    return m;
}

json sigma_json(const Matrix& s) {
    json rows = json::array();
    for (std::size_t i = 0; i < s.rows(); ++i) {
        json row = json::array();
        for (std::size_t j = 0; j < s.cols(); ++j) row.push_back(s(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(item);
    return out;
}

// ---------------------------------------------------------------- estimate

int run_estimate(const std::vector<std::string>& argv, const std::string& data_path,
                 const std::string& objective, const std::string& penalty, double lambda0,
                 bool lambda0_given, const std::string& transform, bool two_objective, int iters,
                 std::uint64_t seed, const std::string& out_path) {
    const Matrix data = read_csv_matrix(data_path);

    TrainConfig cfg;
    cfg.objective = parse_objective(objective);
    cfg.penalty_kind = penalty == "l2" ? PenaltyKind::L2Group : PenaltyKind::L1;
    if (lambda0_given) cfg.lambda0 = lambda0;
    cfg.transform = transform == "location" ? Transform::location_only : Transform::full;
    cfg.two_objective = two_objective;
    cfg.iterations = iters;
    cfg.seed = seed;
    const double resolved_lambda0 =
        cfg.lambda0 ? *cfg.lambda0 : default_lambda0(cfg.objective);  // exit 2 when absent

    FitResult fr =
        cfg.iterations == 0 ? FitResult{init_params(data), TrainingTrace{}} : fit(data, cfg);

    const TraceSummary summary = summarize(fr.trace);
    json out;
    out["format"] = "robustgan-estimate/1";
    out["p"] = fr.params.dim();
    out["mu"] = fr.params.mu;
    out["sigma"] = sigma_json(fr.params.sigma());
    out["config_digest"] = config_digest(cfg);
    out["trace_summary"] = {{"iterations", summary.iterations},
                            {"final_outer", summary.final_outer},
                            {"final_inner", summary.final_inner},
                            {"cap_hits", summary.cap_hits},
                            {"mean_inner_iters", summary.mean_inner_iters}};
    json config = {{"objective", cfg.objective.str()}, {"penalty", penalty},
                   {"lambda0", resolved_lambda0},      {"transform", transform},
                   {"two_objective", two_objective},   {"iterations", iters}};
    json inputs = json::array();
    inputs.push_back({{"path", data_path}, {"fnv1a64", fnv1a64_hex(read_file(data_path))}});
    out["manifest"] = make_manifest(argv, seed, config, inputs);

    write_file(out_path, out.dump(2) + "\n");
    std::cout << "wrote " << out_path << "\n";
    return 0;
}

// ---------------------------------------------------------------- simulate

struct SimGrid {
    std::vector<std::string> methods;
    std::vector<double> eps;
    std::vector<std::string> qs;
    std::vector<std::size_t> ns;
    std::vector<std::size_t> ps;
    PenaltyKind penalty = PenaltyKind::L1;
};

SimGrid preset_grid(const std::string& preset) {
    SimGrid g;
    g.methods = {"hinge", "js", "rkl", "kendall_mad"};
    g.qs = {"q1", "q2"};
    g.eps = {0.025, 0.05, 0.075, 0.1};
    g.ns = {2000};
    g.ps = {10};
    if (preset == "table-eps-l1") {
        // defaults above
    } else if (preset == "table-eps-l2") {
        g.penalty = PenaltyKind::L2Group;
    } else if (preset == "table-n") {
        g.eps = {0.1};
        g.ns = {500, 1000, 2000, 4000};
    } else if (preset == "table-p") {
        g.eps = {0.1};
        g.ps = {5, 10, 15};
    } else {
        throw InvalidInput("unknown preset: " + preset);
    }
    return g;
}

Experiment make_experiment(const std::string& method, const std::string& q, double eps,
                           std::size_t n, std::size_t p, PenaltyKind penalty) {
    Experiment exp;
    exp.spec.q_kind = q == "q2" ? QKind::far_cluster : QKind::alt_corner;
    exp.spec.eps = eps;
    exp.n = n;
    exp.p = p;
    if (method == "kendall_mad") {
        exp.method = Method::kendall_mad;
        exp.label = "Kendall-MAD";
    } else if (method == "sample_cov") {
        exp.method = Method::sample_cov;
        exp.label = "sample covariance";
    } else {
        exp.method = Method::gan;
        exp.train.objective = parse_objective(method);
        exp.train.penalty_kind = penalty;
        exp.label = method + (penalty == PenaltyKind::L1 ? " L1 GAN" : " L2 GAN");
    }
    return exp;
}

int run_simulate(const std::vector<std::string>& argv, const std::string& preset,
                 const std::string& methods, const std::string& eps_list, const std::string& qs,
                 std::size_t n_override, std::size_t p_override, int reps, std::uint64_t seed,
                 int jobs, const std::string& out_dir) {
    SimGrid grid = preset_grid(preset);
    if (!methods.empty()) grid.methods = split_list(methods);
    if (!eps_list.empty()) {
        grid.eps.clear();
        for (const std::string& e : split_list(eps_list)) grid.eps.push_back(std::stod(e));
    }
    if (!qs.empty()) grid.qs = split_list(qs);
    if (n_override > 0) grid.ns = {n_override};
    if (p_override > 0) grid.ps = {p_override};

    fs::create_directories(out_dir);

    std::vector<ReplicateResult> results;
    int total_failures = 0, total_rows = 0;
    std::uint64_t cell = 0;
    for (const std::string& q : grid.qs)
        for (double eps : grid.eps)
            for (std::size_t n : grid.ns)
                for (std::size_t p : grid.ps)
                    for (const std::string& method : grid.methods) {
                        Experiment exp = make_experiment(method, q, eps, n, p, grid.penalty);
                        ReplicateResult res =
                            replicate(exp, reps, derive_seed(seed, cell++), jobs);
                        total_failures += res.failures;
                        total_rows += res.reps;
                        std::cout << exp.label << " " << q << " eps=" << eps << " n=" << n
                                  << " p=" << p << ": max " << res.mean.max_norm << " ("
                                  << res.sd.max_norm << ")"
                                  << (res.failures ? " [failures]" : "") << std::endl;
                        results.push_back(std::move(res));
                    }

    {
        std::ofstream repf(fs::path(out_dir) / "replications.csv");
        write_rep_csv(repf, results);
        std::ofstream sumf(fs::path(out_dir) / "summary.csv");
        write_summary_csv(sumf, results);
        write_file((fs::path(out_dir) / "table.txt").string(), format_table(results));
    }

    json config = {{"preset", preset}, {"reps", reps}, {"jobs", jobs}};
    write_file((fs::path(out_dir) / "manifest.json").string(),
               make_manifest(argv, seed, config, json::array()).dump(2) + "\n");

    if (total_failures == total_rows && total_rows > 0) {
        std::cerr << "all replications failed\n";
        return 3;
    }
    if (total_failures > 0)
        std::cout << total_failures << " replication(s) failed and were excluded\n";
    return 0;
}

// ---------------------------------------------------------------- population

int run_population(const std::vector<std::string>& argv, const std::string& sweep,
                   const std::string& divergences, const std::string& eps_grid_s,
                   const std::string& muq_grid_s, double eps_fixed, const std::string& out_path) {
    std::vector<DivName> divs;
    for (const std::string& d : split_list(divergences)) divs.push_back(parse_div_name(d));
    if (divs.empty()) throw InvalidInput("population: empty divergence list");

    Mixture1D mix;  // N(0,1) clean, N(5, 1/4) contamination
    std::vector<SweepRow> rows;
    if (sweep == "eps") {
        Vector grid{0.0, 0.0025, 0.005, 0.01, 0.02, 0.04};
        if (!eps_grid_s.empty()) {
            grid.clear();
            for (const std::string& e : split_list(eps_grid_s)) grid.push_back(std::stod(e));
        }
        rows = sweep_epsilon(divs, grid, mix);
    } else {
        Vector grid{0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0, 10.0};
        if (!muq_grid_s.empty()) {
            grid.clear();
            for (const std::string& e : split_list(muq_grid_s)) grid.push_back(std::stod(e));
        }
        rows = sweep_location(divs, grid, eps_fixed, mix);
    }

    std::ostringstream os;
    write_sweep_csv(os, rows);
    write_file(out_path, os.str());

    json config = {{"sweep", sweep}, {"divergences", divergences}, {"eps", eps_fixed}};
    write_file(out_path + ".manifest.json",
               make_manifest(argv, 0, config, json::array()).dump(2) + "\n");

    int failures = 0;
    for (const SweepRow& r : rows)
        if (r.failed) ++failures;
    if (failures > 0) std::cout << failures << " sweep cell(s) flagged OptFailure\n";
    std::cout << "wrote " << out_path << "\n";
    return 0;
}

// ---------------------------------------------------------------- check

int run_check(const std::string& suite) {
    std::vector<CheckResult> results;
    if (suite == "gradients")
        results = check_gradients();
    else if (suite == "bounds")
        results = check_bounds();
    else if (suite == "assumptions")
        results = check_assumptions();
    else if (suite == "solver")
        results = check_solver();
    else
        results = check_all();

    for (const CheckResult& r : results)
        std::cout << (r.pass ? "[PASS] " : "[FAIL] ") << r.name << " - " << r.detail << "\n";
    return all_pass(results) ? 0 : 1;
}

// ---------------------------------------------------------------- replay

int run_replay(const std::string& manifest_path) {
    const json manifest = json::parse(read_file(manifest_path));
    const json& body = manifest.contains("manifest") ? manifest["manifest"] : manifest;
    if (!body.contains("argv")) throw InvalidInput("replay: manifest has no argv");
    const std::vector<std::string> argv = body["argv"].get<std::vector<std::string>>();
    return dispatch(argv);
}

int dispatch(const std::vector<std::string>& args) {
    CLI::App app{"robust Gaussian location/scatter estimation with spline-GAN objectives"};
    app.require_subcommand(1);

    auto* est = app.add_subcommand("estimate", "fit (mu, Sigma) to a CSV of observations");
    std::string data_path, objective = "rkl", penalty = "l1", transform = "full", out_path;
    double lambda0 = 0.0;
    bool two_objective = false;
    int iters = 100;
    std::uint64_t seed = 0;
    est->add_option("--data", data_path, "input CSV, n rows x p numeric columns")->required();
    est->add_option("--objective", objective, "hinge|rkl|js|h2|rchi2")
        ->check(CLI::IsMember({"hinge", "rkl", "js", "h2", "rchi2"}));
    est->add_option("--penalty", penalty, "l1|l2")->check(CLI::IsMember({"l1", "l2"}));
    auto* lam = est->add_option("--lambda0", lambda0, "base penalty level");
    est->add_option("--transform", transform, "full|location")
        ->check(CLI::IsMember({"full", "location"}));
    est->add_flag("--two-objective", two_objective, "use the two-objective generator update");
    est->add_option("--iters", iters, "outer iterations");
    auto* est_seed = est->add_option("--seed", seed, "RNG seed");
    est->add_option("--out", out_path, "output JSON path")->required();

    auto* sim = app.add_subcommand("simulate", "run contaminated-data simulation grids");
    std::string preset = "table-eps-l1", methods, eps_list, qs;
    std::size_t n_override = 0, p_override = 0;
    int reps = 20, jobs = 0;
    std::string out_dir;
    sim->add_option("--preset", preset, "table-eps-l1|table-eps-l2|table-n|table-p");
    sim->add_option("--methods", methods,
                    "comma list: rkl,js,hinge,h2,rchi2,kendall_mad,sample_cov");
    sim->add_option("--eps", eps_list, "comma list of contamination fractions");
    sim->add_option("--q", qs, "comma list of contaminations: q1,q2");
    sim->add_option("--n", n_override, "override sample size");
    sim->add_option("--p", p_override, "override dimension");
    sim->add_option("--reps", reps, "replications per cell");
    auto* sim_seed = sim->add_option("--seed", seed, "base RNG seed");
    sim->add_option("--jobs", jobs, "parallel replication workers (default: all cores)");
    sim->add_option("--out", out_dir, "output directory")->required();

    auto* pop = app.add_subcommand("population", "population minimum-divergence sweeps (1-D)");
    std::string sweep = "eps", divergences, eps_grid_s, muq_grid_s, pop_out;
    double eps_fixed = 0.1;
    pop->add_option("--sweep", sweep, "eps|location")->check(CLI::IsMember({"eps", "location"}));
    pop->add_option("--divergences", divergences, "comma list: rkl,js,h2,rchi2,kl,mkl,chi2,tv")
        ->required();
    pop->add_option("--eps-grid", eps_grid_s, "eps sweep grid (subset of [0, 0.05])");
    pop->add_option("--muq-grid", muq_grid_s, "contamination-location grid (within [0, 10])");
    pop->add_option("--eps", eps_fixed, "fixed eps for the location sweep");
    pop->add_option("--out", pop_out, "output CSV path")->required();

    auto* chk = app.add_subcommand("check", "run the verification property suites");
    std::string suite = "all";
    chk->add_option("--suite", suite, "gradients|bounds|assumptions|solver|all")
        ->check(CLI::IsMember({"gradients", "bounds", "assumptions", "solver", "all"}));

    auto* rep = app.add_subcommand("replay", "re-run the command recorded in a manifest");
    std::string manifest_path;
    rep->add_option("manifest", manifest_path, "manifest JSON path")->required();

    std::vector<std::string> argv_copy = args;
    std::vector<char*> argv_c;
    static std::string prog = "robustgan";
    argv_c.push_back(prog.data());
    for (std::string& a : argv_copy) argv_c.push_back(a.data());

    try {
        app.parse(static_cast<int>(argv_c.size()), argv_c.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (est->parsed())
            return run_estimate(args, data_path, objective, penalty, lambda0, lam->count() > 0,
                                transform, two_objective, iters,
                                seed_or_env(seed, est_seed->count() > 0), out_path);
        if (sim->parsed())
            return run_simulate(args, preset, methods, eps_list, qs, n_override, p_override,
                                reps, seed_or_env(seed, sim_seed->count() > 0), jobs, out_dir);
        if (pop->parsed())
            return run_population(args, sweep, divergences, eps_grid_s, muq_grid_s, eps_fixed,
                                  pop_out);
        if (chk->parsed()) return run_check(suite);
        if (rep->parsed()) return run_replay(manifest_path);
    } catch (const InvalidInput& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const InvalidData& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const MissingDefault& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const UnsupportedForLogitF& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "runtime failure: " << e.what() << "\n";
        return 3;
    }
    return 2;
}

}  // namespace

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return dispatch(args);
}
