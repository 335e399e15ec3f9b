#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fpbandits/errors.hpp"
#include "fpbandits/harness.hpp"
#include "fpbandits/verification.hpp"

namespace fpbandits {

namespace {

void print_summary(const std::string& label, const AggregateResult& agg) {
    std::printf("experiment%s: T=%lld runs=%d hash=%s wall=%.1fs\n",
                label.empty() ? "" : (" " + label).c_str(),
                static_cast<long long>(agg.horizon), agg.n_runs, agg.config_hash.c_str(),
                agg.wall_seconds);
    std::printf("  %-12s %14s %12s %10s %10s\n", "policy", "final_regret", "std", "epl_ratio",
                "kappa*");
    for (const PolicyAggregate& pol : agg.per_policy) {
        std::printf("  %-12s %14.2f %12.2f %10.4f %10.4f\n", pol.policy.c_str(),
                    pol.final_mean(), pol.final_std(), pol.epl_max_ratio, pol.kappa_star_mean);
    }
}

std::vector<OracleReport> run_verification(const std::string& only, std::uint64_t seed) {
    std::vector<OracleReport> reports;
    const bool all = only.empty();

    if (all || only == "anti_concentration") {
        reports.push_back(
            check_anti_concentration(PerturbationScheme::gaussian(), 8, 1'000'000, seed));
        reports.push_back(
            check_anti_concentration(PerturbationScheme::uniform_ball(), 2, 1'000'000, seed));
    }
    if (all || only == "concentration") {
        reports.push_back(
            check_concentration(PerturbationScheme::gaussian(), 0.1, 1'000'000, seed));
        reports.push_back(
            check_concentration(PerturbationScheme::gaussian(), 0.01, 1'000'000, seed));
    }
    if (all || only == "epl") {
        EnvConfig env;
        env.link = LinkSpec::linear();
        env.dim = 5;
        env.num_arms = 10;
        env.horizon = 2000;
        env.theta_norm = 1.0;
        const RegretTrace trace = uniform_logging_trace(env, 1.0, seed);
        reports.push_back(check_epl(trace, 1.0, env.dim, env.horizon));
    }
    if (all || only == "score_marginal") {
        const EstimatorState state = frozen_linear_state(5, 40, 1.0, seed);
        RngStream rng = RngStream::from_parts(seed, 0, "score-marginal-arm");
        Vector x(5);
        for (int i = 0; i < 5; ++i) x(i) = rng.next_normal();
        x /= std::max(1.0, x.norm());
        reports.push_back(check_score_marginal(x, state, 1.0, 100'000, seed));
    }
    if (all || only == "beta_coverage") {
        EnvConfig env;
        env.link = LinkSpec::linear();
        env.dim = 2;
        env.num_arms = 5;
        env.horizon = 500;
        env.theta_norm = 1.0;
        reports.push_back(check_beta_coverage(env, 200, 0.1, 1.0, seed));
    }
    if (reports.empty()) {
        throw ConfigError("unknown check: " + only +
                          " (expected anti_concentration, concentration, epl, score_marginal or "
                          "beta_coverage)");
    }
    return reports;
}

struct CommonOptions {
    std::optional<std::uint64_t> seed;
    std::optional<int> runs;
    std::string out;
    std::optional<int> threads;
    bool trace = false;
};

void apply_overrides(ExperimentConfig& cfg, const CommonOptions& opts) {
    if (opts.seed) cfg.base_seed = *opts.seed;
    if (opts.runs) cfg.n_runs = *opts.runs;
    if (opts.threads) cfg.threads = *opts.threads;
    if (opts.trace) cfg.record_diagnostics = true;
}

}  // namespace

int cli_main(int argc, const char* const* argv) {
    CLI::App app{"Contextual-bandit simulation harness: feature-perturbation policies, "
                 "GLM estimation, baselines and verification oracles"};
    app.require_subcommand(1);

    std::string config_path;
    CommonOptions run_opts;
    CLI::App* run_cmd = app.add_subcommand("run", "Run an experiment from a config file");
    run_cmd->add_option("config", config_path, "JSON or flat key-value config")->required();
    run_cmd->add_option("--seed", run_opts.seed, "Override base seed");
    run_cmd->add_option("--runs", run_opts.runs, "Override number of runs");
    run_cmd->add_option("--out", run_opts.out, "Output file prefix");
    run_cmd->add_option("--threads", run_opts.threads, "Worker threads (0 = auto)");
    run_cmd->add_flag("--trace", run_opts.trace, "Record and emit the full per-round trace");

    std::string check_name;
    std::uint64_t verify_seed = 0;
    std::string verify_out;
    CLI::App* verify_cmd = app.add_subcommand("verify", "Run the verification oracles");
    verify_cmd->add_option("--check", check_name,
                           "Run a single check (anti_concentration, concentration, epl, "
                           "score_marginal, beta_coverage)");
    verify_cmd->add_option("--seed", verify_seed, "Oracle seed");
    verify_cmd->add_option("--out", verify_out, "Also write the report CSV to this path");

    std::string preset_name;
    bool desk = false;
    CommonOptions rep_opts;
    CLI::App* rep_cmd = app.add_subcommand("replicate", "Run a built-in experiment preset");
    rep_cmd->add_option("preset", preset_name, "One of: linear-fig2, logistic-fig2, regret-vs-d-fig3b")
        ->required();
    rep_cmd->add_flag("--desk", desk, "Desk-scale variant (shorter horizon, fewer runs)");
    rep_cmd->add_option("--seed", rep_opts.seed, "Override base seed");
    rep_cmd->add_option("--runs", rep_opts.runs, "Override number of runs");
    rep_cmd->add_option("--out", rep_opts.out, "Output file prefix (default: preset name)");
    rep_cmd->add_option("--threads", rep_opts.threads, "Worker threads (0 = auto)");
    rep_cmd->add_flag("--trace", rep_opts.trace, "Record and emit the full per-round trace");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n\n" << app.help();
        return 1;
    }

    try {
        if (run_cmd->parsed()) {
            ExperimentConfig cfg = load_config(config_path);
            apply_overrides(cfg, run_opts);
            if (!run_opts.out.empty()) cfg.output_path = run_opts.out;
            const AggregateResult agg = run_experiment(cfg);
            print_summary("", agg);
            return 0;
        }
        if (verify_cmd->parsed()) {
            const std::vector<OracleReport> reports = run_verification(check_name, verify_seed);
            std::string csv = oracle_csv_header() + "\n";
            bool all_pass = true;
            for (const OracleReport& r : reports) {
                csv += oracle_csv_row(r) + "\n";
                all_pass = all_pass && r.pass;
            }
            std::cout << csv;
            if (!verify_out.empty()) {
                std::ofstream out(verify_out, std::ios::binary);
                if (!out) throw IoError("cannot open output file: " + verify_out);
                out << csv;
            }
            return all_pass ? 0 : 2;
        }
        if (rep_cmd->parsed()) {
            const std::string prefix = rep_opts.out.empty() ? preset_name : rep_opts.out;
            for (auto& [label, cfg] : make_preset(preset_name, desk)) {
                apply_overrides(cfg, rep_opts);
                cfg.output_path = prefix + label;
                const AggregateResult agg = run_experiment(cfg);
                print_summary(label, agg);
            }
            return 0;
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}

}  // namespace fpbandits
