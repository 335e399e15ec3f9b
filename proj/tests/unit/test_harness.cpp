#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "fpbandits/harness.hpp"

using namespace fpbandits;

namespace {

const char* kSmallConfig = R"({
  "env": {"link": "linear", "d": 3, "K": 4, "T": 25, "S": 1.0, "context_mode": "fresh"},
  "policies": [
    {"algorithm": "FP", "lambda": 0.01, "c_t_mode": "fixed", "c_t": 1.0},
    {"algorithm": "UCB", "lambda": 0.01, "c_t_mode": "theory"}
  ],
  "n_runs": 3, "base_seed": 5
})";

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("json config parsing") {
    const ExperimentConfig cfg = parse_config_json(kSmallConfig);
    CHECK(cfg.env.dim == 3);
    CHECK(cfg.env.num_arms == 4);
    CHECK(cfg.env.horizon == 25);
    CHECK(cfg.policies.size() == 2);
    CHECK(cfg.policies[0].name() == "LinFP");
    CHECK(cfg.policies[0].delta == doctest::Approx(1.0 / 25.0));  // default 1/T
    CHECK(cfg.policies[0].norm_bound == 1.0);                     // default S
    CHECK(cfg.n_runs == 3);

    CHECK_THROWS_AS(parse_config_json("{"), ConfigError);
    CHECK_THROWS_AS(parse_config_json("{}"), ConfigError);
    CHECK_THROWS_AS(parse_config_json(R"({"env": {"link": "nope", "T": 5},
                                          "policies": [{"algorithm": "FP"}]})"),
                    ConfigError);
    CHECK_THROWS_AS(parse_config_json(R"({"env": {"link": "linear", "d": 2, "K": 4, "T": 5},
                                          "policies": []})"),
                    ConfigError);
}

TEST_CASE("flat key-value config maps onto the json schema") {
    const std::string flat = R"(
# comment line
env.link = linear
env.d = 3
env.K = 4
env.T = 25
env.S = 1.0
env.context_mode = "fresh"
policies.0.algorithm = "FP"
policies.0.lambda = 0.01
policies.0.c_t = 1.0
policies.1.algorithm = "UCB"
policies.1.lambda = 0.01
policies.1.c_t_mode = "theory"
n_runs = 3
base_seed = 5
)";
    const std::string path = "/tmp/fpb_flat_test.cfg";
    std::ofstream(path) << flat;
    const ExperimentConfig a = load_config(path);
    const ExperimentConfig b = parse_config_json(kSmallConfig);
    CHECK(config_to_json(a) == config_to_json(b));
    CHECK(config_hash(a) == config_hash(b));
}

TEST_CASE("run_experiment basics and trace shape") {
    ExperimentConfig cfg = parse_config_json(kSmallConfig);
    cfg.record_diagnostics = true;
    cfg.n_runs = 2;
    const AggregateResult agg = run_experiment(cfg);
    REQUIRE(agg.per_policy.size() == 2);
    for (const PolicyAggregate& pol : agg.per_policy) {
        REQUIRE(pol.mean_cum_regret.size() == 25);
        double prev = 0.0;
        for (double v : pol.mean_cum_regret) {
            CHECK(v >= prev - 1e-12);  // cumulative regret is nondecreasing
            prev = v;
        }
        CHECK(pol.epl_max_ratio <= 1.0);
        CHECK(pol.final_regrets.size() == 2);
    }
}

TEST_CASE("aggregate statistics: independent recomputation and range") {
    ExperimentConfig cfg = parse_config_json(kSmallConfig);
    cfg.n_runs = 6;
    const AggregateResult agg = run_experiment(cfg);
    for (std::size_t p = 0; p < agg.per_policy.size(); ++p) {
        // Re-simulate each run and recompute mean/std by Welford's method.
        std::vector<std::vector<double>> runs;
        for (int r = 0; r < cfg.n_runs; ++r) {
            runs.push_back(
                simulate_run(cfg.env, cfg.policies[p], cfg.base_seed, r, false).cum_regret);
        }
        const PolicyAggregate& pol = agg.per_policy[p];
        for (std::size_t t = 0; t < 25; ++t) {
            double mean = 0.0, m2 = 0.0;
            double lo = 1e300, hi = -1e300;
            for (std::size_t r = 0; r < runs.size(); ++r) {
                const double v = runs[r][t];
                const double delta = v - mean;
                mean += delta / static_cast<double>(r + 1);
                m2 += delta * (v - mean);
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
            const double sd = std::sqrt(m2 / static_cast<double>(runs.size() - 1));
            CHECK(std::abs(pol.mean_cum_regret[t] - mean) <= 1e-12 * (1.0 + std::abs(mean)));
            CHECK(std::abs(pol.std_cum_regret[t] - sd) <= 1e-12 * (1.0 + sd));
            CHECK(pol.mean_cum_regret[t] >= lo - 1e-12);
            CHECK(pol.mean_cum_regret[t] <= hi + 1e-12);
        }
    }
}

TEST_CASE("csv emission: schema, row counts and round-trip precision") {
    ExperimentConfig cfg = parse_config_json(kSmallConfig);
    cfg.record_diagnostics = true;
    cfg.n_runs = 2;
    cfg.output_path = "/tmp/fpb_csv_test";
    const AggregateResult agg = run_experiment(cfg);

    const std::string aggregate = slurp("/tmp/fpb_csv_test_aggregate.csv");
    std::istringstream lines(aggregate);
    std::string header;
    std::getline(lines, header);
    CHECK(header == "policy,t,mean_cum_regret,std_cum_regret,n_runs");
    int rows = 0;
    std::string line;
    while (std::getline(lines, line)) {
        if (!line.empty()) ++rows;
    }
    CHECK(rows == 2 * 25);  // policies x T

    // Every mean in the file reproduces the in-memory value exactly.
    std::istringstream again(aggregate);
    std::getline(again, header);
    while (std::getline(again, line)) {
        if (line.empty()) continue;
        std::istringstream cells(line);
        std::string policy, t_str, mean_str, std_str, n_str;
        std::getline(cells, policy, ',');
        std::getline(cells, t_str, ',');
        std::getline(cells, mean_str, ',');
        std::getline(cells, std_str, ',');
        std::getline(cells, n_str, ',');
        const std::size_t t = std::stoul(t_str) - 1;
        for (const PolicyAggregate& pol : agg.per_policy) {
            if (pol.policy == policy) {
                CHECK(std::stod(mean_str) == pol.mean_cum_regret[t]);
                CHECK(std::stod(std_str) == pol.std_cum_regret[t]);
            }
        }
    }

    const std::string trace = slurp("/tmp/fpb_csv_test_trace.csv");
    std::istringstream tlines(trace);
    std::getline(tlines, header);
    CHECK(header == "run_id,t,policy,chosen_arm,inst_regret,cum_regret,diag_width,diag_kappa_star");
    rows = 0;
    while (std::getline(tlines, line)) {
        if (!line.empty()) ++rows;
    }
    CHECK(rows == 2 * 25 * 2);  // runs x T x policies

    std::remove("/tmp/fpb_csv_test_aggregate.csv");
    std::remove("/tmp/fpb_csv_test_trace.csv");
}

TEST_CASE("empty trace emits a header-only file") {
    std::ostringstream out;
    emit_trace_csv({}, out);
    CHECK(out.str() ==
          "run_id,t,policy,chosen_arm,inst_regret,cum_regret,diag_width,diag_kappa_star\n");
}

TEST_CASE("determinism: identical configs give byte-identical csv") {
    ExperimentConfig cfg = parse_config_json(kSmallConfig);
    std::ostringstream a, b;
    emit_aggregate_csv(run_experiment(cfg), a);
    emit_aggregate_csv(run_experiment(cfg), b);
    CHECK(a.str() == b.str());
}

TEST_CASE("parallel and serial execution agree bitwise") {
    ExperimentConfig cfg = parse_config_json(kSmallConfig);
    cfg.n_runs = 4;
    cfg.threads = 1;
    std::ostringstream serial;
    emit_aggregate_csv(run_experiment(cfg), serial);
    cfg.threads = 4;
    std::ostringstream parallel;
    emit_aggregate_csv(run_experiment(cfg), parallel);
    CHECK(serial.str() == parallel.str());
}

TEST_CASE("presets build valid configs") {
    for (const std::string& name : preset_names()) {
        for (bool desk : {true, false}) {
            const auto set = make_preset(name, desk);
            CHECK(!set.empty());
            for (const auto& [label, cfg] : set) {
                CHECK_NOTHROW(cfg.validate());
                CHECK(cfg.policies.front().lambda == doctest::Approx(1e-4));
                CHECK(cfg.policies.front().delta ==
                      doctest::Approx(1.0 / static_cast<double>(cfg.env.horizon)));
            }
        }
    }
    CHECK_THROWS_AS(make_preset("nope", true), ConfigError);

    // Full-scale replication config: linear, d=20, K=100, T=20000, 100 runs.
    const auto full = make_preset("linear-fig2", false);
    CHECK(full[0].second.env.dim == 20);
    CHECK(full[0].second.env.num_arms == 100);
    CHECK(full[0].second.env.horizon == 20000);
    CHECK(full[0].second.n_runs == 100);
    CHECK(full[0].second.policies.size() == 6);

    const auto sweep = make_preset("regret-vs-d-fig3b", true);
    CHECK(sweep.size() == 3);
    CHECK(sweep[0].second.env.dim == 5);
    CHECK(sweep[2].second.env.dim == 20);
}

TEST_CASE("greedy on a fixed noiseless instance locks onto the best arm") {
    EnvConfig env;
    env.link = LinkSpec::linear();
    env.dim = 3;
    env.num_arms = 5;
    env.horizon = 300;
    env.context_mode = ContextMode::FixedArmSet;
    env.theta_norm = 1.0;
    env.noise_sigma = 0.0;
    PolicyConfig pol;
    pol.algorithm = Algorithm::EpsGreedy;
    pol.link = LinkSpec::linear(0.0);
    pol.lambda = 1e-4;
    pol.epsilon0 = 0.0;  // greedy forever
    const RunResult run = simulate_run(env, pol, 123, 0, true);
    // Once the fit identifies the best direction the regret stops growing.
    const double final_regret = run.cum_regret.back();
    CHECK(run.cum_regret[50] == doctest::Approx(final_regret));
    CHECK(run.trace.rows.back().inst_regret == 0.0);
}

TEST_CASE("threads resolution: env var wins, then request, then hardware") {
    unsetenv("FP_BANDITS_THREADS");
    CHECK(resolve_threads(3) == 3);
    CHECK(resolve_threads(0) >= 1);
    setenv("FP_BANDITS_THREADS", "2", 1);
    CHECK(resolve_threads(8) == 2);
    unsetenv("FP_BANDITS_THREADS");
}

TEST_CASE("cli: verify wiring and exit codes") {
    {
        const char* argv[] = {"fpbandit", "verify", "--check", "epl", "--seed", "3"};
        CHECK(cli_main(6, argv) == 0);
    }
    {
        const char* argv[] = {"fpbandit", "nosuchcommand"};
        CHECK(cli_main(2, argv) == 1);
    }
    {
        const char* argv[] = {"fpbandit", "run", "/nonexistent/config.json"};
        CHECK(cli_main(3, argv) == 1);
    }
    {
        const char* argv[] = {"fpbandit", "verify", "--check", "nosuchcheck"};
        CHECK(cli_main(4, argv) == 1);
    }
}

TEST_CASE("cli: run subcommand produces output files") {
    const std::string cfg_path = "/tmp/fpb_cli_cfg.json";
    std::ofstream(cfg_path) << kSmallConfig;
    const char* argv[] = {"fpbandit", "run",  "/tmp/fpb_cli_cfg.json",
                          "--out",    "/tmp/fpb_cli_out", "--runs", "2"};
    CHECK(cli_main(7, argv) == 0);
    CHECK(!slurp("/tmp/fpb_cli_out_aggregate.csv").empty());
    std::remove("/tmp/fpb_cli_out_aggregate.csv");
    std::remove(cfg_path.c_str());
}
