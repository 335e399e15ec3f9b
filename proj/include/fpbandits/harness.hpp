#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "fpbandits/environments.hpp"
#include "fpbandits/policies.hpp"

namespace fpbandits {

struct ExperimentConfig {
    EnvConfig env;
    std::vector<PolicyConfig> policies;
    int n_runs = 1;
    std::uint64_t base_seed = 0;
    std::string output_path;  // file prefix; empty = no files
    bool record_diagnostics = false;
    std::int64_t checkpoint_every = 0;  // rounds between trace flushes (0 = at end)
    int threads = 0;                    // 0 = FP_BANDITS_THREADS or hardware

    void validate() const;
};

// Result of one (policy, run) simulation. Run r uses seed = base_seed + r;
// named sub-streams (instance, reward-noise/<policy>, policy-noise/<policy>)
// are derived from (base_seed, run_id, stream-name), so the instance is
// shared across policies within a run and diagnostics never consume
// policy randomness.
struct RunResult {
    int run_id = 0;
    std::string policy;
    std::vector<double> cum_regret;  // length T
    double epl_sum = 0.0;            // sum_t min{1, ||x_t||^2_{V_t^{-1}}}
    double epl_bound = 0.0;          // 2 d log(1 + T/(d lambda))
    InstanceConstants constants;
    int nonconverged = 0;
    int clips = 0;
    RegretTrace trace;  // populated only when diagnostics are recorded
};

struct PolicyAggregate {
    std::string policy;
    std::vector<double> mean_cum_regret;
    std::vector<double> std_cum_regret;  // sample std over runs (0 when n_runs = 1)
    std::vector<double> final_regrets;   // per run, ordered by run_id
    double epl_max_ratio = 0.0;          // max over runs of epl_sum / epl_bound
    double kappa_star_mean = 0.0;
    double kappa_emp_min = 0.0;
    std::int64_t nonconverged_total = 0;
    std::int64_t clip_total = 0;

    double final_mean() const;
    double final_std() const;
    double final_quantile(double q) const;
};

struct AggregateResult {
    std::vector<PolicyAggregate> per_policy;
    std::int64_t horizon = 0;
    int n_runs = 0;
    std::string config_hash;
    std::string version;
    double wall_seconds = 0.0;  // metadata only; never written to CSV
};

RunResult simulate_run(const EnvConfig& env_cfg, const PolicyConfig& policy_cfg,
                       std::uint64_t base_seed, int run_id, bool keep_trace);

AggregateResult run_experiment(const ExperimentConfig& cfg);

// CSV emission, fixed column order, UTF-8, '.' decimal, 17 significant digits.
void emit_aggregate_csv(const AggregateResult& result, std::ostream& out);
void emit_trace_csv(const std::vector<RunResult>& runs, std::ostream& out);
void write_aggregate_csv(const AggregateResult& result, const std::string& path);
void write_trace_csv(const std::vector<RunResult>& runs, const std::string& path);

// Config I/O: JSON is canonical; flat "a.b.c = value" key-value files are
// also accepted and mapped onto the same schema.
ExperimentConfig parse_config_json(const std::string& text);
ExperimentConfig load_config(const std::string& path);
std::string config_to_json(const ExperimentConfig& cfg);
std::string config_hash(const ExperimentConfig& cfg);

// Built-in experiment presets (linear-fig2, logistic-fig2, regret-vs-d-fig3b)
// at full or desk scale. A preset may expand to several labeled configs
// (the dimension sweep).
std::vector<std::pair<std::string, ExperimentConfig>> make_preset(const std::string& name,
                                                                  bool desk);
std::vector<std::string> preset_names();

// CLI entry point: subcommands run / verify / replicate.
// Exit codes: 0 success, 1 config/usage error, 2 failed verification check.
int cli_main(int argc, const char* const* argv);

int resolve_threads(int requested);

inline constexpr const char* kVersion = "0.1.0";

}  // namespace fpbandits
