#include "fpbandits/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <thread>

#include "fpbandits/errors.hpp"

namespace fpbandits {

void ExperimentConfig::validate() const {
    env.validate();
    if (policies.empty()) throw ConfigError("config: at least one policy required");
    if (n_runs < 1) throw ConfigError("config: n_runs must be >= 1");
    for (const PolicyConfig& p : policies) {
        if (p.lambda <= 0.0) throw ConfigError("config: policy lambda must be positive");
        if (!(p.delta > 0.0 && p.delta < 1.0)) throw ConfigError("config: delta must be in (0,1)");
        if (p.epsilon0 < 0.0) throw ConfigError("config: epsilon must be nonnegative");
        if (p.phe_noise_scale < 0.0) throw ConfigError("config: phe noise scale must be nonnegative");
    }
}

int resolve_threads(int requested) {
    if (const char* env = std::getenv("FP_BANDITS_THREADS")) {
        const int n = std::atoi(env);
        if (n > 0) return n;
    }
    if (requested > 0) return requested;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

RunResult simulate_run(const EnvConfig& env_cfg, const PolicyConfig& policy_cfg,
                       std::uint64_t base_seed, int run_id, bool keep_trace) {
    const std::string name = policy_cfg.name();
    const std::uint64_t run_seed = base_seed + static_cast<std::uint64_t>(run_id);
    RngStream instance_stream = RngStream::from_parts(run_seed, run_id, "instance");
    RngStream reward_stream = RngStream::from_parts(run_seed, run_id, "reward-noise/" + name);
    RngStream policy_stream = RngStream::from_parts(run_seed, run_id, "policy-noise/" + name);

    Environment env(env_cfg, instance_stream);
    Policy policy(policy_cfg, env_cfg.dim, env_cfg.horizon, policy_stream);

    RunResult result;
    result.run_id = run_id;
    result.policy = name;
    result.cum_regret.resize(static_cast<std::size_t>(env_cfg.horizon));
    if (keep_trace) result.trace.rows.reserve(static_cast<std::size_t>(env_cfg.horizon));

    const double d = static_cast<double>(env_cfg.dim);
    result.epl_bound =
        2.0 * d * std::log(1.0 + static_cast<double>(env_cfg.horizon) / (d * policy_cfg.lambda));

    // Trace diagnostics report the instance's true curvature, unclamped.
    LinkSpec bare_link = env_cfg.link;
    bare_link.derivative_floor = 0.0;

    double cum = 0.0;
    double kappa_star_sum = 0.0;
    for (std::int64_t t = 1; t <= env_cfg.horizon; ++t) {
        const ActionSet& actions = env.actions(t);
        const int chosen = policy.select(actions);
        const Vector& x = actions.features.at(chosen);

        // Widths against the pre-update Gram matrices.
        const EstimatorState& est = policy.estimator();
        const double v_width_sq = SpdSolver(est.v).inv_quad(x);
        const double h_width = policy_cfg.link.kind == LinkKind::Linear
                                   ? std::sqrt(v_width_sq)
                                   : SpdSolver(est.h_hat).inv_norm(x);

        const double inst_regret = env.regret_of(actions, chosen);
        const int star = env.optimal_arm(actions);
        kappa_star_sum += mu_dot(bare_link, actions.features[star].dot(env.theta_star()));

        const double reward = env.step(actions, chosen, reward_stream);
        policy.update(actions, chosen, reward);

        cum += inst_regret;
        result.cum_regret[static_cast<std::size_t>(t - 1)] = cum;
        result.epl_sum += std::min(1.0, v_width_sq);
        if (keep_trace) {
            result.trace.rows.push_back(TraceRow{t, chosen, inst_regret, cum, h_width,
                                                 v_width_sq,
                                                 kappa_star_sum / static_cast<double>(t)});
        }
    }

    result.constants = instance_constants(env_cfg, RngStream::from_parts(run_seed, run_id, "instance"),
                                          policy.estimator().theta_hat);
    result.nonconverged = policy.estimator().nonconverged_count;
    result.clips = policy.estimator().clip_count;
    return result;
}

namespace {

PolicyAggregate aggregate_policy(const std::string& name, const std::vector<const RunResult*>& runs,
                                 std::int64_t horizon) {
    PolicyAggregate agg;
    agg.policy = name;
    const std::size_t t_len = static_cast<std::size_t>(horizon);
    const double n = static_cast<double>(runs.size());
    agg.mean_cum_regret.assign(t_len, 0.0);
    agg.std_cum_regret.assign(t_len, 0.0);
    agg.kappa_emp_min = std::numeric_limits<double>::infinity();

    for (const RunResult* run : runs) {
        for (std::size_t i = 0; i < t_len; ++i) agg.mean_cum_regret[i] += run->cum_regret[i];
        agg.final_regrets.push_back(run->cum_regret.back());
        agg.epl_max_ratio = std::max(agg.epl_max_ratio, run->epl_sum / run->epl_bound);
        agg.kappa_star_mean += run->constants.kappa_star_emp;
        agg.kappa_emp_min = std::min(agg.kappa_emp_min, run->constants.kappa_emp);
        agg.nonconverged_total += run->nonconverged;
        agg.clip_total += run->clips;
    }
    for (std::size_t i = 0; i < t_len; ++i) agg.mean_cum_regret[i] /= n;
    agg.kappa_star_mean /= n;

    if (runs.size() > 1) {
        for (const RunResult* run : runs) {
            for (std::size_t i = 0; i < t_len; ++i) {
                const double dev = run->cum_regret[i] - agg.mean_cum_regret[i];
                agg.std_cum_regret[i] += dev * dev;
            }
        }
        for (std::size_t i = 0; i < t_len; ++i) {
            agg.std_cum_regret[i] = std::sqrt(agg.std_cum_regret[i] / (n - 1.0));
        }
    }
    return agg;
}

}  // namespace

double PolicyAggregate::final_mean() const { return mean_cum_regret.back(); }
double PolicyAggregate::final_std() const { return std_cum_regret.back(); }

double PolicyAggregate::final_quantile(double q) const {
    std::vector<double> sorted = final_regrets;
    std::sort(sorted.begin(), sorted.end());
    const double pos = q * (static_cast<double>(sorted.size()) - 1.0);
    const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - std::floor(pos);
    return sorted[lo] * (1.0 - frac) + sorted[hi] * frac;
}

AggregateResult run_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    const auto start = std::chrono::steady_clock::now();
    const bool keep_trace = cfg.record_diagnostics;

    struct Task {
        std::size_t policy_idx;
        int run_id;
    };
    std::vector<Task> tasks;
    tasks.reserve(cfg.policies.size() * static_cast<std::size_t>(cfg.n_runs));
    for (std::size_t p = 0; p < cfg.policies.size(); ++p) {
        for (int r = 0; r < cfg.n_runs; ++r) tasks.push_back(Task{p, r});
    }

    std::vector<RunResult> results(tasks.size());
    const int n_threads = std::min<int>(resolve_threads(cfg.threads),
                                        static_cast<int>(tasks.size()));
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= tasks.size()) break;
            const Task& task = tasks[i];
            results[i] = simulate_run(cfg.env, cfg.policies[task.policy_idx], cfg.base_seed,
                                      task.run_id, keep_trace);
        }
    };
    if (n_threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(n_threads));
        for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
        for (std::thread& th : pool) th.join();
    }

    AggregateResult agg;
    agg.horizon = cfg.env.horizon;
    agg.n_runs = cfg.n_runs;
    agg.config_hash = config_hash(cfg);
    agg.version = kVersion;
    for (std::size_t p = 0; p < cfg.policies.size(); ++p) {
        std::vector<const RunResult*> runs;
        runs.reserve(static_cast<std::size_t>(cfg.n_runs));
        for (int r = 0; r < cfg.n_runs; ++r) {
            runs.push_back(&results[p * static_cast<std::size_t>(cfg.n_runs) +
                                    static_cast<std::size_t>(r)]);
        }
        agg.per_policy.push_back(aggregate_policy(cfg.policies[p].name(), runs, cfg.env.horizon));
    }
    agg.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    if (!cfg.output_path.empty()) {
        write_aggregate_csv(agg, cfg.output_path + "_aggregate.csv");
        if (keep_trace) write_trace_csv(results, cfg.output_path + "_trace.csv");
    }
    return agg;
}

namespace {

void put_double(std::string& out, double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    out += buf;
}

}  // namespace

void emit_aggregate_csv(const AggregateResult& result, std::ostream& out) {
    std::string text = "policy,t,mean_cum_regret,std_cum_regret,n_runs\n";
    text.reserve(64 * static_cast<std::size_t>(result.horizon) * result.per_policy.size());
    for (const PolicyAggregate& pol : result.per_policy) {
        for (std::int64_t t = 1; t <= result.horizon; ++t) {
            text += pol.policy;
            text += ',';
            text += std::to_string(t);
            text += ',';
            put_double(text, pol.mean_cum_regret[static_cast<std::size_t>(t - 1)]);
            text += ',';
            put_double(text, pol.std_cum_regret[static_cast<std::size_t>(t - 1)]);
            text += ',';
            text += std::to_string(result.n_runs);
            text += '\n';
        }
    }
    out << text;
}

void emit_trace_csv(const std::vector<RunResult>& runs, std::ostream& out) {
    out << "run_id,t,policy,chosen_arm,inst_regret,cum_regret,diag_width,diag_kappa_star\n";
    for (const RunResult& run : runs) {
        std::string text;
        text.reserve(96 * run.trace.rows.size());
        for (const TraceRow& row : run.trace.rows) {
            text += std::to_string(run.run_id);
            text += ',';
            text += std::to_string(row.t);
            text += ',';
            text += run.policy;
            text += ',';
            text += std::to_string(row.chosen);
            text += ',';
            put_double(text, row.inst_regret);
            text += ',';
            put_double(text, row.cum_regret);
            text += ',';
            put_double(text, row.diag_width);
            text += ',';
            put_double(text, row.kappa_star_avg);
            text += '\n';
        }
        out << text;
    }
}

namespace {

std::ofstream open_output(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open output file: " + path);
    return out;
}

}  // namespace

void write_aggregate_csv(const AggregateResult& result, const std::string& path) {
    std::ofstream out = open_output(path);
    emit_aggregate_csv(result, out);
    if (!out) throw IoError("failed writing: " + path);
}

void write_trace_csv(const std::vector<RunResult>& runs, const std::string& path) {
    std::ofstream out = open_output(path);
    emit_trace_csv(runs, out);
    if (!out) throw IoError("failed writing: " + path);
}

}  // namespace fpbandits
