#pragma once

#include <cstdint>
#include <vector>

#include "fpbandits/linalg.hpp"
#include "fpbandits/links.hpp"
#include "fpbandits/rng.hpp"

namespace fpbandits {

enum class ContextMode { FixedArmSet, FreshEachRound };

struct EnvConfig {
    LinkSpec link;
    int dim = 2;
    int num_arms = 2;          // K
    std::int64_t horizon = 1;  // T
    ContextMode context_mode = ContextMode::FreshEachRound;
    double theta_norm = 1.0;  // S, the norm of theta*
    double noise_sigma = 1.0;
    bool unit_sphere_features = false;  // h/||h|| instead of h/max(1, ||h||)

    void validate() const;  // K >= 2, d >= 1, T >= 1, S > 0
};

// Per-round arm features; every entry satisfies ||x|| <= 1.
struct ActionSet {
    std::int64_t round = 0;
    std::vector<Vector> features;

    int num_arms() const { return static_cast<int>(features.size()); }
};

// One per-round record of a simulation run. diag_width is the chosen arm's
// H_hat^{-1} norm, v_width_sq its vanilla-Gram counterpart (feeds the
// elliptical-potential diagnostic), kappa_star_avg the running average of
// mu_dot at the optimal arm.
struct TraceRow {
    std::int64_t t = 0;
    int chosen = 0;
    double inst_regret = 0.0;
    double cum_regret = 0.0;
    double diag_width = 0.0;
    double v_width_sq = 0.0;
    double kappa_star_avg = 0.0;
};

struct RegretTrace {
    std::vector<TraceRow> rows;

    double final_cum_regret() const { return rows.empty() ? 0.0 : rows.back().cum_regret; }
};

struct InstanceConstants {
    double kappa_star_emp = 0.0;  // average mu_dot at the optimal arm over rounds
    double kappa_emp = 0.0;       // min mu_dot over presented arms at theta* and theta_hat_T
};

// A synthetic bandit instance: theta* = S * g/||g|| with g standard Gaussian,
// arm features h/max(1, ||h||). FixedArmSet draws a single action set reused
// every round; FreshEachRound draws K new arms per round, deterministically
// from the instance stream (rounds must be visited in order).
class Environment {
public:
    Environment(EnvConfig cfg, RngStream instance_stream);

    const EnvConfig& config() const { return cfg_; }
    const Vector& theta_star() const { return theta_star_; }

    const ActionSet& actions(std::int64_t t);

    // Stochastic reward for the chosen arm, drawn from the reward stream.
    double step(const ActionSet& actions, int chosen, RngStream& reward_stream) const;

    // mu(x*^T theta*) - mu(x_chosen^T theta*), always >= 0.
    double regret_of(const ActionSet& actions, int chosen) const;

    int optimal_arm(const ActionSet& actions) const;

private:
    ActionSet draw_action_set(std::int64_t t);

    EnvConfig cfg_;
    RngStream stream_;
    Vector theta_star_;
    ActionSet current_;
    std::int64_t next_round_ = 1;
};

// Empirical instance constants for a completed run. The true kappa minimizes
// over all of Theta, which is not computable; the reported value is the min
// over presented arms at theta* and at the final estimate, a lower-bound
// proxy. Contexts are replayed from the same seed.
InstanceConstants instance_constants(const EnvConfig& cfg, RngStream instance_stream,
                                     const Vector& theta_hat_final);

}  // namespace fpbandits
