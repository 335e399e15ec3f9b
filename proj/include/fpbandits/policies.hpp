#pragma once

#include <span>
#include <string>
#include <vector>

#include "fpbandits/environments.hpp"
#include "fpbandits/estimation.hpp"
#include "fpbandits/perturbation.hpp"

namespace fpbandits {

enum class Algorithm { FP, EpsGreedy, UCB, TS, PHE, RandUCB };
enum class CtMode { Theory, Fixed };

struct PolicyConfig {
    Algorithm algorithm = Algorithm::FP;
    LinkSpec link;
    double lambda = 1.0;
    CtMode c_t_mode = CtMode::Fixed;
    double c_t_value = 1.0;  // inflation scalar (Fixed mode) or UCB width override
    double delta = 0.1;
    double epsilon0 = 0.05;        // eps-greedy only
    double phe_noise_scale = 1.0;  // PHE only
    PerturbationScheme scheme = PerturbationScheme::gaussian();  // FP only
    double norm_bound = 0.0;       // clip ||theta_hat|| at this value; 0 = off
    double reward_mag_bound = 1.0;  // R_max in the loss-Lipschitz envelope

    // Display name used in CSV output: LinFP / GLM-FP, LinTS / GLM-TS, ...
    std::string name() const;
};

// Stateful action-selection policy: owns its estimator, its noise stream and
// per-round diagnostics. One instance per simulation run.
class Policy {
public:
    Policy(PolicyConfig cfg, int dim, std::int64_t horizon, RngStream noise_stream);

    int select(const ActionSet& actions);
    void update(const ActionSet& actions, int chosen, double reward);

    const PolicyConfig& config() const { return cfg_; }
    const EstimatorState& estimator() const { return state_; }
    std::int64_t round() const { return state_.round; }
    double loss_lipschitz() const { return loss_lipschitz_; }

    // Diagnostics for the most recent select().
    const std::vector<double>& last_scores() const { return last_scores_; }
    double last_perturb_magnitude() const { return last_perturb_magnitude_; }

private:
    const SymMatrix& gram() const;  // V for the linear link, H_hat otherwise
    ConfidenceParams confidence_params() const;
    double resolve_c_t() const;

    int select_fp(const ActionSet& actions);
    int select_eps_greedy(const ActionSet& actions);
    int select_ucb(const ActionSet& actions);
    int select_ts(const ActionSet& actions);
    int select_phe(const ActionSet& actions);
    int select_rand_ucb(const ActionSet& actions);

    PolicyConfig cfg_;
    std::int64_t horizon_;
    EstimatorState state_;
    RngStream rng_;
    FitOptions fit_opts_;
    double loss_lipschitz_ = 0.0;
    std::vector<double> last_scores_;
    double last_perturb_magnitude_ = 0.0;
};

// Argmax with ties broken by the lowest index.
int argmax_lowest_tie(std::span<const double> scores);

// Annealed exploration probability min(1, eps0 * sqrt(T/t)).
double eps_exploration_probability(double eps0, std::int64_t horizon, std::int64_t t);

// Linear utilities before the link is applied; the link is strictly
// increasing, so ranking by these is ranking by mu of them.
std::vector<double> greedy_utilities(const ActionSet& actions, const Vector& theta_hat);
std::vector<double> fp_utilities(const ActionSet& actions, const SymMatrix& gram,
                                 const Vector& theta_hat, double c_t, const Vector& zeta);
std::vector<double> ucb_utilities(const ActionSet& actions, const SymMatrix& gram,
                                  const Vector& theta_hat, double width);
std::vector<double> rand_ucb_utilities(const ActionSet& actions, const SymMatrix& gram,
                                       const Vector& theta_hat, double c_t, double z);

}  // namespace fpbandits
