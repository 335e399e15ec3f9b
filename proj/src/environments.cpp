#include "fpbandits/environments.hpp"

#include <algorithm>
#include <cmath>

#include "fpbandits/errors.hpp"

namespace fpbandits {

void EnvConfig::validate() const {
    if (dim < 1) throw ConfigError("env.d must be >= 1");
    if (num_arms < 2) throw ConfigError("env.K must be >= 2");
    if (horizon < 1) throw ConfigError("env.T must be >= 1");
    if (theta_norm <= 0.0) throw ConfigError("env.S must be positive");
    if (noise_sigma < 0.0) throw ConfigError("env.noise_sigma must be nonnegative");
}

namespace {

Vector gaussian_vector(int dim, RngStream& rng) {
    Vector g(dim);
    for (int i = 0; i < dim; ++i) g(i) = rng.next_normal();
    return g;
}

Vector normalized_feature(int dim, bool unit_sphere, RngStream& rng) {
    Vector h = gaussian_vector(dim, rng);
    double norm = h.norm();
    while (unit_sphere && norm == 0.0) {
        h = gaussian_vector(dim, rng);
        norm = h.norm();
    }
    const double denom = unit_sphere ? norm : std::max(1.0, norm);
    return h / denom;
}

}  // namespace

Environment::Environment(EnvConfig cfg, RngStream instance_stream)
    : cfg_(std::move(cfg)), stream_(instance_stream) {
    cfg_.validate();
    cfg_.link.noise_sigma = cfg_.noise_sigma;
    Vector g = gaussian_vector(cfg_.dim, stream_);
    while (g.norm() == 0.0) g = gaussian_vector(cfg_.dim, stream_);
    theta_star_ = cfg_.theta_norm * g / g.norm();
    if (cfg_.context_mode == ContextMode::FixedArmSet) {
        current_ = draw_action_set(1);
    }
}

ActionSet Environment::draw_action_set(std::int64_t t) {
    ActionSet set;
    set.round = t;
    set.features.reserve(cfg_.num_arms);
    for (int i = 0; i < cfg_.num_arms; ++i) {
        set.features.push_back(normalized_feature(cfg_.dim, cfg_.unit_sphere_features, stream_));
    }
    return set;
}

const ActionSet& Environment::actions(std::int64_t t) {
    if (cfg_.context_mode == ContextMode::FixedArmSet) {
        current_.round = t;
        return current_;
    }
    if (t != next_round_) {
        throw std::logic_error("Environment::actions: fresh contexts must be visited in order");
    }
    current_ = draw_action_set(t);
    ++next_round_;
    return current_;
}

double Environment::step(const ActionSet& actions, int chosen, RngStream& reward_stream) const {
    const double z = actions.features.at(chosen).dot(theta_star_);
    return sample_reward(cfg_.link, z, reward_stream);
}

int Environment::optimal_arm(const ActionSet& actions) const {
    // mu is strictly increasing, so the argmax over mu(x^T theta*) is the
    // argmax over the linear utility.
    int best = 0;
    double best_z = actions.features.at(0).dot(theta_star_);
    for (int i = 1; i < actions.num_arms(); ++i) {
        const double z = actions.features[i].dot(theta_star_);
        if (z > best_z) {
            best_z = z;
            best = i;
        }
    }
    return best;
}

double Environment::regret_of(const ActionSet& actions, int chosen) const {
    const int star = optimal_arm(actions);
    const double gap = mu(cfg_.link, actions.features[star].dot(theta_star_)) -
                       mu(cfg_.link, actions.features.at(chosen).dot(theta_star_));
    return std::max(0.0, gap);
}

InstanceConstants instance_constants(const EnvConfig& cfg, RngStream instance_stream,
                                     const Vector& theta_hat_final) {
    Environment env(cfg, instance_stream);
    // Instance-hardness constants describe the true curvature; the
    // derivative_floor is an algorithmic clamp and does not apply here.
    LinkSpec link = cfg.link;
    link.derivative_floor = 0.0;
    InstanceConstants out;
    double kappa_min = std::numeric_limits<double>::infinity();
    double kappa_star_sum = 0.0;
    for (std::int64_t t = 1; t <= cfg.horizon; ++t) {
        const ActionSet& actions = env.actions(t);
        const int star = env.optimal_arm(actions);
        kappa_star_sum += mu_dot(link, actions.features[star].dot(env.theta_star()));
        for (const Vector& x : actions.features) {
            kappa_min = std::min(kappa_min, mu_dot(link, x.dot(env.theta_star())));
            kappa_min = std::min(kappa_min, mu_dot(link, x.dot(theta_hat_final)));
        }
    }
    out.kappa_star_emp = kappa_star_sum / static_cast<double>(cfg.horizon);
    out.kappa_emp = kappa_min;
    return out;
}

}  // namespace fpbandits
