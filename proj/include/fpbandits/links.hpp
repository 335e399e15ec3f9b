#pragma once

#include "fpbandits/rng.hpp"

namespace fpbandits {

enum class LinkKind { Linear, Logistic, Poisson };

// A GLM link function mu with its Lipschitz and self-concordance constants:
// (z, 1, 0) for linear, (sigmoid, 1/4, 1) for logistic, (e^z, e, 1) for
// Poisson. derivative_floor > 0 clamps mu_dot from below (numerical-stability
// option for logistic experiments); 0 means no clamp.
struct LinkSpec {
    LinkKind kind = LinkKind::Linear;
    double lipschitz = 1.0;         // L_mu
    double self_concordance = 0.0;  // M_mu
    double derivative_floor = 0.0;
    double noise_sigma = 1.0;       // reward noise scale, linear link only

    static LinkSpec linear(double sigma = 1.0);
    static LinkSpec logistic(double derivative_floor = 0.0);
    static LinkSpec poisson();
};

// Mean function mu(z). Logistic is evaluated in an overflow-safe branch;
// Poisson throws OverflowError when e^z leaves the double range.
double mu(const LinkSpec& link, double z);

// Exact derivative mu_dot(z), clamped at derivative_floor when configured.
double mu_dot(const LinkSpec& link, double z);

// Antiderivative g of mu: z^2/2, softplus, e^z. Used by the GLM loss.
double mu_antideriv(const LinkSpec& link, double z);

// One reward draw from the exponential-family model at logit z:
// linear -> z + N(0, sigma^2), logistic -> Bernoulli(mu(z)),
// Poisson -> Poisson(e^z).
double sample_reward(const LinkSpec& link, double z, RngStream& rng);

}  // namespace fpbandits
