#pragma once

#include <span>
#include <vector>

#include "fpbandits/estimation.hpp"
#include "fpbandits/linalg.hpp"
#include "fpbandits/rng.hpp"

namespace fpbandits {

enum class PerturbDistribution { GaussianStd, UniformBall };
enum class Coupling { Coupled, Uncoupled };

// Anti-concentration constants P(u^T zeta >= 1) of the two distributions:
// 1/(4 sqrt(e pi)) for the standard Gaussian, 1/(16 sqrt(3 pi)) for the
// uniform ball of radius sqrt(d).
double gaussian_anti_concentration();
double uniform_ball_anti_concentration();

// A perturbing distribution together with its concentration constants
// (c, c') and anti-concentration probability p. Coupled sampling draws one
// shared zeta per round; Uncoupled draws an independent zeta per arm (kept
// for ablation only — it reintroduces an arm-count term).
struct PerturbationScheme {
    PerturbDistribution distribution = PerturbDistribution::GaussianStd;
    Coupling coupling = Coupling::Coupled;
    double c_const = 2.0;
    double c_prime_const = 2.0;
    double anti_conc_p = 0.0;

    static PerturbationScheme gaussian(Coupling coupling = Coupling::Coupled);
    static PerturbationScheme uniform_ball(Coupling coupling = Coupling::Coupled);
};

// theta_hat norms below this floor are clamped before dividing (the norm is
// zero before any data arrives).
inline constexpr double kThetaNormFloor = 1e-6;

// One perturbation draw: d i.i.d. standard normals, or a uniform point in
// the ball of radius sqrt(d) (Gaussian direction times r with density
// proportional to r^{d-1}; exact, rejection-free).
Vector draw_zeta(const PerturbationScheme& scheme, int dim, RngStream& rng);

// Perturbed copies x~_i = x_i + c_t * (||x_i||_{G^{-1}} / max(||theta||, floor)) * zeta.
// gram is the weighted Gram H_hat (or the vanilla V for the linear variant).
std::vector<Vector> perturb_features(std::span<const Vector> features, const SymMatrix& gram,
                                     const Vector& theta_hat, double c_t,
                                     const PerturbationScheme& scheme, RngStream& rng);

// Closed-form marginal of the randomized score of one arm:
// N(x^T theta_hat, (c_t ||x||_{G^{-1}})^2).
struct ScoreGaussian {
    double mean = 0.0;
    double stddev = 0.0;
};
ScoreGaussian score_distribution_params(const Vector& x, const SymMatrix& gram,
                                        const Vector& theta_hat, double c_t);

}  // namespace fpbandits
