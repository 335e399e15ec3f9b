#include "fpbandits/perturbation.hpp"

#include <cmath>
#include <numbers>

namespace fpbandits {

double gaussian_anti_concentration() {
    return 1.0 / (4.0 * std::sqrt(std::numbers::e * std::numbers::pi));
}

double uniform_ball_anti_concentration() {
    return 1.0 / (16.0 * std::sqrt(3.0 * std::numbers::pi));
}

PerturbationScheme PerturbationScheme::gaussian(Coupling coupling) {
    return PerturbationScheme{PerturbDistribution::GaussianStd, coupling, 2.0, 2.0,
                              gaussian_anti_concentration()};
}

PerturbationScheme PerturbationScheme::uniform_ball(Coupling coupling) {
    return PerturbationScheme{PerturbDistribution::UniformBall, coupling, 2.0, 2.0,
                              uniform_ball_anti_concentration()};
}

Vector draw_zeta(const PerturbationScheme& scheme, int dim, RngStream& rng) {
    Vector z(dim);
    for (int i = 0; i < dim; ++i) z(i) = rng.next_normal();
    if (scheme.distribution == PerturbDistribution::GaussianStd) {
        return z;
    }
    // Uniform on B_d(0, sqrt(d)): direction from the Gaussian, radius with
    // density proportional to r^{d-1}.
    double norm = z.norm();
    while (norm == 0.0) {
        for (int i = 0; i < dim; ++i) z(i) = rng.next_normal();
        norm = z.norm();
    }
    const double u = rng.next_double();
    const double radius = std::sqrt(static_cast<double>(dim)) *
                          std::pow(u, 1.0 / static_cast<double>(dim));
    return (radius / norm) * z;
}

std::vector<Vector> perturb_features(std::span<const Vector> features, const SymMatrix& gram,
                                     const Vector& theta_hat, double c_t,
                                     const PerturbationScheme& scheme, RngStream& rng) {
    const int dim = gram.dim();
    const double theta_norm = std::max(theta_hat.norm(), kThetaNormFloor);
    const SpdSolver solver(gram);

    std::vector<Vector> out;
    out.reserve(features.size());
    if (scheme.coupling == Coupling::Coupled) {
        const Vector zeta = draw_zeta(scheme, dim, rng);
        for (const Vector& x : features) {
            const double scale = c_t * solver.inv_norm(x) / theta_norm;
            out.push_back(x + scale * zeta);
        }
    } else {
        for (const Vector& x : features) {
            const Vector zeta = draw_zeta(scheme, dim, rng);
            const double scale = c_t * solver.inv_norm(x) / theta_norm;
            out.push_back(x + scale * zeta);
        }
    }
    return out;
}

ScoreGaussian score_distribution_params(const Vector& x, const SymMatrix& gram,
                                        const Vector& theta_hat, double c_t) {
    const SpdSolver solver(gram);
    return ScoreGaussian{theta_hat.dot(x), c_t * solver.inv_norm(x)};
}

}  // namespace fpbandits
