#pragma once

#include <cstdint>
#include <optional>

#include "fpbandits/linalg.hpp"
#include "fpbandits/links.hpp"

namespace fpbandits {

// Append-only observation log (x_tau, r_tau), stored as a capacity-doubling
// row matrix so the fitter can use matrix kernels over the whole history.
class History {
public:
    explicit History(int dim) : xs_(0, dim), rs_(0) {}

    void append(const Eigen::Ref<const Vector>& x, double r);
    Eigen::Index size() const { return n_; }
    int dim() const { return static_cast<int>(xs_.cols()); }
    Eigen::Ref<const Matrix> features() const { return xs_.topRows(n_); }
    Eigen::Ref<const Vector> rewards() const { return rs_.head(n_); }
    Vector feature(Eigen::Index i) const { return xs_.row(i).transpose(); }
    double reward(Eigen::Index i) const { return rs_(i); }

private:
    Matrix xs_;
    Vector rs_;
    Eigen::Index n_ = 0;
};

// Estimator for round t: point estimate theta_hat, the curvature-weighted
// Gram H_hat = lambda*I + sum mu_dot(x^T theta_hat) x x^T, the vanilla Gram
// V = lambda*I + sum x x^T, and b = sum x r. V and b are maintained by
// rank-1 updates in observe(); theta_hat and H_hat are produced by refit().
// For the linear link H_hat is a copy of V, so the two coincide exactly.
struct EstimatorState {
    Vector theta_hat;
    SymMatrix h_hat;
    SymMatrix v;
    Vector b;
    std::int64_t round = 1;  // t = 1 + history size
    double lambda = 1.0;
    History history;

    // Fit diagnostics.
    bool converged = true;
    double final_grad_norm = 0.0;
    int newton_iters = 0;
    int clip_count = 0;          // cumulative norm clips
    int nonconverged_count = 0;  // fits that exhausted max_iters

    static EstimatorState initial(int dim, double lambda);
};

struct FitOptions {
    double lambda = 1.0;
    double norm_bound = 0.0;  // rescale theta_hat to this norm if exceeded; 0 = off
    int max_iters = 100;
    double grad_tol = 1e-8;
    bool force_newton = false;  // run the Newton path even for the linear link
};

struct FitResult {
    Vector theta;
    bool converged = true;
    double grad_norm = 0.0;
    int iters = 0;
    bool clipped = false;
};

// Sum over history of g(x^T theta) - r * x^T theta (no regularization term).
double neg_log_likelihood(const LinkSpec& link, const History& history, const Vector& theta);
double neg_log_likelihood(const LinkSpec& link, Eigen::Ref<const Matrix> xs,
                          Eigen::Ref<const Vector> rs, const Vector& theta);

// Minimizes the lambda-regularized GLM loss by damped Newton (IRLS): the
// linear link solves the ridge system directly, other links iterate
// theta <- theta - (H + lambda I)^{-1} (grad + lambda theta) with step
// halving whenever the regularized loss fails to decrease. A fit that hits
// max_iters reports converged = false and keeps the last iterate.
FitResult fit_glm(const LinkSpec& link, Eigen::Ref<const Matrix> xs,
                  Eigen::Ref<const Vector> rs, const FitOptions& opts,
                  const Vector& warm_start);

// Appends one observation and applies the rank-1 updates
// V += x x^T, b += r x; does not refit.
void observe(EstimatorState& state, const Eigen::Ref<const Vector>& x, double r);

// Recomputes theta_hat and H_hat from the state's history (warm-started from
// the previous theta_hat). Linear link: theta_hat = V^{-1} b, H_hat = V.
void refit(EstimatorState& state, const LinkSpec& link, const FitOptions& opts);

// One-shot fit over a full history; builds V and b from scratch.
EstimatorState fit_mle(const LinkSpec& link, History history, const FitOptions& opts,
                       const std::optional<Vector>& warm_start = std::nullopt);

// lambda*I + sum mu_dot(x^T theta) x x^T over the rows of xs.
SymMatrix regularized_weighted_gram(const LinkSpec& link, Eigen::Ref<const Matrix> xs,
                                    const Vector& theta, double lambda);

// Inputs of the confidence-width formulas. delta_prime = delta / (4T).
struct ConfidenceParams {
    double delta = 0.1;
    std::int64_t horizon = 1;  // T
    double m_mu = 0.0;
    int dim = 1;
    double lambda = 1.0;
    double loss_lipschitz = 1.0;  // L_t, the O(t) envelope maintained by the caller

    double delta_prime() const { return delta / (4.0 * static_cast<double>(horizon)); }
};

// Ellipsoidal confidence radius
//   beta_t(delta) = sqrt(4*lambda + 2*(1+M_mu)*(log(1/delta) + d*log(2e*L_t/d))).
// The dimension-log term is floored at zero so the radius stays defined while
// L_t < d/(2e) (first rounds with little data).
double beta_width(const ConfidenceParams& params, double delta);
inline double beta_width(const ConfidenceParams& params) { return beta_width(params, params.delta); }

// Perturbed-score concentration width gamma_t(delta) = beta_t(delta') *
// sqrt(2 log(2/delta')) for the Gaussian scheme (c = c' = 2).
double gamma_width(const ConfidenceParams& params);

}  // namespace fpbandits
