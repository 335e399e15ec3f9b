#include "fpbandits/estimation.hpp"

#include <cmath>

#include "fpbandits/errors.hpp"

namespace fpbandits {

void History::append(const Eigen::Ref<const Vector>& x, double r) {
    if (x.size() != xs_.cols()) {
        throw std::invalid_argument("History::append: feature dimension mismatch");
    }
    if (n_ == xs_.rows()) {
        const Eigen::Index cap = std::max<Eigen::Index>(16, 2 * xs_.rows());
        xs_.conservativeResize(cap, Eigen::NoChange);
        rs_.conservativeResize(cap);
    }
    xs_.row(n_) = x.transpose();
    rs_(n_) = r;
    ++n_;
}

EstimatorState EstimatorState::initial(int dim, double lambda) {
    if (lambda <= 0.0) {
        throw std::invalid_argument("EstimatorState: lambda must be positive");
    }
    return EstimatorState{Vector::Zero(dim),
                          SymMatrix::identity(dim, lambda),
                          SymMatrix::identity(dim, lambda),
                          Vector::Zero(dim),
                          1,
                          lambda,
                          History(dim)};
}

namespace {

// Vectorized per-element link evaluation over the logits z: antiderivative g,
// mean mu and raw derivative w (no derivative_floor — the floor shapes the
// reported Gram matrix, not the optimization problem, whose minimizer is set
// by the gradient alone).
void link_eval(const LinkSpec& link, const Vector& z, Vector* g, Vector* m, Vector* w) {
    switch (link.kind) {
        case LinkKind::Linear:
            if (g) *g = 0.5 * z.array().square();
            if (m) *m = z;
            if (w) *w = Vector::Ones(z.size());
            return;
        case LinkKind::Logistic: {
            const Eigen::ArrayXd e = (-z.array().abs()).exp();
            const Eigen::ArrayXd denom = 1.0 + e;
            const Eigen::ArrayXd s = (z.array() >= 0.0).select(1.0 / denom, e / denom);
            if (g) *g = z.array().max(0.0) + e.log1p();
            if (m) *m = s;
            if (w) *w = s * (1.0 - s);
            return;
        }
        case LinkKind::Poisson: {
            const Eigen::ArrayXd e = z.array().exp();
            if (z.size() > 0 && !std::isfinite(e.maxCoeff())) {
                throw OverflowError("poisson link: e^z exceeds the floating-point range");
            }
            if (g) *g = e;
            if (m) *m = e;
            if (w) *w = e;
            return;
        }
    }
}

// Gradient of the unregularized loss: X^T (mu(X theta) - r).
Vector loss_gradient(const LinkSpec& link, Eigen::Ref<const Matrix> xs,
                     Eigen::Ref<const Vector> rs, const Vector& theta) {
    const Vector z = xs * theta;
    Vector m;
    link_eval(link, z, nullptr, &m, nullptr);
    return xs.transpose() * (m - rs);
}

// sum mu_dot(x^T theta) x x^T with the configured derivative_floor applied.
Matrix weighted_gram(const LinkSpec& link, Eigen::Ref<const Matrix> xs, const Vector& theta) {
    const Eigen::Index d = xs.cols();
    if (xs.rows() == 0) return Matrix::Zero(d, d);
    Vector w = xs * theta;
    for (Eigen::Index i = 0; i < w.size(); ++i) {
        w(i) = mu_dot(link, w(i));
    }
    Matrix h = xs.transpose() * w.asDiagonal() * xs;
    return 0.5 * (h + h.transpose()).eval();
}

void maybe_clip(FitResult& res, double norm_bound) {
    if (norm_bound > 0.0) {
        const double norm = res.theta.norm();
        if (norm > norm_bound) {
            res.theta *= norm_bound / norm;
            res.clipped = true;
        }
    }
}

FitResult fit_linear_ridge(Eigen::Ref<const Matrix> xs, Eigen::Ref<const Vector> rs,
                           const FitOptions& opts) {
    const Eigen::Index d = xs.cols();
    Matrix v = opts.lambda * Matrix::Identity(d, d);
    v.selfadjointView<Eigen::Lower>().rankUpdate(xs.transpose());
    const Vector b = xs.transpose() * rs;
    Eigen::LLT<Matrix> llt(Matrix(v.selfadjointView<Eigen::Lower>()));
    if (llt.info() != Eigen::Success) {
        throw NotPositiveDefinite("fit_glm: ridge system not positive definite");
    }
    FitResult res;
    res.theta = llt.solve(b);
    maybe_clip(res, opts.norm_bound);
    return res;
}

}  // namespace

double neg_log_likelihood(const LinkSpec& link, Eigen::Ref<const Matrix> xs,
                          Eigen::Ref<const Vector> rs, const Vector& theta) {
    const Vector z = xs * theta;
    Vector g;
    link_eval(link, z, &g, nullptr, nullptr);
    return g.sum() - rs.dot(z);
}

double neg_log_likelihood(const LinkSpec& link, const History& history, const Vector& theta) {
    return neg_log_likelihood(link, history.features(), history.rewards(), theta);
}

FitResult fit_glm(const LinkSpec& link, Eigen::Ref<const Matrix> xs,
                  Eigen::Ref<const Vector> rs, const FitOptions& opts,
                  const Vector& warm_start) {
    if (opts.lambda <= 0.0) {
        throw std::invalid_argument("fit_glm: lambda must be positive");
    }
    if (link.kind == LinkKind::Linear && !opts.force_newton) {
        return fit_linear_ridge(xs, rs, opts);
    }

    const Eigen::Index n = xs.rows();
    const Eigen::Index d = xs.cols();
    Vector theta = warm_start.size() == d ? warm_start : Vector::Zero(d);

    Vector z = xs * theta;
    Vector g(n), m(n), w(n);
    link_eval(link, z, &g, &m, &w);
    double loss = g.sum() - rs.dot(z) + 0.5 * opts.lambda * theta.squaredNorm();

    Matrix wx(n, d);
    Matrix hess(d, d);
    Vector z_cand(n), g_cand(n);

    FitResult res;
    res.converged = false;
    for (int iter = 0; iter < opts.max_iters; ++iter) {
        const Vector grad = xs.transpose() * (m - rs) + opts.lambda * theta;
        res.grad_norm = grad.norm();
        if (res.grad_norm <= opts.grad_tol) {
            res.converged = true;
            break;
        }
        wx = w.asDiagonal() * xs;
        hess.noalias() = xs.transpose() * wx;
        hess.diagonal().array() += opts.lambda;
        Eigen::LLT<Matrix> llt(hess);
        if (llt.info() != Eigen::Success) {
            throw NotPositiveDefinite("fit_glm: Newton system not positive definite");
        }
        const Vector step = llt.solve(grad);

        // Step halving keeps Newton from overshooting on separable data; a
        // roundoff-sized slack accepts steps at the loss noise floor.
        const double slack = 1e-10 * (1.0 + std::abs(loss));
        double scale = 1.0;
        bool accepted = false;
        double cand_loss = 0.0;
        Vector candidate;
        for (int halvings = 0; halvings <= 20; ++halvings) {
            candidate = theta - scale * step;
            z_cand.noalias() = xs * candidate;
            link_eval(link, z_cand, &g_cand, nullptr, nullptr);
            cand_loss =
                g_cand.sum() - rs.dot(z_cand) + 0.5 * opts.lambda * candidate.squaredNorm();
            if (cand_loss <= loss + slack) {
                accepted = true;
                break;
            }
            scale *= 0.5;
        }
        res.iters = iter + 1;
        if (!accepted) break;  // at the numerical floor of the loss
        theta = std::move(candidate);
        z.swap(z_cand);
        loss = cand_loss;
        link_eval(link, z, nullptr, &m, &w);
    }
    if (!res.converged) {
        // The loop checks the gradient before stepping; re-check after the
        // final step so the reported norm matches the returned iterate.
        res.grad_norm = (loss_gradient(link, xs, rs, theta) + opts.lambda * theta).norm();
        res.converged = res.grad_norm <= opts.grad_tol;
    }
    res.theta = std::move(theta);
    maybe_clip(res, opts.norm_bound);
    return res;
}

SymMatrix regularized_weighted_gram(const LinkSpec& link, Eigen::Ref<const Matrix> xs,
                                    const Vector& theta, double lambda) {
    Matrix h = weighted_gram(link, xs, theta);
    h.diagonal().array() += lambda;
    return SymMatrix(std::move(h));
}

void observe(EstimatorState& state, const Eigen::Ref<const Vector>& x, double r) {
    state.history.append(x, r);
    state.v = rank1_update(state.v, x, 1.0);
    state.b += r * x;
    state.round = 1 + static_cast<std::int64_t>(state.history.size());
}

namespace {

void apply_fit(EstimatorState& state, const LinkSpec& link, const FitResult& fit) {
    state.theta_hat = fit.theta;
    state.converged = fit.converged;
    state.final_grad_norm = fit.grad_norm;
    state.newton_iters = fit.iters;
    if (fit.clipped) ++state.clip_count;
    if (!fit.converged) ++state.nonconverged_count;

    if (link.kind == LinkKind::Linear) {
        state.h_hat = state.v;
    } else {
        state.h_hat = regularized_weighted_gram(link, state.history.features(), state.theta_hat,
                                                state.lambda);
    }
}

}  // namespace

void refit(EstimatorState& state, const LinkSpec& link, const FitOptions& opts) {
    if (link.kind == LinkKind::Linear && !opts.force_newton) {
        FitResult res;
        res.theta = solve_spd(state.v, state.b);
        maybe_clip(res, opts.norm_bound);
        apply_fit(state, link, res);
        return;
    }
    const FitResult fit =
        fit_glm(link, state.history.features(), state.history.rewards(), opts, state.theta_hat);
    apply_fit(state, link, fit);
}

EstimatorState fit_mle(const LinkSpec& link, History history, const FitOptions& opts,
                       const std::optional<Vector>& warm_start) {
    EstimatorState state = EstimatorState::initial(history.dim(), opts.lambda);
    for (Eigen::Index i = 0; i < history.size(); ++i) {
        observe(state, history.feature(i), history.reward(i));
    }
    if (warm_start) state.theta_hat = *warm_start;
    refit(state, link, opts);
    return state;
}

double beta_width(const ConfidenceParams& params, double delta) {
    if (!(delta > 0.0 && delta < 1.0)) {
        throw InvalidDelta("beta_width: delta must lie in (0, 1)");
    }
    const double d = static_cast<double>(params.dim);
    const double dim_term =
        params.loss_lipschitz > 0.0
            ? std::max(0.0, d * std::log(2.0 * std::exp(1.0) * params.loss_lipschitz / d))
            : 0.0;
    const double bracket = std::log(1.0 / delta) + dim_term;
    return std::sqrt(4.0 * params.lambda + 2.0 * (1.0 + params.m_mu) * bracket);
}

double gamma_width(const ConfidenceParams& params) {
    const double dp = params.delta_prime();
    if (!(dp > 0.0 && dp < 1.0)) {
        throw InvalidDelta("gamma_width: delta/(4T) must lie in (0, 1)");
    }
    return beta_width(params, dp) * std::sqrt(2.0 * std::log(2.0 / dp));
}

}  // namespace fpbandits
