#include "fpbandits/verification.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

namespace fpbandits {

namespace {

Vector random_unit(int dim, RngStream& rng) {
    Vector u(dim);
    double norm = 0.0;
    do {
        for (int i = 0; i < dim; ++i) u(i) = rng.next_normal();
        norm = u.norm();
    } while (norm == 0.0);
    return u / norm;
}

double binomial_3sigma(double p_hat, std::int64_t n) {
    return 3.0 * std::sqrt(std::max(p_hat * (1.0 - p_hat), 1e-12) / static_cast<double>(n));
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

}  // namespace

OracleReport check_anti_concentration(const PerturbationScheme& scheme, int dim,
                                      std::int64_t n_samples, std::uint64_t seed) {
    RngStream rng = RngStream::from_parts(seed, 0, "anti-concentration");
    const Vector u = random_unit(dim, rng);
    std::int64_t hits = 0;
    for (std::int64_t i = 0; i < n_samples; ++i) {
        if (u.dot(draw_zeta(scheme, dim, rng)) >= 1.0) ++hits;
    }
    const double estimate = static_cast<double>(hits) / static_cast<double>(n_samples);
    const double bound = scheme.anti_conc_p;
    OracleReport report;
    report.check = "anti_concentration";
    report.statistic = estimate;
    report.threshold = bound - binomial_3sigma(estimate, n_samples);
    report.pass = estimate >= report.threshold;
    report.n_samples = n_samples;
    report.seed = seed;
    report.detail = "P(u^T zeta >= 1) vs distribution constant";
    return report;
}

OracleReport check_concentration(const PerturbationScheme& scheme, double delta,
                                 std::int64_t n_samples, std::uint64_t seed) {
    if (!(delta > 0.0 && delta < 1.0)) {
        throw InvalidDelta("check_concentration: delta must lie in (0, 1)");
    }
    RngStream rng = RngStream::from_parts(seed, 0, "concentration");
    const int dim = 8;  // any fixed dimension; the projection is 1-d
    const Vector u = random_unit(dim, rng);
    const double radius = std::sqrt(scheme.c_const * std::log(scheme.c_prime_const / delta));
    std::int64_t hits = 0;
    for (std::int64_t i = 0; i < n_samples; ++i) {
        if (std::abs(u.dot(draw_zeta(scheme, dim, rng))) <= radius) ++hits;
    }
    const double coverage = static_cast<double>(hits) / static_cast<double>(n_samples);
    OracleReport report;
    report.check = "concentration";
    report.statistic = coverage;
    report.threshold = 1.0 - delta - binomial_3sigma(coverage, n_samples);
    report.pass = coverage >= report.threshold;
    report.n_samples = n_samples;
    report.seed = seed;
    char buf[64];
    std::snprintf(buf, sizeof(buf), "delta=%g radius=%.6f", delta, radius);
    report.detail = buf;
    return report;
}

OracleReport check_epl(const RegretTrace& trace, double lambda, int dim, std::int64_t horizon) {
    double total = 0.0;
    for (const TraceRow& row : trace.rows) {
        total += std::min(1.0, row.v_width_sq);
    }
    const double d = static_cast<double>(dim);
    const double bound =
        2.0 * d * std::log(1.0 + static_cast<double>(horizon) / (d * lambda));
    OracleReport report;
    report.check = "epl";
    report.statistic = total;
    report.threshold = bound;
    report.pass = total <= bound;
    report.n_samples = static_cast<std::int64_t>(trace.rows.size());
    report.seed = 0;
    report.detail = "sum min{1, ||x_t||^2_{V_t^-1}} vs 2d log(1 + T/(d lambda))";
    return report;
}

double ks_distance_normal(std::vector<double> samples, double mean, double stddev) {
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());
    double dist = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double cdf = normal_cdf((samples[i] - mean) / stddev);
        const double hi = (static_cast<double>(i) + 1.0) / n - cdf;
        const double lo = cdf - static_cast<double>(i) / n;
        dist = std::max(dist, std::max(hi, lo));
    }
    return dist;
}

OracleReport check_score_marginal(const Vector& x, const EstimatorState& state, double c_t,
                                  std::int64_t n_samples, std::uint64_t seed) {
    RngStream rng = RngStream::from_parts(seed, 0, "score-marginal");
    const int dim = static_cast<int>(x.size());
    const ScoreGaussian marginal = score_distribution_params(x, state.v, state.theta_hat, c_t);
    const PerturbationScheme scheme = PerturbationScheme::gaussian();

    OracleReport report;
    report.check = "score_marginal";
    report.n_samples = n_samples;
    report.seed = seed;

    if (c_t == 0.0) {
        // Degenerate at the mean: require exact equality instead of a KS fit.
        const std::vector<Vector> perturbed =
            perturb_features(std::span<const Vector>(&x, 1), state.v, state.theta_hat, 0.0,
                             scheme, rng);
        const double score = perturbed[0].dot(state.theta_hat);
        report.statistic = std::abs(score - marginal.mean);
        report.threshold = 0.0;
        report.pass = score == marginal.mean;
        report.detail = "degenerate c_t=0: exact equality";
        return report;
    }

    const double theta_norm = std::max(state.theta_hat.norm(), kThetaNormFloor);
    const SpdSolver solver(state.v);
    const double fp_scale = c_t * solver.inv_norm(x) / theta_norm;
    const SymMatrix root = inv_sqrt(state.v);

    std::vector<double> fp_scores(static_cast<std::size_t>(n_samples));
    std::vector<double> ts_scores(static_cast<std::size_t>(n_samples));
    for (std::int64_t i = 0; i < n_samples; ++i) {
        const Vector zeta_fp = draw_zeta(scheme, dim, rng);
        fp_scores[i] = (x + fp_scale * zeta_fp).dot(state.theta_hat);
        const Vector zeta_ts = draw_zeta(scheme, dim, rng);
        const Vector theta_tilde = state.theta_hat + c_t * (root.data() * zeta_ts);
        ts_scores[i] = x.dot(theta_tilde);
    }
    const double ks_fp = ks_distance_normal(std::move(fp_scores), marginal.mean, marginal.stddev);
    const double ks_ts = ks_distance_normal(std::move(ts_scores), marginal.mean, marginal.stddev);

    report.statistic = std::max(ks_fp, ks_ts);
    report.threshold = 0.01;
    report.pass = report.statistic < report.threshold;
    char buf[96];
    std::snprintf(buf, sizeof(buf), "KS(feature)=%.5f KS(parameter)=%.5f", ks_fp, ks_ts);
    report.detail = buf;
    return report;
}

OracleReport check_beta_coverage(const EnvConfig& cfg, int n_runs, double delta, double lambda,
                                 std::uint64_t seed) {
    int exceed = 0;
    const double r_max = cfg.link.kind == LinkKind::Linear ? cfg.theta_norm : 1.0;
    for (int run = 0; run < n_runs; ++run) {
        RngStream instance = RngStream::from_parts(seed, run, "instance");
        RngStream rewards = RngStream::from_parts(seed, run, "reward-noise");
        RngStream logging = RngStream::from_parts(seed, run, "logging");
        Environment env(cfg, instance);

        EstimatorState state = EstimatorState::initial(cfg.dim, lambda);
        double loss_lipschitz = 0.0;
        for (std::int64_t t = 1; t <= cfg.horizon; ++t) {
            const ActionSet& actions = env.actions(t);
            const int chosen = logging.next_index(actions.num_arms());
            const double reward = env.step(actions, chosen, rewards);
            observe(state, actions.features[chosen], reward);
            loss_lipschitz += (std::abs(reward) + r_max) * actions.features[chosen].norm();
        }
        FitOptions opts;
        opts.lambda = lambda;
        refit(state, cfg.link, opts);

        const ConfidenceParams params{delta,  cfg.horizon, cfg.link.self_concordance,
                                      cfg.dim, lambda,      loss_lipschitz};
        const double radius = beta_width(params);
        const Vector diff = state.theta_hat - env.theta_star();
        const double weighted = std::sqrt(diff.dot(state.h_hat.data() * diff));
        if (weighted > radius) ++exceed;
    }
    const double fraction = static_cast<double>(exceed) / static_cast<double>(n_runs);
    OracleReport report;
    report.check = "beta_coverage";
    report.statistic = fraction;
    report.threshold = delta;
    report.pass = fraction <= delta;
    report.n_samples = n_runs;
    report.seed = seed;
    report.detail = "fraction of runs with ||theta_hat - theta*||_{H_hat} > beta_T";
    return report;
}

RegretTrace uniform_logging_trace(const EnvConfig& cfg, double lambda, std::uint64_t seed) {
    RngStream instance = RngStream::from_parts(seed, 0, "instance");
    RngStream rewards = RngStream::from_parts(seed, 0, "reward-noise");
    RngStream logging = RngStream::from_parts(seed, 0, "logging");
    Environment env(cfg, instance);
    EstimatorState state = EstimatorState::initial(cfg.dim, lambda);
    LinkSpec bare_link = cfg.link;
    bare_link.derivative_floor = 0.0;

    RegretTrace trace;
    trace.rows.reserve(static_cast<std::size_t>(cfg.horizon));
    double cum = 0.0;
    double kappa_star_sum = 0.0;
    for (std::int64_t t = 1; t <= cfg.horizon; ++t) {
        const ActionSet& actions = env.actions(t);
        const int chosen = logging.next_index(actions.num_arms());
        const Vector& x = actions.features[chosen];
        const double v_width_sq = SpdSolver(state.v).inv_quad(x);
        const double inst_regret = env.regret_of(actions, chosen);
        const int star = env.optimal_arm(actions);
        kappa_star_sum += mu_dot(bare_link, actions.features[star].dot(env.theta_star()));
        cum += inst_regret;

        const double reward = env.step(actions, chosen, rewards);
        observe(state, x, reward);
        trace.rows.push_back(TraceRow{t, chosen, inst_regret, cum, std::sqrt(v_width_sq),
                                      v_width_sq, kappa_star_sum / static_cast<double>(t)});
    }
    return trace;
}

EstimatorState frozen_linear_state(int dim, int n_obs, double lambda, std::uint64_t seed) {
    RngStream rng = RngStream::from_parts(seed, 0, "frozen-state");
    const LinkSpec link = LinkSpec::linear();
    const Vector theta = random_unit(dim, rng);
    History history(dim);
    for (int i = 0; i < n_obs; ++i) {
        Vector x(dim);
        for (int k = 0; k < dim; ++k) x(k) = rng.next_normal();
        const double norm = x.norm();
        if (norm > 1.0) x /= norm;
        history.append(x, x.dot(theta) + rng.next_normal());
    }
    FitOptions opts;
    opts.lambda = lambda;
    return fit_mle(link, std::move(history), opts);
}

std::string oracle_csv_header() {
    return "check,statistic,threshold,pass,n_samples,seed,detail";
}

std::string oracle_csv_row(const OracleReport& r) {
    char buf[256];
    std::snprintf(buf, sizeof(buf), "%s,%.17g,%.17g,%d,%lld,%llu,%s", r.check.c_str(),
                  r.statistic, r.threshold, r.pass ? 1 : 0,
                  static_cast<long long>(r.n_samples),
                  static_cast<unsigned long long>(r.seed), r.detail.c_str());
    return buf;
}

}  // namespace fpbandits
