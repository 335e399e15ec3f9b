#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>

#include "fpbandits/harness.hpp"
#include "fpbandits/verification.hpp"

namespace py = pybind11;
using namespace fpbandits;

namespace {

LinkSpec link_from_name(const std::string& name, double derivative_floor, double sigma) {
    if (name == "linear") return LinkSpec::linear(sigma);
    if (name == "logistic") return LinkSpec::logistic(derivative_floor);
    if (name == "poisson") return LinkSpec::poisson();
    throw ConfigError("unknown link: " + name);
}

py::dict report_to_dict(const OracleReport& r) {
    py::dict d;
    d["check"] = r.check;
    d["statistic"] = r.statistic;
    d["threshold"] = r.threshold;
    d["pass"] = r.pass;
    d["n_samples"] = r.n_samples;
    d["seed"] = r.seed;
    d["detail"] = r.detail;
    return d;
}

py::dict aggregate_to_dict(const AggregateResult& agg) {
    py::dict d;
    py::list policies;
    for (const PolicyAggregate& pol : agg.per_policy) {
        py::dict p;
        p["policy"] = pol.policy;
        p["mean_cum_regret"] = pol.mean_cum_regret;
        p["std_cum_regret"] = pol.std_cum_regret;
        p["final_regrets"] = pol.final_regrets;
        p["final_mean"] = pol.final_mean();
        p["final_std"] = pol.final_std();
        p["epl_max_ratio"] = pol.epl_max_ratio;
        p["kappa_star_mean"] = pol.kappa_star_mean;
        p["kappa_emp_min"] = pol.kappa_emp_min;
        p["nonconverged_total"] = pol.nonconverged_total;
        p["clip_total"] = pol.clip_total;
        policies.append(p);
    }
    d["policies"] = policies;
    d["horizon"] = agg.horizon;
    d["n_runs"] = agg.n_runs;
    d["config_hash"] = agg.config_hash;
    d["version"] = agg.version;
    d["wall_seconds"] = agg.wall_seconds;
    return d;
}

std::vector<OracleReport> run_named_check(const std::string& check, std::uint64_t seed,
                                          std::int64_t n_samples) {
    std::vector<OracleReport> out;
    if (check == "anti_concentration") {
        out.push_back(
            check_anti_concentration(PerturbationScheme::gaussian(), 8, n_samples, seed));
        out.push_back(
            check_anti_concentration(PerturbationScheme::uniform_ball(), 2, n_samples, seed));
    } else if (check == "concentration") {
        out.push_back(check_concentration(PerturbationScheme::gaussian(), 0.1, n_samples, seed));
        out.push_back(check_concentration(PerturbationScheme::gaussian(), 0.01, n_samples, seed));
    } else if (check == "epl") {
        EnvConfig env;
        env.link = LinkSpec::linear();
        env.dim = 5;
        env.num_arms = 10;
        env.horizon = 2000;
        const RegretTrace trace = uniform_logging_trace(env, 1.0, seed);
        out.push_back(check_epl(trace, 1.0, env.dim, env.horizon));
    } else if (check == "score_marginal") {
        const EstimatorState state = frozen_linear_state(5, 40, 1.0, seed);
        RngStream rng = RngStream::from_parts(seed, 0, "score-marginal-arm");
        Vector x(5);
        for (int i = 0; i < 5; ++i) x(i) = rng.next_normal();
        x /= std::max(1.0, x.norm());
        out.push_back(check_score_marginal(x, state, 1.0, n_samples, seed));
    } else if (check == "beta_coverage") {
        EnvConfig env;
        env.link = LinkSpec::linear();
        env.dim = 2;
        env.num_arms = 5;
        env.horizon = 500;
        out.push_back(check_beta_coverage(env, 200, 0.1, 1.0, seed));
    } else {
        throw ConfigError("unknown check: " + check);
    }
    return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Contextual-bandit simulation core: feature-perturbation policies, GLM "
              "estimation, randomized baselines and verification oracles";

    py::register_exception<ConfigError>(m, "ConfigError");
    py::register_exception<NotPositiveDefinite>(m, "NotPositiveDefinite");
    py::register_exception<OverflowError>(m, "LinkOverflowError");
    py::register_exception<InvalidDelta>(m, "InvalidDelta");

    py::class_<LinkSpec>(m, "LinkSpec")
        .def(py::init([](const std::string& kind, double derivative_floor, double sigma) {
                 return link_from_name(kind, derivative_floor, sigma);
             }),
             py::arg("kind"), py::arg("derivative_floor") = 0.0, py::arg("noise_sigma") = 1.0)
        .def_readonly("lipschitz", &LinkSpec::lipschitz)
        .def_readonly("self_concordance", &LinkSpec::self_concordance)
        .def_readonly("derivative_floor", &LinkSpec::derivative_floor);

    m.def("mu", &mu, py::arg("link"), py::arg("z"));
    m.def("mu_dot", &mu_dot, py::arg("link"), py::arg("z"));
    m.def("mu_antideriv", &mu_antideriv, py::arg("link"), py::arg("z"));

    m.def(
        "fit_mle",
        [](const LinkSpec& link, const Matrix& xs, const Vector& rs, double lambda,
           double norm_bound) {
            History history(static_cast<int>(xs.cols()));
            for (Eigen::Index i = 0; i < xs.rows(); ++i) {
                history.append(xs.row(i).transpose(), rs(i));
            }
            FitOptions opts;
            opts.lambda = lambda;
            opts.norm_bound = norm_bound;
            const EstimatorState state = fit_mle(link, std::move(history), opts);
            py::dict d;
            d["theta_hat"] = state.theta_hat;
            d["h_hat"] = state.h_hat.data();
            d["v"] = state.v.data();
            d["converged"] = state.converged;
            d["grad_norm"] = state.final_grad_norm;
            d["iters"] = state.newton_iters;
            return d;
        },
        py::arg("link"), py::arg("features"), py::arg("rewards"), py::arg("lambda_") = 1.0,
        py::arg("norm_bound") = 0.0,
        "Regularized GLM fit over (features, rewards); returns estimate and Gram matrices");

    m.def(
        "neg_log_likelihood",
        [](const LinkSpec& link, const Matrix& xs, const Vector& rs, const Vector& theta) {
            History history(static_cast<int>(xs.cols()));
            for (Eigen::Index i = 0; i < xs.rows(); ++i) {
                history.append(xs.row(i).transpose(), rs(i));
            }
            return neg_log_likelihood(link, history, theta);
        },
        py::arg("link"), py::arg("features"), py::arg("rewards"), py::arg("theta"));

    m.def(
        "beta_width",
        [](double delta, std::int64_t horizon, double m_mu, int dim, double lambda,
           double loss_lipschitz) {
            return beta_width(ConfidenceParams{delta, horizon, m_mu, dim, lambda, loss_lipschitz});
        },
        py::arg("delta"), py::arg("horizon"), py::arg("m_mu"), py::arg("dim"),
        py::arg("lambda_"), py::arg("loss_lipschitz"),
        "Ellipsoidal confidence radius beta_t(delta)");
    m.def(
        "gamma_width",
        [](double delta, std::int64_t horizon, double m_mu, int dim, double lambda,
           double loss_lipschitz) {
            return gamma_width(ConfidenceParams{delta, horizon, m_mu, dim, lambda, loss_lipschitz});
        },
        py::arg("delta"), py::arg("horizon"), py::arg("m_mu"), py::arg("dim"),
        py::arg("lambda_"), py::arg("loss_lipschitz"),
        "Perturbed-score concentration width gamma_t(delta)");

    m.def(
        "draw_zeta",
        [](const std::string& distribution, int dim, std::uint64_t seed, int n) {
            const PerturbationScheme scheme = distribution == "uniform_ball"
                                                  ? PerturbationScheme::uniform_ball()
                                                  : PerturbationScheme::gaussian();
            RngStream rng = RngStream::from_parts(seed, 0, "zeta");
            Matrix out(n, dim);
            for (int i = 0; i < n; ++i) out.row(i) = draw_zeta(scheme, dim, rng).transpose();
            return out;
        },
        py::arg("distribution"), py::arg("dim"), py::arg("seed") = 0, py::arg("n") = 1);

    m.def(
        "perturb_features",
        [](const Matrix& features, const Matrix& gram, const Vector& theta_hat, double c_t,
           std::uint64_t seed, bool coupled) {
            std::vector<Vector> rows;
            rows.reserve(static_cast<std::size_t>(features.rows()));
            for (Eigen::Index i = 0; i < features.rows(); ++i) {
                rows.push_back(features.row(i).transpose());
            }
            const PerturbationScheme scheme =
                PerturbationScheme::gaussian(coupled ? Coupling::Coupled : Coupling::Uncoupled);
            RngStream rng = RngStream::from_parts(seed, 0, "perturb");
            const std::vector<Vector> out =
                perturb_features(rows, SymMatrix(gram), theta_hat, c_t, scheme, rng);
            Matrix result(features.rows(), features.cols());
            for (Eigen::Index i = 0; i < features.rows(); ++i) result.row(i) = out[i].transpose();
            return result;
        },
        py::arg("features"), py::arg("gram"), py::arg("theta_hat"), py::arg("c_t"),
        py::arg("seed") = 0, py::arg("coupled") = true,
        "Feature-perturbed copies of the action set");

    m.def(
        "score_distribution_params",
        [](const Vector& x, const Matrix& gram, const Vector& theta_hat, double c_t) {
            const ScoreGaussian g = score_distribution_params(x, SymMatrix(gram), theta_hat, c_t);
            return py::make_tuple(g.mean, g.stddev);
        },
        py::arg("x"), py::arg("gram"), py::arg("theta_hat"), py::arg("c_t"));

    m.def(
        "run_experiment",
        [](const std::string& config_json) {
            AggregateResult agg;
            {
                py::gil_scoped_release release;
                agg = run_experiment(parse_config_json(config_json));
            }
            return aggregate_to_dict(agg);
        },
        py::arg("config_json"), "Run an experiment from a JSON config string");

    m.def(
        "run_preset",
        [](const std::string& name, bool desk, std::optional<std::uint64_t> seed,
           std::optional<int> runs, const std::string& out, int threads) {
            std::vector<std::pair<std::string, AggregateResult>> results;
            {
                py::gil_scoped_release release;
                for (auto& [label, cfg] : make_preset(name, desk)) {
                    if (seed) cfg.base_seed = *seed;
                    if (runs) cfg.n_runs = *runs;
                    cfg.threads = threads;
                    if (!out.empty()) cfg.output_path = out + label;
                    results.emplace_back(label, run_experiment(cfg));
                }
            }
            py::dict d;
            for (const auto& [label, agg] : results) {
                d[py::str(label.empty() ? std::string("main") : label)] = aggregate_to_dict(agg);
            }
            return d;
        },
        py::arg("name"), py::arg("desk") = true, py::arg("seed") = std::nullopt,
        py::arg("runs") = std::nullopt, py::arg("out") = "", py::arg("threads") = 0,
        "Run a built-in preset; returns per-label aggregates");

    m.def("preset_names", &preset_names);
    m.def(
        "preset_config",
        [](const std::string& name, bool desk) {
            py::dict d;
            for (const auto& [label, cfg] : make_preset(name, desk)) {
                d[py::str(label.empty() ? std::string("main") : label)] = config_to_json(cfg);
            }
            return d;
        },
        py::arg("name"), py::arg("desk") = true);

    m.def(
        "verify",
        [](const std::string& check, std::uint64_t seed, std::int64_t n_samples) {
            std::vector<OracleReport> reports;
            {
                py::gil_scoped_release release;
                reports = run_named_check(check, seed, n_samples);
            }
            py::list out;
            for (const OracleReport& r : reports) out.append(report_to_dict(r));
            return out;
        },
        py::arg("check"), py::arg("seed") = 0, py::arg("n_samples") = 100000,
        "Run a verification oracle; returns report dicts");

    m.def(
        "cli_main",
        [](const std::vector<std::string>& args) {
            std::vector<const char*> argv;
            argv.push_back("fpbandit");
            for (const std::string& a : args) argv.push_back(a.c_str());
            return cli_main(static_cast<int>(argv.size()), argv.data());
        },
        py::arg("args"), "Invoke the command-line interface in-process");

    m.attr("__version__") = kVersion;
}
