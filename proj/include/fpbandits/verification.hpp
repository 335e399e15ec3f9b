#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fpbandits/environments.hpp"
#include "fpbandits/estimation.hpp"
#include "fpbandits/perturbation.hpp"

namespace fpbandits {

// Result of one independent oracle check. Deterministic given (seed, n);
// both are embedded for replay. These checks use only the perturbation,
// estimation and linear-algebra layers, never the policies.
struct OracleReport {
    std::string check;
    double statistic = 0.0;
    double threshold = 0.0;
    bool pass = false;
    std::int64_t n_samples = 0;
    std::uint64_t seed = 0;
    std::string detail;
};

// Estimates P(u^T zeta >= 1) for a random unit direction u and compares it
// against the distribution's anti-concentration constant minus a 3-sigma
// binomial error bar.
OracleReport check_anti_concentration(const PerturbationScheme& scheme, int dim,
                                      std::int64_t n_samples, std::uint64_t seed);

// Estimates P(|u^T zeta| <= sqrt(c log(c'/delta))) and requires coverage of
// at least 1 - delta - 3 * MC error.
OracleReport check_concentration(const PerturbationScheme& scheme, double delta,
                                 std::int64_t n_samples, std::uint64_t seed);

// Elliptical-potential diagnostic: sum_t min{1, ||x_t||^2_{V_t^{-1}}} must
// not exceed 2 d log(1 + T/(d lambda)). Exact inequality, no tolerance.
OracleReport check_epl(const RegretTrace& trace, double lambda, int dim, std::int64_t horizon);

// Kolmogorov-Smirnov comparison of replayed randomized scores for one frozen
// state against the closed-form Gaussian marginal; both the feature-space
// and the parameter-space samplers must match it.
OracleReport check_score_marginal(const Vector& x, const EstimatorState& state, double c_t,
                                  std::int64_t n_samples, std::uint64_t seed);

// Coverage experiment for the confidence radius: n_runs histories under a
// uniform logging policy, counting how often ||theta_hat_T - theta*||_{H_T}
// exceeds beta_T(delta). The exceed fraction must stay below delta.
OracleReport check_beta_coverage(const EnvConfig& cfg, int n_runs, double delta, double lambda,
                                 std::uint64_t seed);

// KS distance between a sample and N(mean, stddev^2). Exposed for tests.
double ks_distance_normal(std::vector<double> samples, double mean, double stddev);

// Uniform-logging walk of an environment recording per-round vanilla-Gram
// widths; supplies traces for the elliptical-potential check without
// involving any policy.
RegretTrace uniform_logging_trace(const EnvConfig& cfg, double lambda, std::uint64_t seed);

// Deterministic nontrivial linear estimator state for score-marginal replay.
EstimatorState frozen_linear_state(int dim, int n_obs, double lambda, std::uint64_t seed);

std::string oracle_csv_header();
std::string oracle_csv_row(const OracleReport& report);

}  // namespace fpbandits
