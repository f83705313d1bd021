#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dyadic/dyad.hpp"

namespace dyadic {

enum class Distribution {
  normal,      // N(0, 1)
  uniform,     // U(-sqrt(3), sqrt(3)), unit variance
  bimodal,     // equal mixture of N(-2, 1) and N(2, 1)
  point_mass,  // always 0; for noiseless checks
};

const char* to_string(Distribution d);
Distribution parse_distribution(const std::string& name);

/// Draws from d using engine. Draw order is part of the reproducibility
/// contract: every call consumes engine state deterministically.
double draw(Distribution d, std::mt19937_64& engine);

/// Data generating process
///   y = b0 + b1 |X_i - X_j| + b2 (X_i - X_j)^2 + a_i + a_j + v_ijt
/// on a complete set of dyads among n_units units, t_per_dyad rows each.
struct SimulationConfig {
  std::size_t n_units = 50;
  std::size_t t_per_dyad = 1;
  double beta0 = 0.0;
  double beta1 = 1.0;
  double beta2 = 0.0;
  Distribution regressor_distribution = Distribution::normal;  // X_i
  Distribution error_distribution = Distribution::normal;      // a_i and v
  std::size_t replicates = 500;
  std::uint64_t seed = 20170101;
  unsigned threads = 0;               // 0 = hardware concurrency
  bool verify_decomposition = false;  // also run the direct form and compare

  void validate() const;
};

/// 64-bit seed for replicate r's private stream, derived from (seed, r).
std::uint64_t replicate_seed(std::uint64_t seed, std::uint64_t replicate);

struct SimulatedSample {
  DyadDataset data;
  Eigen::VectorXd unit_x;      // X_i per unit
  Eigen::VectorXd unit_alpha;  // a_i per unit
  Eigen::VectorXd row_noise;   // v per row
};

/// One draw from the data generating process. Regressors per row are
/// (1, |X_i - X_j|); rows are ordered by dyad (lexicographic) then t.
SimulatedSample generate_dyadic_sample(const SimulationConfig& config, std::uint64_t stream_seed);

enum class SeMethod { hc2 = 0, naive_dyad_cluster = 1, dyadic = 2 };
inline constexpr std::array<SeMethod, 3> kSeMethods = {SeMethod::hc2, SeMethod::naive_dyad_cluster,
                                                       SeMethod::dyadic};
const char* to_string(SeMethod m);

struct ReplicateResult {
  std::size_t replicate = 0;
  Eigen::Vector2d beta;
  std::array<Eigen::Vector2d, 3> se;  // indexed by SeMethod
  double decomposition_gap = 0.0;     // direct vs decomposed, when verified
};

/// Summary over the finite values; NaN SEs (negative variance diagonals
/// from an indefinite estimate) are counted in `nonfinite` and skipped.
struct DistributionSummary {
  std::size_t nonfinite = 0;
  double mean = 0.0;
  double min = 0.0;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double max = 0.0;
};

struct CoefficientSummary {
  std::string name;
  double target = 0.0;  // true coefficient, or the ensemble mean under misspecification
  double mean_estimate = 0.0;
  double empirical_sd = 0.0;
  std::array<DistributionSummary, 3> se;  // indexed by SeMethod

  /// |mean SE / empirical SD - 1| for the given method.
  double relative_error(SeMethod m) const;
};

struct SimulationReport {
  SimulationConfig config;
  bool misspecification = false;
  std::vector<ReplicateResult> replicates;  // sorted by replicate index
  std::array<CoefficientSummary, 2> summary;
  double max_decomposition_gap = 0.0;
};

/// Runs every replicate (fit OLS, compute all three SEs) and summarizes.
/// Output is a pure function of config regardless of thread count.
SimulationReport run_monte_carlo(const SimulationConfig& config);

/// Same experiment with a quadratic term in the outcome that the fitted
/// linear model omits; the reference slope is the ensemble mean estimate.
SimulationReport run_misspecification_study(const SimulationConfig& config);

DistributionSummary summarize(std::vector<double> values);

}  // namespace dyadic
