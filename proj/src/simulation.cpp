#include "dyadic/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <thread>

#include "dyadic/errors.hpp"
#include "dyadic/regression.hpp"
#include "dyadic/variance.hpp"

namespace dyadic {

const char* to_string(Distribution d) {
  switch (d) {
    case Distribution::normal: return "normal";
    case Distribution::uniform: return "uniform";
    case Distribution::bimodal: return "bimodal";
    case Distribution::point_mass: return "point_mass";
  }
  return "unknown";
}

Distribution parse_distribution(const std::string& name) {
  if (name == "normal") return Distribution::normal;
  if (name == "uniform") return Distribution::uniform;
  if (name == "bimodal") return Distribution::bimodal;
  if (name == "point_mass" || name == "point-mass") return Distribution::point_mass;
  throw DataError("unknown distribution '" + name + "' (expected normal, uniform, bimodal or point_mass)");
}

double draw(Distribution d, std::mt19937_64& engine) {
  switch (d) {
    case Distribution::normal:
      return std::normal_distribution<double>(0.0, 1.0)(engine);
    case Distribution::uniform: {
      const double half_width = std::sqrt(3.0);
      return std::uniform_real_distribution<double>(-half_width, half_width)(engine);
    }
    case Distribution::bimodal: {
      const bool upper = std::bernoulli_distribution(0.5)(engine);
      return std::normal_distribution<double>(upper ? 2.0 : -2.0, 1.0)(engine);
    }
    case Distribution::point_mass:
      return 0.0;
  }
  return 0.0;
}

const char* to_string(SeMethod m) {
  switch (m) {
    case SeMethod::hc2: return "hc2";
    case SeMethod::naive_dyad_cluster: return "naive_dyad_cluster";
    case SeMethod::dyadic: return "dyadic";
  }
  return "unknown";
}

void SimulationConfig::validate() const {
  if (n_units < 3) throw DataError("n_units must be at least 3");
  if (t_per_dyad < 1) throw DataError("t_per_dyad must be at least 1");
  if (replicates < 1) throw DataError("replicates must be at least 1");
  if (!std::isfinite(beta0) || !std::isfinite(beta1) || !std::isfinite(beta2)) {
    throw DataError("coefficients must be finite");
  }
  if (regressor_distribution == Distribution::point_mass) {
    throw DataError("regressor distribution cannot be a point mass (design would be singular)");
  }
}

std::uint64_t replicate_seed(std::uint64_t seed, std::uint64_t replicate) {
  // splitmix64 finalizer over a Weyl-sequence offset of the base seed
  std::uint64_t z = seed + (replicate + 1) * 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

SimulatedSample generate_dyadic_sample(const SimulationConfig& config, std::uint64_t stream_seed) {
  config.validate();
  std::seed_seq seq{static_cast<std::uint32_t>(stream_seed), static_cast<std::uint32_t>(stream_seed >> 32)};
  std::mt19937_64 engine(seq);

  const std::size_t n = config.n_units;
  Eigen::VectorXd ux(static_cast<Eigen::Index>(n));
  Eigen::VectorXd ua(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) ux[static_cast<Eigen::Index>(i)] = draw(config.regressor_distribution, engine);
  for (std::size_t i = 0; i < n; ++i) ua[static_cast<Eigen::Index>(i)] = draw(config.error_distribution, engine);

  const std::size_t rows = dyad_count(n) * config.t_per_dyad;
  std::vector<Observation> obs;
  obs.reserve(rows);
  Eigen::MatrixXd x(static_cast<Eigen::Index>(rows), 2);
  Eigen::VectorXd noise(static_cast<Eigen::Index>(rows));
  Eigen::Index r = 0;
  for (UnitId i = 0; i + 1 < n; ++i) {
    for (UnitId j = i + 1; j < n; ++j) {
      const double diff = ux[i] - ux[j];
      const double mean = config.beta0 + config.beta1 * std::abs(diff) + config.beta2 * diff * diff;
      for (std::size_t t = 0; t < config.t_per_dyad; ++t, ++r) {
        const double nu = draw(config.error_distribution, engine);
        noise[r] = nu;
        obs.push_back({DyadKey{i, j}, static_cast<std::int64_t>(t), mean + ua[i] + ua[j] + nu, 1.0});
        x(r, 0) = 1.0;
        x(r, 1) = std::abs(diff);
      }
    }
  }
  return {DyadDataset(n, std::move(obs), std::move(x), {"(Intercept)", "absdiff"}), std::move(ux),
          std::move(ua), std::move(noise)};
}

namespace {

ReplicateResult run_replicate(const SimulationConfig& config, std::size_t index) {
  const SimulatedSample sample = generate_dyadic_sample(config, replicate_seed(config.seed, index));
  const DyadDataset& data = sample.data;
  const RegressionFit fit = fit_ols(data);

  ReplicateResult out;
  out.replicate = index;
  out.beta = fit.beta;
  const auto groups = dyad_grouping(data);
  out.se[static_cast<int>(SeMethod::hc2)] = vcov_hc2(fit, data).se;
  out.se[static_cast<int>(SeMethod::naive_dyad_cluster)] = vcov_cluster(fit, data, groups, "dyad").se;
  const VcovEstimate dyadic = vcov_dyadic_decomposed(fit, data);
  out.se[static_cast<int>(SeMethod::dyadic)] = dyadic.se;
  if (config.verify_decomposition) {
    const VcovEstimate direct = vcov_dyadic_direct(fit, data);
    out.decomposition_gap = (direct.matrix - dyadic.matrix).norm() / direct.matrix.norm();
  }
  return out;
}

template <typename E>
[[noreturn]] void rethrow_with_index(const E& e, std::size_t index) {
  throw E("replicate " + std::to_string(index) + ": " + e.what());
}

std::vector<ReplicateResult> run_all(const SimulationConfig& config) {
  std::vector<ReplicateResult> results(config.replicates);
  std::vector<std::exception_ptr> errors(config.replicates);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t r = next++; r < config.replicates; r = next++) {
      try {
        results[r] = run_replicate(config, r);
      } catch (...) {
        errors[r] = std::current_exception();
      }
    }
  };
  unsigned threads = config.threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : config.threads;
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, config.replicates));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  // A failed replicate aborts the run; report the lowest failing index.
  for (std::size_t r = 0; r < errors.size(); ++r) {
    if (!errors[r]) continue;
    try {
      std::rethrow_exception(errors[r]);
    } catch (const NumericalError& e) {
      rethrow_with_index(e, r);
    } catch (const DataError& e) {
      rethrow_with_index(e, r);
    }
  }
  return results;
}

SimulationReport summarize_run(const SimulationConfig& config, std::vector<ReplicateResult> results,
                               bool misspecified) {
  SimulationReport report;
  report.config = config;
  report.misspecification = misspecified;
  report.replicates = std::move(results);
  const double n = static_cast<double>(report.replicates.size());
  const std::array<double, 2> truth = {config.beta0, config.beta1};
  const std::array<const char*, 2> names = {"(Intercept)", "absdiff"};

  for (int c = 0; c < 2; ++c) {
    CoefficientSummary& s = report.summary[c];
    s.name = names[c];
    double mean = 0.0;
    for (const auto& rep : report.replicates) mean += rep.beta[c];
    mean /= n;
    double ss = 0.0;
    for (const auto& rep : report.replicates) ss += (rep.beta[c] - mean) * (rep.beta[c] - mean);
    s.mean_estimate = mean;
    s.empirical_sd = report.replicates.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
    s.target = misspecified ? mean : truth[c];
    for (SeMethod m : kSeMethods) {
      std::vector<double> values;
      values.reserve(report.replicates.size());
      for (const auto& rep : report.replicates) values.push_back(rep.se[static_cast<int>(m)][c]);
      s.se[static_cast<int>(m)] = summarize(std::move(values));
    }
  }
  for (const auto& rep : report.replicates) {
    report.max_decomposition_gap = std::max(report.max_decomposition_gap, rep.decomposition_gap);
  }
  return report;
}

}  // namespace

double CoefficientSummary::relative_error(SeMethod m) const {
  return std::abs(se[static_cast<int>(m)].mean / empirical_sd - 1.0);
}

DistributionSummary summarize(std::vector<double> values) {
  DistributionSummary s;
  const auto finite_end = std::partition(values.begin(), values.end(), [](double v) { return std::isfinite(v); });
  s.nonfinite = static_cast<std::size_t>(values.end() - finite_end);
  values.erase(finite_end, values.end());
  if (values.empty()) {
    s.mean = s.min = s.q1 = s.median = s.q3 = s.max = std::numeric_limits<double>::quiet_NaN();
    return s;
  }
  std::sort(values.begin(), values.end());
  // Linear interpolation between order statistics (R's default quantile type).
  auto quantile = [&](double p) {
    const double h = p * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
  };
  double total = 0.0;
  for (double v : values) total += v;
  s.mean = total / static_cast<double>(values.size());
  s.min = values.front();
  s.q1 = quantile(0.25);
  s.median = quantile(0.5);
  s.q3 = quantile(0.75);
  s.max = values.back();
  return s;
}

SimulationReport run_monte_carlo(const SimulationConfig& config) {
  config.validate();
  return summarize_run(config, run_all(config), false);
}

SimulationReport run_misspecification_study(const SimulationConfig& config) {
  if (config.beta2 == 0.0) return run_monte_carlo(config);
  config.validate();
  return summarize_run(config, run_all(config), true);
}

}  // namespace dyadic
