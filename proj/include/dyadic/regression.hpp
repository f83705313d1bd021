#pragma once

#include <Eigen/Dense>

#include "dyadic/dyad.hpp"

namespace dyadic {

enum class Family { linear, logistic };

const char* to_string(Family f);

/// Result of a linear or logistic fit. For linear fits `residuals` are
/// y - x'b and `fitted` is x'b; for logistic fits they are y - p and p.
/// `bread` is X'WX (linear) or X'WMX with M = diag(p(1-p)) (logistic).
struct RegressionFit {
  Family family = Family::linear;
  Eigen::VectorXd beta;
  Eigen::VectorXd residuals;
  Eigen::VectorXd fitted;
  Eigen::MatrixXd bread;
  Eigen::VectorXd weights;  // all ones for unweighted fits
  int iterations = 0;       // Newton steps (logistic only)

  bool weighted() const { return (weights.array() != 1.0).any(); }
};

/// Ordinary least squares; dataset weights are ignored.
RegressionFit fit_ols(const DyadDataset& data);

/// Weighted least squares with the dataset's per-row weights.
RegressionFit fit_wls(const DyadDataset& data);

struct LogisticOptions {
  double gradient_tolerance = 1e-8;
  int max_iterations = 100;
  double linear_predictor_bound = 30.0;
  bool use_weights = true;
};

/// Logistic regression by Newton-Raphson with step halving. Throws
/// DataError for non-binary outcomes and NumericalError on separation or
/// non-convergence.
RegressionFit fit_logistic(const DyadDataset& data, const LogisticOptions& options = {});

/// Per-row score contributions w_r * x_r * e_r, one row per observation.
Eigen::MatrixXd score_rows(const RegressionFit& fit, const DyadDataset& data);

}  // namespace dyadic
