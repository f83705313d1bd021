#include "dyadic/regression.hpp"

#include <cmath>
#include <string>

#include "dyadic/errors.hpp"

namespace dyadic {

const char* to_string(Family f) {
  switch (f) {
    case Family::linear: return "linear";
    case Family::logistic: return "logistic";
  }
  return "unknown";
}

namespace {

// Solves the weighted least-squares problem through a column-pivoted QR of
// sqrt(W) X; reports the first column QR could not place in the basis.
Eigen::VectorXd solve_least_squares(const DyadDataset& data, const Eigen::VectorXd& w) {
  const Eigen::VectorXd root_w = w.cwiseSqrt();
  const Eigen::MatrixXd xs = root_w.asDiagonal() * data.x();
  const Eigen::VectorXd ys = root_w.cwiseProduct(data.y());

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(xs);
  // Pivots below 1e-10 of the largest count as zero.
  qr.setThreshold(1e-10);
  if (qr.rank() < xs.cols()) {
    const auto col = qr.colsPermutation().indices()[qr.rank()];
    throw NumericalError("design matrix is rank deficient (rank " + std::to_string(qr.rank()) +
                         " of " + std::to_string(xs.cols()) + "); column '" +
                         data.regressor_names()[static_cast<std::size_t>(col)] +
                         "' is collinear with the others");
  }
  return qr.solve(ys);
}

RegressionFit finish_linear(const DyadDataset& data, Eigen::VectorXd w) {
  RegressionFit fit;
  fit.family = Family::linear;
  fit.beta = solve_least_squares(data, w);
  fit.fitted = data.x() * fit.beta;
  fit.residuals = data.y() - fit.fitted;
  fit.bread = data.x().transpose() * w.asDiagonal() * data.x();
  fit.weights = std::move(w);
  return fit;
}

double expit(double eta) {
  return eta >= 0 ? 1.0 / (1.0 + std::exp(-eta)) : std::exp(eta) / (1.0 + std::exp(eta));
}

double log_likelihood(const Eigen::VectorXd& y, const Eigen::VectorXd& eta, const Eigen::VectorXd& w) {
  double ll = 0.0;
  for (Eigen::Index r = 0; r < y.size(); ++r) {
    // log(1 + exp(eta)) computed without overflow
    const double softplus = eta[r] > 0 ? eta[r] + std::log1p(std::exp(-eta[r])) : std::log1p(std::exp(eta[r]));
    ll += w[r] * (y[r] * eta[r] - softplus);
  }
  return ll;
}

}  // namespace

RegressionFit fit_ols(const DyadDataset& data) {
  return finish_linear(data, Eigen::VectorXd::Ones(static_cast<Eigen::Index>(data.n_rows())));
}

RegressionFit fit_wls(const DyadDataset& data) {
  return finish_linear(data, data.weights());
}

RegressionFit fit_logistic(const DyadDataset& data, const LogisticOptions& options) {
  const Eigen::VectorXd& y = data.y();
  for (Eigen::Index r = 0; r < y.size(); ++r) {
    if (y[r] != 0.0 && y[r] != 1.0) {
      throw DataError("logistic outcome must be 0 or 1; row " + std::to_string(r) + " has " +
                      std::to_string(y[r]));
    }
  }
  const Eigen::MatrixXd& x = data.x();
  const Eigen::VectorXd w = options.use_weights
                                ? data.weights()
                                : Eigen::VectorXd::Ones(static_cast<Eigen::Index>(data.n_rows()));

  {
    // Rank check up front so a singular Hessian is reported as such.
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(w.cwiseSqrt().asDiagonal() * x);
    qr.setThreshold(1e-10);
    if (qr.rank() < x.cols()) {
      const auto col = qr.colsPermutation().indices()[qr.rank()];
      throw NumericalError("design matrix is rank deficient; column '" +
                           data.regressor_names()[static_cast<std::size_t>(col)] +
                           "' is collinear with the others");
    }
  }

  Eigen::VectorXd beta = Eigen::VectorXd::Zero(x.cols());
  Eigen::VectorXd eta = x * beta;
  double ll = log_likelihood(y, eta, w);

  auto probabilities = [](const Eigen::VectorXd& lin) {
    return lin.unaryExpr([](double v) { return expit(v); }).eval();
  };

  int iter = 0;
  for (;; ++iter) {
    const Eigen::VectorXd p = probabilities(eta);
    const Eigen::VectorXd score = x.transpose() * (w.cwiseProduct(y - p));
    const Eigen::VectorXd m = w.cwiseProduct(p.cwiseProduct((1.0 - p.array()).matrix()));
    const Eigen::MatrixXd info = x.transpose() * m.asDiagonal() * x;
    const Eigen::VectorXd step = info.ldlt().solve(score);
    // A flat score with a large Newton step means the optimum is at infinity.
    if (score.lpNorm<Eigen::Infinity>() <= options.gradient_tolerance &&
        (x * step).lpNorm<Eigen::Infinity>() <= 1e-3)
      break;
    if (iter >= options.max_iterations) {
      throw NumericalError("logistic fit did not converge in " + std::to_string(options.max_iterations) +
                           " iterations (score max-norm " +
                           std::to_string(score.lpNorm<Eigen::Infinity>()) + ")");
    }

    double scale = 1.0;
    Eigen::VectorXd next = beta + step;
    Eigen::VectorXd next_eta = x * next;
    double next_ll = log_likelihood(y, next_eta, w);
    // Halve only on a decrease beyond rounding; near the optimum ll is flat to machine precision.
    const double slack = 1e-12 * (1.0 + std::abs(ll));
    for (int halvings = 0; next_ll < ll - slack && halvings < 30; ++halvings) {
      scale *= 0.5;
      next = beta + scale * step;
      next_eta = x * next;
      next_ll = log_likelihood(y, next_eta, w);
    }
    if (next_eta.lpNorm<Eigen::Infinity>() > options.linear_predictor_bound) {
      throw NumericalError("separation detected: |x'b| exceeded " +
                           std::to_string(options.linear_predictor_bound) + " at iteration " +
                           std::to_string(iter + 1));
    }
    beta = std::move(next);
    eta = std::move(next_eta);
    ll = next_ll;
  }

  RegressionFit fit;
  fit.family = Family::logistic;
  fit.beta = beta;
  fit.fitted = probabilities(eta);
  for (Eigen::Index r = 0; r < fit.fitted.size(); ++r) {
    if (!(fit.fitted[r] > 0.0 && fit.fitted[r] < 1.0)) {
      throw NumericalError("fitted probability on the boundary at row " + std::to_string(r));
    }
  }
  fit.residuals = y - fit.fitted;
  const Eigen::VectorXd m = w.cwiseProduct(fit.fitted.cwiseProduct((1.0 - fit.fitted.array()).matrix()));
  fit.bread = x.transpose() * m.asDiagonal() * x;
  fit.weights = w;
  fit.iterations = iter;
  return fit;
}

Eigen::MatrixXd score_rows(const RegressionFit& fit, const DyadDataset& data) {
  if (static_cast<std::size_t>(fit.residuals.size()) != data.n_rows() ||
      static_cast<std::size_t>(fit.beta.size()) != data.k()) {
    throw DataError("fit does not match dataset dimensions");
  }
  return fit.weights.cwiseProduct(fit.residuals).asDiagonal() * data.x();
}

}  // namespace dyadic
