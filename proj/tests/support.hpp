// Test-only helpers: random dyadic datasets and brute-force oracles.
//
// The oracles deliberately avoid the library's machinery: they work on
// plain nested vectors, solve linear systems by Gauss-Jordan elimination
// and test dyad adjacency by comparing unit ids inline.
#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "dyadic/dyad.hpp"
#include "dyadic/regression.hpp"

namespace testing {

using Matrix = std::vector<std::vector<double>>;

inline Matrix zeros(std::size_t r, std::size_t c) { return Matrix(r, std::vector<double>(c, 0.0)); }

inline Matrix to_nested(const Eigen::MatrixXd& m) {
  Matrix out = zeros(static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols()));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) out[i][j] = m(i, j);
  return out;
}

inline Eigen::MatrixXd to_eigen(const Matrix& m) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(m.size()), static_cast<Eigen::Index>(m.empty() ? 0 : m[0].size()));
  for (std::size_t i = 0; i < m.size(); ++i)
    for (std::size_t j = 0; j < m[i].size(); ++j) out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = m[i][j];
  return out;
}

/// Gauss-Jordan inverse with partial pivoting.
inline Matrix invert(Matrix a) {
  const std::size_t n = a.size();
  Matrix inv = zeros(n, n);
  for (std::size_t i = 0; i < n; ++i) inv[i][i] = 1.0;
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
    std::swap(a[col], a[pivot]);
    std::swap(inv[col], inv[pivot]);
    const double p = a[col][col];
    for (std::size_t c = 0; c < n; ++c) {
      a[col][c] /= p;
      inv[col][c] /= p;
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col) continue;
      const double f = a[r][col];
      for (std::size_t c = 0; c < n; ++c) {
        a[r][c] -= f * a[col][c];
        inv[r][c] -= f * inv[col][c];
      }
    }
  }
  return inv;
}

inline Matrix multiply(const Matrix& a, const Matrix& b) {
  Matrix out = zeros(a.size(), b[0].size());
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t k = 0; k < b.size(); ++k)
      for (std::size_t j = 0; j < b[0].size(); ++j) out[i][j] += a[i][k] * b[k][j];
  return out;
}

/// X'WX built from explicit loops.
inline Matrix cross_product(const Eigen::MatrixXd& x, const std::vector<double>& w) {
  const std::size_t k = static_cast<std::size_t>(x.cols());
  Matrix out = zeros(k, k);
  for (Eigen::Index r = 0; r < x.rows(); ++r)
    for (std::size_t a = 0; a < k; ++a)
      for (std::size_t b = 0; b < k; ++b) out[a][b] += w[static_cast<std::size_t>(r)] * x(r, static_cast<Eigen::Index>(a)) * x(r, static_cast<Eigen::Index>(b));
  return out;
}

/// Least squares through the normal equations and Gauss-Jordan.
inline std::vector<double> normal_equation_solve(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                                 const std::vector<double>& w) {
  const std::size_t k = static_cast<std::size_t>(x.cols());
  const Matrix inv = invert(cross_product(x, w));
  std::vector<double> xty(k, 0.0);
  for (Eigen::Index r = 0; r < x.rows(); ++r)
    for (std::size_t a = 0; a < k; ++a) xty[a] += w[static_cast<std::size_t>(r)] * x(r, static_cast<Eigen::Index>(a)) * y[r];
  std::vector<double> beta(k, 0.0);
  for (std::size_t a = 0; a < k; ++a)
    for (std::size_t b = 0; b < k; ++b) beta[a] += inv[a][b] * xty[b];
  return beta;
}

/// Brute-force sandwich: sum over every ordered row pair (r, s) with
/// include(r, s) of s_r s_s', between explicit inverse breads.
template <typename Include>
Eigen::MatrixXd pairwise_sandwich(const Eigen::MatrixXd& x, const std::vector<double>& score_weight,
                                  const Matrix& bread, Include include) {
  const std::size_t n = static_cast<std::size_t>(x.rows());
  const std::size_t k = static_cast<std::size_t>(x.cols());
  Matrix meat = zeros(k, k);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t s = 0; s < n; ++s) {
      if (!include(r, s)) continue;
      for (std::size_t a = 0; a < k; ++a)
        for (std::size_t b = 0; b < k; ++b)
          meat[a][b] += x(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(a)) * score_weight[r] *
                        score_weight[s] * x(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(b));
    }
  }
  const Matrix inv = invert(bread);
  return to_eigen(multiply(multiply(inv, meat), inv));
}

/// Per-row w_r * e_r from a fit, as plain doubles.
inline std::vector<double> score_weights(const dyadic::RegressionFit& fit) {
  std::vector<double> out(static_cast<std::size_t>(fit.residuals.size()));
  for (std::size_t r = 0; r < out.size(); ++r) out[r] = fit.weights[static_cast<Eigen::Index>(r)] * fit.residuals[static_cast<Eigen::Index>(r)];
  return out;
}

/// Meat-free bread recomputed from scratch: X'WX or X'W diag(p(1-p)) X.
inline Matrix oracle_bread(const dyadic::RegressionFit& fit, const dyadic::DyadDataset& data) {
  std::vector<double> w(data.n_rows());
  for (std::size_t r = 0; r < w.size(); ++r) {
    const auto i = static_cast<Eigen::Index>(r);
    w[r] = fit.weights[i];
    if (fit.family == dyadic::Family::logistic) w[r] *= fit.fitted[i] * (1.0 - fit.fitted[i]);
  }
  return cross_product(data.x(), w);
}

/// Dyadic sandwich via the indicator over all row pairs: same dyad or a shared unit.
inline Eigen::MatrixXd dyadic_indicator_oracle(const dyadic::RegressionFit& fit, const dyadic::DyadDataset& data) {
  return pairwise_sandwich(data.x(), score_weights(fit), oracle_bread(fit, data), [&](std::size_t r, std::size_t s) {
    const auto a = data.row(r).dyad;
    const auto b = data.row(s).dyad;
    return a.i == b.i || a.i == b.j || a.j == b.i || a.j == b.j;
  });
}

inline double rel_frobenius(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  const double scale = std::max(a.norm(), b.norm());
  return scale == 0.0 ? 0.0 : (a - b).norm() / scale;
}

inline double max_rel_diff(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    const double scale = std::max({std::abs(a[i]), std::abs(b[i]), 1e-300});
    worst = std::max(worst, std::abs(a[i] - b[i]) / scale);
  }
  return worst;
}

struct RandomSpec {
  std::size_t n_units = 6;
  std::size_t t_max = 1;       // rows per dyad drawn in [1, t_max] when ragged
  bool ragged = false;
  std::size_t k = 2;           // including the intercept
  bool logistic = false;
  bool weighted = false;
  double keep_fraction = 1.0;  // fraction of dyads observed
};

/// Random dyadic dataset with unit effects, so residuals are dependent.
inline dyadic::DyadDataset random_dataset(std::mt19937_64& rng, const RandomSpec& spec) {
  std::normal_distribution<double> z(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const std::size_t n = spec.n_units;
  std::vector<double> unit_x(n), unit_a(n);
  for (auto& v : unit_x) v = z(rng);
  for (auto& v : unit_a) v = z(rng);

  for (int attempt = 0; attempt < 1000; ++attempt) {
    std::vector<dyadic::Observation> rows;
    std::vector<std::vector<double>> xs;
    std::vector<bool> seen(n, false);
    for (dyadic::UnitId i = 0; i + 1 < n; ++i) {
      for (dyadic::UnitId j = i + 1; j < n; ++j) {
        if (u(rng) > spec.keep_fraction) continue;
        const std::size_t t_count =
            spec.ragged ? 1 + static_cast<std::size_t>(u(rng) * static_cast<double>(spec.t_max)) % spec.t_max : spec.t_max;
        seen[i] = seen[j] = true;
        for (std::size_t t = 0; t < t_count; ++t) {
          std::vector<double> row{1.0};
          row.push_back(std::abs(unit_x[i] - unit_x[j]));
          while (row.size() < spec.k) row.push_back(z(rng) + 0.5 * (unit_x[i] + unit_x[j]));
          row.resize(spec.k);
          double eta = 0.3 * row.back() + unit_a[i] * 0.5 + unit_a[j] * 0.5;
          double y;
          if (spec.logistic) {
            y = u(rng) < 1.0 / (1.0 + std::exp(-(eta - 0.2))) ? 1.0 : 0.0;
          } else {
            y = 0.5 + eta + z(rng);
          }
          const double w = spec.weighted ? 0.25 + 2.0 * u(rng) : 1.0;
          rows.push_back({dyadic::DyadKey{i, j}, static_cast<std::int64_t>(t), y, w});
          xs.push_back(std::move(row));
        }
      }
    }
    if (!std::all_of(seen.begin(), seen.end(), [](bool b) { return b; })) continue;
    if (rows.size() < spec.k + 1) continue;
    Eigen::MatrixXd x(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(spec.k));
    for (std::size_t r = 0; r < rows.size(); ++r)
      for (std::size_t c = 0; c < spec.k; ++c) x(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = xs[r][c];
    return dyadic::DyadDataset(n, std::move(rows), std::move(x));
  }
  throw std::runtime_error("could not draw a dataset covering every unit");
}

/// Complete cross-section on n units with the given regressor columns.
inline dyadic::DyadDataset cross_section(std::size_t n, const std::vector<double>& y, const Eigen::MatrixXd& x) {
  std::vector<dyadic::Observation> rows;
  std::size_t r = 0;
  for (dyadic::UnitId i = 0; i + 1 < n; ++i)
    for (dyadic::UnitId j = i + 1; j < n; ++j) rows.push_back({dyadic::DyadKey{i, j}, 0, y.at(r++), 1.0});
  return dyadic::DyadDataset(n, std::move(rows), x);
}

}  // namespace testing
