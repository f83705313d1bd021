#include "dyadic/variance.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "dyadic/errors.hpp"

namespace dyadic {

namespace {

const char* method_name(VcovMethod m) {
  switch (m) {
    case VcovMethod::hc0: return "hc0";
    case VcovMethod::hc2: return "hc2";
    case VcovMethod::cluster: return "cluster";
    case VcovMethod::dyadic_direct: return "dyadic_direct";
    case VcovMethod::dyadic_decomposed: return "dyadic_decomposed";
  }
  return "unknown";
}

Eigen::MatrixXd symmetrized(const Eigen::MatrixXd& m) { return 0.5 * (m + m.transpose()); }

// Sum over groups of (sum of member scores)(sum of member scores)'.
Eigen::MatrixXd grouped_outer(const Eigen::MatrixXd& scores, std::span<const std::size_t> grouping) {
  std::map<std::size_t, Eigen::VectorXd> totals;
  for (std::size_t r = 0; r < grouping.size(); ++r) {
    auto [it, fresh] = totals.try_emplace(grouping[r], Eigen::VectorXd::Zero(scores.cols()));
    it->second += scores.row(static_cast<Eigen::Index>(r)).transpose();
  }
  Eigen::MatrixXd meat = Eigen::MatrixXd::Zero(scores.cols(), scores.cols());
  for (const auto& [g, total] : totals) meat.noalias() += total * total.transpose();
  return meat;
}

Eigen::MatrixXd dyadic_sandwich(const RegressionFit& fit, const DyadDataset& data, DyadicForm form) {
  const MeatMatrix meat =
      form == DyadicForm::direct ? meat_dyadic_direct(fit, data) : meat_dyadic_decomposed(fit, data);
  return sandwich(fit.bread, meat.matrix);
}

}  // namespace

std::string VcovEstimate::tag() const {
  std::string t = method_name(method);
  if (method == VcovMethod::cluster) t += "(" + grouping + ")";
  if (truncated) t += "+psd_truncated";
  return t;
}

std::vector<std::pair<std::size_t, std::size_t>> row_pairs(const DyadDataset& data, PairRule rule) {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for_each_row_pair(data, rule, [&](std::size_t r, std::size_t s) { pairs.emplace_back(r, s); });
  std::sort(pairs.begin(), pairs.end());
  return pairs;
}

Eigen::MatrixXd sandwich(const Eigen::MatrixXd& bread, const Eigen::MatrixXd& meat) {
  const Eigen::LDLT<Eigen::MatrixXd> ldlt(bread);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) {
    throw NumericalError("bread matrix is not positive definite");
  }
  const Eigen::MatrixXd left = ldlt.solve(meat);
  return symmetrized(ldlt.solve(left.transpose()).transpose());
}

MeatMatrix meat_hc0(const RegressionFit& fit, const DyadDataset& data) {
  const Eigen::MatrixXd s = score_rows(fit, data);
  return {symmetrized(s.transpose() * s)};
}

MeatMatrix meat_cluster(const RegressionFit& fit, const DyadDataset& data,
                        std::span<const std::size_t> grouping) {
  if (grouping.size() != data.n_rows()) {
    throw DataError("grouping has " + std::to_string(grouping.size()) + " labels for " +
                    std::to_string(data.n_rows()) + " rows");
  }
  return {symmetrized(grouped_outer(score_rows(fit, data), grouping))};
}

MeatMatrix meat_dyadic_direct(const RegressionFit& fit, const DyadDataset& data) {
  const Eigen::MatrixXd s = score_rows(fit, data);
  const auto k = s.cols();
  // Accumulate row r against the sum of its partners to keep this O(pairs * k).
  Eigen::MatrixXd meat = Eigen::MatrixXd::Zero(k, k);
  Eigen::VectorXd partner_sum = Eigen::VectorXd::Zero(k);
  std::size_t current = 0;
  auto flush = [&](std::size_t r) {
    meat.noalias() += s.row(static_cast<Eigen::Index>(r)).transpose() * partner_sum.transpose();
    partner_sum.setZero();
  };
  for_each_row_pair(data, PairRule::dyadic, [&](std::size_t r, std::size_t other) {
    if (r != current) {
      flush(current);
      current = r;
    }
    partner_sum += s.row(static_cast<Eigen::Index>(other)).transpose();
  });
  flush(current);
  return {symmetrized(meat)};
}

Eigen::MatrixXd DyadicDecomposition::assemble() const {
  Eigen::MatrixXd total = Eigen::MatrixXd::Zero(hc0.rows(), hc0.cols());
  for (const auto& m : unit_cluster) total += m;
  const double n = static_cast<double>(n_units);
  if (cross_section) {
    total -= (n - 1.0) * hc0;
  } else {
    total -= dyad;
    total -= (n - 2.0) * hc0;
  }
  return symmetrized(total);
}

DyadicDecomposition decompose_dyadic_meat(const RegressionFit& fit, const DyadDataset& data) {
  if (data.n_units() < 2) throw DataError("dyadic estimator needs at least two units");
  const Eigen::MatrixXd s = score_rows(fit, data);
  const auto k = s.cols();

  DyadicDecomposition out;
  out.n_units = data.n_units();
  out.cross_section = data.is_cross_section();
  out.hc0 = symmetrized(s.transpose() * s);
  out.dyad = out.cross_section ? out.hc0 : symmetrized(grouped_outer(s, dyad_grouping(data)));

  // Unit i's cluster meat differs from HC0 only inside the cluster:
  // remove the members' own outer products, add the cluster total's.
  out.unit_cluster.reserve(data.n_units());
  for (UnitId i = 0; i < data.n_units(); ++i) {
    Eigen::VectorXd total = Eigen::VectorXd::Zero(k);
    Eigen::MatrixXd own = Eigen::MatrixXd::Zero(k, k);
    for (std::size_t r : data.unit_cluster(i)) {
      const auto row = s.row(static_cast<Eigen::Index>(r));
      total += row.transpose();
      own.noalias() += row.transpose() * row;
    }
    Eigen::MatrixXd m = out.hc0 - own;
    m.noalias() += total * total.transpose();
    out.unit_cluster.push_back(symmetrized(m));
  }
  return out;
}

MeatMatrix meat_dyadic_decomposed(const RegressionFit& fit, const DyadDataset& data) {
  return {decompose_dyadic_meat(fit, data).assemble()};
}

std::vector<std::size_t> dyad_grouping(const DyadDataset& data) {
  std::vector<std::size_t> g(data.n_rows());
  for (std::size_t r = 0; r < g.size(); ++r) g[r] = data.dyad_group(r);
  return g;
}

VcovEstimate make_estimate(Eigen::MatrixXd matrix, VcovMethod method, std::string grouping) {
  VcovEstimate v;
  v.matrix = symmetrized(matrix);
  v.method = method;
  v.grouping = std::move(grouping);
  v.se.resize(v.matrix.rows());
  for (Eigen::Index j = 0; j < v.matrix.rows(); ++j) {
    const double d = v.matrix(j, j);
    v.se[j] = d >= 0.0 ? std::sqrt(d) : std::numeric_limits<double>::quiet_NaN();
  }
  v.psd_ok = psd_check(v.matrix).psd_ok;
  return v;
}

VcovEstimate vcov_hc0(const RegressionFit& fit, const DyadDataset& data) {
  return make_estimate(sandwich(fit.bread, meat_hc0(fit, data).matrix), VcovMethod::hc0);
}

VcovEstimate vcov_hc2(const RegressionFit& fit, const DyadDataset& data) {
  if (fit.family != Family::linear) {
    throw DataError("hc2 is defined for the linear family only");
  }
  const Eigen::MatrixXd& x = data.x();
  const Eigen::LDLT<Eigen::MatrixXd> ldlt(fit.bread);
  // h_r = w_r x_r' (X'WX)^{-1} x_r
  const Eigen::MatrixXd solved = ldlt.solve(x.transpose());
  Eigen::MatrixXd s = score_rows(fit, data);
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    const double h = fit.weights[r] * x.row(r).dot(solved.col(r));
    if (h >= 1.0 - 1e-12) {
      throw NumericalError("hc2 undefined: row " + std::to_string(r) + " has leverage 1");
    }
    s.row(r) /= std::sqrt(1.0 - h);
  }
  return make_estimate(sandwich(fit.bread, symmetrized(s.transpose() * s)), VcovMethod::hc2);
}

VcovEstimate vcov_cluster(const RegressionFit& fit, const DyadDataset& data,
                          std::span<const std::size_t> grouping, std::string label) {
  return make_estimate(sandwich(fit.bread, meat_cluster(fit, data, grouping).matrix), VcovMethod::cluster,
                       std::move(label));
}

VcovEstimate vcov_dyadic_direct(const RegressionFit& fit, const DyadDataset& data) {
  return make_estimate(dyadic_sandwich(fit, data, DyadicForm::direct), VcovMethod::dyadic_direct);
}

VcovEstimate vcov_dyadic_decomposed(const RegressionFit& fit, const DyadDataset& data) {
  return make_estimate(dyadic_sandwich(fit, data, DyadicForm::decomposed), VcovMethod::dyadic_decomposed);
}

VcovEstimate vcov_dyadic_weighted(const RegressionFit& wls_fit, const DyadDataset& data, DyadicForm form) {
  if (wls_fit.family != Family::linear) throw DataError("weighted dyadic estimator expects a linear fit");
  return make_estimate(dyadic_sandwich(wls_fit, data, form),
                       form == DyadicForm::direct ? VcovMethod::dyadic_direct : VcovMethod::dyadic_decomposed);
}

VcovEstimate vcov_dyadic_logistic(const RegressionFit& logit_fit, const DyadDataset& data, DyadicForm form) {
  if (logit_fit.family != Family::logistic) throw DataError("logistic dyadic estimator expects a logistic fit");
  return make_estimate(dyadic_sandwich(logit_fit, data, form),
                       form == DyadicForm::direct ? VcovMethod::dyadic_direct : VcovMethod::dyadic_decomposed);
}

PsdDiagnostic psd_check(const Eigen::MatrixXd& matrix) {
  PsdDiagnostic d;
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(symmetrized(matrix), Eigen::EigenvaluesOnly);
  const Eigen::VectorXd& ev = eig.eigenvalues();
  d.min_eigenvalue = ev.minCoeff();
  d.max_eigenvalue = ev.maxCoeff();
  d.psd_ok = d.min_eigenvalue >= -1e-10 * std::max(d.max_eigenvalue, 0.0);
  for (Eigen::Index j = 0; j < matrix.rows(); ++j) {
    if (matrix(j, j) < 0.0) d.negative_diagonals.push_back(static_cast<std::size_t>(j));
  }
  return d;
}

PsdDiagnostic psd_check(const VcovEstimate& vcov) { return psd_check(vcov.matrix); }

VcovEstimate truncate_to_psd(const VcovEstimate& vcov) {
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(symmetrized(vcov.matrix));
  const Eigen::VectorXd clipped = eig.eigenvalues().cwiseMax(0.0);
  Eigen::MatrixXd repaired = eig.eigenvectors() * clipped.asDiagonal() * eig.eigenvectors().transpose();
  VcovEstimate out = make_estimate(std::move(repaired), vcov.method, vcov.grouping);
  out.truncated = true;
  return out;
}

}  // namespace dyadic
