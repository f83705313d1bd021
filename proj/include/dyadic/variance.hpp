#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "dyadic/dyad.hpp"
#include "dyadic/regression.hpp"

namespace dyadic {

enum class VcovMethod { hc0, hc2, cluster, dyadic_direct, dyadic_decomposed };

/// Covariance estimate for the coefficients plus its provenance.
struct VcovEstimate {
  Eigen::MatrixXd matrix;
  VcovMethod method = VcovMethod::hc0;
  std::string grouping;      // label of the cluster variable, cluster method only
  bool psd_ok = true;        // min eigenvalue >= -1e-10 * max eigenvalue
  bool truncated = false;    // negative eigenvalues were clipped on request
  Eigen::VectorXd se;        // sqrt(diag), NaN where the diagonal is negative

  /// Method tag such as "hc0", "cluster(dyad)" or "dyadic_decomposed+psd_truncated".
  std::string tag() const;
};

/// Bread-free interior of a sandwich estimator.
struct MeatMatrix {
  Eigen::MatrixXd matrix;
};

/// Which pairs of rows contribute score cross-products to a meat matrix.
enum class PairRule {
  hc0,           // each row with itself
  dyad_cluster,  // rows of the same dyad
  dyadic,        // rows of the same dyad or of dyads sharing a member
};

/// Enumerates the ordered row pairs (r, s) selected by rule, including
/// r == s. The dyadic rule is what the direct estimator sums over.
template <typename Visitor>
void for_each_row_pair(const DyadDataset& data, PairRule rule, Visitor&& visit) {
  const std::size_t n = data.n_rows();
  for (std::size_t r = 0; r < n; ++r) {
    switch (rule) {
      case PairRule::hc0:
        visit(r, r);
        break;
      case PairRule::dyad_cluster:
        for (std::size_t s : data.dyad_rows(data.dyad_group(r))) visit(r, s);
        break;
      case PairRule::dyadic: {
        const DyadKey d = data.row(r).dyad;
        // Every row touching d.i, then rows touching d.j but not d.i; the
        // rows of d itself appear in both clusters and are taken once.
        for (std::size_t s : data.unit_cluster(d.i)) visit(r, s);
        for (std::size_t s : data.unit_cluster(d.j)) {
          if (!data.row(s).dyad.contains(d.i)) visit(r, s);
        }
        break;
      }
    }
  }
}

/// Materialized pair list, sorted; intended for tests and diagnostics.
std::vector<std::pair<std::size_t, std::size_t>> row_pairs(const DyadDataset& data, PairRule rule);

/// bread^{-1} meat bread^{-1}, symmetrized.
Eigen::MatrixXd sandwich(const Eigen::MatrixXd& bread, const Eigen::MatrixXd& meat);

MeatMatrix meat_hc0(const RegressionFit& fit, const DyadDataset& data);
MeatMatrix meat_cluster(const RegressionFit& fit, const DyadDataset& data,
                        std::span<const std::size_t> grouping);

/// Sum of s_r s_s' over every dyadic row pair; O(rows * N * T) work.
MeatMatrix meat_dyadic_direct(const RegressionFit& fit, const DyadDataset& data);

/// Components of the multi-way decomposition of the dyadic meat:
///   meat = sum_i unit_cluster[i] - dyad - (N - 2) * hc0
/// where unit_cluster[i] clusters every row touching unit i and treats the
/// remaining rows as singletons. In a pure cross-section `dyad` equals
/// `hc0` and the combination is sum_i unit_cluster[i] - (N - 1) * hc0.
struct DyadicDecomposition {
  std::vector<Eigen::MatrixXd> unit_cluster;
  Eigen::MatrixXd dyad;
  Eigen::MatrixXd hc0;
  std::size_t n_units = 0;
  bool cross_section = false;

  Eigen::MatrixXd assemble() const;
};

DyadicDecomposition decompose_dyadic_meat(const RegressionFit& fit, const DyadDataset& data);
MeatMatrix meat_dyadic_decomposed(const RegressionFit& fit, const DyadDataset& data);

/// Dyad group id for every row; the "naive" repeated-dyad clustering.
std::vector<std::size_t> dyad_grouping(const DyadDataset& data);

VcovEstimate vcov_hc0(const RegressionFit& fit, const DyadDataset& data);

/// HC0 with e^2 replaced by e^2 / (1 - h). Linear family only.
VcovEstimate vcov_hc2(const RegressionFit& fit, const DyadDataset& data);

VcovEstimate vcov_cluster(const RegressionFit& fit, const DyadDataset& data,
                          std::span<const std::size_t> grouping, std::string label = "custom");

VcovEstimate vcov_dyadic_direct(const RegressionFit& fit, const DyadDataset& data);
VcovEstimate vcov_dyadic_decomposed(const RegressionFit& fit, const DyadDataset& data);

enum class DyadicForm { direct, decomposed };

/// Dyadic estimator for a weighted least-squares fit (bread X'WX, scores w x e).
VcovEstimate vcov_dyadic_weighted(const RegressionFit& wls_fit, const DyadDataset& data,
                                  DyadicForm form = DyadicForm::decomposed);

/// Dyadic estimator for a logistic fit (bread X'MX, scores x (y - p)).
VcovEstimate vcov_dyadic_logistic(const RegressionFit& logit_fit, const DyadDataset& data,
                                  DyadicForm form = DyadicForm::decomposed);

struct PsdDiagnostic {
  double min_eigenvalue = 0.0;
  double max_eigenvalue = 0.0;
  bool psd_ok = true;
  std::vector<std::size_t> negative_diagonals;
};

PsdDiagnostic psd_check(const Eigen::MatrixXd& matrix);
PsdDiagnostic psd_check(const VcovEstimate& vcov);

/// Clips negative eigenvalues to zero and marks the estimate as truncated.
VcovEstimate truncate_to_psd(const VcovEstimate& vcov);

/// Builds a VcovEstimate from a finished matrix: symmetrizes, fills se and psd_ok.
VcovEstimate make_estimate(Eigen::MatrixXd matrix, VcovMethod method, std::string grouping = {});

}  // namespace dyadic
