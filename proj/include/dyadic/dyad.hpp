#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace dyadic {

using UnitId = std::uint32_t;

/// Unordered pair of distinct units, stored canonically with i < j.
struct DyadKey {
  UnitId i = 0;
  UnitId j = 1;

  /// Canonicalizes (a, b) into (min, max). Throws DataError when a == b.
  static DyadKey of(UnitId a, UnitId b);

  bool contains(UnitId u) const { return i == u || j == u; }
  auto operator<=>(const DyadKey&) const = default;
};

/// Number of canonical pairs among n units, n(n-1)/2.
std::size_t dyad_count(std::size_t n_units);

/// Lexicographic position of key among all canonical pairs of n_units.
std::size_t dyad_index(DyadKey key, std::size_t n_units);

/// Inverse of dyad_index.
DyadKey dyad_members(std::size_t index, std::size_t n_units);

/// True when the two dyads are distinct and have a unit in common.
bool shares_member(DyadKey a, DyadKey b);

/// One observation of a dyad: regressors live in the dataset's design matrix.
struct Observation {
  DyadKey dyad;
  std::int64_t t = 0;
  double y = 0.0;
  double w = 1.0;
};

/// Observations on dyads with a design matrix. Immutable after construction;
/// the constructor validates every invariant and builds the unit and dyad
/// row indexes consumed by the variance estimators.
class DyadDataset {
 public:
  /// x must have one row per observation. Throws DataError on any
  /// violated invariant: out-of-range or non-dense unit ids, duplicate
  /// (dyad, t), non-finite values, non-positive weights.
  DyadDataset(std::size_t n_units, std::vector<Observation> rows, Eigen::MatrixXd x,
              std::vector<std::string> regressor_names = {});

  std::size_t n_units() const { return n_units_; }
  std::size_t n_rows() const { return rows_.size(); }
  std::size_t k() const { return static_cast<std::size_t>(x_.cols()); }
  std::size_t n_dyads() const { return dyad_rows_.size(); }

  const Observation& row(std::size_t r) const { return rows_[r]; }
  std::span<const Observation> rows() const { return rows_; }
  const Eigen::MatrixXd& x() const { return x_; }
  const Eigen::VectorXd& y() const { return y_; }
  const Eigen::VectorXd& weights() const { return w_; }
  bool has_nonunit_weights() const { return weighted_; }
  const std::vector<std::string>& regressor_names() const { return names_; }

  /// Rows whose dyad contains unit i, in row order.
  std::span<const std::size_t> unit_cluster(UnitId i) const;

  /// Observed dyads in lexicographic order, with their rows.
  std::span<const DyadKey> observed_dyads() const { return dyads_; }
  std::span<const std::size_t> dyad_rows(std::size_t observed) const {
    return dyad_rows_[observed];
  }
  /// Position of row r's dyad within observed_dyads().
  std::size_t dyad_group(std::size_t r) const { return row_group_[r]; }

  /// True when every observed dyad has exactly one row.
  bool is_cross_section() const { return rows_.size() == dyads_.size(); }

  /// Copy with the design matrix replaced; used for column rescaling.
  DyadDataset with_design(Eigen::MatrixXd x) const;

 private:
  std::size_t n_units_;
  std::vector<Observation> rows_;
  Eigen::MatrixXd x_;
  Eigen::VectorXd y_;
  Eigen::VectorXd w_;
  bool weighted_ = false;
  std::vector<std::string> names_;
  std::vector<std::vector<std::size_t>> unit_rows_;
  std::vector<DyadKey> dyads_;
  std::vector<std::vector<std::size_t>> dyad_rows_;
  std::vector<std::size_t> row_group_;
};

}  // namespace dyadic
