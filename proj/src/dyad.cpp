#include "dyadic/dyad.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "dyadic/errors.hpp"

namespace dyadic {

DyadKey DyadKey::of(UnitId a, UnitId b) {
  if (a == b) {
    throw DataError("self-dyad: unit " + std::to_string(a) + " paired with itself");
  }
  return a < b ? DyadKey{a, b} : DyadKey{b, a};
}

std::size_t dyad_count(std::size_t n_units) {
  return n_units < 2 ? 0 : n_units * (n_units - 1) / 2;
}

std::size_t dyad_index(DyadKey key, std::size_t n_units) {
  if (key.i >= key.j) {
    throw DataError("dyad key is not canonical");
  }
  if (key.j >= n_units) {
    throw std::out_of_range("dyad member " + std::to_string(key.j) + " out of range for " +
                            std::to_string(n_units) + " units");
  }
  const std::size_t i = key.i;
  // Rows 0..i-1 of the strict upper triangle hold (N-1) + ... + (N-i) pairs.
  return i * n_units - i * (i + 1) / 2 + (key.j - i - 1);
}

DyadKey dyad_members(std::size_t index, std::size_t n_units) {
  const std::size_t total = dyad_count(n_units);
  if (index >= total) {
    throw std::out_of_range("dyad index " + std::to_string(index) + " out of range for " +
                            std::to_string(n_units) + " units");
  }
  // Count pairs from the end: index m from the back lies in row i where
  // the tail of the triangle after row i holds r(r+1)/2 pairs, r = N-1-i.
  const std::size_t back = total - 1 - index;
  auto r = static_cast<std::size_t>((std::sqrt(8.0 * static_cast<double>(back) + 1.0) - 1.0) / 2.0);
  while (r * (r + 1) / 2 > back) --r;
  while ((r + 1) * (r + 2) / 2 <= back) ++r;
  const std::size_t i = n_units - 2 - r;
  const std::size_t row_start = i * n_units - i * (i + 1) / 2;
  const std::size_t j = i + 1 + (index - row_start);
  return DyadKey{static_cast<UnitId>(i), static_cast<UnitId>(j)};
}

bool shares_member(DyadKey a, DyadKey b) {
  if (a == b) return false;
  return a.i == b.i || a.i == b.j || a.j == b.i || a.j == b.j;
}

DyadDataset::DyadDataset(std::size_t n_units, std::vector<Observation> rows, Eigen::MatrixXd x,
                         std::vector<std::string> regressor_names)
    : n_units_(n_units), rows_(std::move(rows)), x_(std::move(x)), names_(std::move(regressor_names)) {
  const std::size_t n = rows_.size();
  if (n == 0) throw DataError("dataset has no observations");
  if (static_cast<std::size_t>(x_.rows()) != n) {
    throw DataError("design matrix has " + std::to_string(x_.rows()) + " rows, expected " +
                    std::to_string(n));
  }
  if (x_.cols() == 0) throw DataError("design matrix has no columns");
  if (!x_.allFinite()) throw DataError("design matrix contains non-finite values");
  if (names_.empty()) {
    for (Eigen::Index c = 0; c < x_.cols(); ++c) names_.push_back("x" + std::to_string(c));
  } else if (names_.size() != k()) {
    throw DataError("regressor name count does not match design columns");
  }

  y_.resize(static_cast<Eigen::Index>(n));
  w_.resize(static_cast<Eigen::Index>(n));
  unit_rows_.assign(n_units_, {});
  std::map<std::pair<DyadKey, std::int64_t>, std::size_t> seen;
  std::map<DyadKey, std::vector<std::size_t>> by_dyad;
  for (std::size_t r = 0; r < n; ++r) {
    const Observation& o = rows_[r];
    if (o.dyad.i >= o.dyad.j) throw DataError("row " + std::to_string(r) + ": dyad key not canonical");
    if (o.dyad.j >= n_units_) throw DataError("row " + std::to_string(r) + ": unit id out of range");
    if (o.t < 0) throw DataError("row " + std::to_string(r) + ": negative time index");
    if (!std::isfinite(o.y)) throw DataError("row " + std::to_string(r) + ": non-finite outcome");
    if (!std::isfinite(o.w) || o.w <= 0.0) {
      throw DataError("row " + std::to_string(r) + ": weight must be positive and finite");
    }
    auto [it, inserted] = seen.emplace(std::make_pair(o.dyad, o.t), r);
    if (!inserted) {
      throw DataError("row " + std::to_string(r) + ": duplicate (dyad, t), first seen at row " +
                      std::to_string(it->second));
    }
    y_[static_cast<Eigen::Index>(r)] = o.y;
    w_[static_cast<Eigen::Index>(r)] = o.w;
    weighted_ = weighted_ || o.w != 1.0;
    unit_rows_[o.dyad.i].push_back(r);
    unit_rows_[o.dyad.j].push_back(r);
    by_dyad[o.dyad].push_back(r);
  }
  for (std::size_t u = 0; u < n_units_; ++u) {
    if (unit_rows_[u].empty()) {
      throw DataError("unit id " + std::to_string(u) + " has no observations (ids must be dense)");
    }
  }
  row_group_.resize(n);
  dyads_.reserve(by_dyad.size());
  dyad_rows_.reserve(by_dyad.size());
  for (auto& [key, members] : by_dyad) {
    for (std::size_t r : members) row_group_[r] = dyads_.size();
    dyads_.push_back(key);
    dyad_rows_.push_back(std::move(members));
  }
}

std::span<const std::size_t> DyadDataset::unit_cluster(UnitId i) const {
  if (i >= n_units_) throw std::out_of_range("unit id " + std::to_string(i) + " out of range");
  return unit_rows_[i];
}

DyadDataset DyadDataset::with_design(Eigen::MatrixXd x) const {
  auto names = static_cast<std::size_t>(x.cols()) == k() ? names_ : std::vector<std::string>{};
  return DyadDataset(n_units_, rows_, std::move(x), std::move(names));
}

}  // namespace dyadic
