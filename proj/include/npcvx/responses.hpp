#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "npcvx/data.hpp"
#include "npcvx/hypothesis.hpp"
#include "npcvx/surrogate.hpp"

namespace npc {

/// Which class-conditional risk a table is scored against: negatives are
/// scored by phi(h(x)), positives by phi(-h(x)).
enum class ClassSide { negative, positive };

/// Base-classifier outputs on a finite support with probability weights.
///
/// Row p holds (h_1(x_p), ..., h_M(x_p)) and weight w_p; identical rows are
/// merged and kept in lexicographic order, so every risk sum runs in a fixed
/// order. An empirical sample gives weights count/n; a cell partition of a
/// scenario gives exact cell probabilities.
class ResponseTable {
 public:
  ResponseTable() = default;

  /// Rows of length `num_bases`, concatenated, with one weight per row.
  ResponseTable(std::size_t num_bases, std::vector<double> values, std::vector<double> weights);

  static ResponseTable from_points(const BaseDictionary& dictionary, const FeatureMatrix& points);

  std::size_t num_bases() const noexcept { return num_bases_; }
  std::size_t num_rows() const noexcept { return weights_.size(); }
  std::span<const double> row(std::size_t p) const noexcept {
    return {values_.data() + p * num_bases_, num_bases_};
  }
  double weight(std::size_t p) const noexcept { return weights_[p]; }
  double total_weight() const noexcept;

  /// h_lambda on row p, clamped to [-1, 1] against rounding.
  double score(std::size_t p, std::span<const double> lambda) const noexcept;

 private:
  std::size_t num_bases_ = 0;
  std::vector<double> values_;
  std::vector<double> weights_;
};

/// sum_p w_p phi(+-h_lambda(x_p)).
double surrogate_risk(const ResponseTable& table, const Surrogate& phi, ClassSide side,
                      std::span<const double> lambda);
/// Negatives: sum_p w_p 1(h_lambda(x_p) >= 0); positives: sum_p w_p 1(h_lambda(x_p) <= 0).
double zero_one_risk(const ResponseTable& table, ClassSide side, std::span<const double> lambda);

/// Partition of one axis into cells on which a piecewise-constant dictionary
/// is constant. Cell i < k is (t_{i-1}, t_i], the last cell is (t_k, inf).
class CellPartition {
 public:
  static std::optional<CellPartition> for_dictionary(const BaseDictionary& dictionary);

  std::size_t axis() const noexcept { return axis_; }
  std::size_t num_cells() const noexcept { return thresholds_.size() + 1; }
  const std::vector<double>& thresholds() const noexcept { return thresholds_; }

  std::size_t cell_of(double x) const noexcept;
  /// Table with one row per cell (merged where rows coincide).
  ResponseTable table(std::span<const double> cell_weights) const;

 private:
  CellPartition(BaseDictionary dictionary, std::size_t axis, std::vector<double> thresholds);

  BaseDictionary dictionary_;
  std::size_t axis_;
  std::vector<double> thresholds_;
  std::vector<double> cell_rows_;
};

}  // namespace npc
