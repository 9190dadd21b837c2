#include "npcvx/responses.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "npcvx/error.hpp"

namespace npc {

ResponseTable::ResponseTable(std::size_t num_bases, std::vector<double> values,
                             std::vector<double> weights)
    : num_bases_(num_bases) {
  if (num_bases == 0) throw DomainError("response table needs at least one base");
  if (values.size() != weights.size() * num_bases) {
    throw DimensionMismatch("response values do not match rows x bases");
  }
  const std::size_t rows = weights.size();
  auto row_of = [&](std::size_t p) {
    return std::span<const double>(values.data() + p * num_bases, num_bases);
  };
  std::vector<std::size_t> order(rows);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    auto ra = row_of(a);
    auto rb = row_of(b);
    return std::lexicographical_compare(ra.begin(), ra.end(), rb.begin(), rb.end());
  });

  for (std::size_t k = 0; k < rows;) {
    auto head = row_of(order[k]);
    double w = 0.0;
    std::size_t e = k;
    while (e < rows && std::ranges::equal(row_of(order[e]), head)) {
      w += weights[order[e]];
      ++e;
    }
    if (w > 0.0) {
      values_.insert(values_.end(), head.begin(), head.end());
      weights_.push_back(w);
    }
    k = e;
  }
}

ResponseTable ResponseTable::from_points(const BaseDictionary& dictionary, const FeatureMatrix& points) {
  if (points.empty()) throw EmptySample("cannot tabulate responses on an empty sample");
  if (points.cols() != dictionary.dim()) throw DimensionMismatch("feature dimension does not match dictionary");
  const std::size_t m = dictionary.size();
  std::vector<double> values(points.rows() * m);
  for (std::size_t i = 0; i < points.rows(); ++i) {
    dictionary.evaluate_all(points.row(i), std::span<double>(values.data() + i * m, m));
  }
  // Merge integer counts first and divide once, so weights are exact count/n.
  std::vector<double> ones(points.rows(), 1.0);
  ResponseTable t(m, std::move(values), std::move(ones));
  const double n = static_cast<double>(points.rows());
  for (double& w : t.weights_) w /= n;
  return t;
}

double ResponseTable::total_weight() const noexcept {
  return std::accumulate(weights_.begin(), weights_.end(), 0.0);
}

double ResponseTable::score(std::size_t p, std::span<const double> lambda) const noexcept {
  const double* r = values_.data() + p * num_bases_;
  double s = 0.0;
  for (std::size_t j = 0; j < num_bases_; ++j) s += lambda[j] * r[j];
  return std::clamp(s, -1.0, 1.0);
}

double surrogate_risk(const ResponseTable& table, const Surrogate& phi, ClassSide side,
                      std::span<const double> lambda) {
  if (lambda.size() != table.num_bases()) throw DimensionMismatch("weight vector length mismatch");
  const double sgn = side == ClassSide::negative ? 1.0 : -1.0;
  double r = 0.0;
  for (std::size_t p = 0; p < table.num_rows(); ++p) {
    r += table.weight(p) * phi.value(sgn * table.score(p, lambda));
  }
  return r;
}

double zero_one_risk(const ResponseTable& table, ClassSide side, std::span<const double> lambda) {
  if (lambda.size() != table.num_bases()) throw DimensionMismatch("weight vector length mismatch");
  double r = 0.0;
  for (std::size_t p = 0; p < table.num_rows(); ++p) {
    double h = table.score(p, lambda);
    bool error = side == ClassSide::negative ? h >= 0.0 : h <= 0.0;
    if (error) r += table.weight(p);
  }
  return r;
}

std::optional<CellPartition> CellPartition::for_dictionary(const BaseDictionary& dictionary) {
  if (!dictionary.is_piecewise_constant_1d()) return std::nullopt;
  std::vector<double> thresholds;
  for (const auto& b : dictionary.bases()) {
    if (const auto* s = std::get_if<Stump>(&b)) thresholds.push_back(s->threshold);
  }
  std::sort(thresholds.begin(), thresholds.end());
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());
  return CellPartition(dictionary, dictionary.stump_axis(), std::move(thresholds));
}

CellPartition::CellPartition(BaseDictionary dictionary, std::size_t axis, std::vector<double> thresholds)
    : dictionary_(std::move(dictionary)), axis_(axis), thresholds_(std::move(thresholds)) {
  const std::size_t m = dictionary_.size();
  cell_rows_.resize(num_cells() * m);
  std::vector<double> x(dictionary_.dim(), 0.0);
  for (std::size_t c = 0; c < num_cells(); ++c) {
    // The right endpoint represents (t_{c-1}, t_c]; the last cell uses t_k + 1.
    if (c < thresholds_.size()) {
      x[axis_] = thresholds_[c];
    } else {
      x[axis_] = thresholds_.empty() ? 0.0 : thresholds_.back() + 1.0;
    }
    dictionary_.evaluate_all(x, std::span<double>(cell_rows_.data() + c * m, m));
  }
}

std::size_t CellPartition::cell_of(double x) const noexcept {
  return static_cast<std::size_t>(std::lower_bound(thresholds_.begin(), thresholds_.end(), x) -
                                  thresholds_.begin());
}

ResponseTable CellPartition::table(std::span<const double> cell_weights) const {
  if (cell_weights.size() != num_cells()) throw DimensionMismatch("one weight per cell expected");
  return ResponseTable(dictionary_.size(), cell_rows_,
                       std::vector<double>(cell_weights.begin(), cell_weights.end()));
}

}  // namespace npc
