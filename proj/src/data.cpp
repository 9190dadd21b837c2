#include "npcvx/data.hpp"

#include "npcvx/error.hpp"

namespace npc {

FeatureMatrix::FeatureMatrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows * cols) {
    throw DimensionMismatch("feature matrix data does not match rows x cols");
  }
}

void FeatureMatrix::append_row(std::span<const double> x) {
  if (x.size() != cols_) throw DimensionMismatch("row length does not match column count");
  data_.insert(data_.end(), x.begin(), x.end());
  ++rows_;
}

FeatureMatrix FeatureMatrix::from_rows(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) return FeatureMatrix();
  FeatureMatrix m(rows.front().size());
  m.reserve(rows.size());
  for (const auto& r : rows) m.append_row(r);
  return m;
}

FeatureMatrix FeatureMatrix::from_columns(const std::vector<std::vector<double>>& columns) {
  if (columns.empty()) return FeatureMatrix();
  const std::size_t n = columns.front().size(), d = columns.size();
  std::vector<double> data(n * d);
  for (std::size_t j = 0; j < d; ++j) {
    if (columns[j].size() != n) throw DimensionMismatch("columns differ in length");
    for (std::size_t i = 0; i < n; ++i) data[i * d + j] = columns[j][i];
  }
  return FeatureMatrix(n, d, std::move(data));
}

}  // namespace npc
