#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace npc {

/// Row-major dense matrix of feature vectors (one observation per row).
class FeatureMatrix {
 public:
  FeatureMatrix() = default;
  explicit FeatureMatrix(std::size_t cols) : cols_(cols) {}
  FeatureMatrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return rows_ == 0; }

  std::span<const double> row(std::size_t i) const noexcept {
    return {data_.data() + i * cols_, cols_};
  }
  std::span<double> row(std::size_t i) noexcept { return {data_.data() + i * cols_, cols_}; }
  double operator()(std::size_t i, std::size_t j) const noexcept { return data_[i * cols_ + j]; }

  void append_row(std::span<const double> x);
  void reserve(std::size_t rows) { data_.reserve(rows * cols_); }
  const std::vector<double>& data() const noexcept { return data_; }

  /// One observation per inner vector, all of equal length.
  static FeatureMatrix from_rows(const std::vector<std::vector<double>>& rows);
  /// One feature per inner vector, all of equal length.
  static FeatureMatrix from_columns(const std::vector<std::vector<double>>& columns);

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// Pooled observations with labels in {-1, +1}.
struct LabeledData {
  FeatureMatrix features;
  std::vector<int> labels;
};

/// The two class-conditional samples X^- (negatives) and X^+ (positives).
struct Sample {
  FeatureMatrix negatives;
  FeatureMatrix positives;

  std::size_t n_minus() const noexcept { return negatives.rows(); }
  std::size_t n_plus() const noexcept { return positives.rows(); }
};

}  // namespace npc
