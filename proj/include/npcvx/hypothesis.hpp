#pragma once

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"
#include "npcvx/data.hpp"

namespace npc {

/// Decision stump on one axis. polarity = +1 votes +1 when x[axis] > threshold,
/// polarity = -1 votes +1 when x[axis] <= threshold; the other side votes -1.
struct Stump {
  std::size_t axis = 0;
  double threshold = 0.0;
  int polarity = 1;

  bool operator==(const Stump&) const = default;
};

struct ConstantBase {
  double value = -1.0;

  bool operator==(const ConstantBase&) const = default;
};

/// User-registered base classifier. Outputs must lie in [-1, 1].
struct FunctionBase {
  std::string name;
  std::function<double(std::span<const double>)> fn;
};

using BaseClassifier = std::variant<Stump, ConstantBase, FunctionBase>;

/// Finite collection h_1..h_M of classifiers X -> [-1, 1]. Immutable; copies
/// share the underlying storage.
class BaseDictionary {
 public:
  /// Validates every base. FunctionBase outputs are checked on `probes`.
  BaseDictionary(std::size_t dim, std::vector<BaseClassifier> bases,
                 const std::vector<std::vector<double>>& probes = {});

  std::size_t size() const noexcept { return bases_->size(); }
  std::size_t dim() const noexcept { return dim_; }
  const BaseClassifier& base(std::size_t j) const { return (*bases_)[j]; }
  const std::vector<BaseClassifier>& bases() const noexcept { return *bases_; }

  /// h_j(x). Throws DimensionMismatch or BaseRangeError.
  double evaluate(std::size_t j, std::span<const double> x) const;
  /// All M outputs at x into `out` (size M).
  void evaluate_all(std::span<const double> x, std::span<double> out) const;

  /// True when every base is a constant or a stump on one shared axis, so
  /// the dictionary is piecewise constant along that axis.
  bool is_piecewise_constant_1d() const noexcept;
  /// Shared stump axis (0 when there are no stumps).
  std::size_t stump_axis() const noexcept;

 private:
  std::size_t dim_;
  std::shared_ptr<const std::vector<BaseClassifier>> bases_;
};

/// Stumps at empirical quantiles of every axis, both polarities. Ordering is
/// axis-major, threshold-minor (ascending), polarity-last (+1 then -1).
/// Duplicate stumps (e.g. from a constant column) are dropped.
BaseDictionary build_stump_dictionary(const FeatureMatrix& data, std::size_t per_axis_thresholds);

/// Point on the flat simplex of R^M.
class SimplexWeights {
 public:
  explicit SimplexWeights(std::vector<double> lambda);

  static SimplexWeights vertex(std::size_t m, std::size_t j);
  static SimplexWeights uniform(std::size_t m);

  std::size_t size() const noexcept { return lambda_.size(); }
  double operator[](std::size_t j) const noexcept { return lambda_[j]; }
  std::span<const double> values() const noexcept { return lambda_; }

 private:
  std::vector<double> lambda_;
};

/// h_lambda = sum_j lambda_j h_j.
class CombinedClassifier {
 public:
  CombinedClassifier(BaseDictionary dictionary, SimplexWeights weights);

  const BaseDictionary& dictionary() const noexcept { return dictionary_; }
  const SimplexWeights& weights() const noexcept { return weights_; }

  double evaluate(std::span<const double> x) const;
  /// +1 if h_lambda(x) >= 0, else -1.
  int predict_sign(std::span<const double> x) const;

 private:
  BaseDictionary dictionary_;
  SimplexWeights weights_;
};

inline int sign_of(double score) noexcept { return score >= 0.0 ? 1 : -1; }

nlohmann::json to_json(const BaseDictionary& dictionary);
BaseDictionary dictionary_from_json(const nlohmann::json& j);

}  // namespace npc
