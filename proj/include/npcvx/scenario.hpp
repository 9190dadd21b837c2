#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "json.hpp"
#include "npcvx/data.hpp"
#include "npcvx/hypothesis.hpp"
#include "npcvx/responses.hpp"
#include "npcvx/rng.hpp"

namespace npc {

enum class ClassLabel { negative = -1, positive = 1 };

enum class ScenarioKind { prop31, gaussian_1d, custom_csv };

/// Synthetic data-generating process: class conditionals P^- and P^+ plus the
/// mixing probability p = P(Y = +1) used for pooled sampling.
///
///  - prop31: both classes uniform on [0, 1]; `alpha` is the breakpoint of the
///    counterexample dictionary.
///  - gaussian_1d: N(mu_minus, sigma^2) versus N(mu_plus, sigma^2).
///  - custom_csv: the empirical distribution of a labeled sample (draws
///    resample rows with replacement).
class Scenario {
 public:
  static Scenario prop31(double alpha, double mixing = 0.5);
  static Scenario gaussian_1d(double mu_minus, double mu_plus, double sigma, double mixing = 0.5);
  static Scenario empirical(Sample sample, double mixing = 0.5);

  /// {"kind": "prop31"|"uniform"|"gaussian_1d"|"custom_csv", ...}. custom_csv
  /// needs the sample passed separately (see cli).
  static Scenario from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;

  ScenarioKind kind() const noexcept { return kind_; }
  std::string name() const;
  std::size_t dim() const noexcept;
  double mixing() const noexcept { return mixing_; }
  double alpha() const noexcept { return alpha_; }
  double mu(ClassLabel c) const noexcept { return c == ClassLabel::negative ? mu_minus_ : mu_plus_; }
  double sigma() const noexcept { return sigma_; }

  FeatureMatrix sample(ClassLabel c, std::size_t n, Rng& rng) const;
  LabeledData sample_pooled(std::size_t n, Rng& rng) const;

  /// P^c(X <= x) for the continuous one-dimensional kinds.
  std::optional<double> cdf(ClassLabel c, double x) const;

  /// Exact class-conditional response table when one exists: cell
  /// probabilities for piecewise-constant 1-D dictionaries on the continuous
  /// kinds, the full empirical table for custom_csv.
  std::optional<ResponseTable> exact_responses(const BaseDictionary& dictionary, ClassLabel c) const;

  /// Monte Carlo response table from m draws (weights are draw frequencies).
  /// Draws come in fixed-size chunks seeded by chunk index, so the result is
  /// independent of the thread count.
  ResponseTable monte_carlo_responses(const BaseDictionary& dictionary, ClassLabel c, std::size_t m,
                                      std::uint64_t seed) const;

 private:
  Scenario() = default;
  double draw_scalar(ClassLabel c, Rng& rng) const;

  ScenarioKind kind_ = ScenarioKind::prop31;
  double mixing_ = 0.5;
  double alpha_ = 0.0;
  double mu_minus_ = 0.0;
  double mu_plus_ = 0.0;
  double sigma_ = 1.0;
  std::optional<Sample> sample_;
};

inline ClassSide side_of(ClassLabel c) noexcept {
  return c == ClassLabel::negative ? ClassSide::negative : ClassSide::positive;
}

}  // namespace npc
