#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "npcvx/data.hpp"
#include "npcvx/hypothesis.hpp"
#include "npcvx/responses.hpp"
#include "npcvx/scenario.hpp"
#include "npcvx/surrogate.hpp"

namespace npc {

/// Largest n accepted by the exact binomial routines.
inline constexpr std::uint64_t kBinomialMaxN = 1'000'000;

/// P(N >= t) for N ~ Bin(n, q), summed over k >= ceil(t) in log space with
/// compensated summation.
double binomial_tail_exact(std::uint64_t n, double q, double t);

/// Same with an integer threshold: P(N >= k).
double binomial_tail_from(std::uint64_t n, double q, std::uint64_t k);

/// ceil(n * q), except that a product within a few ulps of an integer is
/// taken to be that integer.
std::uint64_t ceil_product(std::uint64_t n, double q);

struct LemmaCheckResult {
  std::string lemma;
  nlohmann::json parameters;
  double exact_value = 0.0;
  double bound_value = 0.0;
  bool holds = false;
  double worst_slack = 0.0;

  nlohmann::json to_json() const;
};

/// P(N >= t) >= 1 - exp(-n q^2 / 2) for 0 < t <= n q / 2.
LemmaCheckResult check_lemma_bin(std::uint64_t n, double q, double t);

/// P(N >= n q) >= min(q, 1/4) for 0 < q <= 1/2.
LemmaCheckResult check_lemma_bin2(std::uint64_t n, double q);

struct LemmaSweepReport {
  std::uint64_t n_max = 0;
  std::size_t q_count = 0;
  std::size_t t_points = 0;
  std::size_t checks_bin = 0;
  std::size_t checks_bin2 = 0;
  std::size_t violations = 0;
  LemmaCheckResult worst_bin;
  LemmaCheckResult worst_bin2;

  bool all_hold() const noexcept { return violations == 0; }
  nlohmann::json to_json() const;
};

/// n in [1, n_max]; q = k / (2 q_count) for k = 1..q_count; t = (i / t_points) n q / 2
/// for i = 1..t_points (the last one is the boundary n q / 2).
LemmaSweepReport sweep_binomial_lemmas(std::uint64_t n_max, std::size_t q_count, std::size_t t_points = 10);

struct RademacherCheck {
  bool holds = true;
  std::size_t trials = 0;
  /// max over trials of (grid max - vertex max); must not exceed the slack.
  double max_excess = 0.0;
  double slack = 0.0;
  /// Trials where the grid maximum is attained at a vertex.
  std::size_t vertex_attained = 0;

  nlohmann::json to_json() const;
};

/// For each trial draws Rademacher signs and compares sup over a simplex grid
/// of |(1/n) sum sigma_i h_lambda(x_i)| with the maximum over the vertices.
/// Requires M <= 4.
RademacherCheck check_rademacher_vertex_identity(const BaseDictionary& dictionary, const FeatureMatrix& data,
                                                 std::uint64_t seed, std::size_t trials, double resolution = 0.01);

struct SupDeviationResult {
  std::size_t trials = 0;
  std::size_t violations = 0;
  double violation_rate = 0.0;
  double threshold = 0.0;
  double max_sup = 0.0;
  double mean_sup = 0.0;

  nlohmann::json to_json() const;
};

/// Per trial draws n negatives and computes the grid supremum over the simplex
/// of |(P_n - P)(phi o h_lambda)|; P uses exact cell probabilities when the
/// scenario provides them and 10^6 Monte Carlo draws otherwise. Compared to
/// kappa / sqrt(n). Requires M <= 3.
SupDeviationResult check_sup_deviation(const Scenario& scenario, const BaseDictionary& dictionary,
                                       const Surrogate& phi, std::size_t n, double delta, std::size_t trials,
                                       std::uint64_t seed, double resolution = 1e-3);

/// gamma(x) = min R_phi^+ subject to R_phi^- <= x over a simplex grid (M <= 3).
class GammaOracle {
 public:
  GammaOracle(const ResponseTable& negatives, const ResponseTable& positives, const Surrogate& phi,
              double resolution);

  /// +infinity when no grid point has R_phi^- <= x.
  double operator()(double x) const;
  double min_r_minus() const noexcept { return r_minus_.front(); }
  double max_vertex_r_minus() const noexcept { return max_vertex_r_minus_; }
  double unconstrained_min() const noexcept { return prefix_min_.back(); }
  double resolution() const noexcept { return resolution_; }

 private:
  double resolution_;
  double max_vertex_r_minus_ = 0.0;
  std::vector<double> r_minus_;     // sorted ascending
  std::vector<double> prefix_min_;  // min R_phi^+ over the first k+1 points
};

std::vector<std::pair<double, double>> gamma_curve(const GammaOracle& gamma, const std::vector<double>& x_grid);

struct GammaShapeCheck {
  bool non_increasing = true;
  bool midpoint_convex = true;
  double worst_convexity_gap = 0.0;
  double slack = 0.0;
};

/// Consecutive finite points must be non-increasing; triples (x_{i-k}, x_i,
/// x_{i+k}) on a uniform grid must satisfy midpoint convexity within slack.
GammaShapeCheck check_gamma_shape(const std::vector<std::pair<double, double>>& curve, double slack);

/// gamma(alpha - nu) - gamma(alpha) <= phi(1) nu / (nu0 - nu) for every nu in
/// nu_grid (within `slack`). Throws HypothesisFailed when gamma(alpha - nu0) is
/// infinite.
LemmaCheckResult check_prop42(const GammaOracle& gamma, double alpha, double nu0, const std::vector<double>& nu_grid,
                              double phi_at_one, double slack);

}  // namespace npc
