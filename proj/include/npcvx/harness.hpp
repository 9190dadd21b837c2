#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "npcvx/hypothesis.hpp"
#include "npcvx/np_solver.hpp"
#include "npcvx/scenario.hpp"

namespace npc {

/// Per-trial rows for external plotting. Cells are JSON scalars so numbers
/// print in shortest round-trip form.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<nlohmann::json>> rows;

  std::string to_string() const;
};

struct ExperimentResult {
  nlohmann::json summary;
  CsvTable trials;
};

/// Dictionary from a config: either an explicit {"dim", "bases"} object or
/// {"stumps": T, "pilot_size": N, "include_constant": bool}, where stumps are
/// placed at quantiles of a pilot pooled sample drawn from the scenario.
BaseDictionary dictionary_for(const nlohmann::json& desc, const Scenario& scenario, std::uint64_t seed);

/// alpha = 0.5, delta = 0.2; shared by the rate and sampling experiments.
inline NPConfig rate_np_defaults() {
  NPConfig c;
  c.alpha = 0.5;
  c.delta = 0.2;
  return c;
}

// ---------------------------------------------------------------------------
// Counterexample: uniform classes, h_1 = -1, h_2 = 1(x <= alpha) - 1(x > alpha).

struct CounterexampleConfig {
  double alpha = 0.2;
  std::size_t n_minus = 500;
  std::size_t n_plus = 500;
  std::size_t trials = 10000;
  /// Strengthened level is alpha - margin; default 1/sqrt(n_minus).
  std::optional<double> margin;
  /// lambda grid {k / lambda_steps}; must be even so 1/2 is on it.
  std::size_t lambda_steps = 20;

  static CounterexampleConfig from_json(const nlohmann::json& j);
};

ExperimentResult run_counterexample(const CounterexampleConfig& cfg, std::uint64_t seed);

// ---------------------------------------------------------------------------

struct CoverageConfig {
  nlohmann::json scenario = {{"kind", "gaussian_1d"}, {"mu_minus", 0.0}, {"mu_plus", 2.0}, {"sigma", 1.0}};
  nlohmann::json dictionary = {{"stumps", 5}, {"pilot_size", 2000}};
  NPConfig np;
  std::size_t n_minus = 5000;
  std::size_t n_plus = 5000;
  std::size_t trials = 500;
  std::size_t mc_draws = 1'000'000;

  static CoverageConfig from_json(const nlohmann::json& j);
};

ExperimentResult run_type1_coverage(const CoverageConfig& cfg, std::uint64_t seed);

// ---------------------------------------------------------------------------

struct RateConfig {
  nlohmann::json scenario = {{"kind", "gaussian_1d"}, {"mu_minus", 0.0}, {"mu_plus", 2.0}, {"sigma", 1.0}};
  nlohmann::json dictionary = {{"dim", 1},
                               {"bases", {{{"kind", "constant"}, {"value", -1.0}},
                                          {{"kind", "stump"}, {"axis", 0}, {"threshold", 0.0}, {"polarity", 1}}}}};
  NPConfig np = rate_np_defaults();
  std::vector<std::size_t> n_grid = {10000};
  std::size_t trials = 100;
  double gamma_resolution = 1e-4;
  std::size_t mc_draws = 1'000'000;
  /// "population": eps_bar = min R_phi^- / alpha from the population tables
  /// (falls back to "probe" when those are Monte Carlo); "probe": the
  /// empirical upper bound of each trial.
  std::string eps_bar = "population";

  static RateConfig from_json(const nlohmann::json& j);
};

ExperimentResult run_rate_experiment(const RateConfig& cfg, std::uint64_t seed);

// ---------------------------------------------------------------------------

struct SamplingConfig {
  nlohmann::json scenario = {{"kind", "gaussian_1d"}, {"mu_minus", 0.0}, {"mu_plus", 2.0}, {"sigma", 1.0},
                             {"p", 0.5}};
  nlohmann::json dictionary = RateConfig{}.dictionary;
  NPConfig np = rate_np_defaults();
  std::size_t n = 20000;
  std::size_t trials = 100;
  double gamma_resolution = 1e-4;
  std::size_t mc_draws = 1'000'000;
  std::string eps_bar = "population";

  static SamplingConfig from_json(const nlohmann::json& j);
};

ExperimentResult run_sampling_scheme(const SamplingConfig& cfg, std::uint64_t seed);

// ---------------------------------------------------------------------------
// CCP: xi ~ U[0, 1], g_1 = -slope_const, g_2 = 2 xi - 1, objective c . lambda.

struct CCPExperimentConfig {
  double alpha = 0.25;
  double delta = 0.1;
  std::size_t n = 10000;
  std::size_t trials = 200;
  std::size_t fresh_draws = 100000;
  double g1_value = -0.9;
  std::vector<double> objective = {1.0, 0.0};
  Surrogate surrogate = Surrogate::hinge();
  std::size_t quadrature_cells = 100000;

  static CCPExperimentConfig from_json(const nlohmann::json& j);
};

/// P(F(lambda, xi) <= 0) for the synthetic instance.
double ccp_true_satisfaction(double g1_value, std::span<const double> lambda);

ExperimentResult run_ccp_experiment(const CCPExperimentConfig& cfg, std::uint64_t seed);

/// Dispatches on kind: counterexample, coverage, rate, sampling or ccp.
ExperimentResult run_experiment(std::string_view kind, const nlohmann::json& config, std::uint64_t seed);

// ---------------------------------------------------------------------------

struct NPLemmaResult {
  /// Likelihood-ratio threshold k of the most powerful level-alpha test.
  double threshold = 1.0;
  /// Probability of classifying +1 when L(x) = k.
  double randomization = 0.0;
  double type1_error = 0.0;
  double type2_error = 0.0;
  /// Equivalent cut in x for monotone likelihood ratios.
  std::optional<double> x_cut;

  nlohmann::json to_json() const;
};

/// Most powerful test for scenarios with closed-form densities.
NPLemmaResult np_lemma_oracle(const Scenario& scenario, double alpha);

}  // namespace npc
