#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "json.hpp"
#include "npcvx/data.hpp"
#include "npcvx/grid.hpp"
#include "npcvx/hypothesis.hpp"
#include "npcvx/responses.hpp"
#include "npcvx/simplex_solver.hpp"
#include "npcvx/surrogate.hpp"

namespace npc {

/// kappa = 4 sqrt(2) L sqrt(log(2M / delta)).
double kappa(double lipschitz, std::size_t num_bases, double delta);

/// alpha - kappa / sqrt(n_minus); throws SampleTooSmall when not positive.
double alpha_kappa(double alpha, double kappa, std::size_t n_minus);

struct NPConfig {
  double alpha = 0.1;
  double delta = 0.1;
  Surrogate surrogate = Surrogate::hinge();
  SolverOptions solver;
  /// Replaces the kappa formula (0 gives the unstrengthened program).
  std::optional<double> kappa_override;

  void validate() const;
  double kappa_for(std::size_t num_bases) const;

  nlohmann::json to_json() const;
  /// Keys: alpha, delta, surrogate, feas_tol, opt_tol, max_iters, kappa; all optional.
  static NPConfig from_json(const nlohmann::json& j);
};

struct NPSolution {
  std::optional<SimplexWeights> weights;
  double kappa = 0.0;
  double alpha_kappa = 0.0;
  double r_minus_phi = 0.0;
  double r_plus_phi = 0.0;
  std::size_t n_minus = 0;
  std::size_t n_plus = 0;
  std::size_t iterations = 0;
  SolveStatus status = SolveStatus::optimal;

  bool has_weights() const noexcept { return weights.has_value(); }
  nlohmann::json to_json() const;
};

/// Convexified NP classifier: minimize the empirical phi-type-II risk over the
/// simplex subject to the empirical phi-type-I risk <= alpha_kappa.
/// SampleTooSmall and infeasibility are reported through `status`.
NPSolution solve_np(const Sample& sample, const BaseDictionary& dictionary, const NPConfig& cfg);

/// Same program on precomputed response tables (empirical or population).
NPSolution solve_np(const ResponseTable& negatives, const ResponseTable& positives, std::size_t n_minus,
                    std::size_t n_plus, const NPConfig& cfg);

/// min R_phi^+ subject to R_phi^- <= level over the tables, with no kappa logic.
SimplexSolveResult solve_at_level(const ResponseTable& negatives, const ResponseTable& positives,
                                  const Surrogate& phi, double level, const SolverOptions& opts = {});

/// Exhaustive search over the simplex grid {k / K} with K = 1 / resolution,
/// M <= 3. Feasibility is R_phi^- <= level exactly; ties go to the
/// lexicographically smallest lambda.
std::optional<GridPoint> grid_search_at_level(const ResponseTable& negatives, const ResponseTable& positives,
                                              const Surrogate& phi, double level, double resolution);

/// Oracle counterpart of solve_np. Throws Infeasible on an empty feasible grid.
NPSolution grid_oracle_np(const Sample& sample, const BaseDictionary& dictionary, const NPConfig& cfg,
                          double resolution);
NPSolution grid_oracle_np(const ResponseTable& negatives, const ResponseTable& positives, std::size_t n_minus,
                          std::size_t n_plus, const NPConfig& cfg, double resolution);

struct ProbeResult {
  bool feasible = false;
  double min_r_minus_phi = 0.0;
  /// eps * alpha - kappa / sqrt(n_minus)
  double level = 0.0;
  /// (min_r_minus_phi + kappa / sqrt(n_minus)) / alpha
  double eps_bar_upper = 0.0;
  std::vector<double> minimizer;
};

/// Minimizes the empirical phi-type-I risk over the simplex and compares it to
/// eps * alpha - kappa / sqrt(n_minus). Throws SampleTooSmall when that level is
/// not positive.
ProbeResult feasibility_probe(const FeatureMatrix& negatives, const BaseDictionary& dictionary,
                              const NPConfig& cfg, double eps);
ProbeResult feasibility_probe(const ResponseTable& negatives, std::size_t n_minus, const NPConfig& cfg,
                              double eps);

struct BoundReport {
  std::uint64_t n0 = 1;
  double eps_bar_upper = 0.0;
  double thm42_bound = 0.0;

  nlohmann::json to_json() const;
};

/// n0 = ceil((4 kappa / ((1 - eps_bar) alpha))^2) (saturating) and
/// 4 phi(1) kappa / ((1 - eps_bar) alpha sqrt(n-)) + 2 kappa / sqrt(n+).
BoundReport n0_and_bound(double kappa, double eps_bar, double alpha, std::size_t n_minus, std::size_t n_plus,
                         double phi_at_one);

/// Pooled-sample version with sqrt(2) inflation:
/// 4 sqrt(2) phi(1) kappa / ((1 - eps_bar) alpha sqrt(n (1 - p))) + 2 sqrt(2) kappa / sqrt(n p).
double pooled_bound(double kappa, double eps_bar, double alpha, std::size_t n, double p, double phi_at_one);

/// Splits pooled labeled data by label. Throws EmptyData, UnknownLabel or
/// OneClassEmpty.
Sample split_pooled(const LabeledData& pooled);

}  // namespace npc
