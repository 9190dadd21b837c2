#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "json.hpp"
#include "npcvx/data.hpp"
#include "npcvx/hypothesis.hpp"
#include "npcvx/responses.hpp"
#include "npcvx/simplex_solver.hpp"
#include "npcvx/surrogate.hpp"

namespace npc {

/// min f(lambda) over the simplex subject to
/// (1/n) sum_i phi(F(lambda, xi_i)) <= alpha - kappa / sqrt(n),
/// where F(lambda, xi) = sum_j lambda_j g_j(xi) and g_j takes values in [-1, 1].
struct CCPInstance {
  std::shared_ptr<const ConvexFunction> objective;
  /// Rows (g_1(xi_i), ..., g_M(xi_i)) with weight 1/n.
  ResponseTable constraints;
  std::size_t n = 0;
  double alpha = 0.1;
  double delta = 0.1;
  Surrogate surrogate = Surrogate::hinge();
  std::optional<double> kappa_override;

  /// From pre-evaluated g values, one row per scenario draw.
  static CCPInstance from_values(std::shared_ptr<const ConvexFunction> objective, const FeatureMatrix& g_values,
                                 double alpha, double delta, Surrogate surrogate);
  /// Evaluates the constraint functions (a dictionary over xi) on the draws.
  static CCPInstance from_dictionary(std::shared_ptr<const ConvexFunction> objective,
                                     const BaseDictionary& constraint_bases, const FeatureMatrix& draws,
                                     double alpha, double delta, Surrogate surrogate);

  std::size_t num_bases() const noexcept { return constraints.num_bases(); }
  void validate() const;
  /// Uses M = number of constraint functions.
  double kappa() const;
  /// alpha - kappa / sqrt(n), possibly non-positive.
  double level() const;
};

struct CCPSolution {
  std::optional<SimplexWeights> weights;
  double kappa = 0.0;
  double level = 0.0;
  double empirical_constraint_value = 0.0;
  double objective = 0.0;
  std::size_t iterations = 0;
  SolveStatus status = SolveStatus::optimal;

  nlohmann::json to_json() const;
};

CCPSolution solve_ccp(const CCPInstance& inst, const SolverOptions& opts = {});

/// Grid counterpart of solve_ccp for M <= 3. Throws SampleTooSmall or
/// Infeasible.
CCPSolution ccp_grid_oracle(const CCPInstance& inst, double resolution);

struct ChanceEstimate {
  /// Fraction of draws with F(lambda, xi) > 0.
  double violation_rate = 0.0;
  /// 1 - violation_rate >= 1 - alpha
  bool feasible_for_original = false;
  double half_width = 0.0;
  std::size_t draws = 0;

  nlohmann::json to_json() const;
};

ChanceEstimate chance_feasibility_estimate(std::span<const double> lambda, const FeatureMatrix& fresh_g_values,
                                           double alpha);
ChanceEstimate chance_feasibility_estimate(std::span<const double> lambda, const BaseDictionary& constraint_bases,
                                           const FeatureMatrix& fresh_draws, double alpha);

struct CCPBound {
  double value = 0.0;
  /// (4 kappa / ((1 - eps) alpha))^2
  double n_threshold = 0.0;
  bool below_threshold = false;
};

/// 4 phi(1) kappa / ((1 - eps) alpha sqrt(n)); n below the threshold is
/// flagged, not rejected.
CCPBound ccp_bound(double kappa, double eps, double alpha, std::size_t n, double phi_at_one);

}  // namespace npc
