#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "npcvx/responses.hpp"
#include "npcvx/surrogate.hpp"

namespace npc {

/// Surrogate risk of a response table as a function of lambda, evaluated row
/// by row. For the hinge the risk is affine on the simplex and is evaluated
/// from per-base sums instead.
class TableRisk {
 public:
  TableRisk(const ResponseTable& table, Surrogate phi, ClassSide side);
  double operator()(std::span<const double> lambda) const;

 private:
  const ResponseTable* table_;
  Surrogate phi_;
  double sign_;
  bool affine_ = false;
  double total_ = 0.0;
  std::vector<double> base_sums_;
};

struct GridPoint {
  std::vector<double> lambda;
  double objective = 0.0;
  double constraint = 0.0;
  std::size_t points = 0;
};

/// Number of grid steps K for a resolution 1/K. Throws DomainError unless
/// 1/resolution is an integer.
std::size_t grid_steps(double resolution);

/// Calls fn on every lambda = (k_1, ..., k_M) / K of the simplex grid, in
/// lexicographic order of (k_1, ..., k_M).
void for_each_simplex_point(std::size_t num_bases, std::size_t steps,
                            const std::function<void(std::span<const double>)>& fn);

/// Enumerates lambda = (k_1, ..., k_M) / K over the simplex for M <= 3 in
/// lexicographic order and returns the first minimizer of `objective` among
/// points with constraint(lambda) <= level. Empty when no point is feasible.
std::optional<GridPoint> simplex_grid_search(std::size_t num_bases, double resolution,
                                             const std::function<double(std::span<const double>)>& objective,
                                             const std::function<double(std::span<const double>)>& constraint,
                                             double level);

}  // namespace npc
