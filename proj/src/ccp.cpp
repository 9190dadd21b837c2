#include "npcvx/ccp.hpp"

#include <cmath>

#include "npcvx/error.hpp"
#include "npcvx/grid.hpp"
#include "npcvx/np_solver.hpp"

namespace npc {

namespace {

constexpr double kZ95 = 1.959963984540054;

void check_half_open(double v, const char* what) {
  if (!(v > 0.0 && v < 0.5)) throw DomainError(std::string(what) + " must lie in (0, 1/2)");
}

void check_g_values(const FeatureMatrix& g) {
  if (g.empty()) throw EmptySample("CCP needs at least one scenario draw");
  for (double v : g.data()) {
    if (!std::isfinite(v)) throw NonFiniteValue("constraint value is not finite");
    if (v < -1.0 || v > 1.0) throw BaseRangeError("constraint value outside [-1, 1]");
  }
}

CCPInstance make_instance(std::shared_ptr<const ConvexFunction> objective, ResponseTable table, std::size_t n,
                          double alpha, double delta, Surrogate surrogate) {
  CCPInstance inst;
  inst.objective = std::move(objective);
  inst.constraints = std::move(table);
  inst.n = n;
  inst.alpha = alpha;
  inst.delta = delta;
  inst.surrogate = std::move(surrogate);
  inst.validate();
  return inst;
}

}  // namespace

CCPInstance CCPInstance::from_values(std::shared_ptr<const ConvexFunction> objective, const FeatureMatrix& g_values,
                                     double alpha, double delta, Surrogate surrogate) {
  check_g_values(g_values);
  std::vector<double> w(g_values.rows(), 1.0);
  ResponseTable t(g_values.cols(), g_values.data(), std::move(w));
  // Rescale merged counts to frequencies.
  std::vector<double> values;
  std::vector<double> weights;
  for (std::size_t p = 0; p < t.num_rows(); ++p) {
    values.insert(values.end(), t.row(p).begin(), t.row(p).end());
    weights.push_back(t.weight(p) / static_cast<double>(g_values.rows()));
  }
  return make_instance(std::move(objective), ResponseTable(g_values.cols(), std::move(values), std::move(weights)),
                       g_values.rows(), alpha, delta, std::move(surrogate));
}

CCPInstance CCPInstance::from_dictionary(std::shared_ptr<const ConvexFunction> objective,
                                         const BaseDictionary& constraint_bases, const FeatureMatrix& draws,
                                         double alpha, double delta, Surrogate surrogate) {
  if (draws.empty()) throw EmptySample("CCP needs at least one scenario draw");
  return make_instance(std::move(objective), ResponseTable::from_points(constraint_bases, draws), draws.rows(),
                       alpha, delta, std::move(surrogate));
}

void CCPInstance::validate() const {
  if (!objective) throw ConfigError("CCP instance has no objective");
  if (objective->dim() != constraints.num_bases()) {
    throw DimensionMismatch("objective dimension differs from the number of constraint functions");
  }
  if (n == 0) throw EmptySample("CCP needs at least one scenario draw");
  check_half_open(alpha, "alpha");
  check_half_open(delta, "delta");
  if (kappa_override && !(*kappa_override >= 0.0)) throw ConfigError("kappa override must be nonnegative");
}

double CCPInstance::kappa() const {
  return kappa_override ? *kappa_override : npc::kappa(surrogate.lipschitz(), num_bases(), delta);
}

double CCPInstance::level() const { return alpha - kappa() / std::sqrt(static_cast<double>(n)); }

nlohmann::json CCPSolution::to_json() const {
  nlohmann::json j = {{"status", to_string(status)},
                      {"kappa", kappa},
                      {"level", level},
                      {"empirical_constraint_value", empirical_constraint_value},
                      {"objective", objective},
                      {"iterations", iterations}};
  if (weights) {
    j["weights"] = std::vector<double>(weights->values().begin(), weights->values().end());
  } else {
    j["weights"] = nullptr;
  }
  return j;
}

CCPSolution solve_ccp(const CCPInstance& inst, const SolverOptions& opts) {
  inst.validate();
  CCPSolution sol;
  sol.kappa = inst.kappa();
  sol.level = inst.level();
  if (!(sol.level > 0.0)) {
    sol.status = SolveStatus::sample_too_small;
    return sol;
  }
  SurrogateRiskFunction constraint(inst.constraints, inst.surrogate, ClassSide::negative);
  SimplexSolveResult r = minimize_on_simplex(*inst.objective, constraint, sol.level, opts);
  sol.status = r.status;
  sol.iterations = r.iterations;
  sol.empirical_constraint_value = r.constraint;
  if (!r.lambda.empty()) {
    sol.weights = SimplexWeights(r.lambda);
    sol.objective = r.objective;
  }
  return sol;
}

CCPSolution ccp_grid_oracle(const CCPInstance& inst, double resolution) {
  inst.validate();
  CCPSolution sol;
  sol.kappa = inst.kappa();
  sol.level = inst.level();
  if (!(sol.level > 0.0)) throw SampleTooSmall("alpha - kappa/sqrt(n) is not positive");
  TableRisk constraint(inst.constraints, inst.surrogate, ClassSide::negative);
  const ConvexFunction& f = *inst.objective;
  auto best = simplex_grid_search(
      inst.num_bases(), resolution, [&](std::span<const double> l) { return f.value(l); }, std::cref(constraint),
      sol.level);
  if (!best) throw Infeasible("no grid point satisfies the margin constraint");
  sol.weights = SimplexWeights(best->lambda);
  sol.objective = best->objective;
  sol.empirical_constraint_value = best->constraint;
  sol.iterations = best->points;
  return sol;
}

nlohmann::json ChanceEstimate::to_json() const {
  return {{"violation_rate", violation_rate},
          {"feasible_for_original", feasible_for_original},
          {"half_width", half_width},
          {"draws", draws}};
}

ChanceEstimate chance_feasibility_estimate(std::span<const double> lambda, const FeatureMatrix& fresh_g_values,
                                           double alpha) {
  if (fresh_g_values.empty()) throw EmptySample("no fresh draws");
  if (lambda.size() != fresh_g_values.cols()) throw DimensionMismatch("weight vector length mismatch");
  std::size_t violations = 0;
  for (std::size_t i = 0; i < fresh_g_values.rows(); ++i) {
    auto g = fresh_g_values.row(i);
    double f = 0.0;
    for (std::size_t j = 0; j < lambda.size(); ++j) f += lambda[j] * g[j];
    if (f > 0.0) ++violations;
  }
  ChanceEstimate e;
  e.draws = fresh_g_values.rows();
  const double m = static_cast<double>(e.draws);
  e.violation_rate = static_cast<double>(violations) / m;
  e.feasible_for_original = 1.0 - e.violation_rate >= 1.0 - alpha;
  e.half_width = kZ95 * std::sqrt(e.violation_rate * (1.0 - e.violation_rate) / m);
  return e;
}

ChanceEstimate chance_feasibility_estimate(std::span<const double> lambda, const BaseDictionary& constraint_bases,
                                           const FeatureMatrix& fresh_draws, double alpha) {
  if (fresh_draws.empty()) throw EmptySample("no fresh draws");
  const std::size_t m = constraint_bases.size();
  std::vector<double> values(fresh_draws.rows() * m);
  for (std::size_t i = 0; i < fresh_draws.rows(); ++i) {
    constraint_bases.evaluate_all(fresh_draws.row(i), std::span<double>(values.data() + i * m, m));
  }
  return chance_feasibility_estimate(lambda, FeatureMatrix(fresh_draws.rows(), m, std::move(values)), alpha);
}

CCPBound ccp_bound(double kappa, double eps, double alpha, std::size_t n, double phi_at_one) {
  if (!(eps > 0.0 && eps < 1.0)) throw DomainError("eps must lie in (0, 1)");
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("alpha must lie in (0, 1)");
  if (!(kappa > 0.0)) throw DomainError("kappa must be positive");
  if (n == 0) throw DomainError("n must be positive");
  CCPBound b;
  const double q = 4.0 * kappa / ((1.0 - eps) * alpha);
  b.n_threshold = q * q;
  b.below_threshold = static_cast<double>(n) < b.n_threshold;
  b.value = 4.0 * phi_at_one * kappa / ((1.0 - eps) * alpha * std::sqrt(static_cast<double>(n)));
  return b;
}

}  // namespace npc
