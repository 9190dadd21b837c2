#include "npcvx/np_solver.hpp"

#include <cmath>
#include <limits>

#include "npcvx/error.hpp"

namespace npc {

namespace {

void check_unit(double v, const char* what) {
  if (!(v > 0.0 && v < 1.0)) throw DomainError(std::string(what) + " must lie in (0, 1)");
}

Surrogate surrogate_from_json(const nlohmann::json& j) {
  if (j.is_string()) return Surrogate::from_name(j.get<std::string>());
  if (j.is_object()) {
    return Surrogate::tabulated(j.at("knots").get<std::vector<double>>(), j.at("values").get<std::vector<double>>(),
                                j.at("lipschitz").get<double>());
  }
  throw ConfigError("surrogate must be a name or a table");
}

NPSolution base_solution(std::size_t n_minus, std::size_t n_plus, double kap) {
  NPSolution s;
  s.n_minus = n_minus;
  s.n_plus = n_plus;
  s.kappa = kap;
  return s;
}

}  // namespace

double kappa(double lipschitz, std::size_t num_bases, double delta) {
  if (!(lipschitz > 0.0) || !std::isfinite(lipschitz)) throw DomainError("Lipschitz constant must be positive");
  if (num_bases == 0) throw DomainError("kappa needs M >= 1");
  check_unit(delta, "delta");
  return 4.0 * std::sqrt(2.0) * lipschitz * std::sqrt(std::log(2.0 * static_cast<double>(num_bases) / delta));
}

double alpha_kappa(double alpha, double kappa, std::size_t n_minus) {
  if (n_minus == 0) throw EmptySample("alpha_kappa needs n_minus >= 1");
  if (!(kappa >= 0.0)) throw DomainError("kappa must be nonnegative");
  double a = alpha - kappa / std::sqrt(static_cast<double>(n_minus));
  if (!(a > 0.0)) {
    throw SampleTooSmall("alpha - kappa/sqrt(n_minus) = " + std::to_string(a) + " is not positive");
  }
  return a;
}

void NPConfig::validate() const {
  check_unit(alpha, "alpha");
  check_unit(delta, "delta");
  if (!(solver.feas_tol > 0.0) || !(solver.opt_tol > 0.0) || solver.max_iters == 0) {
    throw ConfigError("solver tolerances must be positive");
  }
  if (kappa_override && !(*kappa_override >= 0.0 && std::isfinite(*kappa_override))) {
    throw ConfigError("kappa override must be finite and nonnegative");
  }
}

double NPConfig::kappa_for(std::size_t num_bases) const {
  return kappa_override ? *kappa_override : kappa(surrogate.lipschitz(), num_bases, delta);
}

nlohmann::json NPConfig::to_json() const {
  nlohmann::json j = {{"alpha", alpha},
                      {"delta", delta},
                      {"surrogate", surrogate.name()},
                      {"feas_tol", solver.feas_tol},
                      {"opt_tol", solver.opt_tol},
                      {"max_iters", solver.max_iters}};
  if (kappa_override) j["kappa"] = *kappa_override;
  return j;
}

NPConfig NPConfig::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  NPConfig c;
  try {
    c.alpha = j.value("alpha", c.alpha);
    c.delta = j.value("delta", c.delta);
    if (j.contains("surrogate")) c.surrogate = surrogate_from_json(j.at("surrogate"));
    c.solver.feas_tol = j.value("feas_tol", c.solver.feas_tol);
    c.solver.opt_tol = j.value("opt_tol", c.solver.opt_tol);
    c.solver.max_iters = j.value("max_iters", c.solver.max_iters);
    if (j.contains("kappa") && !j.at("kappa").is_null()) c.kappa_override = j.at("kappa").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad config value: ") + e.what());
  }
  c.validate();
  return c;
}

nlohmann::json NPSolution::to_json() const {
  nlohmann::json j = {{"status", to_string(status)},
                      {"kappa", kappa},
                      {"alpha_kappa", alpha_kappa},
                      {"r_minus_phi", r_minus_phi},
                      {"r_plus_phi", r_plus_phi},
                      {"n_minus", n_minus},
                      {"n_plus", n_plus},
                      {"iterations", iterations}};
  if (weights) {
    j["weights"] = std::vector<double>(weights->values().begin(), weights->values().end());
  } else {
    j["weights"] = nullptr;
  }
  return j;
}

SimplexSolveResult solve_at_level(const ResponseTable& negatives, const ResponseTable& positives,
                                  const Surrogate& phi, double level, const SolverOptions& opts) {
  if (negatives.num_bases() != positives.num_bases()) throw DimensionMismatch("response tables differ in M");
  SurrogateRiskFunction objective(positives, phi, ClassSide::positive);
  SurrogateRiskFunction constraint(negatives, phi, ClassSide::negative);
  return minimize_on_simplex(objective, constraint, level, opts);
}

NPSolution solve_np(const ResponseTable& negatives, const ResponseTable& positives, std::size_t n_minus,
                    std::size_t n_plus, const NPConfig& cfg) {
  cfg.validate();
  if (n_minus == 0 || n_plus == 0) throw EmptySample("solve_np needs both samples nonempty");
  NPSolution sol = base_solution(n_minus, n_plus, cfg.kappa_for(negatives.num_bases()));
  try {
    sol.alpha_kappa = alpha_kappa(cfg.alpha, sol.kappa, n_minus);
  } catch (const SampleTooSmall&) {
    sol.alpha_kappa = cfg.alpha - sol.kappa / std::sqrt(static_cast<double>(n_minus));
    sol.status = SolveStatus::sample_too_small;
    return sol;
  }
  SimplexSolveResult r = solve_at_level(negatives, positives, cfg.surrogate, sol.alpha_kappa, cfg.solver);
  sol.status = r.status;
  sol.iterations = r.iterations;
  sol.r_minus_phi = r.constraint;
  if (!r.lambda.empty()) {
    sol.weights = SimplexWeights(r.lambda);
    sol.r_plus_phi = r.objective;
  }
  return sol;
}

namespace {

void check_sample(const Sample& sample, const BaseDictionary& dictionary) {
  for (const FeatureMatrix* x : {&sample.negatives, &sample.positives}) {
    if (x->cols() != dictionary.dim()) throw DimensionMismatch("feature dimension does not match dictionary");
    for (double v : x->data()) {
      if (!std::isfinite(v)) throw NonFiniteValue("sample contains a non-finite feature");
    }
  }
}

}  // namespace

NPSolution solve_np(const Sample& sample, const BaseDictionary& dictionary, const NPConfig& cfg) {
  if (sample.negatives.empty() || sample.positives.empty()) throw EmptySample("solve_np needs both samples");
  check_sample(sample, dictionary);
  cfg.validate();
  if (cfg.alpha - cfg.kappa_for(dictionary.size()) / std::sqrt(static_cast<double>(sample.n_minus())) <= 0.0) {
    // Skip tabulating the sample; the program is not defined.
    ResponseTable dummy(dictionary.size(), std::vector<double>(dictionary.size(), 0.0), {1.0});
    return solve_np(dummy, dummy, sample.n_minus(), sample.n_plus(), cfg);
  }
  ResponseTable neg = ResponseTable::from_points(dictionary, sample.negatives);
  ResponseTable pos = ResponseTable::from_points(dictionary, sample.positives);
  return solve_np(neg, pos, sample.n_minus(), sample.n_plus(), cfg);
}

std::optional<GridPoint> grid_search_at_level(const ResponseTable& negatives, const ResponseTable& positives,
                                              const Surrogate& phi, double level, double resolution) {
  if (negatives.num_bases() != positives.num_bases()) throw DimensionMismatch("response tables differ in M");
  TableRisk objective(positives, phi, ClassSide::positive);
  TableRisk constraint(negatives, phi, ClassSide::negative);
  return simplex_grid_search(negatives.num_bases(), resolution, std::cref(objective), std::cref(constraint),
                             level);
}

NPSolution grid_oracle_np(const ResponseTable& negatives, const ResponseTable& positives, std::size_t n_minus,
                          std::size_t n_plus, const NPConfig& cfg, double resolution) {
  cfg.validate();
  if (negatives.num_bases() > 3) throw DomainError("grid oracle supports M <= 3");
  NPSolution sol = base_solution(n_minus, n_plus, cfg.kappa_for(negatives.num_bases()));
  sol.alpha_kappa = alpha_kappa(cfg.alpha, sol.kappa, n_minus);
  auto best = grid_search_at_level(negatives, positives, cfg.surrogate, sol.alpha_kappa, resolution);
  if (!best) throw Infeasible("no grid point satisfies the type-I constraint");
  sol.weights = SimplexWeights(best->lambda);
  sol.r_minus_phi = best->constraint;
  sol.r_plus_phi = best->objective;
  sol.iterations = best->points;
  return sol;
}

NPSolution grid_oracle_np(const Sample& sample, const BaseDictionary& dictionary, const NPConfig& cfg,
                          double resolution) {
  if (sample.negatives.empty() || sample.positives.empty()) throw EmptySample("grid oracle needs both samples");
  ResponseTable neg = ResponseTable::from_points(dictionary, sample.negatives);
  ResponseTable pos = ResponseTable::from_points(dictionary, sample.positives);
  return grid_oracle_np(neg, pos, sample.n_minus(), sample.n_plus(), cfg, resolution);
}

ProbeResult feasibility_probe(const ResponseTable& negatives, std::size_t n_minus, const NPConfig& cfg,
                              double eps) {
  cfg.validate();
  check_unit(eps, "eps");
  if (n_minus == 0) throw EmptySample("feasibility probe needs negatives");
  const double margin = cfg.kappa_for(negatives.num_bases()) / std::sqrt(static_cast<double>(n_minus));
  ProbeResult res;
  res.level = eps * cfg.alpha - margin;
  if (!(res.level > 0.0)) throw SampleTooSmall("eps * alpha - kappa/sqrt(n_minus) is not positive");
  SurrogateRiskFunction g(negatives, cfg.surrogate, ClassSide::negative);
  SolverOptions opts = cfg.solver;
  opts.gap_tol = opts.gap_tol * 1e-2;
  SimplexSolveResult r = minimize_on_simplex(g, opts);
  res.min_r_minus_phi = r.objective;
  res.minimizer = r.lambda;
  res.feasible = r.objective <= res.level;
  res.eps_bar_upper = (r.objective + margin) / cfg.alpha;
  return res;
}

ProbeResult feasibility_probe(const FeatureMatrix& negatives, const BaseDictionary& dictionary,
                              const NPConfig& cfg, double eps) {
  if (negatives.empty()) throw EmptySample("feasibility probe needs negatives");
  return feasibility_probe(ResponseTable::from_points(dictionary, negatives), negatives.rows(), cfg, eps);
}

nlohmann::json BoundReport::to_json() const {
  return {{"n0", n0}, {"eps_bar_upper", eps_bar_upper}, {"thm42_bound", thm42_bound}};
}

BoundReport n0_and_bound(double kappa, double eps_bar, double alpha, std::size_t n_minus, std::size_t n_plus,
                         double phi_at_one) {
  if (!(eps_bar >= 0.0 && eps_bar < 1.0)) throw DomainError("eps_bar must lie in [0, 1)");
  check_unit(alpha, "alpha");
  if (!(kappa > 0.0)) throw DomainError("kappa must be positive");
  if (n_minus == 0 || n_plus == 0) throw DomainError("sample sizes must be positive");
  if (!(phi_at_one > 0.0)) throw DomainError("phi(1) must be positive");
  BoundReport b;
  b.eps_bar_upper = eps_bar;
  const double q = 4.0 * kappa / ((1.0 - eps_bar) * alpha);
  const double v = q * q;
  constexpr double kMax = 9.2e18;
  if (!(v < kMax)) {
    b.n0 = std::numeric_limits<std::uint64_t>::max();
  } else {
    // q*q is rounded; the fma residual decides integer-valued cases.
    double c = std::ceil(v);
    if (c == v && std::fma(q, q, -v) > 0.0) c += 1.0;
    b.n0 = std::max<std::uint64_t>(1, static_cast<std::uint64_t>(c));
  }
  b.thm42_bound = 4.0 * phi_at_one * kappa / ((1.0 - eps_bar) * alpha * std::sqrt(static_cast<double>(n_minus))) +
                  2.0 * kappa / std::sqrt(static_cast<double>(n_plus));
  return b;
}

double pooled_bound(double kappa, double eps_bar, double alpha, std::size_t n, double p, double phi_at_one) {
  if (!(eps_bar >= 0.0 && eps_bar < 1.0)) throw DomainError("eps_bar must lie in [0, 1)");
  check_unit(alpha, "alpha");
  check_unit(p, "p");
  if (n == 0) throw DomainError("n must be positive");
  const double nd = static_cast<double>(n);
  return 4.0 * std::sqrt(2.0) * phi_at_one * kappa / ((1.0 - eps_bar) * alpha * std::sqrt(nd * (1.0 - p))) +
         2.0 * std::sqrt(2.0) * kappa / std::sqrt(nd * p);
}

Sample split_pooled(const LabeledData& pooled) {
  if (pooled.features.empty()) throw EmptyData("pooled sample is empty");
  if (pooled.labels.size() != pooled.features.rows()) throw DimensionMismatch("one label per row expected");
  Sample s{FeatureMatrix(pooled.features.cols()), FeatureMatrix(pooled.features.cols())};
  for (std::size_t i = 0; i < pooled.labels.size(); ++i) {
    int y = pooled.labels[i];
    if (y == -1) {
      s.negatives.append_row(pooled.features.row(i));
    } else if (y == 1) {
      s.positives.append_row(pooled.features.row(i));
    } else {
      throw UnknownLabel("label " + std::to_string(y) + " is not -1 or +1");
    }
  }
  if (s.negatives.empty() || s.positives.empty()) throw OneClassEmpty("pooled sample contains a single class");
  return s;
}

}  // namespace npc
