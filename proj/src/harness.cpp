#include "npcvx/harness.hpp"

#include <algorithm>
#include <boost/math/distributions/normal.hpp>
#include <cmath>
#include <numeric>
#include <sstream>

#include "npcvx/bounds.hpp"
#include "npcvx/ccp.hpp"
#include "npcvx/error.hpp"
#include "npcvx/grid.hpp"
#include "npcvx/risk.hpp"
#include "npcvx/rng.hpp"

namespace npc {

namespace {

using nlohmann::json;

template <class T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key) || j.at(key).is_null()) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
  }
}

void require_object(const json& j) {
  if (!j.is_object()) throw ConfigError("experiment config must be a JSON object");
}

// Keys from j["np"] or the top level; alpha and delta fall back to `base`.
NPConfig np_config_from(const json& j, const NPConfig& base) {
  json sub = json::object();
  if (j.contains("np")) {
    sub = j.at("np");
    if (!sub.is_object()) throw ConfigError("np must be a JSON object");
  } else {
    for (const char* key : {"alpha", "delta", "surrogate", "feas_tol", "opt_tol", "max_iters", "kappa"}) {
      if (j.contains(key)) sub[key] = j.at(key);
    }
  }
  if (!sub.contains("alpha")) sub["alpha"] = base.alpha;
  if (!sub.contains("delta")) sub["delta"] = base.delta;
  return NPConfig::from_json(sub);
}

double median(std::vector<double> v) {
  if (v.empty()) return std::nan("");
  std::sort(v.begin(), v.end());
  const std::size_t k = v.size() / 2;
  return v.size() % 2 ? v[k] : 0.5 * (v[k - 1] + v[k]);
}

double std_error(double p, std::size_t trials) {
  return std::sqrt(std::clamp(p, 0.0, 1.0) * (1.0 - std::clamp(p, 0.0, 1.0)) / static_cast<double>(trials));
}

struct Population {
  ResponseTable negatives;
  ResponseTable positives;
  bool exact = false;
};

Population population_tables(const Scenario& scenario, const BaseDictionary& dict, std::size_t mc_draws,
                             std::uint64_t seed) {
  auto neg = scenario.exact_responses(dict, ClassLabel::negative);
  auto pos = scenario.exact_responses(dict, ClassLabel::positive);
  if (neg && pos && scenario.kind() != ScenarioKind::custom_csv) return {std::move(*neg), std::move(*pos), true};
  return {scenario.monte_carlo_responses(dict, ClassLabel::negative, mc_draws, derive_seed(seed, "population-neg")),
          scenario.monte_carlo_responses(dict, ClassLabel::positive, mc_draws, derive_seed(seed, "population-pos")),
          false};
}

// Min of R_phi^- over the simplex on population tables, divided by alpha.
double population_eps_bar(const Population& pop, const NPConfig& cfg) {
  SurrogateRiskFunction g(pop.negatives, cfg.surrogate, ClassSide::negative);
  SolverOptions opts = cfg.solver;
  opts.gap_tol *= 1e-2;
  double m = minimize_on_simplex(g, opts).objective;
  return std::max(0.0, m) / cfg.alpha;
}

json config_header(const NPConfig& np, const Scenario& scenario, const BaseDictionary& dict) {
  json h = {{"np", np.to_json()}, {"scenario", scenario.to_json()}, {"num_bases", dict.size()}};
  try {
    h["dictionary"] = to_json(dict);
  } catch (const ConfigError&) {
    h["dictionary"] = "not serializable";
  }
  return h;
}

std::vector<double> weights_of(const NPSolution& s) {
  return std::vector<double>(s.weights->values().begin(), s.weights->values().end());
}

}  // namespace

std::string CsvTable::to_string() const {
  std::ostringstream out;
  for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
  out << "\n";
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out << ",";
      if (row[i].is_string()) {
        out << row[i].get<std::string>();
      } else if (row[i].is_boolean()) {
        out << (row[i].get<bool>() ? 1 : 0);
      } else if (row[i].is_null()) {
        out << "";
      } else {
        out << row[i].dump();
      }
    }
    out << "\n";
  }
  return out.str();
}

BaseDictionary dictionary_for(const nlohmann::json& desc, const Scenario& scenario, std::uint64_t seed) {
  if (desc.contains("bases")) {
    BaseDictionary d = dictionary_from_json(desc);
    if (d.dim() != scenario.dim()) throw DimensionMismatch("dictionary and scenario dimensions differ");
    return d;
  }
  if (!desc.contains("stumps")) throw ConfigError("dictionary needs 'bases' or 'stumps'");
  const auto per_axis = get_or<std::size_t>(desc, "stumps", 5);
  const auto pilot = get_or<std::size_t>(desc, "pilot_size", 2000);
  Rng rng = make_rng(seed, "dictionary");
  LabeledData sample = scenario.sample_pooled(pilot, rng);
  BaseDictionary stumps = build_stump_dictionary(sample.features, per_axis);
  if (!get_or<bool>(desc, "include_constant", false)) return stumps;
  std::vector<BaseClassifier> bases{ConstantBase{-1.0}};
  bases.insert(bases.end(), stumps.bases().begin(), stumps.bases().end());
  return BaseDictionary(stumps.dim(), std::move(bases));
}

// ---------------------------------------------------------------------------

CounterexampleConfig CounterexampleConfig::from_json(const nlohmann::json& j) {
  require_object(j);
  CounterexampleConfig c;
  c.alpha = get_or(j, "alpha", c.alpha);
  c.n_minus = get_or(j, "n_minus", c.n_minus);
  c.n_plus = get_or(j, "n_plus", c.n_plus);
  c.trials = get_or(j, "trials", c.trials);
  if (j.contains("margin") && !j.at("margin").is_null()) c.margin = get_or(j, "margin", 0.0);
  c.lambda_steps = get_or(j, "lambda_steps", c.lambda_steps);
  return c;
}

ExperimentResult run_counterexample(const CounterexampleConfig& cfg, std::uint64_t seed) {
  if (!(cfg.alpha > 0.0 && cfg.alpha <= 0.5)) throw DomainError("counterexample needs alpha in (0, 1/2]");
  if (cfg.n_minus == 0 || cfg.n_plus == 0 || cfg.trials == 0) throw DomainError("sizes must be positive");
  if (cfg.lambda_steps == 0 || cfg.lambda_steps % 2) throw DomainError("lambda_steps must be even");
  const double margin = cfg.margin.value_or(1.0 / std::sqrt(static_cast<double>(cfg.n_minus)));
  if (!(margin > 0.0 && margin <= cfg.alpha)) throw DomainError("margin must lie in (0, alpha]");
  const double level = cfg.alpha - margin;
  const Scenario scenario = Scenario::prop31(cfg.alpha);
  const BaseDictionary dict = prop31_dictionary(cfg.alpha);
  const std::uint64_t threshold = ceil_product(cfg.n_minus, cfg.alpha);

  std::vector<double> lambdas(cfg.lambda_steps + 1);
  for (std::size_t k = 0; k <= cfg.lambda_steps; ++k) {
    lambdas[k] = static_cast<double>(k) / static_cast<double>(cfg.lambda_steps);
  }
  // Population benchmark: min R+ over lambda with R- <= alpha.
  double best_true = std::numeric_limits<double>::infinity();
  for (double l : lambdas) {
    auto [rm, rp] = exact_risks_prop31(l, cfg.alpha);
    if (rm <= cfg.alpha) best_true = std::min(best_true, rp);
  }

  struct Row {
    double alpha_n = 0.0;
    bool event = false;
    bool binds = false;
    double lambda_hat = 0.0;
    double r_plus_true = 0.0;
    double excess = 0.0;
  };
  std::vector<Row> rows(cfg.trials);
  parallel_for(cfg.trials, [&](std::size_t t) {
    Rng rng = make_rng(seed, "counterexample", t);
    FeatureMatrix neg = scenario.sample(ClassLabel::negative, cfg.n_minus, rng);
    FeatureMatrix pos = scenario.sample(ClassLabel::positive, cfg.n_plus, rng);
    std::size_t below = 0;
    for (std::size_t i = 0; i < neg.rows(); ++i) below += neg(i, 0) <= cfg.alpha ? 1 : 0;
    ResponseTable tn = ResponseTable::from_points(dict, neg);
    ResponseTable tp = ResponseTable::from_points(dict, pos);
    Row& r = rows[t];
    r.alpha_n = static_cast<double>(below) / static_cast<double>(cfg.n_minus);
    r.event = below >= threshold;
    double best = std::numeric_limits<double>::infinity();
    for (double l : lambdas) {
      std::vector<double> lam{l, 1.0 - l};
      double rm = zero_one_risk(tn, ClassSide::negative, lam);
      if (!(rm <= level)) {
        if (l <= 0.5) r.binds = true;
        continue;
      }
      double rp = zero_one_risk(tp, ClassSide::positive, lam);
      if (rp < best) {
        best = rp;
        r.lambda_hat = l;
      }
    }
    r.r_plus_true = exact_risks_prop31(r.lambda_hat, cfg.alpha).second;
    r.excess = r.r_plus_true - best_true;
  });

  ExperimentResult res;
  res.trials.header = {"trial", "alpha_n", "event", "binds", "lambda_hat", "r_plus_true", "excess"};
  std::size_t events = 0, event_binds = 0, excess_alpha = 0;
  double max_dev = 0.0;
  for (std::size_t t = 0; t < cfg.trials; ++t) {
    const Row& r = rows[t];
    res.trials.rows.push_back({t, r.alpha_n, r.event, r.binds, r.lambda_hat, r.r_plus_true, r.excess});
    if (!r.event) continue;
    ++events;
    if (!r.binds) continue;
    ++event_binds;
    max_dev = std::max(max_dev, std::abs(r.excess - cfg.alpha));
    if (std::abs(r.excess - cfg.alpha) <= 4.0 * std::numeric_limits<double>::epsilon()) ++excess_alpha;
  }
  const double freq = static_cast<double>(events) / static_cast<double>(cfg.trials);
  const double se = std_error(freq, cfg.trials);
  const double exact_p = binomial_tail_from(cfg.n_minus, cfg.alpha, threshold);
  const double se_exact = std_error(exact_p, cfg.trials);
  const double floor = std::min(cfg.alpha, 0.25);
  res.summary = {{"kind", "counterexample"},
                 {"alpha", cfg.alpha},
                 {"n_minus", cfg.n_minus},
                 {"n_plus", cfg.n_plus},
                 {"trials", cfg.trials},
                 {"strengthened_level", level},
                 {"lambda_steps", cfg.lambda_steps},
                 {"population_min_r_plus", best_true},
                 {"event_count", events},
                 {"event_frequency", freq},
                 {"standard_error", se},
                 {"frequency_floor", floor},
                 {"floor_holds", freq >= floor - 3.0 * se},
                 {"exact_event_probability", exact_p},
                 {"matches_exact", std::abs(freq - exact_p) <= 3.0 * se_exact},
                 {"event_and_binding_trials", event_binds},
                 {"excess_equals_alpha_trials", excess_alpha},
                 {"max_abs_excess_minus_alpha", max_dev},
                 {"excess_exact_on_events", excess_alpha == event_binds}};
  return res;
}

// ---------------------------------------------------------------------------

CoverageConfig CoverageConfig::from_json(const nlohmann::json& j) {
  require_object(j);
  CoverageConfig c;
  if (j.contains("scenario")) c.scenario = j.at("scenario");
  if (j.contains("dictionary")) c.dictionary = j.at("dictionary");
  c.np = np_config_from(j, c.np);
  c.n_minus = get_or(j, "n_minus", c.n_minus);
  c.n_plus = get_or(j, "n_plus", c.n_plus);
  c.trials = get_or(j, "trials", c.trials);
  c.mc_draws = get_or(j, "mc_draws", c.mc_draws);
  return c;
}

ExperimentResult run_type1_coverage(const CoverageConfig& cfg, std::uint64_t seed) {
  cfg.np.validate();
  if (cfg.trials == 0 || cfg.n_minus == 0 || cfg.n_plus == 0) throw DomainError("sizes must be positive");
  if (cfg.mc_draws < 100) throw DomainError("mc_draws must be >= 100");
  const Scenario scenario = Scenario::from_json(cfg.scenario);
  const BaseDictionary dict = dictionary_for(cfg.dictionary, scenario, seed);
  const double kap = cfg.np.kappa_for(dict.size());
  const double level = cfg.np.alpha - kap / std::sqrt(static_cast<double>(cfg.n_minus));
  auto exact_neg = scenario.exact_responses(dict, ClassLabel::negative);

  struct Row {
    SolveStatus status = SolveStatus::optimal;
    double emp = 0.0, mc = 0.0, hw = 0.0, exact = std::nan("");
    bool covered = false;
  };
  std::vector<Row> rows(cfg.trials);
  const bool solvable = level > 0.0;
  if (solvable) {
    parallel_for(cfg.trials, [&](std::size_t t) {
      Rng rng = make_rng(seed, "coverage", t);
      Sample s{scenario.sample(ClassLabel::negative, cfg.n_minus, rng),
               scenario.sample(ClassLabel::positive, cfg.n_plus, rng)};
      NPSolution sol = solve_np(s, dict, cfg.np);
      Row& r = rows[t];
      r.status = sol.status;
      if (!sol.weights) return;
      r.emp = sol.r_minus_phi;
      CombinedClassifier h(dict, *sol.weights);
      auto est = monte_carlo_risk(h, cfg.np.surrogate, scenario, RiskKind::type1_phi, cfg.mc_draws,
                                  derive_seed(seed, "coverage-mc", t));
      r.mc = est.estimate;
      r.hw = est.half_width;
      if (exact_neg) r.exact = surrogate_risk(*exact_neg, cfg.np.surrogate, ClassSide::negative, weights_of(sol));
      r.covered = r.mc - r.hw <= cfg.np.alpha;
    });
  } else {
    for (auto& r : rows) r.status = SolveStatus::sample_too_small;
  }

  ExperimentResult res;
  res.trials.header = {"trial", "status", "r_minus_phi_empirical", "r_minus_phi_mc", "half_width",
                       "r_minus_phi_exact", "covered"};
  std::size_t covered = 0, covered_exact = 0, optimal = 0, too_small = 0, infeasible = 0, other = 0;
  double worst = 0.0;
  for (std::size_t t = 0; t < cfg.trials; ++t) {
    const Row& r = rows[t];
    json exact = std::isnan(r.exact) ? json(nullptr) : json(r.exact);
    res.trials.rows.push_back({t, to_string(r.status), r.emp, r.mc, r.hw, exact, r.covered});
    switch (r.status) {
      case SolveStatus::optimal: ++optimal; break;
      case SolveStatus::sample_too_small: ++too_small; break;
      case SolveStatus::infeasible: ++infeasible; break;
      default: ++other; break;
    }
    if (r.covered) ++covered;
    if (!std::isnan(r.exact) && r.exact <= cfg.np.alpha) ++covered_exact;
    if (r.status == SolveStatus::optimal) worst = std::max(worst, r.mc);
  }
  const double coverage = static_cast<double>(covered) / static_cast<double>(cfg.trials);
  res.summary = config_header(cfg.np, scenario, dict);
  res.summary.update({{"kind", "coverage"},
                      {"n_minus", cfg.n_minus},
                      {"n_plus", cfg.n_plus},
                      {"trials", cfg.trials},
                      {"mc_draws", cfg.mc_draws},
                      {"kappa", kap},
                      {"alpha_kappa", level},
                      {"optimal_trials", optimal},
                      {"sample_too_small_trials", too_small},
                      {"infeasible_trials", infeasible},
                      {"other_failures", other},
                      {"covered_trials", covered},
                      {"coverage", coverage},
                      {"coverage_exact", exact_neg ? json(static_cast<double>(covered_exact) /
                                                          static_cast<double>(cfg.trials))
                                                    : json(nullptr)},
                      {"target", 1.0 - cfg.np.delta},
                      {"coverage_holds", coverage >= 1.0 - cfg.np.delta},
                      {"max_true_r_minus_phi", worst}});
  return res;
}

// ---------------------------------------------------------------------------

RateConfig RateConfig::from_json(const nlohmann::json& j) {
  require_object(j);
  RateConfig c;
  if (j.contains("scenario")) c.scenario = j.at("scenario");
  if (j.contains("dictionary")) c.dictionary = j.at("dictionary");
  c.np = np_config_from(j, c.np);
  c.n_grid = get_or(j, "n_grid", c.n_grid);
  c.trials = get_or(j, "trials", c.trials);
  c.gamma_resolution = get_or(j, "gamma_resolution", c.gamma_resolution);
  c.mc_draws = get_or(j, "mc_draws", c.mc_draws);
  c.eps_bar = get_or<std::string>(j, "eps_bar", c.eps_bar);
  return c;
}

ExperimentResult run_rate_experiment(const RateConfig& cfg, std::uint64_t seed) {
  cfg.np.validate();
  if (cfg.n_grid.empty() || cfg.trials == 0) throw DomainError("rate experiment needs sizes and trials");
  if (cfg.eps_bar != "population" && cfg.eps_bar != "probe") throw ConfigError("eps_bar must be population or probe");
  const Scenario scenario = Scenario::from_json(cfg.scenario);
  const BaseDictionary dict = dictionary_for(cfg.dictionary, scenario, seed);
  if (dict.size() > 3) throw DomainError("rate experiment uses the grid oracle (M <= 3)");
  const Population pop = population_tables(scenario, dict, cfg.mc_draws, seed);
  const GammaOracle gamma(pop.negatives, pop.positives, cfg.np.surrogate, cfg.gamma_resolution);
  const double gamma_alpha = gamma(cfg.np.alpha);
  const double kap = cfg.np.kappa_for(dict.size());
  const double phi1 = cfg.np.surrogate.value_at_one();
  const bool use_population = cfg.eps_bar == "population" && pop.exact;
  const double eps_pop = population_eps_bar(pop, cfg.np);
  TableRisk true_plus(pop.positives, cfg.np.surrogate, ClassSide::positive);

  struct Row {
    std::size_t n = 0;
    SolveStatus status = SolveStatus::optimal;
    double excess = 0.0, bound = 0.0, eps_bar = 0.0, eps_probe = 0.0;
    std::uint64_t n0 = 0;
    bool below_n0 = false, within = false;
  };
  std::vector<Row> rows(cfg.n_grid.size() * cfg.trials);
  parallel_for(rows.size(), [&](std::size_t idx) {
    const std::size_t gi = idx / cfg.trials;
    const std::size_t t = idx % cfg.trials;
    const std::size_t n = cfg.n_grid[gi];
    Row& r = rows[idx];
    r.n = n;
    Rng rng = make_rng(seed, "rate", idx);
    Sample s{scenario.sample(ClassLabel::negative, n, rng), scenario.sample(ClassLabel::positive, n, rng)};
    NPSolution sol = solve_np(s, dict, cfg.np);
    r.status = sol.status;
    const double margin = kap / std::sqrt(static_cast<double>(n));
    ResponseTable tn = ResponseTable::from_points(dict, s.negatives);
    SurrogateRiskFunction g(tn, cfg.np.surrogate, ClassSide::negative);
    r.eps_probe = (minimize_on_simplex(g, cfg.np.solver).objective + margin) / cfg.np.alpha;
    r.eps_bar = use_population ? eps_pop : std::min(r.eps_probe, 1.0 - 1e-12);
    BoundReport b = n0_and_bound(kap, r.eps_bar, cfg.np.alpha, n, n, phi1);
    r.bound = b.thm42_bound;
    r.n0 = b.n0;
    r.below_n0 = n < b.n0;
    if (!sol.weights) return;
    r.excess = true_plus(weights_of(sol)) - gamma_alpha;
    r.within = r.excess <= r.bound;
    (void)t;
  });

  ExperimentResult res;
  res.trials.header = {"n",     "trial",   "status",   "excess", "bound", "ratio", "eps_bar",
                       "eps_probe_upper", "n0", "below_n0", "within_bound"};
  json per_n = json::array();
  std::vector<double> log_n, log_med;
  bool all_within = true;
  std::size_t asserted = 0, failures = 0;
  for (std::size_t gi = 0; gi < cfg.n_grid.size(); ++gi) {
    std::vector<double> excesses;
    std::size_t within = 0, solved = 0;
    double max_excess = -std::numeric_limits<double>::infinity(), bound = 0.0;
    bool below = false;
    for (std::size_t t = 0; t < cfg.trials; ++t) {
      const Row& r = rows[gi * cfg.trials + t];
      res.trials.rows.push_back({r.n, t, to_string(r.status), r.excess, r.bound, r.excess / r.bound, r.eps_bar,
                                 r.eps_probe, r.n0, r.below_n0, r.within});
      bound = std::max(bound, r.bound);
      below = below || r.below_n0;
      if (r.status != SolveStatus::optimal) {
        ++failures;
        if (!r.below_n0) all_within = false;
        continue;
      }
      ++solved;
      excesses.push_back(r.excess);
      max_excess = std::max(max_excess, r.excess);
      if (r.within) ++within;
      if (!r.below_n0) {
        ++asserted;
        if (!r.within) all_within = false;
      }
    }
    const double med = median(excesses);
    if (med > 0.0) {
      log_n.push_back(std::log(static_cast<double>(cfg.n_grid[gi])));
      log_med.push_back(std::log(med));
    }
    per_n.push_back({{"n", cfg.n_grid[gi]},
                     {"solved", solved},
                     {"median_excess", excesses.empty() ? json(nullptr) : json(med)},
                     {"max_excess", excesses.empty() ? json(nullptr) : json(max_excess)},
                     {"bound", bound},
                     {"within_bound", within},
                     {"below_n0", below}});
  }
  json slope = nullptr;
  if (log_n.size() >= 2) {
    const double mx = std::accumulate(log_n.begin(), log_n.end(), 0.0) / static_cast<double>(log_n.size());
    const double my = std::accumulate(log_med.begin(), log_med.end(), 0.0) / static_cast<double>(log_med.size());
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < log_n.size(); ++i) {
      sxy += (log_n[i] - mx) * (log_med[i] - my);
      sxx += (log_n[i] - mx) * (log_n[i] - mx);
    }
    slope = sxy / sxx;
  }
  res.summary = config_header(cfg.np, scenario, dict);
  res.summary.update({{"kind", "rate"},
                      {"trials", cfg.trials},
                      {"kappa", kap},
                      {"gamma_alpha", gamma_alpha},
                      {"gamma_resolution", cfg.gamma_resolution},
                      {"population_exact", pop.exact},
                      {"eps_bar_mode", use_population ? "population" : "probe"},
                      {"eps_bar_population", eps_pop},
                      {"per_n", per_n},
                      {"asserted_trials", asserted},
                      {"solver_failures", failures},
                      {"all_within_bound", all_within},
                      {"loglog_slope", slope}});
  return res;
}

// ---------------------------------------------------------------------------

SamplingConfig SamplingConfig::from_json(const nlohmann::json& j) {
  require_object(j);
  SamplingConfig c;
  if (j.contains("scenario")) c.scenario = j.at("scenario");
  if (j.contains("dictionary")) c.dictionary = j.at("dictionary");
  c.np = np_config_from(j, c.np);
  c.n = get_or(j, "n", c.n);
  c.trials = get_or(j, "trials", c.trials);
  c.gamma_resolution = get_or(j, "gamma_resolution", c.gamma_resolution);
  c.mc_draws = get_or(j, "mc_draws", c.mc_draws);
  c.eps_bar = get_or<std::string>(j, "eps_bar", c.eps_bar);
  return c;
}

ExperimentResult run_sampling_scheme(const SamplingConfig& cfg, std::uint64_t seed) {
  cfg.np.validate();
  if (cfg.n == 0 || cfg.trials == 0) throw DomainError("n and trials must be positive");
  if (cfg.eps_bar != "population" && cfg.eps_bar != "probe") throw ConfigError("eps_bar must be population or probe");
  const Scenario scenario = Scenario::from_json(cfg.scenario);
  const double p = scenario.mixing();
  const BaseDictionary dict = dictionary_for(cfg.dictionary, scenario, seed);
  if (dict.size() > 3) throw DomainError("sampling experiment uses the grid oracle (M <= 3)");
  const Population pop = population_tables(scenario, dict, cfg.mc_draws, seed);
  const GammaOracle gamma(pop.negatives, pop.positives, cfg.np.surrogate, cfg.gamma_resolution);
  const double gamma_alpha = gamma(cfg.np.alpha);
  const double kap = cfg.np.kappa_for(dict.size());
  const double phi1 = cfg.np.surrogate.value_at_one();
  const bool use_population = cfg.eps_bar == "population" && pop.exact;
  const double eps_pop = population_eps_bar(pop, cfg.np);
  TableRisk true_minus(pop.negatives, cfg.np.surrogate, ClassSide::negative);
  TableRisk true_plus(pop.positives, cfg.np.surrogate, ClassSide::positive);
  const double nd = static_cast<double>(cfg.n);

  struct Row {
    std::size_t n_minus = 0, n_plus = 0;
    SolveStatus status = SolveStatus::optimal;
    bool one_class = false;
    double r_minus = 0.0, excess = 0.0, bound = 0.0, eps_bar = 0.0;
    bool type1 = false, within = false, joint = false;
  };
  std::vector<Row> rows(cfg.trials);
  parallel_for(cfg.trials, [&](std::size_t t) {
    Rng rng = make_rng(seed, "sampling", t);
    LabeledData pooled = scenario.sample_pooled(cfg.n, rng);
    Row& r = rows[t];
    for (int y : pooled.labels) (y < 0 ? r.n_minus : r.n_plus) += 1;
    Sample s;
    try {
      s = split_pooled(pooled);
    } catch (const OneClassEmpty&) {
      r.one_class = true;
      return;
    }
    NPSolution sol = solve_np(s, dict, cfg.np);
    r.status = sol.status;
    if (use_population) {
      r.eps_bar = eps_pop;
    } else {
      ResponseTable tn = ResponseTable::from_points(dict, s.negatives);
      SurrogateRiskFunction g(tn, cfg.np.surrogate, ClassSide::negative);
      double probe = minimize_on_simplex(g, cfg.np.solver).objective;
      r.eps_bar = std::min((probe + kap / std::sqrt(static_cast<double>(s.n_minus()))) / cfg.np.alpha, 1.0 - 1e-12);
    }
    r.bound = pooled_bound(kap, r.eps_bar, cfg.np.alpha, cfg.n, p, phi1);
    if (!sol.weights) return;
    auto lam = weights_of(sol);
    r.r_minus = true_minus(lam);
    r.excess = true_plus(lam) - gamma_alpha;
    r.type1 = r.r_minus <= cfg.np.alpha;
    r.within = r.excess <= r.bound;
    r.joint = r.type1 && r.within;
  });

  ExperimentResult res;
  res.trials.header = {"trial", "n_minus", "n_plus", "status", "r_minus_phi_true", "excess", "bound",
                       "type1_ok", "bound_ok", "joint"};
  std::size_t joint = 0, type1 = 0, within = 0, one_class = 0, half_tail = 0, mean_tail = 0, sum_ok = 0;
  const std::uint64_t half_threshold = static_cast<std::uint64_t>(std::ceil(nd * (1.0 - p) / 2.0));
  const std::uint64_t mean_threshold = ceil_product(cfg.n, 1.0 - p);
  for (std::size_t t = 0; t < cfg.trials; ++t) {
    const Row& r = rows[t];
    std::string status = r.one_class ? "one_class_empty" : to_string(r.status);
    res.trials.rows.push_back({t, r.n_minus, r.n_plus, status, r.r_minus, r.excess, r.bound, r.type1, r.within,
                               r.joint});
    joint += r.joint;
    type1 += r.type1;
    within += r.within;
    one_class += r.one_class;
    half_tail += r.n_minus >= half_threshold;
    mean_tail += r.n_minus >= mean_threshold;
    sum_ok += r.n_minus + r.n_plus == cfg.n;
  }
  const double T = static_cast<double>(cfg.trials);
  const double freq = static_cast<double>(joint) / T;
  const double target = 1.0 - 2.0 * cfg.np.delta - std::exp(-nd * (1.0 - p) * (1.0 - p) / 2.0) -
                        std::exp(-nd * p * p / 2.0);
  const double se = std_error(target, cfg.trials);
  const double p_half = binomial_tail_from(cfg.n, 1.0 - p, half_threshold);
  const double p_mean = binomial_tail_from(cfg.n, 1.0 - p, mean_threshold);
  const double f_half = static_cast<double>(half_tail) / T;
  const double f_mean = static_cast<double>(mean_tail) / T;
  const bool tails_match = std::abs(f_half - p_half) <= 3.0 * std_error(p_half, cfg.trials) + 1e-12 &&
                           std::abs(f_mean - p_mean) <= 3.0 * std_error(p_mean, cfg.trials) + 1e-12;
  const BoundReport b0 = n0_and_bound(kap, use_population ? eps_pop : 0.0, cfg.np.alpha, 1, 1, phi1);
  res.summary = config_header(cfg.np, scenario, dict);
  res.summary.update({{"kind", "sampling"},
                      {"n", cfg.n},
                      {"p", p},
                      {"trials", cfg.trials},
                      {"kappa", kap},
                      {"gamma_alpha", gamma_alpha},
                      {"eps_bar_mode", use_population ? "population" : "probe"},
                      {"eps_bar_population", eps_pop},
                      {"n0", b0.n0},
                      {"precondition_n_gt_2n0_over_1mp", nd > 2.0 * static_cast<double>(b0.n0) / (1.0 - p)},
                      {"joint_frequency", freq},
                      {"type1_frequency", static_cast<double>(type1) / T},
                      {"bound_frequency", static_cast<double>(within) / T},
                      {"one_class_failures", one_class},
                      {"target", target},
                      {"standard_error", se},
                      {"joint_holds", freq >= target - 3.0 * se},
                      {"partition_always", sum_ok == cfg.trials},
                      {"tail_half_frequency", f_half},
                      {"tail_half_exact", p_half},
                      {"tail_mean_frequency", f_mean},
                      {"tail_mean_exact", p_mean},
                      {"tails_match", tails_match}});
  return res;
}

// ---------------------------------------------------------------------------

CCPExperimentConfig CCPExperimentConfig::from_json(const nlohmann::json& j) {
  require_object(j);
  CCPExperimentConfig c;
  c.alpha = get_or(j, "alpha", c.alpha);
  c.delta = get_or(j, "delta", c.delta);
  c.n = get_or(j, "n", c.n);
  c.trials = get_or(j, "trials", c.trials);
  c.fresh_draws = get_or(j, "fresh_draws", c.fresh_draws);
  c.g1_value = get_or(j, "g1_value", c.g1_value);
  c.objective = get_or(j, "objective", c.objective);
  if (j.contains("surrogate")) c.surrogate = Surrogate::from_name(get_or<std::string>(j, "surrogate", "hinge"));
  c.quadrature_cells = get_or(j, "quadrature_cells", c.quadrature_cells);
  return c;
}

double ccp_true_satisfaction(double g1_value, std::span<const double> lambda) {
  // F = l1 g1 + l2 (2 xi - 1) <= 0  <=>  xi <= (1 - l1 g1 / l2) / 2.
  if (lambda[1] <= 0.0) return lambda[0] * g1_value <= 0.0 ? 1.0 : 0.0;
  return std::clamp((1.0 - lambda[0] * g1_value / lambda[1]) / 2.0, 0.0, 1.0);
}

ExperimentResult run_ccp_experiment(const CCPExperimentConfig& cfg, std::uint64_t seed) {
  if (cfg.objective.size() != 2) throw ConfigError("the synthetic CCP instance has two constraint functions");
  if (!(cfg.g1_value >= -1.0 && cfg.g1_value <= 1.0)) throw DomainError("g1_value must lie in [-1, 1]");
  if (cfg.trials == 0 || cfg.fresh_draws == 0 || cfg.quadrature_cells == 0) throw DomainError("sizes must be positive");
  const Scenario xi_law = Scenario::prop31(0.5);
  const BaseDictionary g(1, {ConstantBase{cfg.g1_value},
                             FunctionBase{"ramp", [](std::span<const double> x) { return 2.0 * x[0] - 1.0; }}},
                         {{0.0}, {1.0}});
  auto objective = std::make_shared<LinearFunction>(cfg.objective);

  // Population program by the midpoint rule on xi.
  std::vector<double> quad_values;
  const double kq = static_cast<double>(cfg.quadrature_cells);
  for (std::size_t k = 0; k < cfg.quadrature_cells; ++k) {
    quad_values.push_back(cfg.g1_value);
    quad_values.push_back(2.0 * (static_cast<double>(k) + 0.5) / kq - 1.0);
  }
  ResponseTable quad(2, std::move(quad_values), std::vector<double>(cfg.quadrature_cells, 1.0 / kq));
  SurrogateRiskFunction pop_constraint(quad, cfg.surrogate, ClassSide::negative);
  SolverOptions fine;
  fine.gap_tol = 1e-11;
  const SimplexSolveResult star = minimize_on_simplex(*objective, pop_constraint, cfg.alpha, fine);
  if (star.status != SolveStatus::optimal) throw Infeasible("population CCP program is infeasible");
  const double f_star = star.objective;
  const double eps = minimize_on_simplex(pop_constraint, fine).objective / cfg.alpha;
  if (!(eps > 0.0 && eps < 1.0)) throw DomainError("instance has no eps in (0, 1)");

  CCPInstance probe_inst = CCPInstance::from_dictionary(objective, g, FeatureMatrix(1, 1, {0.5}), cfg.alpha,
                                                        cfg.delta, cfg.surrogate);
  const double kap = probe_inst.kappa();
  const CCPBound bound = ccp_bound(kap, eps, cfg.alpha, cfg.n, cfg.surrogate.value_at_one());

  struct Row {
    SolveStatus status = SolveStatus::optimal;
    double l1 = 0.0, constraint = 0.0, train_violation = 0.0, fresh_violation = 0.0, hw = 0.0;
    double true_satisfaction = 0.0, gap = 0.0;
    bool feasible_fresh = false, feasible_true = false, fresh_matches = false, within = false;
  };
  std::vector<Row> rows(cfg.trials);
  parallel_for(cfg.trials, [&](std::size_t t) {
    Rng rng = make_rng(seed, "ccp", t);
    FeatureMatrix draws = xi_law.sample(ClassLabel::negative, cfg.n, rng);
    CCPInstance inst = CCPInstance::from_dictionary(objective, g, draws, cfg.alpha, cfg.delta, cfg.surrogate);
    CCPSolution sol = solve_ccp(inst);
    Row& r = rows[t];
    r.status = sol.status;
    if (!sol.weights) return;
    std::vector<double> lam(sol.weights->values().begin(), sol.weights->values().end());
    r.l1 = lam[0];
    r.constraint = sol.empirical_constraint_value;
    r.train_violation = chance_feasibility_estimate(lam, g, draws, cfg.alpha).violation_rate;
    Rng fresh_rng = make_rng(seed, "ccp-fresh", t);
    ChanceEstimate fresh =
        chance_feasibility_estimate(lam, g, xi_law.sample(ClassLabel::negative, cfg.fresh_draws, fresh_rng), cfg.alpha);
    r.fresh_violation = fresh.violation_rate;
    r.hw = fresh.half_width;
    r.feasible_fresh = fresh.feasible_for_original;
    r.true_satisfaction = ccp_true_satisfaction(cfg.g1_value, lam);
    r.feasible_true = r.true_satisfaction >= 1.0 - cfg.alpha;
    const double pv = 1.0 - r.true_satisfaction;
    const double sd = std::sqrt(pv * (1.0 - pv) / static_cast<double>(cfg.fresh_draws));
    r.fresh_matches = std::abs(r.fresh_violation - pv) <= 4.0 * 1.959963984540054 * sd + 1e-12;
    r.gap = sol.objective - f_star;
    r.within = r.gap <= bound.value;
  });

  ExperimentResult res;
  res.trials.header = {"trial", "status", "lambda1", "empirical_constraint", "train_violation", "fresh_violation",
                       "half_width", "true_satisfaction", "feasible_fresh", "feasible_true", "gap", "within_bound"};
  std::size_t feas_fresh = 0, feas_true = 0, matches = 0, within = 0, conservative = 0, optimal = 0;
  double max_gap = -std::numeric_limits<double>::infinity();
  for (std::size_t t = 0; t < cfg.trials; ++t) {
    const Row& r = rows[t];
    res.trials.rows.push_back({t, to_string(r.status), r.l1, r.constraint, r.train_violation, r.fresh_violation, r.hw,
                               r.true_satisfaction, r.feasible_fresh, r.feasible_true, r.gap, r.within});
    if (r.status != SolveStatus::optimal) continue;
    ++optimal;
    feas_fresh += r.feasible_fresh;
    feas_true += r.feasible_true;
    matches += r.fresh_matches;
    within += r.within;
    conservative += r.train_violation <= cfg.alpha;
    max_gap = std::max(max_gap, r.gap);
  }
  const double T = static_cast<double>(cfg.trials);
  const double feas_freq = static_cast<double>(feas_fresh) / T;
  res.summary = {{"kind", "ccp"},
                 {"alpha", cfg.alpha},
                 {"delta", cfg.delta},
                 {"n", cfg.n},
                 {"trials", cfg.trials},
                 {"fresh_draws", cfg.fresh_draws},
                 {"surrogate", cfg.surrogate.name()},
                 {"g1_value", cfg.g1_value},
                 {"objective", cfg.objective},
                 {"kappa", kap},
                 {"level", probe_inst.alpha - kap / std::sqrt(static_cast<double>(cfg.n))},
                 {"f_star_phi", f_star},
                 {"eps", eps},
                 {"bound", bound.value},
                 {"bound_n_threshold", bound.n_threshold},
                 {"n_below_threshold", bound.below_threshold},
                 {"optimal_trials", optimal},
                 {"feasible_frequency", feas_freq},
                 {"feasible_true_frequency", static_cast<double>(feas_true) / T},
                 {"feasible_target", 1.0 - 2.0 * cfg.delta},
                 {"feasible_holds", feas_freq >= 1.0 - 2.0 * cfg.delta},
                 {"fresh_matches_closed_form", matches},
                 {"training_conservative", conservative},
                 {"max_gap", optimal ? json(max_gap) : json(nullptr)},
                 {"within_bound", within},
                 {"all_within_bound", within == cfg.trials}};
  return res;
}

// ---------------------------------------------------------------------------

ExperimentResult run_experiment(std::string_view kind, const json& config, std::uint64_t seed) {
  if (kind == "counterexample") return run_counterexample(CounterexampleConfig::from_json(config), seed);
  if (kind == "coverage") return run_type1_coverage(CoverageConfig::from_json(config), seed);
  if (kind == "rate") return run_rate_experiment(RateConfig::from_json(config), seed);
  if (kind == "sampling") return run_sampling_scheme(SamplingConfig::from_json(config), seed);
  if (kind == "ccp") return run_ccp_experiment(CCPExperimentConfig::from_json(config), seed);
  throw ConfigError("unknown experiment kind '" + std::string(kind) + "'");
}

// ---------------------------------------------------------------------------

nlohmann::json NPLemmaResult::to_json() const {
  return {{"threshold", threshold},
          {"randomization", randomization},
          {"type1_error", type1_error},
          {"type2_error", type2_error},
          {"x_cut", x_cut ? json(*x_cut) : json(nullptr)}};
}

NPLemmaResult np_lemma_oracle(const Scenario& scenario, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("alpha must lie in (0, 1)");
  NPLemmaResult r;
  const bool constant_ratio = scenario.kind() == ScenarioKind::prop31 ||
                              (scenario.kind() == ScenarioKind::gaussian_1d &&
                               scenario.mu(ClassLabel::negative) == scenario.mu(ClassLabel::positive));
  if (scenario.kind() == ScenarioKind::custom_csv) {
    throw UnknownScenario("no closed-form likelihood ratio for custom_csv");
  }
  if (constant_ratio) {
    // L = 1 everywhere: classify +1 with probability alpha.
    r.threshold = 1.0;
    r.randomization = alpha;
    r.type1_error = alpha;
    r.type2_error = 1.0 - alpha;
    return r;
  }
  const double m0 = scenario.mu(ClassLabel::negative);
  const double m1 = scenario.mu(ClassLabel::positive);
  const double s = scenario.sigma();
  boost::math::normal_distribution<double> std_normal(0.0, 1.0);
  const double z = boost::math::quantile(boost::math::complement(std_normal, alpha));
  // log L(x) = (m1 - m0)(x - (m0 + m1)/2) / s^2, monotone in x.
  const double cut = m1 > m0 ? m0 + s * z : m0 - s * z;
  r.x_cut = cut;
  r.threshold = std::exp((m1 - m0) * (cut - 0.5 * (m0 + m1)) / (s * s));
  r.randomization = 0.0;
  r.type1_error = alpha;
  r.type2_error = m1 > m0 ? boost::math::cdf(std_normal, (cut - m1) / s)
                          : boost::math::cdf(boost::math::complement(std_normal, (cut - m1) / s));
  return r;
}

}  // namespace npc
