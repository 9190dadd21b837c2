#include "npcvx/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "npcvx/error.hpp"
#include "npcvx/grid.hpp"
#include "npcvx/np_solver.hpp"
#include "npcvx/rng.hpp"

namespace npc {

namespace {

constexpr double kLemmaTol = 1e-12;

void check_binomial_args(std::uint64_t n, double q) {
  if (n == 0) throw DomainError("binomial n must be >= 1");
  if (n > kBinomialMaxN) throw DomainError("binomial n exceeds the exact summation range");
  if (!(q > 0.0 && q < 1.0)) throw DomainError("binomial q must lie in (0, 1)");
}

}  // namespace

std::uint64_t ceil_product(std::uint64_t n, double q) {
  const double nd = static_cast<double>(n);
  const double t = nd * q;
  // Products within a few ulps of an integer count as that integer, so a
  // decimal q such as 0.2 behaves like the rational it stands for.
  const double r = std::round(t);
  if (std::abs(t - r) <= 8.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, t)) {
    return static_cast<std::uint64_t>(std::max(0.0, r));
  }
  return static_cast<std::uint64_t>(std::max(0.0, std::ceil(t)));
}

double binomial_tail_from(std::uint64_t n, double q, std::uint64_t k) {
  check_binomial_args(n, q);
  if (k == 0) return 1.0;
  if (k > n) return 0.0;
  const double nd = static_cast<double>(n);
  const double lq = std::log(q);
  const double lp = std::log1p(-q);
  const double lgn = std::lgamma(nd + 1.0);
  auto log_term = [&](std::uint64_t i) {
    const double id = static_cast<double>(i);
    return lgn - std::lgamma(id + 1.0) - std::lgamma(nd - id + 1.0) + id * lq + (nd - id) * lp;
  };
  // Shift by the largest term in range (the mode, clamped to [k, n]).
  std::uint64_t mode = static_cast<std::uint64_t>(std::floor((nd + 1.0) * q));
  mode = std::clamp<std::uint64_t>(mode, k, n);
  const double shift = log_term(mode);
  double sum = 0.0;
  double comp = 0.0;
  for (std::uint64_t i = k; i <= n; ++i) {
    double term = std::exp(log_term(i) - shift);
    if (term == 0.0 && i > mode) break;
    double y = term - comp;
    double s = sum + y;
    comp = (s - sum) - y;
    sum = s;
  }
  return std::clamp(std::exp(shift) * sum, 0.0, 1.0);
}

double binomial_tail_exact(std::uint64_t n, double q, double t) {
  check_binomial_args(n, q);
  if (!std::isfinite(t)) throw DomainError("tail threshold must be finite");
  if (t <= 0.0) return 1.0;
  const double c = std::ceil(t);
  if (c > static_cast<double>(n)) return 0.0;
  return binomial_tail_from(n, q, static_cast<std::uint64_t>(c));
}

nlohmann::json LemmaCheckResult::to_json() const {
  return {{"lemma", lemma},
          {"parameters", parameters},
          {"exact_value", exact_value},
          {"bound_value", bound_value},
          {"holds", holds},
          {"worst_slack", worst_slack}};
}

LemmaCheckResult check_lemma_bin(std::uint64_t n, double q, double t) {
  check_binomial_args(n, q);
  const double nd = static_cast<double>(n);
  if (!(t > 0.0) || t > nd * q / 2.0) throw DomainError("check_lemma_bin needs 0 < t <= n q / 2");
  LemmaCheckResult r;
  r.lemma = "binomial_tail_lower";
  r.parameters = {{"n", n}, {"q", q}, {"t", t}};
  r.exact_value = binomial_tail_exact(n, q, t);
  r.bound_value = -std::expm1(-nd * q * q / 2.0);
  r.worst_slack = r.exact_value - r.bound_value;
  r.holds = r.exact_value >= r.bound_value - kLemmaTol;
  return r;
}

LemmaCheckResult check_lemma_bin2(std::uint64_t n, double q) {
  if (!(q > 0.0 && q <= 0.5)) throw DomainError("check_lemma_bin2 needs 0 < q <= 1/2");
  check_binomial_args(n, q);
  LemmaCheckResult r;
  r.lemma = "binomial_exceeds_mean";
  r.parameters = {{"n", n}, {"q", q}};
  r.exact_value = binomial_tail_from(n, q, ceil_product(n, q));
  r.bound_value = std::min(q, 0.25);
  r.worst_slack = r.exact_value - r.bound_value;
  r.holds = r.exact_value >= r.bound_value - kLemmaTol;
  return r;
}

nlohmann::json LemmaSweepReport::to_json() const {
  return {{"n_max", n_max},
          {"q_count", q_count},
          {"t_points", t_points},
          {"checks_bin", checks_bin},
          {"checks_bin2", checks_bin2},
          {"violations", violations},
          {"all_hold", all_hold()},
          {"worst_bin", worst_bin.to_json()},
          {"worst_bin2", worst_bin2.to_json()}};
}

LemmaSweepReport sweep_binomial_lemmas(std::uint64_t n_max, std::size_t q_count, std::size_t t_points) {
  if (n_max == 0 || n_max > kBinomialMaxN) throw DomainError("n_max out of range");
  if (q_count == 0 || t_points == 0) throw DomainError("q_count and t_points must be positive");

  struct Partial {
    std::size_t bin = 0, bin2 = 0, violations = 0;
    std::optional<LemmaCheckResult> worst_bin, worst_bin2;
  };
  std::vector<Partial> parts(n_max);
  parallel_for(n_max, [&](std::size_t idx) {
    const std::uint64_t n = idx + 1;
    Partial& p = parts[idx];
    for (std::size_t k = 1; k <= q_count; ++k) {
      const double q = static_cast<double>(k) / (2.0 * static_cast<double>(q_count));
      LemmaCheckResult r2 = check_lemma_bin2(n, q);
      ++p.bin2;
      if (!r2.holds) ++p.violations;
      if (!p.worst_bin2 || r2.worst_slack < p.worst_bin2->worst_slack) p.worst_bin2 = r2;
      const double tmax = static_cast<double>(n) * q / 2.0;
      for (std::size_t i = 1; i <= t_points; ++i) {
        const double t = i == t_points ? tmax : tmax * static_cast<double>(i) / static_cast<double>(t_points);
        LemmaCheckResult r = check_lemma_bin(n, q, t);
        ++p.bin;
        if (!r.holds) ++p.violations;
        if (!p.worst_bin || r.worst_slack < p.worst_bin->worst_slack) p.worst_bin = r;
      }
    }
  });

  LemmaSweepReport rep;
  rep.n_max = n_max;
  rep.q_count = q_count;
  rep.t_points = t_points;
  bool first = true;
  for (const auto& p : parts) {
    rep.checks_bin += p.bin;
    rep.checks_bin2 += p.bin2;
    rep.violations += p.violations;
    if (first || p.worst_bin->worst_slack < rep.worst_bin.worst_slack) rep.worst_bin = *p.worst_bin;
    if (first || p.worst_bin2->worst_slack < rep.worst_bin2.worst_slack) rep.worst_bin2 = *p.worst_bin2;
    first = false;
  }
  return rep;
}

nlohmann::json RademacherCheck::to_json() const {
  return {{"holds", holds},
          {"trials", trials},
          {"max_excess", max_excess},
          {"slack", slack},
          {"vertex_attained", vertex_attained}};
}

RademacherCheck check_rademacher_vertex_identity(const BaseDictionary& dictionary, const FeatureMatrix& data,
                                                 std::uint64_t seed, std::size_t trials, double resolution) {
  const std::size_t m = dictionary.size();
  if (m > 4) throw DomainError("Rademacher identity check supports M <= 4");
  if (data.empty()) throw EmptySample("Rademacher check needs data");
  const std::size_t steps = grid_steps(resolution);
  const std::size_t n = data.rows();
  std::vector<double> h(n * m);
  for (std::size_t i = 0; i < n; ++i) dictionary.evaluate_all(data.row(i), std::span<double>(h.data() + i * m, m));
  double sup_norm = 0.0;
  for (double v : h) sup_norm = std::max(sup_norm, std::abs(v));

  RademacherCheck res;
  res.trials = trials;
  res.slack = 2.0 * resolution * sup_norm;
  std::vector<double> excess(trials, 0.0);
  std::vector<char> at_vertex(trials, 0);
  parallel_for(trials, [&](std::size_t t) {
    Rng rng = make_rng(seed, "rademacher", t);
    std::bernoulli_distribution coin(0.5);
    std::vector<double> sigma(n);
    for (double& s : sigma) s = coin(rng) ? 1.0 : -1.0;
    auto rad = [&](std::span<const double> lam) {
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        double z = 0.0;
        for (std::size_t j = 0; j < m; ++j) z += lam[j] * h[i * m + j];
        s += sigma[i] * std::clamp(z, -1.0, 1.0);
      }
      return std::abs(s) / static_cast<double>(n);
    };
    double vertex_max = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      std::vector<double> e(m, 0.0);
      e[j] = 1.0;
      vertex_max = std::max(vertex_max, rad(e));
    }
    double grid_max = 0.0;
    for_each_simplex_point(m, steps, [&](std::span<const double> lam) { grid_max = std::max(grid_max, rad(lam)); });
    excess[t] = grid_max - vertex_max;
    at_vertex[t] = grid_max <= vertex_max + 1e-12;
  });
  for (std::size_t t = 0; t < trials; ++t) {
    res.max_excess = std::max(res.max_excess, excess[t]);
    res.vertex_attained += at_vertex[t] ? 1 : 0;
  }
  res.holds = res.max_excess <= res.slack + 1e-12;
  return res;
}

nlohmann::json SupDeviationResult::to_json() const {
  return {{"trials", trials},       {"violations", violations}, {"violation_rate", violation_rate},
          {"threshold", threshold}, {"max_sup", max_sup},       {"mean_sup", mean_sup}};
}

SupDeviationResult check_sup_deviation(const Scenario& scenario, const BaseDictionary& dictionary,
                                       const Surrogate& phi, std::size_t n, double delta, std::size_t trials,
                                       std::uint64_t seed, double resolution) {
  const std::size_t m = dictionary.size();
  if (m > 3) throw DomainError("sup-deviation check supports M <= 3");
  if (n == 0 || trials == 0) throw DomainError("n and trials must be positive");
  const std::size_t steps = grid_steps(resolution);
  auto exact = scenario.exact_responses(dictionary, ClassLabel::negative);
  ResponseTable population = exact ? std::move(*exact)
                                   : scenario.monte_carlo_responses(dictionary, ClassLabel::negative, 1'000'000,
                                                                    derive_seed(seed, "sup-deviation-population"));
  TableRisk pop_risk(population, phi, ClassSide::negative);

  SupDeviationResult res;
  res.trials = trials;
  res.threshold = kappa(phi.lipschitz(), m, delta) / std::sqrt(static_cast<double>(n));
  std::vector<double> sups(trials);
  parallel_for(trials, [&](std::size_t t) {
    Rng rng = make_rng(seed, "sup-deviation", t);
    ResponseTable emp = ResponseTable::from_points(dictionary, scenario.sample(ClassLabel::negative, n, rng));
    TableRisk emp_risk(emp, phi, ClassSide::negative);
    double sup = 0.0;
    for_each_simplex_point(m, steps, [&](std::span<const double> lam) {
      sup = std::max(sup, std::abs(emp_risk(lam) - pop_risk(lam)));
    });
    sups[t] = sup;
  });
  double total = 0.0;
  for (double s : sups) {
    if (s > res.threshold) ++res.violations;
    res.max_sup = std::max(res.max_sup, s);
    total += s;
  }
  res.mean_sup = total / static_cast<double>(trials);
  res.violation_rate = static_cast<double>(res.violations) / static_cast<double>(trials);
  return res;
}

GammaOracle::GammaOracle(const ResponseTable& negatives, const ResponseTable& positives, const Surrogate& phi,
                         double resolution)
    : resolution_(resolution) {
  const std::size_t m = negatives.num_bases();
  if (m != positives.num_bases()) throw DimensionMismatch("response tables differ in M");
  if (m > 3) throw DomainError("gamma oracle supports M <= 3");
  const std::size_t steps = grid_steps(resolution);
  TableRisk rm(negatives, phi, ClassSide::negative);
  TableRisk rp(positives, phi, ClassSide::positive);
  std::vector<std::pair<double, double>> pts;
  for_each_simplex_point(m, steps, [&](std::span<const double> lam) { pts.emplace_back(rm(lam), rp(lam)); });
  for (std::size_t j = 0; j < m; ++j) {
    std::vector<double> e(m, 0.0);
    e[j] = 1.0;
    max_vertex_r_minus_ = std::max(max_vertex_r_minus_, rm(e));
  }
  std::sort(pts.begin(), pts.end());
  r_minus_.reserve(pts.size());
  prefix_min_.reserve(pts.size());
  double best = std::numeric_limits<double>::infinity();
  for (const auto& [a, b] : pts) {
    best = std::min(best, b);
    r_minus_.push_back(a);
    prefix_min_.push_back(best);
  }
}

double GammaOracle::operator()(double x) const {
  auto it = std::upper_bound(r_minus_.begin(), r_minus_.end(), x);
  if (it == r_minus_.begin()) return std::numeric_limits<double>::infinity();
  return prefix_min_[static_cast<std::size_t>(it - r_minus_.begin()) - 1];
}

std::vector<std::pair<double, double>> gamma_curve(const GammaOracle& gamma, const std::vector<double>& x_grid) {
  std::vector<std::pair<double, double>> out;
  out.reserve(x_grid.size());
  for (double x : x_grid) out.emplace_back(x, gamma(x));
  return out;
}

GammaShapeCheck check_gamma_shape(const std::vector<std::pair<double, double>>& curve, double slack) {
  GammaShapeCheck c;
  c.slack = slack;
  for (std::size_t i = 1; i < curve.size(); ++i) {
    if (std::isfinite(curve[i - 1].second) && curve[i].second > curve[i - 1].second) c.non_increasing = false;
  }
  for (std::size_t i = 1; i + 1 < curve.size(); ++i) {
    for (std::size_t k = 1; k <= i && i + k < curve.size(); ++k) {
      double a = curve[i - k].second, mid = curve[i].second, b = curve[i + k].second;
      if (!std::isfinite(a) || !std::isfinite(b)) continue;
      double gap = mid - 0.5 * (a + b);
      c.worst_convexity_gap = std::max(c.worst_convexity_gap, gap);
    }
  }
  c.midpoint_convex = c.worst_convexity_gap <= slack;
  return c;
}

LemmaCheckResult check_prop42(const GammaOracle& gamma, double alpha, double nu0, const std::vector<double>& nu_grid,
                              double phi_at_one, double slack) {
  if (!(nu0 > 0.0)) throw DomainError("nu0 must be positive");
  const double g0 = gamma(alpha);
  if (!std::isfinite(gamma(alpha - nu0))) {
    throw HypothesisFailed("gamma(alpha - nu0) is infinite: no classifier meets the tightened level");
  }
  LemmaCheckResult r;
  r.lemma = "gamma_increment";
  r.parameters = {{"alpha", alpha}, {"nu0", nu0}, {"points", nu_grid.size()}, {"slack", slack}};
  r.holds = true;
  r.worst_slack = std::numeric_limits<double>::infinity();
  for (double nu : nu_grid) {
    if (!(nu > 0.0 && nu < nu0)) throw DomainError("every nu must lie in (0, nu0)");
    double lhs = gamma(alpha - nu) - g0;
    double rhs = phi_at_one * nu / (nu0 - nu);
    double s = rhs - lhs;
    if (s < r.worst_slack) {
      r.worst_slack = s;
      r.exact_value = lhs;
      r.bound_value = rhs;
    }
    if (lhs > rhs + slack) r.holds = false;
  }
  return r;
}

}  // namespace npc
