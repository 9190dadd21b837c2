#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "npcvx/error.hpp"
#include "npcvx/grid.hpp"
#include "npcvx/np_solver.hpp"
#include "npcvx/simplex_solver.hpp"

using namespace npc;

namespace {

// Response table with one row of constant outputs: R^-(l) and R^+(l) are then
// phi(+-h_l) of a single point.
ResponseTable const_table(std::vector<double> row) {
  const std::size_t m = row.size();
  return ResponseTable(m, std::move(row), {1.0});
}

Sample random_sample(std::mt19937_64& rng, std::size_t n, std::size_t dim, double shift) {
  std::normal_distribution<double> n01;
  std::vector<std::vector<double>> neg(dim, std::vector<double>(n)), pos = neg;
  for (auto& c : neg) for (auto& v : c) v = n01(rng);
  for (auto& c : pos) for (auto& v : c) v = n01(rng) + shift;
  return {FeatureMatrix::from_columns(neg), FeatureMatrix::from_columns(pos)};
}

BaseDictionary random_stumps(std::mt19937_64& rng, std::size_t m, std::size_t dim) {
  std::normal_distribution<double> n01;
  std::uniform_int_distribution<std::size_t> ax(0, dim - 1);
  std::vector<BaseClassifier> b;
  for (std::size_t j = 0; j < m; ++j) b.emplace_back(Stump{ax(rng), 0.5 * n01(rng), (rng() & 1) ? 1 : -1});
  return BaseDictionary(dim, std::move(b));
}

}  // namespace

TEST_CASE("kappa and alpha_kappa") {
  // mpmath, 30 digits
  CHECK(kappa(1.0, 2, 0.1) == doctest::Approx(10.86481212592495590).epsilon(1e-14));
  CHECK(kappa(1.0, 10, 0.1) == doctest::Approx(13.02098904574983397).epsilon(1e-14));
  CHECK(kappa(1.0, 2, 0.2) == doctest::Approx(9.790987322723266094).epsilon(1e-14));
  CHECK(kappa(std::exp(1.0), 3, 0.05) == doctest::Approx(33.64522911110402496).epsilon(1e-14));
  CHECK(alpha_kappa(0.1, 13.0229, 1'000'000) == doctest::Approx(0.0869771).epsilon(1e-12));
  CHECK_THROWS_AS(alpha_kappa(0.1, 13.0229, 100), SampleTooSmall);
  CHECK(alpha_kappa(0.1, 0.0, 7) == 0.1);
  CHECK_THROWS_AS(kappa(1.0, 0, 0.1), DomainError);
  CHECK_THROWS_AS(kappa(1.0, 2, 1.0), DomainError);
}

TEST_CASE("kappa is increasing in M and decreasing in delta") {
  for (std::size_t m = 1; m < 50; ++m) CHECK(kappa(1.0, m + 1, 0.1) > kappa(1.0, m, 0.1));
  for (double d = 0.01; d < 0.95; d += 0.01) CHECK(kappa(1.0, 5, d + 0.01) < kappa(1.0, 5, d));
}

TEST_CASE("n0 and the excess type-II bound") {
  BoundReport b = n0_and_bound(9.79, 0.0, 0.5, 10000, 10000, 2.0);
  CHECK(b.n0 == 6135);  // ceil(78.32^2) = ceil(6134.0224)
  CHECK(b.thm42_bound == doctest::Approx(1.7622).epsilon(1e-12));
  BoundReport exact = n0_and_bound(kappa(1.0, 2, 0.2), 0.0, 0.5, 10000, 10000, 2.0);
  CHECK(exact.n0 == 6136);  // ceil(6135.2597)
  CHECK(exact.thm42_bound == doctest::Approx(1.762377718090187897).epsilon(1e-13));
  std::uint64_t prev = 0;
  double prev_bound = 0.0;
  for (double eps = 0.0; eps < 0.999; eps += 0.01) {
    BoundReport r = n0_and_bound(9.79, eps, 0.5, 10000, 10000, 2.0);
    CHECK(r.n0 >= prev);
    CHECK(r.thm42_bound > prev_bound);
    prev = r.n0;
    prev_bound = r.thm42_bound;
  }
  CHECK(n0_and_bound(9.79, 1.0 - 1e-15, 0.5, 1, 1, 2.0).n0 > 1'000'000'000'000ull);
  CHECK_THROWS_AS(n0_and_bound(9.79, 1.0, 0.5, 1, 1, 2.0), DomainError);
  CHECK(pooled_bound(kappa(1.0, 2, 0.2), 0.0, 0.5, 20000, 0.5, 2.0) ==
        doctest::Approx(2.492378470947290864).epsilon(1e-13));
}

TEST_CASE("split pooled data") {
  LabeledData d{FeatureMatrix::from_columns({{1.0, 2.0, 3.0}}), {-1, -1, 1}};
  Sample s = split_pooled(d);
  CHECK(s.n_minus() == 2);
  CHECK(s.n_plus() == 1);
  CHECK(s.negatives(1, 0) == 2.0);
  LabeledData all_pos{FeatureMatrix::from_columns({{1.0, 2.0}}), {1, 1}};
  CHECK_THROWS_AS(split_pooled(all_pos), OneClassEmpty);
  LabeledData bad{FeatureMatrix::from_columns({{1.0}}), {0}};
  CHECK_THROWS_AS(split_pooled(bad), UnknownLabel);
  CHECK_THROWS_AS(split_pooled(LabeledData{FeatureMatrix(1), {}}), EmptyData);
}

// ---------------------------------------------------------------------------

TEST_CASE("unconstrained minimization on the simplex") {
  LinearFunction f({3.0, 1.0, 2.0});
  auto r = minimize_on_simplex(f);
  CHECK(r.status == SolveStatus::optimal);
  CHECK(r.objective == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(r.lambda[1] == doctest::Approx(1.0).epsilon(1e-8));

  // (x0 - 0.2)^2 + (x1 - 0.3)^2 + (x2 - 0.5)^2 has its minimum inside.
  const std::vector<double> c{0.2, 0.3, 0.5};
  CallbackFunction q(
      3,
      [&](std::span<const double> x) {
        double s = 0.0;
        for (int j = 0; j < 3; ++j) s += (x[j] - c[j]) * (x[j] - c[j]);
        return s;
      },
      [&](std::span<const double> x, std::span<double> g) {
        for (int j = 0; j < 3; ++j) g[j] = 2.0 * (x[j] - c[j]);
      },
      [](std::span<const double>, double scale, std::span<double> h) {
        for (int j = 0; j < 3; ++j) h[j * 3 + j] += 2.0 * scale;
      });
  auto rq = minimize_on_simplex(q);
  CHECK(rq.status == SolveStatus::optimal);
  for (int j = 0; j < 3; ++j) CHECK(rq.lambda[j] == doctest::Approx(c[j]).epsilon(1e-6));
}

TEST_CASE("single-base simplex") {
  LinearFunction f({4.0});
  auto r = minimize_on_simplex(f);
  REQUIRE(r.lambda.size() == 1);
  CHECK(r.lambda[0] == 1.0);
  CHECK(r.objective == 4.0);
}

TEST_CASE("constrained minimization and infeasibility") {
  LinearFunction f({0.0, 1.0});
  LinearFunction g({1.0, 0.0});
  auto r = minimize_on_simplex(f, g, 0.25);
  CHECK(r.status == SolveStatus::optimal);
  CHECK(r.lambda[0] == doctest::Approx(0.25).epsilon(1e-7));
  CHECK(r.constraint <= 0.25 + 1e-8);
  auto bad = minimize_on_simplex(f, g, -0.1);
  CHECK(bad.status == SolveStatus::infeasible);
  CHECK(bad.lambda.empty());
  // Feasible set is a single vertex.
  auto tight = minimize_on_simplex(f, g, 0.0);
  CHECK(tight.status == SolveStatus::optimal);
  CHECK(tight.lambda[0] <= 1e-7);
  CHECK(to_string(SolveStatus::max_iters_exceeded) == "max_iters_exceeded");
}

TEST_CASE("NP example with opposite constants") {
  // h1 = -1, h2 = +1: R^-(l) = 2 (1 - l1), R^+(l) = 2 l1, so at level 0.5
  // the solution is l = (0.75, 0.25) with objective 1.5.
  BaseDictionary d(1, {ConstantBase{-1.0}, ConstantBase{1.0}});
  Sample s{FeatureMatrix::from_columns({{0.1, 0.5, 0.9}}), FeatureMatrix::from_columns({{0.3, 0.7}})};
  NPConfig cfg;
  cfg.alpha = 0.5;
  cfg.kappa_override = 0.0;
  NPSolution sol = solve_np(s, d, cfg);
  REQUIRE(sol.status == SolveStatus::optimal);
  CHECK((*sol.weights)[0] == doctest::Approx(0.75).epsilon(1e-7));
  CHECK(sol.r_plus_phi == doctest::Approx(1.5).epsilon(1e-7));
  CHECK(sol.r_minus_phi <= 0.5 + cfg.solver.feas_tol);
  CHECK(sol.alpha_kappa == 0.5);

  NPSolution grid = grid_oracle_np(s, d, cfg, 1e-4);
  CHECK((*grid.weights)[0] == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(grid.r_plus_phi == doctest::Approx(1.5).epsilon(1e-12));

  cfg.alpha = 0.2;
  cfg.kappa_override = 0.4;  // alpha_kappa = 0.2 - 0.4 / sqrt(3) < 0
  CHECK(solve_np(s, d, cfg).status == SolveStatus::sample_too_small);
  CHECK_FALSE(solve_np(s, d, cfg).has_weights());
  CHECK(solve_np(s, d, cfg).to_json().at("weights").is_null());
}

TEST_CASE("NP single base") {
  BaseDictionary d(1, {ConstantBase{-1.0}});
  Sample s{FeatureMatrix::from_columns({{0.0, 1.0}}), FeatureMatrix::from_columns({{2.0}})};
  NPConfig cfg;
  cfg.alpha = 0.3;
  cfg.kappa_override = 0.1;
  NPSolution sol = solve_np(s, d, cfg);
  REQUIRE(sol.status == SolveStatus::optimal);
  CHECK((*sol.weights)[0] == 1.0);
  CHECK(sol.r_minus_phi == 0.0);
}

TEST_CASE("NP infeasible when every base has type-I risk phi(1)") {
  BaseDictionary d(1, {ConstantBase{1.0}});
  Sample s{FeatureMatrix::from_columns({{0.0}}), FeatureMatrix::from_columns({{1.0}})};
  NPConfig cfg;
  cfg.alpha = 0.9;
  cfg.kappa_override = 0.0;
  CHECK(solve_np(s, d, cfg).status == SolveStatus::infeasible);
  CHECK_THROWS_AS(grid_oracle_np(s, d, cfg, 0.01), Infeasible);
}

TEST_CASE("feasibility probe") {
  ResponseTable neg = const_table({-1.0, 1.0});
  NPConfig cfg;
  cfg.alpha = 0.5;
  cfg.kappa_override = 0.1;
  ProbeResult p = feasibility_probe(neg, 100, cfg, 0.5);
  CHECK(p.feasible);
  CHECK(p.min_r_minus_phi == doctest::Approx(0.0).epsilon(1e-8));
  CHECK(p.level == doctest::Approx(0.24));
  CHECK(p.eps_bar_upper == doctest::Approx(0.02).epsilon(1e-6));
  CHECK(p.minimizer[0] == doctest::Approx(1.0).epsilon(1e-6));

  ProbeResult q = feasibility_probe(const_table({1.0}), 100, cfg, 0.5);
  CHECK_FALSE(q.feasible);
  CHECK(q.min_r_minus_phi == doctest::Approx(2.0));
  CHECK_THROWS_AS(feasibility_probe(neg, 1, cfg, 0.1), SampleTooSmall);
}

TEST_CASE("probe minimum matches the grid on random two-base dictionaries") {
  std::mt19937_64 rng(99);
  for (int t = 0; t < 10; ++t) {
    Sample s = random_sample(rng, 100, 2, 1.0);
    BaseDictionary d = random_stumps(rng, 2, 2);
    ResponseTable tn = ResponseTable::from_points(d, s.negatives);
    NPConfig cfg;
    cfg.alpha = 0.5;
    cfg.kappa_override = 0.0;
    const double probe = feasibility_probe(tn, 100, cfg, 0.5).min_r_minus_phi;
    double grid = 1e9;
    for_each_simplex_point(2, 10000, [&](std::span<const double> l) {
      grid = std::min(grid, surrogate_risk(tn, Surrogate::hinge(), ClassSide::negative, l));
    });
    CHECK(std::abs(probe - grid) <= 1e-4);
  }
}

TEST_CASE("grid enumeration") {
  std::size_t count = 0;
  std::vector<std::vector<double>> first;
  for_each_simplex_point(3, 4, [&](std::span<const double> l) {
    ++count;
    if (first.size() < 3) first.emplace_back(l.begin(), l.end());
    CHECK(l[0] + l[1] + l[2] == doctest::Approx(1.0));
  });
  CHECK(count == 15);
  CHECK(first[0] == std::vector<double>{0.0, 0.0, 1.0});
  CHECK(first[1] == std::vector<double>{0.0, 0.25, 0.75});
  CHECK(grid_steps(1e-4) == 10000);
  CHECK_THROWS_AS(grid_steps(0.3), DomainError);
  CHECK_THROWS_AS(simplex_grid_search(4, 0.1, [](auto) { return 0.0; }, [](auto) { return 0.0; }, 1.0),
                  DomainError);
}

TEST_CASE("grid refinement never increases the oracle objective") {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 5; ++t) {
    Sample s = random_sample(rng, 80, 1, 1.0);
    BaseDictionary d = random_stumps(rng, 3, 1);
    ResponseTable tn = ResponseTable::from_points(d, s.negatives);
    ResponseTable tp = ResponseTable::from_points(d, s.positives);
    const double level = 1.2;
    auto coarse = grid_search_at_level(tn, tp, Surrogate::hinge(), level, 1e-2);
    auto fine = grid_search_at_level(tn, tp, Surrogate::hinge(), level, 1e-3);
    if (!coarse) continue;
    REQUIRE(fine);
    CHECK(fine->objective <= coarse->objective);
  }
}

TEST_CASE("relaxing the level never increases the optimum") {
  std::mt19937_64 rng(6);
  Sample s = random_sample(rng, 150, 2, 1.0);
  BaseDictionary d = random_stumps(rng, 3, 2);
  ResponseTable tn = ResponseTable::from_points(d, s.negatives);
  ResponseTable tp = ResponseTable::from_points(d, s.positives);
  double prev = std::numeric_limits<double>::infinity();
  for (double level = 0.6; level <= 2.0; level += 0.1) {
    auto g = grid_search_at_level(tn, tp, Surrogate::hinge(), level, 1e-2);
    if (!g) continue;
    CHECK(g->objective <= prev);
    prev = g->objective;
    auto r = solve_at_level(tn, tp, Surrogate::hinge(), level);
    CHECK(r.objective <= g->objective + 1e-5);
  }
}

TEST_CASE("solver agrees with the grid oracle for every surrogate") {
  std::mt19937_64 rng(7);
  for (int t = 0; t < 12; ++t) {
    const std::size_t m = 2 + t % 2;
    Sample s = random_sample(rng, 120, 2, 1.0);
    BaseDictionary d = random_stumps(rng, m, 2);
    for (const auto& phi : {Surrogate::hinge(), Surrogate::logit(), Surrogate::exponential()}) {
      ResponseTable tn = ResponseTable::from_points(d, s.negatives);
      ResponseTable tp = ResponseTable::from_points(d, s.positives);
      NPConfig cfg;
      cfg.surrogate = phi;
      cfg.kappa_override = 0.0;
      const double lo = feasibility_probe(tn, 120, cfg, 0.5).min_r_minus_phi;
      double hi = 0.0;
      for (std::size_t j = 0; j < m; ++j) {
        std::vector<double> v(m, 0.0);
        v[j] = 1.0;
        hi = std::max(hi, surrogate_risk(tn, phi, ClassSide::negative, v));
      }
      if (hi - lo < 1e-6) continue;
      const double level = lo + 0.4 * (hi - lo);
      auto r = solve_at_level(tn, tp, phi, level);
      auto g = grid_search_at_level(tn, tp, phi, level, m == 2 ? 1e-4 : 2e-3);
      REQUIRE(r.status == SolveStatus::optimal);
      REQUIRE(g);
      INFO("phi=" << phi.name() << " m=" << m << " t=" << t << " excess=" << r.constraint - level << " lo=" << lo << " hi=" << hi);
      CHECK(r.constraint <= level + 1e-8);
      CHECK(r.objective <= g->objective + 1e-5);
      CHECK(g->objective - r.objective <= phi.value_at_one() * (m == 2 ? 1e-4 : 2e-3) * m + 1e-5);
    }
  }
}

TEST_CASE("solve_np is deterministic") {
  std::mt19937_64 rng(13);
  Sample s = random_sample(rng, 200, 2, 1.0);
  BaseDictionary d(2, {ConstantBase{-1.0}, Stump{0, 0.1, 1}, Stump{1, -0.3, -1}});
  NPConfig cfg;
  cfg.alpha = 0.9;
  cfg.kappa_override = 0.0;
  cfg.surrogate = Surrogate::logit();
  NPSolution a = solve_np(s, d, cfg);
  NPSolution b = solve_np(s, d, cfg);
  REQUIRE(a.has_weights());
  for (std::size_t j = 0; j < 3; ++j) CHECK((*a.weights)[j] == (*b.weights)[j]);
  CHECK(a.to_json().dump() == b.to_json().dump());
}

TEST_CASE("NPConfig JSON") {
  NPConfig c = NPConfig::from_json({{"alpha", 0.2},
                                    {"delta", 0.05},
                                    {"surrogate", "logit"},
                                    {"feas_tol", 1e-9},
                                    {"max_iters", 100},
                                    {"kappa", 0.5}});
  CHECK(c.alpha == 0.2);
  CHECK(c.surrogate.kind() == SurrogateKind::logit);
  CHECK(c.solver.max_iters == 100);
  CHECK(c.kappa_for(7) == 0.5);
  NPConfig t = NPConfig::from_json(
      {{"surrogate", {{"knots", {-1.0, 0.0, 1.0}}, {"values", {0.0, 1.0, 2.5}}, {"lipschitz", 1.5}}}});
  CHECK(t.surrogate.kind() == SurrogateKind::custom);
  CHECK(t.kappa_for(2) == doctest::Approx(1.5 * kappa(1.0, 2, 0.1)));
  CHECK_THROWS_AS(NPConfig::from_json({{"alpha", "x"}}), ConfigError);
  CHECK_THROWS_AS(NPConfig::from_json(nlohmann::json::array()), ConfigError);
  NPConfig bad;
  bad.alpha = 1.5;
  CHECK_THROWS_AS(bad.validate(), DomainError);
}

TEST_CASE("solve_np checks the feature dimension before the sample size") {
  BaseDictionary d(1, {ConstantBase{-1.0}});
  Sample s{FeatureMatrix::from_columns({{0.0}, {1.0}}), FeatureMatrix::from_columns({{0.0}, {1.0}})};
  CHECK_THROWS_AS(solve_np(s, d, NPConfig{}), DimensionMismatch);
}

TEST_CASE("solve_np rejects non-finite features") {
  BaseDictionary d(1, {ConstantBase{-1.0}});
  Sample s{FeatureMatrix::from_columns({{std::nan("")}}), FeatureMatrix::from_columns({{0.0}})};
  CHECK_THROWS_AS(solve_np(s, d, NPConfig{}), NonFiniteValue);
}
