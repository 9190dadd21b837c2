#include <cmath>
#include <memory>
#include <random>
#include <vector>

#include "doctest.h"
#include "npcvx/ccp.hpp"
#include "npcvx/error.hpp"
#include "npcvx/harness.hpp"

using namespace npc;

namespace {

FeatureMatrix constant_draws(std::size_t n, std::vector<double> g) {
  FeatureMatrix m(g.size());
  for (std::size_t i = 0; i < n; ++i) m.append_row(g);
  return m;
}

}  // namespace

TEST_CASE("g = -1 everywhere leaves the objective unconstrained") {
  auto f = std::make_shared<LinearFunction>(std::vector<double>{2.0, 0.5, 1.0});
  CCPInstance inst = CCPInstance::from_values(f, constant_draws(10000, {-1.0, -1.0, -1.0}), 0.25, 0.1,
                                              Surrogate::hinge());
  CCPSolution sol = solve_ccp(inst);
  REQUIRE(sol.status == SolveStatus::optimal);
  CHECK(sol.empirical_constraint_value == doctest::Approx(0.0).epsilon(1e-12));
  CHECK((*sol.weights)[1] == doctest::Approx(1.0).epsilon(1e-7));
  CHECK(sol.objective == doctest::Approx(0.5).epsilon(1e-7));
  std::vector<double> lam(sol.weights->values().begin(), sol.weights->values().end());
  CHECK(chance_feasibility_estimate(lam, constant_draws(100, {-1.0, -1.0, -1.0}), 0.25).violation_rate == 0.0);
}

TEST_CASE("opposite constant constraints have a closed-form solution") {
  // F = -l1 + l2 = 1 - 2 l1, hinge gives 2 - 2 l1 <= level, so l1 = 1 - level / 2.
  auto f = std::make_shared<LinearFunction>(std::vector<double>{1.0, 0.0});
  CCPInstance inst = CCPInstance::from_values(f, constant_draws(10000, {-1.0, 1.0}), 0.25, 0.1, Surrogate::hinge());
  CCPSolution sol = solve_ccp(inst);
  REQUIRE(sol.status == SolveStatus::optimal);
  CHECK(sol.level == doctest::Approx(0.25 - kappa(1.0, 2, 0.1) / 100.0));
  CHECK((*sol.weights)[0] == doctest::Approx(std::max(0.0, 1.0 - sol.level / 2.0)).epsilon(1e-7));
  CCPSolution grid = ccp_grid_oracle(inst, 1e-4);
  CHECK(std::abs(grid.objective - sol.objective) <= 1e-4);
}

TEST_CASE("sample too small and infeasible") {
  auto f = std::make_shared<LinearFunction>(std::vector<double>{1.0, 0.0});
  CCPInstance small = CCPInstance::from_values(f, constant_draws(100, {-1.0, 1.0}), 0.25, 0.1, Surrogate::hinge());
  CHECK(solve_ccp(small).status == SolveStatus::sample_too_small);
  CHECK_THROWS_AS(ccp_grid_oracle(small, 0.01), SampleTooSmall);

  CCPInstance bad = CCPInstance::from_values(f, constant_draws(10000, {1.0, 1.0}), 0.25, 0.1, Surrogate::hinge());
  CHECK(solve_ccp(bad).status == SolveStatus::infeasible);
  CHECK_THROWS_AS(ccp_grid_oracle(bad, 0.01), Infeasible);
}

TEST_CASE("instance validation") {
  auto f = std::make_shared<LinearFunction>(std::vector<double>{1.0, 0.0});
  CHECK_THROWS_AS(CCPInstance::from_values(f, constant_draws(10, {-1.0, 1.5}), 0.25, 0.1, Surrogate::hinge()),
                  BaseRangeError);
  CHECK_THROWS_AS(
      CCPInstance::from_values(f, constant_draws(10, {-1.0, std::nan("")}), 0.25, 0.1, Surrogate::hinge()),
      NonFiniteValue);
  CHECK_THROWS_AS(CCPInstance::from_values(f, constant_draws(10, {-1.0, 1.0}), 0.6, 0.1, Surrogate::hinge()),
                  DomainError);
  auto f3 = std::make_shared<LinearFunction>(std::vector<double>{1.0, 0.0, 0.0});
  CHECK_THROWS_AS(CCPInstance::from_values(f3, constant_draws(10, {-1.0, 1.0}), 0.25, 0.1, Surrogate::hinge()),
                  DimensionMismatch);
}

TEST_CASE("chance estimates") {
  const std::vector<double> l{0.0, 1.0};
  auto e = chance_feasibility_estimate(l, constant_draws(50, {-1.0, 1.0}), 0.1);
  CHECK(e.violation_rate == 1.0);
  CHECK_FALSE(e.feasible_for_original);
  CHECK(e.draws == 50);
  // F = 0 is not a violation.
  auto z = chance_feasibility_estimate(std::vector<double>{0.5, 0.5}, constant_draws(10, {-1.0, 1.0}), 0.1);
  CHECK(z.violation_rate == 0.0);
  CHECK(z.feasible_for_original);
}

TEST_CASE("synthetic uniform instance matches the closed form") {
  BaseDictionary g(1, {ConstantBase{-0.9}, FunctionBase{"ramp", [](std::span<const double> x) {
                                               return 2.0 * x[0] - 1.0;
                                             }}});
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  FeatureMatrix xi(1);
  for (int i = 0; i < 100000; ++i) {
    const double v = u(rng);
    xi.append_row(std::span<const double>(&v, 1));
  }
  for (double l1 : {0.0, 0.2, 0.5, 0.8}) {
    const std::vector<double> lam{l1, 1.0 - l1};
    auto e = chance_feasibility_estimate(lam, g, xi, 0.25);
    const double p = 1.0 - ccp_true_satisfaction(-0.9, lam);
    const double hw = 1.959963984540054 * std::sqrt(p * (1.0 - p) / 1e5);
    CHECK(std::abs(e.violation_rate - p) <= 4.0 * hw + 1e-12);
  }
  CHECK(ccp_true_satisfaction(-0.9, std::vector<double>{1.0, 0.0}) == 1.0);
  CHECK(ccp_true_satisfaction(-0.9, std::vector<double>{0.0, 1.0}) == doctest::Approx(0.5));
}

TEST_CASE("training violations stay below alpha") {
  BaseDictionary g(1, {ConstantBase{-0.9}, FunctionBase{"ramp", [](std::span<const double> x) {
                                               return 2.0 * x[0] - 1.0;
                                             }}});
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  FeatureMatrix xi(1);
  for (int i = 0; i < 5000; ++i) {
    const double v = u(rng);
    xi.append_row(std::span<const double>(&v, 1));
  }
  auto f = std::make_shared<LinearFunction>(std::vector<double>{1.0, 0.0});
  for (double alpha : {0.3, 0.4}) {
    CCPInstance inst = CCPInstance::from_dictionary(f, g, xi, alpha, 0.1, Surrogate::hinge());
    CCPSolution sol = solve_ccp(inst);
    REQUIRE(sol.status == SolveStatus::optimal);
    CHECK(sol.empirical_constraint_value <= sol.level + 1e-8);
    std::vector<double> lam(sol.weights->values().begin(), sol.weights->values().end());
    CHECK(chance_feasibility_estimate(lam, g, xi, alpha).violation_rate <= alpha);
  }
}

TEST_CASE("CCP bound") {
  CCPBound b = ccp_bound(10.0, 0.5, 0.25, 1'000'000, 2.0);
  CHECK(b.value == doctest::Approx(0.64).epsilon(1e-14));
  CHECK(b.n_threshold == doctest::Approx(102400.0));
  CHECK_FALSE(b.below_threshold);
  CHECK(ccp_bound(10.0, 0.5, 0.25, 1000, 2.0).below_threshold);
  double prev = 0.0;
  for (double eps = 0.05; eps < 0.999; eps += 0.05) {
    const double v = ccp_bound(10.0, eps, 0.25, 10000, 2.0).value;
    CHECK(v > prev);
    prev = v;
  }
  CHECK(ccp_bound(10.0, 1.0 - 1e-12, 0.25, 10000, 2.0).value > 1e10);
  CHECK_THROWS_AS(ccp_bound(10.0, 1.0, 0.25, 10000, 2.0), DomainError);
}
