#pragma once

#include <cstdint>
#include <utility>

#include "json.hpp"
#include "npcvx/data.hpp"
#include "npcvx/hypothesis.hpp"
#include "npcvx/scenario.hpp"
#include "npcvx/surrogate.hpp"

namespace npc {

/// (1/n-) sum phi(h(X-_i)).
double empirical_phi_type1(const CombinedClassifier& h, const Surrogate& phi, const FeatureMatrix& negatives);
/// (1/n+) sum phi(-h(X+_i)).
double empirical_phi_type2(const CombinedClassifier& h, const Surrogate& phi, const FeatureMatrix& positives);
/// (1/n-) sum 1(h(X-_i) >= 0).
double empirical_01_type1(const CombinedClassifier& h, const FeatureMatrix& negatives);
/// (1/n+) sum 1(h(X+_i) <= 0).
double empirical_01_type2(const CombinedClassifier& h, const FeatureMatrix& positives);

struct RiskReport {
  double r_minus_01 = 0.0;
  double r_plus_01 = 0.0;
  double r_minus_phi = 0.0;
  double r_plus_phi = 0.0;

  nlohmann::json to_json() const;
};

RiskReport empirical_risks(const CombinedClassifier& h, const Surrogate& phi, const Sample& sample);

/// True (R-, R+) of h_lambda = lambda h_1 + (1 - lambda) h_2 in the uniform
/// counterexample with h_1 = -1 and h_2 = 1(x <= alpha) - 1(x > alpha).
std::pair<double, double> exact_risks_prop31(double lambda, double alpha);

/// The two-base dictionary {h_1, h_2} of the counterexample.
BaseDictionary prop31_dictionary(double alpha);

enum class RiskKind { type1_01, type2_01, type1_phi, type2_phi };

RiskKind risk_kind_from_name(const std::string& name);

struct MonteCarloEstimate {
  double estimate = 0.0;
  double half_width = 0.0;  // normal-approximation 95% half-width
};

/// Mean of the requested loss over m draws from the matching class
/// conditional of `scenario`. Requires m >= 100.
MonteCarloEstimate monte_carlo_risk(const CombinedClassifier& h, const Surrogate& phi, const Scenario& scenario,
                                    RiskKind which, std::size_t m, std::uint64_t seed);

/// Weighted mean and 95% half-width of a loss over a Monte Carlo response
/// table built from m draws.
MonteCarloEstimate table_estimate(const ResponseTable& table, const Surrogate& phi, RiskKind which,
                                  std::span<const double> lambda, std::size_t m);

}  // namespace npc
