#include "npcvx/risk.hpp"

#include <cmath>

#include "npcvx/error.hpp"

namespace npc {

namespace {

constexpr double kZ95 = 1.959963984540054;

template <class Loss>
double mean_over(const CombinedClassifier& h, const FeatureMatrix& xs, const char* what, Loss loss) {
  if (xs.empty()) throw EmptySample(std::string(what) + ": sample is empty");
  if (xs.cols() != h.dictionary().dim()) throw DimensionMismatch("feature dimension does not match dictionary");
  double sum = 0.0;
  for (std::size_t i = 0; i < xs.rows(); ++i) sum += loss(h.evaluate(xs.row(i)));
  return sum / static_cast<double>(xs.rows());
}

ClassLabel label_for(RiskKind k) {
  return k == RiskKind::type1_01 || k == RiskKind::type1_phi ? ClassLabel::negative : ClassLabel::positive;
}

}  // namespace

double empirical_phi_type1(const CombinedClassifier& h, const Surrogate& phi, const FeatureMatrix& negatives) {
  return mean_over(h, negatives, "empirical_phi_type1", [&](double z) { return phi.value(z); });
}

double empirical_phi_type2(const CombinedClassifier& h, const Surrogate& phi, const FeatureMatrix& positives) {
  return mean_over(h, positives, "empirical_phi_type2", [&](double z) { return phi.value(-z); });
}

double empirical_01_type1(const CombinedClassifier& h, const FeatureMatrix& negatives) {
  return mean_over(h, negatives, "empirical_01_type1", [](double z) { return z >= 0.0 ? 1.0 : 0.0; });
}

double empirical_01_type2(const CombinedClassifier& h, const FeatureMatrix& positives) {
  return mean_over(h, positives, "empirical_01_type2", [](double z) { return z <= 0.0 ? 1.0 : 0.0; });
}

nlohmann::json RiskReport::to_json() const {
  return {{"r_minus_01", r_minus_01}, {"r_plus_01", r_plus_01},
          {"r_minus_phi", r_minus_phi}, {"r_plus_phi", r_plus_phi}};
}

RiskReport empirical_risks(const CombinedClassifier& h, const Surrogate& phi, const Sample& sample) {
  return {empirical_01_type1(h, sample.negatives), empirical_01_type2(h, sample.positives),
          empirical_phi_type1(h, phi, sample.negatives), empirical_phi_type2(h, phi, sample.positives)};
}

std::pair<double, double> exact_risks_prop31(double lambda, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("alpha must lie in (0, 1)");
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw DomainError("lambda must lie in [0, 1]");
  double r_minus = lambda <= 0.5 ? alpha : 0.0;
  double r_plus = lambda < 0.5 ? 1.0 - alpha : 1.0;
  return {r_minus, r_plus};
}

BaseDictionary prop31_dictionary(double alpha) {
  return BaseDictionary(1, {ConstantBase{-1.0}, Stump{0, alpha, -1}});
}

RiskKind risk_kind_from_name(const std::string& name) {
  if (name == "type1_01") return RiskKind::type1_01;
  if (name == "type2_01") return RiskKind::type2_01;
  if (name == "type1_phi") return RiskKind::type1_phi;
  if (name == "type2_phi") return RiskKind::type2_phi;
  throw ConfigError("unknown risk kind '" + name + "'");
}

MonteCarloEstimate table_estimate(const ResponseTable& table, const Surrogate& phi, RiskKind which,
                                  std::span<const double> lambda, std::size_t m) {
  auto loss = [&](double z) {
    switch (which) {
      case RiskKind::type1_01: return z >= 0.0 ? 1.0 : 0.0;
      case RiskKind::type2_01: return z <= 0.0 ? 1.0 : 0.0;
      case RiskKind::type1_phi: return phi.value(z);
      case RiskKind::type2_phi: return phi.value(-z);
    }
    return 0.0;
  };
  double mean = 0.0;
  for (std::size_t p = 0; p < table.num_rows(); ++p) mean += table.weight(p) * loss(table.score(p, lambda));
  double var = 0.0;
  for (std::size_t p = 0; p < table.num_rows(); ++p) {
    double d = loss(table.score(p, lambda)) - mean;
    var += table.weight(p) * d * d;
  }
  const double md = static_cast<double>(m);
  if (m > 1) var *= md / (md - 1.0);
  return {mean, kZ95 * std::sqrt(var / md)};
}

MonteCarloEstimate monte_carlo_risk(const CombinedClassifier& h, const Surrogate& phi, const Scenario& scenario,
                                    RiskKind which, std::size_t m, std::uint64_t seed) {
  if (m < 100) throw DomainError("Monte Carlo risk needs m >= 100 draws");
  ResponseTable table = scenario.monte_carlo_responses(h.dictionary(), label_for(which), m, seed);
  return table_estimate(table, phi, which, h.weights().values(), m);
}

}  // namespace npc
