#include "npcvx/hypothesis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "npcvx/error.hpp"

namespace npc {

namespace {

constexpr double kRangeSlack = 1e-12;
constexpr double kSimplexTol = 1e-12;

double stump_output(const Stump& s, std::span<const double> x) noexcept {
  bool above = x[s.axis] > s.threshold;
  return (above == (s.polarity > 0)) ? 1.0 : -1.0;
}

void check_range(double v, std::size_t j) {
  if (!(std::abs(v) <= 1.0 + kRangeSlack)) {
    throw BaseRangeError("base classifier " + std::to_string(j) + " returned a value outside [-1, 1]");
  }
}

}  // namespace

BaseDictionary::BaseDictionary(std::size_t dim, std::vector<BaseClassifier> bases,
                               const std::vector<std::vector<double>>& probes)
    : dim_(dim) {
  if (bases.empty()) throw DomainError("a dictionary needs at least one base classifier");
  for (std::size_t j = 0; j < bases.size(); ++j) {
    const auto& b = bases[j];
    if (const auto* s = std::get_if<Stump>(&b)) {
      if (s->axis >= dim) throw DimensionMismatch("stump axis exceeds the feature dimension");
      if (s->polarity != 1 && s->polarity != -1) throw DomainError("stump polarity must be +1 or -1");
      if (!std::isfinite(s->threshold)) throw NonFiniteValue("stump threshold must be finite");
    } else if (const auto* c = std::get_if<ConstantBase>(&b)) {
      check_range(c->value, j);
    } else {
      const auto& f = std::get<FunctionBase>(b);
      if (!f.fn) throw DomainError("function base '" + f.name + "' is empty");
      for (const auto& p : probes) {
        if (p.size() != dim) throw DimensionMismatch("probe point has the wrong dimension");
        check_range(f.fn(p), j);
      }
    }
  }
  bases_ = std::make_shared<const std::vector<BaseClassifier>>(std::move(bases));
}

double BaseDictionary::evaluate(std::size_t j, std::span<const double> x) const {
  if (x.size() != dim_) throw DimensionMismatch("feature vector has the wrong dimension");
  const auto& b = (*bases_)[j];
  if (const auto* s = std::get_if<Stump>(&b)) return stump_output(*s, x);
  if (const auto* c = std::get_if<ConstantBase>(&b)) return c->value;
  double v = std::get<FunctionBase>(b).fn(x);
  check_range(v, j);
  return std::clamp(v, -1.0, 1.0);
}

void BaseDictionary::evaluate_all(std::span<const double> x, std::span<double> out) const {
  if (x.size() != dim_) throw DimensionMismatch("feature vector has the wrong dimension");
  for (std::size_t j = 0; j < bases_->size(); ++j) {
    const auto& b = (*bases_)[j];
    if (const auto* s = std::get_if<Stump>(&b)) {
      out[j] = stump_output(*s, x);
    } else if (const auto* c = std::get_if<ConstantBase>(&b)) {
      out[j] = c->value;
    } else {
      out[j] = evaluate(j, x);
    }
  }
}

bool BaseDictionary::is_piecewise_constant_1d() const noexcept {
  std::size_t axis = stump_axis();
  for (const auto& b : *bases_) {
    if (std::holds_alternative<FunctionBase>(b)) return false;
    if (const auto* s = std::get_if<Stump>(&b); s && s->axis != axis) return false;
  }
  return true;
}

std::size_t BaseDictionary::stump_axis() const noexcept {
  for (const auto& b : *bases_) {
    if (const auto* s = std::get_if<Stump>(&b)) return s->axis;
  }
  return 0;
}

BaseDictionary build_stump_dictionary(const FeatureMatrix& data, std::size_t per_axis_thresholds) {
  if (data.empty() || data.cols() == 0) throw EmptyData("cannot build stumps from empty data");
  if (per_axis_thresholds == 0) throw DomainError("need at least one threshold per axis");

  const std::size_t n = data.rows();
  std::vector<BaseClassifier> bases;
  std::vector<double> column(n);
  for (std::size_t axis = 0; axis < data.cols(); ++axis) {
    for (std::size_t i = 0; i < n; ++i) column[i] = data(i, axis);
    std::sort(column.begin(), column.end());

    std::vector<double> thresholds;
    for (std::size_t k = 1; k <= per_axis_thresholds; ++k) {
      // Lower empirical quantile at level k / (T + 1).
      double level = static_cast<double>(k) / static_cast<double>(per_axis_thresholds + 1);
      auto idx = static_cast<std::size_t>(std::ceil(level * static_cast<double>(n)));
      idx = std::clamp<std::size_t>(idx, 1, n) - 1;
      thresholds.push_back(column[idx]);
    }
    thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());
    for (double t : thresholds) {
      bases.emplace_back(Stump{axis, t, 1});
      bases.emplace_back(Stump{axis, t, -1});
    }
  }
  return BaseDictionary(data.cols(), std::move(bases));
}

SimplexWeights::SimplexWeights(std::vector<double> lambda) : lambda_(std::move(lambda)) {
  if (lambda_.empty()) throw DomainError("simplex weights must be nonempty");
  double total = 0.0;
  for (double& v : lambda_) {
    if (!std::isfinite(v) || v < 0.0) throw DomainError("simplex weights must be finite and nonnegative");
    total += v;
  }
  if (std::abs(total - 1.0) > kSimplexTol) throw DomainError("simplex weights must sum to 1");
}

SimplexWeights SimplexWeights::vertex(std::size_t m, std::size_t j) {
  std::vector<double> v(m, 0.0);
  v.at(j) = 1.0;
  return SimplexWeights(std::move(v));
}

SimplexWeights SimplexWeights::uniform(std::size_t m) {
  std::vector<double> v(m, 1.0 / static_cast<double>(m));
  // Put the rounding residue on the last coordinate.
  v.back() = 1.0 - std::accumulate(v.begin(), v.end() - 1, 0.0);
  return SimplexWeights(std::move(v));
}

CombinedClassifier::CombinedClassifier(BaseDictionary dictionary, SimplexWeights weights)
    : dictionary_(std::move(dictionary)), weights_(std::move(weights)) {
  if (weights_.size() != dictionary_.size()) {
    throw DimensionMismatch("weight vector length differs from dictionary size");
  }
}

double CombinedClassifier::evaluate(std::span<const double> x) const {
  double score = 0.0;
  for (std::size_t j = 0; j < dictionary_.size(); ++j) {
    score += weights_[j] * dictionary_.evaluate(j, x);
  }
  return std::clamp(score, -1.0, 1.0);
}

int CombinedClassifier::predict_sign(std::span<const double> x) const { return sign_of(evaluate(x)); }

nlohmann::json to_json(const BaseDictionary& dictionary) {
  nlohmann::json bases = nlohmann::json::array();
  for (const auto& b : dictionary.bases()) {
    if (const auto* s = std::get_if<Stump>(&b)) {
      bases.push_back({{"kind", "stump"}, {"axis", s->axis}, {"threshold", s->threshold},
                       {"polarity", s->polarity}});
    } else if (const auto* c = std::get_if<ConstantBase>(&b)) {
      bases.push_back({{"kind", "constant"}, {"value", c->value}});
    } else {
      throw ConfigError("function base '" + std::get<FunctionBase>(b).name + "' is not serializable");
    }
  }
  return {{"dim", dictionary.dim()}, {"bases", bases}};
}

BaseDictionary dictionary_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("bases") || !j["bases"].is_array()) {
    throw ConfigError("dictionary JSON needs a 'bases' array");
  }
  std::vector<BaseClassifier> bases;
  std::size_t dim = j.value("dim", std::size_t{1});
  for (const auto& b : j["bases"]) {
    std::string kind = b.value("kind", "");
    if (kind == "stump") {
      bases.emplace_back(Stump{b.at("axis").get<std::size_t>(), b.at("threshold").get<double>(),
                               b.at("polarity").get<int>()});
    } else if (kind == "constant") {
      bases.emplace_back(ConstantBase{b.at("value").get<double>()});
    } else {
      throw ConfigError("unknown base kind '" + kind + "'");
    }
  }
  return BaseDictionary(dim, std::move(bases));
}

}  // namespace npc
