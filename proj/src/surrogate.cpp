#include "npcvx/surrogate.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "npcvx/error.hpp"

namespace npc {

namespace {

constexpr double kDomainSlack = 1e-12;
constexpr double kTableTol = 1e-9;

double sigmoid(double z) noexcept { return 1.0 / (1.0 + std::exp(-z)); }

}  // namespace

Surrogate Surrogate::hinge() { return Surrogate(SurrogateKind::hinge, 1.0, nullptr); }

Surrogate Surrogate::logit() {
  // phi'(z) = sigmoid(z) / ln 2 is increasing, so the sup on [-1, 1] sits at z = 1.
  return Surrogate(SurrogateKind::logit, sigmoid(1.0) / std::numbers::ln2, nullptr);
}

Surrogate Surrogate::exponential() {
  return Surrogate(SurrogateKind::exponential, std::numbers::e, nullptr);
}

Surrogate Surrogate::tabulated(std::vector<double> knots, std::vector<double> values,
                               double lipschitz) {
  if (knots.size() < 2 || knots.size() != values.size()) {
    throw DomainError("tabulated surrogate needs >= 2 knots with one value each");
  }
  if (!(lipschitz > 0.0) || !std::isfinite(lipschitz)) {
    throw DomainError("tabulated surrogate needs a positive finite Lipschitz constant");
  }
  if (std::abs(knots.front() + 1.0) > kDomainSlack || std::abs(knots.back() - 1.0) > kDomainSlack) {
    throw DomainError("tabulated surrogate knots must span exactly [-1, 1]");
  }
  knots.front() = -1.0;
  knots.back() = 1.0;

  auto table = std::make_shared<Table>();
  for (std::size_t i = 0; i < knots.size(); ++i) {
    if (!std::isfinite(knots[i]) || !std::isfinite(values[i])) {
      throw DomainError("tabulated surrogate contains a non-finite entry");
    }
    if (values[i] < -kTableTol) throw DomainError("surrogate must be nonnegative");
    if (i > 0 && !(knots[i] > knots[i - 1])) {
      throw DomainError("tabulated surrogate knots must be strictly increasing");
    }
  }
  std::vector<double> slopes(knots.size() - 1);
  for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
    slopes[i] = (values[i + 1] - values[i]) / (knots[i + 1] - knots[i]);
    if (slopes[i] < -kTableTol) throw DomainError("surrogate must be non-decreasing");
    if (slopes[i] > lipschitz + kTableTol) {
      throw DomainError("declared Lipschitz constant is smaller than a segment slope");
    }
    if (i > 0 && slopes[i] < slopes[i - 1] - kTableTol) {
      throw DomainError("surrogate must be convex (segment slopes non-decreasing)");
    }
  }
  table->knots = std::move(knots);
  table->values = std::move(values);
  table->slopes = std::move(slopes);

  Surrogate s(SurrogateKind::custom, lipschitz, std::move(table));
  if (std::abs(s.value(0.0) - 1.0) > kTableTol) {
    throw DomainError("surrogate must satisfy phi(0) = 1");
  }
  return s;
}

Surrogate Surrogate::from_name(std::string_view name) {
  if (name == "hinge") return hinge();
  if (name == "logit") return logit();
  if (name == "exp" || name == "exponential") return exponential();
  throw ConfigError("unknown surrogate '" + std::string(name) + "' (expected hinge|logit|exp)");
}

std::string Surrogate::name() const {
  switch (kind_) {
    case SurrogateKind::hinge: return "hinge";
    case SurrogateKind::logit: return "logit";
    case SurrogateKind::exponential: return "exp";
    case SurrogateKind::custom: return "custom";
  }
  return "custom";
}

double Surrogate::eval(double z) const {
  if (!(std::abs(z) <= 1.0 + kDomainSlack)) {
    throw DomainError("surrogate argument outside [-1, 1]");
  }
  return value(z);
}

std::size_t Surrogate::segment(double z) const noexcept {
  const auto& k = table_->knots;
  auto it = std::upper_bound(k.begin(), k.end(), z);
  std::size_t idx = it == k.begin() ? 0 : static_cast<std::size_t>(it - k.begin()) - 1;
  return std::min(idx, table_->slopes.size() - 1);
}

double Surrogate::value(double z) const noexcept {
  z = std::clamp(z, -1.0, 1.0);
  switch (kind_) {
    case SurrogateKind::hinge: return std::max(0.0, 1.0 + z);
    case SurrogateKind::logit: return std::log1p(std::exp(z)) / std::numbers::ln2;
    case SurrogateKind::exponential: return std::exp(z);
    case SurrogateKind::custom: {
      std::size_t i = segment(z);
      return table_->values[i] + table_->slopes[i] * (z - table_->knots[i]);
    }
  }
  return 0.0;
}

double Surrogate::derivative(double z) const noexcept {
  z = std::clamp(z, -1.0, 1.0);
  switch (kind_) {
    // (1+z)_+ is linear on the whole domain.
    case SurrogateKind::hinge: return 1.0;
    case SurrogateKind::logit: return sigmoid(z) / std::numbers::ln2;
    case SurrogateKind::exponential: return std::exp(z);
    case SurrogateKind::custom: return table_->slopes[segment(z)];
  }
  return 0.0;
}

double Surrogate::second_derivative(double z) const noexcept {
  z = std::clamp(z, -1.0, 1.0);
  switch (kind_) {
    case SurrogateKind::hinge: return 0.0;
    case SurrogateKind::logit: {
      double s = sigmoid(z);
      return s * (1.0 - s) / std::numbers::ln2;
    }
    case SurrogateKind::exponential: return std::exp(z);
    case SurrogateKind::custom: return 0.0;
  }
  return 0.0;
}

}  // namespace npc
