#include "npcvx/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "npcvx/error.hpp"

namespace npc {

namespace {

constexpr std::size_t kChunk = 1 << 16;

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

void check_mixing(double p) {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("mixing probability must lie in (0, 1)");
}

}  // namespace

Scenario Scenario::prop31(double alpha, double mixing) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("prop31 alpha must lie in (0, 1)");
  check_mixing(mixing);
  Scenario s;
  s.kind_ = ScenarioKind::prop31;
  s.alpha_ = alpha;
  s.mixing_ = mixing;
  return s;
}

Scenario Scenario::gaussian_1d(double mu_minus, double mu_plus, double sigma, double mixing) {
  if (!(sigma > 0.0) || !std::isfinite(mu_minus) || !std::isfinite(mu_plus)) {
    throw DomainError("gaussian_1d needs finite means and sigma > 0");
  }
  check_mixing(mixing);
  Scenario s;
  s.kind_ = ScenarioKind::gaussian_1d;
  s.mu_minus_ = mu_minus;
  s.mu_plus_ = mu_plus;
  s.sigma_ = sigma;
  s.mixing_ = mixing;
  return s;
}

Scenario Scenario::empirical(Sample sample, double mixing) {
  if (sample.negatives.empty() || sample.positives.empty()) {
    throw EmptySample("custom_csv scenario needs both classes");
  }
  if (sample.negatives.cols() != sample.positives.cols()) {
    throw DimensionMismatch("class samples have different dimensions");
  }
  check_mixing(mixing);
  Scenario s;
  s.kind_ = ScenarioKind::custom_csv;
  s.mixing_ = mixing;
  s.sample_ = std::move(sample);
  return s;
}

Scenario Scenario::from_json(const nlohmann::json& j) {
  std::string kind = j.value("kind", "");
  double p = j.value("p", 0.5);
  if (kind == "prop31" || kind == "uniform") return prop31(j.value("alpha", 0.5), p);
  if (kind == "gaussian_1d") {
    return gaussian_1d(j.value("mu_minus", 0.0), j.value("mu_plus", 2.0), j.value("sigma", 1.0), p);
  }
  if (kind == "custom_csv") throw UnknownScenario("custom_csv scenarios are built from a data file");
  throw UnknownScenario("unknown scenario kind '" + kind + "'");
}

nlohmann::json Scenario::to_json() const {
  switch (kind_) {
    case ScenarioKind::prop31: return {{"kind", "prop31"}, {"alpha", alpha_}, {"p", mixing_}};
    case ScenarioKind::gaussian_1d:
      return {{"kind", "gaussian_1d"}, {"mu_minus", mu_minus_}, {"mu_plus", mu_plus_},
              {"sigma", sigma_}, {"p", mixing_}};
    case ScenarioKind::custom_csv:
      return {{"kind", "custom_csv"}, {"n_minus", sample_->n_minus()},
              {"n_plus", sample_->n_plus()}, {"p", mixing_}};
  }
  return {};
}

std::string Scenario::name() const {
  switch (kind_) {
    case ScenarioKind::prop31: return "prop31";
    case ScenarioKind::gaussian_1d: return "gaussian_1d";
    case ScenarioKind::custom_csv: return "custom_csv";
  }
  return "";
}

std::size_t Scenario::dim() const noexcept {
  return kind_ == ScenarioKind::custom_csv ? sample_->negatives.cols() : 1;
}

double Scenario::draw_scalar(ClassLabel c, Rng& rng) const {
  if (kind_ == ScenarioKind::prop31) return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  return std::normal_distribution<double>(mu(c), sigma_)(rng);
}

FeatureMatrix Scenario::sample(ClassLabel c, std::size_t n, Rng& rng) const {
  if (kind_ == ScenarioKind::custom_csv) {
    const FeatureMatrix& src = c == ClassLabel::negative ? sample_->negatives : sample_->positives;
    FeatureMatrix out(src.cols());
    out.reserve(n);
    std::uniform_int_distribution<std::size_t> pick(0, src.rows() - 1);
    for (std::size_t i = 0; i < n; ++i) out.append_row(src.row(pick(rng)));
    return out;
  }
  std::vector<double> xs(n);
  for (double& x : xs) x = draw_scalar(c, rng);
  return FeatureMatrix(n, 1, std::move(xs));
}

LabeledData Scenario::sample_pooled(std::size_t n, Rng& rng) const {
  LabeledData out{FeatureMatrix(dim()), {}};
  out.features.reserve(n);
  out.labels.reserve(n);
  std::bernoulli_distribution positive(mixing_);
  for (std::size_t i = 0; i < n; ++i) {
    ClassLabel c = positive(rng) ? ClassLabel::positive : ClassLabel::negative;
    FeatureMatrix one = sample(c, 1, rng);
    out.features.append_row(one.row(0));
    out.labels.push_back(static_cast<int>(c));
  }
  return out;
}

std::optional<double> Scenario::cdf(ClassLabel c, double x) const {
  switch (kind_) {
    case ScenarioKind::prop31: return std::clamp(x, 0.0, 1.0);
    case ScenarioKind::gaussian_1d: return normal_cdf((x - mu(c)) / sigma_);
    case ScenarioKind::custom_csv: return std::nullopt;
  }
  return std::nullopt;
}

std::optional<ResponseTable> Scenario::exact_responses(const BaseDictionary& dictionary,
                                                       ClassLabel c) const {
  if (kind_ == ScenarioKind::custom_csv) {
    return ResponseTable::from_points(
        dictionary, c == ClassLabel::negative ? sample_->negatives : sample_->positives);
  }
  if (dictionary.dim() != 1) return std::nullopt;
  auto cells = CellPartition::for_dictionary(dictionary);
  if (!cells) return std::nullopt;
  std::vector<double> probs(cells->num_cells());
  double prev = 0.0;
  for (std::size_t i = 0; i < cells->thresholds().size(); ++i) {
    double f = *cdf(c, cells->thresholds()[i]);
    probs[i] = f - prev;
    prev = f;
  }
  probs.back() = 1.0 - prev;
  return cells->table(probs);
}

ResponseTable Scenario::monte_carlo_responses(const BaseDictionary& dictionary, ClassLabel c,
                                              std::size_t m, std::uint64_t seed) const {
  if (m == 0) throw DomainError("Monte Carlo needs at least one draw");
  if (dictionary.dim() != dim()) throw DimensionMismatch("dictionary and scenario dimensions differ");
  const std::size_t chunks = (m + kChunk - 1) / kChunk;
  auto chunk_size = [&](std::size_t k) { return std::min(kChunk, m - k * kChunk); };

  auto cells = CellPartition::for_dictionary(dictionary);
  if (cells) {
    std::vector<std::vector<double>> counts(chunks, std::vector<double>(cells->num_cells(), 0.0));
    parallel_for(chunks, [&](std::size_t k) {
      Rng rng = make_rng(seed, "mc-draws", k);
      FeatureMatrix xs = sample(c, chunk_size(k), rng);
      for (std::size_t i = 0; i < xs.rows(); ++i) counts[k][cells->cell_of(xs(i, cells->axis()))] += 1.0;
    });
    std::vector<double> freq(cells->num_cells(), 0.0);
    for (const auto& chunk : counts) {
      for (std::size_t i = 0; i < freq.size(); ++i) freq[i] += chunk[i];
    }
    for (double& f : freq) f /= static_cast<double>(m);
    return cells->table(freq);
  }

  const std::size_t nb = dictionary.size();
  std::vector<std::vector<double>> values(chunks);
  parallel_for(chunks, [&](std::size_t k) {
    Rng rng = make_rng(seed, "mc-draws", k);
    FeatureMatrix xs = sample(c, chunk_size(k), rng);
    values[k].resize(xs.rows() * nb);
    for (std::size_t i = 0; i < xs.rows(); ++i) {
      dictionary.evaluate_all(xs.row(i), std::span<double>(values[k].data() + i * nb, nb));
    }
  });
  std::vector<double> all;
  all.reserve(m * nb);
  for (const auto& v : values) all.insert(all.end(), v.begin(), v.end());
  return ResponseTable(nb, std::move(all), std::vector<double>(m, 1.0 / static_cast<double>(m)));
}

}  // namespace npc
