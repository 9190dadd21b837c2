#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace npc {

// Every library error carries a short machine-readable code. Validation
// errors are problems with the caller's input (bad parameters, bad files);
// everything else is a runtime failure.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& what, bool validation)
      : std::runtime_error(what), code_(std::move(code)), validation_(validation) {}

  const std::string& code() const noexcept { return code_; }
  bool is_validation() const noexcept { return validation_; }

 private:
  std::string code_;
  bool validation_;
};

struct DomainError : Error {
  explicit DomainError(const std::string& w) : Error("domain", w, true) {}
};
struct ConfigError : Error {
  explicit ConfigError(const std::string& w) : Error("config", w, true) {}
};
struct SchemaError : Error {
  explicit SchemaError(const std::string& w) : Error("schema", w, true) {}
};
struct NonFiniteValue : Error {
  explicit NonFiniteValue(const std::string& w) : Error("non_finite", w, true) {}
};
struct UnknownLabel : Error {
  explicit UnknownLabel(const std::string& w) : Error("unknown_label", w, true) {}
};
struct EmptySample : Error {
  explicit EmptySample(const std::string& w) : Error("empty_sample", w, true) {}
};
struct EmptyData : Error {
  explicit EmptyData(const std::string& w) : Error("empty_data", w, true) {}
};
struct OneClassEmpty : Error {
  explicit OneClassEmpty(const std::string& w) : Error("one_class_empty", w, true) {}
};
struct DimensionMismatch : Error {
  explicit DimensionMismatch(const std::string& w) : Error("dimension_mismatch", w, true) {}
};
struct UnknownScenario : Error {
  explicit UnknownScenario(const std::string& w) : Error("unknown_scenario", w, true) {}
};
struct SampleTooSmall : Error {
  explicit SampleTooSmall(const std::string& w) : Error("sample_too_small", w, true) {}
};
struct BaseRangeError : Error {
  explicit BaseRangeError(const std::string& w) : Error("base_range", w, false) {}
};
struct Infeasible : Error {
  explicit Infeasible(const std::string& w) : Error("infeasible", w, false) {}
};
struct HypothesisFailed : Error {
  explicit HypothesisFailed(const std::string& w) : Error("hypothesis_failed", w, false) {}
};

}  // namespace npc
