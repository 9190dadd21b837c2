#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace npc {

enum class SurrogateKind { hinge, logit, exponential, custom };

/// Convex surrogate phi on [-1, 1]: non-decreasing, continuous, convex, phi(0) = 1.
///
/// Built-ins are hinge (1+z)_+, logit log2(1+e^z) and exponential e^z. Custom
/// surrogates are piecewise-linear interpolants of a table; every defining
/// property is checked on the table at construction. Immutable and cheap to copy.
class Surrogate {
 public:
  static Surrogate hinge();
  static Surrogate logit();
  static Surrogate exponential();

  /// `knots` must be strictly increasing from -1 to 1. `lipschitz` is the
  /// user-declared constant; it must dominate every segment slope.
  static Surrogate tabulated(std::vector<double> knots, std::vector<double> values,
                             double lipschitz);

  /// "hinge" | "logit" | "exp" (also "exponential").
  static Surrogate from_name(std::string_view name);

  SurrogateKind kind() const noexcept { return kind_; }
  std::string name() const;

  /// phi(z); throws DomainError when |z| > 1 + 1e-12.
  double eval(double z) const;

  /// Same as eval, with z clamped into [-1, 1] instead of rejected. Used on
  /// inner loops where z is a convex combination and only rounding can push it out.
  double value(double z) const noexcept;
  double derivative(double z) const noexcept;
  double second_derivative(double z) const noexcept;

  double lipschitz() const noexcept { return lipschitz_; }
  double value_at_one() const noexcept { return value(1.0); }

 private:
  struct Table {
    std::vector<double> knots;
    std::vector<double> values;
    std::vector<double> slopes;
  };

  Surrogate(SurrogateKind kind, double lipschitz, std::shared_ptr<const Table> table)
      : kind_(kind), lipschitz_(lipschitz), table_(std::move(table)) {}

  std::size_t segment(double z) const noexcept;

  SurrogateKind kind_;
  double lipschitz_;
  std::shared_ptr<const Table> table_;
};

inline double eval(const Surrogate& s, double z) { return s.eval(z); }
inline double lipschitz_constant(const Surrogate& s) { return s.lipschitz(); }
inline double value_at_one(const Surrogate& s) { return s.value_at_one(); }

}  // namespace npc
