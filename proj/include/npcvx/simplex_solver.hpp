#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "npcvx/responses.hpp"
#include "npcvx/surrogate.hpp"

namespace npc {

/// Twice-differentiable convex function on the simplex of R^dim.
class ConvexFunction {
 public:
  virtual ~ConvexFunction() = default;
  virtual std::size_t dim() const = 0;
  virtual double value(std::span<const double> x) const = 0;
  virtual void gradient(std::span<const double> x, std::span<double> g) const = 0;
  /// h += scale * Hessian(x); h is dim x dim row-major.
  virtual void add_hessian(std::span<const double> x, double scale, std::span<double> h) const = 0;
};

class LinearFunction final : public ConvexFunction {
 public:
  explicit LinearFunction(std::vector<double> coefficients);

  std::size_t dim() const override { return c_.size(); }
  double value(std::span<const double> x) const override;
  void gradient(std::span<const double> x, std::span<double> g) const override;
  void add_hessian(std::span<const double>, double, std::span<double>) const override {}

  const std::vector<double>& coefficients() const noexcept { return c_; }

 private:
  std::vector<double> c_;
};

/// lambda -> sum_p w_p phi(+-h_lambda(x_p)) over a response table.
class SurrogateRiskFunction final : public ConvexFunction {
 public:
  SurrogateRiskFunction(const ResponseTable& table, Surrogate phi, ClassSide side);

  std::size_t dim() const override { return table_->num_bases(); }
  double value(std::span<const double> x) const override;
  void gradient(std::span<const double> x, std::span<double> g) const override;
  void add_hessian(std::span<const double> x, double scale, std::span<double> h) const override;

 private:
  const ResponseTable* table_;
  Surrogate phi_;
  double sign_;
};

/// Value/gradient supplied by the caller; the Hessian callback is optional
/// (treated as zero when absent).
class CallbackFunction final : public ConvexFunction {
 public:
  using Value = std::function<double(std::span<const double>)>;
  using Gradient = std::function<void(std::span<const double>, std::span<double>)>;
  using Hessian = std::function<void(std::span<const double>, double, std::span<double>)>;

  CallbackFunction(std::size_t dim, Value value, Gradient gradient, Hessian hessian = {});

  std::size_t dim() const override { return dim_; }
  double value(std::span<const double> x) const override { return value_(x); }
  void gradient(std::span<const double> x, std::span<double> g) const override { gradient_(x, g); }
  void add_hessian(std::span<const double> x, double scale, std::span<double> h) const override;

 private:
  std::size_t dim_;
  Value value_;
  Gradient gradient_;
  Hessian hessian_;
};

enum class SolveStatus { optimal, infeasible, sample_too_small, max_iters_exceeded };

std::string to_string(SolveStatus s);

struct SolverOptions {
  double feas_tol = 1e-8;
  double opt_tol = 1e-5;
  /// Newton steps summed over all phases.
  std::size_t max_iters = 5000;
  /// Barrier path is followed until (number of barrier terms)/t <= gap_tol.
  double gap_tol = 1e-9;
};

struct SimplexSolveResult {
  std::vector<double> lambda;  // empty when no feasible point was found
  double objective = 0.0;
  double constraint = 0.0;
  SolveStatus status = SolveStatus::optimal;
  std::size_t iterations = 0;
};

/// min f over the simplex (log-barrier interior-point Newton method).
SimplexSolveResult minimize_on_simplex(const ConvexFunction& f, const SolverOptions& opts = {});

/// min f over the simplex subject to g <= level. Phase I minimizes g; if its
/// minimum exceeds level + feas_tol the result is infeasible. Otherwise phase
/// II runs the barrier method from a strictly feasible start, with the level
/// raised to min g + feas_tol / 2 when the feasible set has no interior.
SimplexSolveResult minimize_on_simplex(const ConvexFunction& f, const ConvexFunction& g, double level,
                                       const SolverOptions& opts = {});

}  // namespace npc
