#include "npcvx/simplex_solver.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "npcvx/error.hpp"

namespace npc {

LinearFunction::LinearFunction(std::vector<double> coefficients) : c_(std::move(coefficients)) {
  if (c_.empty()) throw DomainError("linear objective needs at least one coefficient");
  for (double v : c_) {
    if (!std::isfinite(v)) throw NonFiniteValue("objective coefficient is not finite");
  }
}

double LinearFunction::value(std::span<const double> x) const {
  double s = 0.0;
  for (std::size_t j = 0; j < c_.size(); ++j) s += c_[j] * x[j];
  return s;
}

void LinearFunction::gradient(std::span<const double>, std::span<double> g) const {
  std::copy(c_.begin(), c_.end(), g.begin());
}

SurrogateRiskFunction::SurrogateRiskFunction(const ResponseTable& table, Surrogate phi, ClassSide side)
    : table_(&table), phi_(std::move(phi)), sign_(side == ClassSide::negative ? 1.0 : -1.0) {}

double SurrogateRiskFunction::value(std::span<const double> x) const {
  double r = 0.0;
  for (std::size_t p = 0; p < table_->num_rows(); ++p) {
    r += table_->weight(p) * phi_.value(sign_ * table_->score(p, x));
  }
  return r;
}

void SurrogateRiskFunction::gradient(std::span<const double> x, std::span<double> g) const {
  const std::size_t m = dim();
  std::fill(g.begin(), g.end(), 0.0);
  for (std::size_t p = 0; p < table_->num_rows(); ++p) {
    double d = table_->weight(p) * sign_ * phi_.derivative(sign_ * table_->score(p, x));
    auto r = table_->row(p);
    for (std::size_t j = 0; j < m; ++j) g[j] += d * r[j];
  }
}

void SurrogateRiskFunction::add_hessian(std::span<const double> x, double scale, std::span<double> h) const {
  if (phi_.kind() == SurrogateKind::hinge || phi_.kind() == SurrogateKind::custom) return;
  const std::size_t m = dim();
  for (std::size_t p = 0; p < table_->num_rows(); ++p) {
    double d = scale * table_->weight(p) * phi_.second_derivative(sign_ * table_->score(p, x));
    if (d == 0.0) continue;
    auto r = table_->row(p);
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < m; ++j) h[i * m + j] += d * r[i] * r[j];
    }
  }
}

CallbackFunction::CallbackFunction(std::size_t dim, Value value, Gradient gradient, Hessian hessian)
    : dim_(dim), value_(std::move(value)), gradient_(std::move(gradient)), hessian_(std::move(hessian)) {
  if (dim_ == 0 || !value_ || !gradient_) throw DomainError("callback function needs dim, value and gradient");
}

void CallbackFunction::add_hessian(std::span<const double> x, double scale, std::span<double> h) const {
  if (hessian_) hessian_(x, scale, h);
}

std::string to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::optimal: return "optimal";
    case SolveStatus::infeasible: return "infeasible";
    case SolveStatus::sample_too_small: return "sample_too_small";
    case SolveStatus::max_iters_exceeded: return "max_iters_exceeded";
  }
  return "unknown";
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kMu = 10.0;
constexpr double kArmijo = 0.25;
constexpr double kCentered = 1e-10;

// t f(x) - sum log x_j - log(level - g(x)), the last term only when g is set.
struct Barrier {
  const ConvexFunction& f;
  const ConvexFunction* g;
  double level;
  double t;

  double value(std::span<const double> x) const {
    double b = 0.0;
    for (double v : x) {
      if (!(v > 0.0)) return kInf;
      b -= std::log(v);
    }
    if (g) {
      double s = level - g->value(x);
      if (!(s > 0.0)) return kInf;
      b -= std::log(s);
    }
    return b + t * f.value(x);
  }

  std::size_t terms() const { return f.dim() + (g ? 1 : 0); }
};

void normalize(std::vector<double>& x) {
  double s = std::accumulate(x.begin(), x.end(), 0.0);
  for (double& v : x) v /= s;
}

enum class CenterResult { centered, out_of_iterations };

CenterResult center(const Barrier& bar, std::vector<double>& x, std::size_t& iters, std::size_t max_iters) {
  const std::size_t m = x.size();
  std::vector<double> grad(m), gg(m), hess(m * m), trial(m);
  Eigen::MatrixXd hs(m, m);
  Eigen::VectorXd gs(m), a(m);
  double current = bar.value(x);

  while (true) {
    if (iters >= max_iters) return CenterResult::out_of_iterations;
    ++iters;

    bar.f.gradient(x, grad);
    std::fill(hess.begin(), hess.end(), 0.0);
    bar.f.add_hessian(x, bar.t, hess);
    for (std::size_t j = 0; j < m; ++j) {
      grad[j] = bar.t * grad[j] - 1.0 / x[j];
      hess[j * m + j] += 1.0 / (x[j] * x[j]);
    }
    if (bar.g) {
      double s = bar.level - bar.g->value(x);
      bar.g->gradient(x, gg);
      bar.g->add_hessian(x, 1.0 / s, hess);
      for (std::size_t i = 0; i < m; ++i) {
        grad[i] += gg[i] / s;
        for (std::size_t j = 0; j < m; ++j) hess[i * m + j] += gg[i] * gg[j] / (s * s);
      }
    }

    // Affine scaling by diag(x) keeps the reduced system well conditioned
    // near the boundary of the simplex.
    for (std::size_t i = 0; i < m; ++i) {
      gs[i] = x[i] * grad[i];
      a[i] = x[i];
      for (std::size_t j = 0; j < m; ++j) hs(i, j) = x[i] * hess[i * m + j] * x[j];
    }
    Eigen::LDLT<Eigen::MatrixXd> ldlt(hs);
    Eigen::VectorXd x1 = ldlt.solve(gs);
    Eigen::VectorXd x2 = ldlt.solve(a);
    double nu = -a.dot(x1) / a.dot(x2);
    Eigen::VectorXd u = -(x1 + nu * x2);

    std::vector<double> delta(m);
    double decrement = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      delta[j] = x[j] * u[j];
      decrement -= grad[j] * delta[j];
    }
    if (!std::isfinite(decrement) || decrement * 0.5 <= kCentered) return CenterResult::centered;

    double step = 1.0;
    double next = kInf;
    while (step > 1e-20) {
      for (std::size_t j = 0; j < m; ++j) trial[j] = x[j] + step * delta[j];
      normalize(trial);
      next = bar.value(trial);
      if (next <= current - kArmijo * step * decrement) break;
      step *= 0.5;
    }
    if (!(next < current)) return CenterResult::centered;
    x.swap(trial);
    current = next;
  }
}

// Follows the central path from the strictly feasible point x.
CenterResult follow_path(const ConvexFunction& f, const ConvexFunction* g, double level, double gap_tol,
                         std::vector<double>& x, std::size_t& iters, std::size_t max_iters) {
  Barrier bar{f, g, level, 1.0};
  while (true) {
    if (center(bar, x, iters, max_iters) == CenterResult::out_of_iterations) {
      return CenterResult::out_of_iterations;
    }
    if (static_cast<double>(bar.terms()) / bar.t <= gap_tol) return CenterResult::centered;
    bar.t *= kMu;
  }
}

void check_dims(const ConvexFunction& f, const SolverOptions& opts) {
  if (f.dim() == 0) throw DomainError("simplex dimension must be positive");
  if (!(opts.feas_tol > 0.0) || !(opts.opt_tol > 0.0) || !(opts.gap_tol > 0.0) || opts.max_iters == 0) {
    throw ConfigError("solver tolerances must be positive");
  }
}

}  // namespace

SimplexSolveResult minimize_on_simplex(const ConvexFunction& f, const SolverOptions& opts) {
  check_dims(f, opts);
  const std::size_t m = f.dim();
  SimplexSolveResult res;
  std::vector<double> x(m, 1.0 / static_cast<double>(m));
  if (m > 1) {
    auto r = follow_path(f, nullptr, 0.0, opts.gap_tol, x, res.iterations, opts.max_iters);
    if (r == CenterResult::out_of_iterations) res.status = SolveStatus::max_iters_exceeded;
    normalize(x);
  }
  res.objective = f.value(x);
  res.lambda = std::move(x);
  return res;
}

SimplexSolveResult minimize_on_simplex(const ConvexFunction& f, const ConvexFunction& g, double level,
                                       const SolverOptions& opts) {
  check_dims(f, opts);
  if (g.dim() != f.dim()) throw DimensionMismatch("objective and constraint dimensions differ");
  if (!std::isfinite(level)) throw NonFiniteValue("constraint level is not finite");
  const std::size_t m = f.dim();
  SimplexSolveResult res;

  if (m == 1) {
    std::vector<double> x{1.0};
    res.constraint = g.value(x);
    if (res.constraint > level + opts.feas_tol) {
      res.status = SolveStatus::infeasible;
      return res;
    }
    res.objective = f.value(x);
    res.lambda = std::move(x);
    return res;
  }

  // Phase I: the feasibility probe.
  SolverOptions probe_opts = opts;
  probe_opts.gap_tol = opts.gap_tol * 1e-2;
  SimplexSolveResult probe = minimize_on_simplex(g, probe_opts);
  res.iterations = probe.iterations;
  if (probe.status == SolveStatus::max_iters_exceeded) {
    res.status = SolveStatus::max_iters_exceeded;
    res.constraint = probe.objective;
    if (probe.objective <= level + opts.feas_tol) {
      res.lambda = probe.lambda;
      res.objective = f.value(res.lambda);
    }
    return res;
  }
  const double gmin = probe.objective;
  if (gmin > level + opts.feas_tol) {
    res.status = SolveStatus::infeasible;
    res.constraint = gmin;
    return res;
  }
  const double eff_level = std::max(level, gmin + 0.5 * opts.feas_tol);

  // Strictly feasible start on the segment from the probe point to the
  // barycenter.
  std::vector<double> x(m);
  const double uniform = 1.0 / static_cast<double>(m);
  double theta = 1.0;
  for (int k = 0; k < 60; ++k, theta *= 0.5) {
    for (std::size_t j = 0; j < m; ++j) x[j] = (1.0 - theta) * probe.lambda[j] + theta * uniform;
    if (g.value(x) < eff_level) break;
  }
  if (!(g.value(x) < eff_level)) x = probe.lambda;
  if (std::any_of(x.begin(), x.end(), [](double v) { return !(v > 0.0); })) {
    // The probe point sits on the boundary; only reachable for degenerate
    // inputs. Return it as is.
    res.lambda = probe.lambda;
    res.objective = f.value(res.lambda);
    res.constraint = gmin;
    return res;
  }

  auto r = follow_path(f, &g, eff_level, opts.gap_tol, x, res.iterations, opts.max_iters);
  if (r == CenterResult::out_of_iterations) res.status = SolveStatus::max_iters_exceeded;
  normalize(x);
  res.objective = f.value(x);
  res.constraint = g.value(x);
  res.lambda = std::move(x);
  return res;
}

}  // namespace npc
