#include "npcvx/grid.hpp"

#include <cmath>

#include "npcvx/error.hpp"

namespace npc {

TableRisk::TableRisk(const ResponseTable& table, Surrogate phi, ClassSide side)
    : table_(&table), phi_(std::move(phi)), sign_(side == ClassSide::negative ? 1.0 : -1.0) {
  if (phi_.kind() == SurrogateKind::hinge) {
    affine_ = true;
    base_sums_.assign(table.num_bases(), 0.0);
    for (std::size_t p = 0; p < table.num_rows(); ++p) {
      total_ += table.weight(p);
      auto r = table.row(p);
      for (std::size_t j = 0; j < r.size(); ++j) base_sums_[j] += table.weight(p) * r[j];
    }
  }
}

double TableRisk::operator()(std::span<const double> lambda) const {
  if (affine_) {
    double s = 0.0;
    for (std::size_t j = 0; j < base_sums_.size(); ++j) s += lambda[j] * base_sums_[j];
    return total_ + sign_ * s;
  }
  return surrogate_risk(*table_, phi_, sign_ > 0 ? ClassSide::negative : ClassSide::positive, lambda);
}

std::size_t grid_steps(double resolution) {
  if (!(resolution > 0.0 && resolution <= 1.0)) throw DomainError("grid resolution must lie in (0, 1]");
  double k = std::round(1.0 / resolution);
  if (std::abs(k * resolution - 1.0) > 1e-9) throw DomainError("1 / resolution must be an integer");
  return static_cast<std::size_t>(k);
}

namespace {

void enumerate(std::size_t pos, std::size_t left, std::size_t steps, std::vector<std::size_t>& counts,
               std::vector<double>& lam, const std::function<void(std::span<const double>)>& fn) {
  const double kd = static_cast<double>(steps);
  if (pos + 1 == counts.size()) {
    counts[pos] = left;
    lam[pos] = static_cast<double>(left) / kd;
    fn(lam);
    return;
  }
  for (std::size_t c = 0; c <= left; ++c) {
    counts[pos] = c;
    lam[pos] = static_cast<double>(c) / kd;
    enumerate(pos + 1, left - c, steps, counts, lam, fn);
  }
}

}  // namespace

void for_each_simplex_point(std::size_t num_bases, std::size_t steps,
                            const std::function<void(std::span<const double>)>& fn) {
  if (num_bases == 0 || steps == 0) throw DomainError("simplex grid needs M >= 1 and K >= 1");
  std::vector<std::size_t> counts(num_bases);
  std::vector<double> lam(num_bases);
  enumerate(0, steps, steps, counts, lam, fn);
}

std::optional<GridPoint> simplex_grid_search(std::size_t num_bases, double resolution,
                                             const std::function<double(std::span<const double>)>& objective,
                                             const std::function<double(std::span<const double>)>& constraint,
                                             double level) {
  if (num_bases == 0 || num_bases > 3) throw DomainError("grid search supports 1 to 3 bases");
  const std::size_t k = grid_steps(resolution);
  const double kd = static_cast<double>(k);
  std::optional<GridPoint> best;
  std::size_t visited = 0;
  std::vector<double> lam(num_bases);

  auto consider = [&] {
    ++visited;
    double c = constraint(lam);
    if (!(c <= level)) return;
    double f = objective(lam);
    if (!best || f < best->objective) best = GridPoint{lam, f, c, 0};
  };

  if (num_bases == 1) {
    lam[0] = 1.0;
    consider();
  } else if (num_bases == 2) {
    for (std::size_t i = 0; i <= k; ++i) {
      lam[0] = static_cast<double>(i) / kd;
      lam[1] = static_cast<double>(k - i) / kd;
      consider();
    }
  } else {
    for (std::size_t i = 0; i <= k; ++i) {
      lam[0] = static_cast<double>(i) / kd;
      for (std::size_t j = 0; j <= k - i; ++j) {
        lam[1] = static_cast<double>(j) / kd;
        lam[2] = static_cast<double>(k - i - j) / kd;
        consider();
      }
    }
  }
  if (best) best->points = visited;
  return best;
}

}  // namespace npc
