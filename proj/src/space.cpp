#include "intbo/space.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace intbo {

Variable Variable::continuous(std::string name, double lower, double upper) {
  if (!std::isfinite(lower) || !std::isfinite(upper) || !(lower < upper)) {
    throw ContractError("continuous variable '" + name +
                        "' requires finite lower < upper");
  }
  return Variable{std::move(name), VariableKind::Continuous, lower, upper};
}

Variable Variable::integer(std::string name, long lower, long upper) {
  if (lower > upper) {
    throw ContractError("integer variable '" + name + "' requires lower <= upper");
  }
  return Variable{std::move(name), VariableKind::Integer, static_cast<double>(lower),
                  static_cast<double>(upper)};
}

double round_half_away(double v) noexcept { return std::round(v); }

SearchSpace::SearchSpace(std::vector<Variable> variables)
    : variables_(std::move(variables)) {
  if (variables_.empty()) throw ContractError("search space needs at least one variable");
  for (const auto& v : variables_) {
    if (v.is_integer()) {
      if (v.lower != std::floor(v.lower) || v.upper != std::floor(v.upper) ||
          std::abs(v.lower) > 0x1p52 || std::abs(v.upper) > 0x1p52) {
        throw ContractError("integer variable '" + v.name + "' has non-integral bounds");
      }
      if (v.lower > v.upper) {
        throw ContractError("integer variable '" + v.name + "' requires lower <= upper");
      }
    } else if (!std::isfinite(v.lower) || !std::isfinite(v.upper) || !(v.lower < v.upper)) {
      throw ContractError("continuous variable '" + v.name + "' requires finite lower < upper");
    }
  }
}

bool SearchSpace::has_integer() const noexcept {
  return std::any_of(variables_.begin(), variables_.end(),
                     [](const Variable& v) { return v.is_integer(); });
}

bool SearchSpace::all_integer() const noexcept {
  return std::all_of(variables_.begin(), variables_.end(),
                     [](const Variable& v) { return v.is_integer(); });
}

void SearchSpace::check_dimension(const Point& x) const {
  if (static_cast<std::size_t>(x.size()) != dimension()) {
    throw ContractError("point has dimension " + std::to_string(x.size()) +
                        ", search space has " + std::to_string(dimension()));
  }
}

Point SearchSpace::transform(const Point& x) const {
  check_dimension(x);
  Point out = x;
  for (std::size_t d = 0; d < variables_.size(); ++d) {
    if (variables_[d].is_integer()) out[d] = round_half_away(x[d]);
  }
  return out;
}

Point SearchSpace::clamp(const Point& x) const {
  check_dimension(x);
  Point out(x.size());
  for (std::size_t d = 0; d < variables_.size(); ++d) {
    out[d] = std::clamp(x[d], variables_[d].lower, variables_[d].upper);
  }
  return out;
}

bool SearchSpace::contains(const Point& x) const {
  if (static_cast<std::size_t>(x.size()) != dimension()) return false;
  for (std::size_t d = 0; d < variables_.size(); ++d) {
    if (!(x[d] >= variables_[d].lower && x[d] <= variables_[d].upper)) return false;
  }
  return true;
}

Point SearchSpace::sample_uniform(RandomStream& rng) const {
  Point x(dimension());
  for (std::size_t d = 0; d < variables_.size(); ++d) {
    const auto& v = variables_[d];
    if (v.is_integer()) {
      std::uniform_int_distribution<long> dist(static_cast<long>(v.lower),
                                               static_cast<long>(v.upper));
      x[d] = static_cast<double>(dist(rng));
    } else {
      std::uniform_real_distribution<double> dist(v.lower, v.upper);
      x[d] = dist(rng);
    }
  }
  return x;
}

Point SearchSpace::sample_relaxed(RandomStream& rng) const {
  Point x(dimension());
  for (std::size_t d = 0; d < variables_.size(); ++d) {
    const auto& v = variables_[d];
    if (v.lower == v.upper) {
      x[d] = v.lower;
      continue;
    }
    std::uniform_real_distribution<double> dist(v.lower, v.upper);
    x[d] = dist(rng);
  }
  return x;
}

std::size_t SearchSpace::grid_size(std::size_t ppd) const {
  constexpr auto kMax = std::numeric_limits<std::size_t>::max();
  std::size_t total = 1;
  for (const auto& v : variables_) {
    const std::size_t n =
        v.is_integer() ? static_cast<std::size_t>(v.upper - v.lower) + 1 : ppd;
    if (n != 0 && total > kMax / n) return kMax;
    total *= n;
  }
  return total;
}

std::vector<Point> SearchSpace::enumerate_grid(std::size_t ppd, std::size_t cap) const {
  if (ppd < 2) throw ContractError("points_per_continuous_dim must be at least 2");
  const std::size_t total = grid_size(ppd);
  if (total > cap) {
    throw CapacityError("grid of " + std::to_string(total) + " points exceeds cap of " +
                        std::to_string(cap));
  }

  std::vector<std::vector<double>> axes;
  axes.reserve(dimension());
  for (const auto& v : variables_) {
    std::vector<double> axis;
    if (v.is_integer()) {
      for (auto k = static_cast<long>(v.lower); k <= static_cast<long>(v.upper); ++k) {
        axis.push_back(static_cast<double>(k));
      }
    } else {
      for (std::size_t i = 0; i < ppd; ++i) {
        axis.push_back(i + 1 == ppd ? v.upper
                                    : v.lower + v.width() * static_cast<double>(i) /
                                                    static_cast<double>(ppd - 1));
      }
    }
    axes.push_back(std::move(axis));
  }

  std::vector<Point> grid;
  grid.reserve(total);
  std::vector<std::size_t> index(dimension(), 0);
  for (std::size_t n = 0; n < total; ++n) {
    Point p(dimension());
    for (std::size_t d = 0; d < dimension(); ++d) p[d] = axes[d][index[d]];
    grid.push_back(std::move(p));
    for (std::size_t d = dimension(); d-- > 0;) {
      if (++index[d] < axes[d].size()) break;
      index[d] = 0;
    }
  }
  return grid;
}

}  // namespace intbo
