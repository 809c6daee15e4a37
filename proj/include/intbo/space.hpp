#pragma once

#include <cstddef>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace intbo {

using Point = Eigen::VectorXd;
using RandomStream = std::mt19937_64;

/// Raised when an argument violates a documented precondition
/// (dimension mismatch, invalid bounds, nonpositive hyperparameter, ...).
class ContractError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a requested grid or matrix exceeds a configured size cap.
class CapacityError : public std::length_error {
 public:
  using std::length_error::length_error;
};

enum class VariableKind { Continuous, Integer };

struct Variable {
  std::string name;
  VariableKind kind = VariableKind::Continuous;
  double lower = 0.0;
  double upper = 1.0;

  static Variable continuous(std::string name, double lower, double upper);
  static Variable integer(std::string name, long lower, long upper);

  bool is_integer() const noexcept { return kind == VariableKind::Integer; }
  double width() const noexcept { return upper - lower; }
};

/// Ordered list of axis-aligned variables. Integer coordinates are stored as
/// doubles holding exact integer values.
class SearchSpace {
 public:
  inline static constexpr std::size_t kDefaultGridCap = 50000;

  explicit SearchSpace(std::vector<Variable> variables);

  std::size_t dimension() const noexcept { return variables_.size(); }
  const std::vector<Variable>& variables() const noexcept { return variables_; }
  const Variable& operator[](std::size_t i) const { return variables_.at(i); }
  bool has_integer() const noexcept;
  bool all_integer() const noexcept;

  /// Rounds every integer coordinate to the nearest integer (ties away from
  /// zero). Continuous coordinates pass through.
  Point transform(const Point& x) const;

  /// Projects onto the bounding box.
  Point clamp(const Point& x) const;

  bool contains(const Point& x) const;

  /// Continuous coordinates uniform on their interval, integer coordinates
  /// uniform over their integer set.
  Point sample_uniform(RandomStream& rng) const;

  /// Every coordinate, integer or not, uniform on [lower, upper].
  Point sample_relaxed(RandomStream& rng) const;

  /// Number of points enumerate_grid would produce, saturating on overflow.
  std::size_t grid_size(std::size_t points_per_continuous_dim) const;

  /// Cartesian product of evenly spaced continuous values (both endpoints
  /// included) and all integers, row-major in variable order (last variable
  /// varies fastest).
  std::vector<Point> enumerate_grid(std::size_t points_per_continuous_dim,
                                    std::size_t cap = kDefaultGridCap) const;

  void check_dimension(const Point& x) const;

 private:
  std::vector<Variable> variables_;
};

/// Nearest integer with ties rounded away from zero.
double round_half_away(double v) noexcept;

}  // namespace intbo
