#pragma once

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "intbo/space.hpp"

namespace intbo {

enum class KernelFamily { Matern52, SquaredExponential };

std::string to_string(KernelFamily family);
KernelFamily kernel_family_from_string(const std::string& name);

struct KernelConfig {
  KernelFamily family = KernelFamily::Matern52;
  Eigen::VectorXd lengthscales;  // one per dimension
  double amplitude = 1.0;        // signal standard deviation
  double noise_variance = 0.0;
  bool integer_transform = false;

  /// Throws ContractError unless lengthscales > 0, amplitude > 0,
  /// noise_variance >= 0 and the lengthscale count matches `dimension`.
  void validate(std::size_t dimension) const;

  double signal_variance() const noexcept { return amplitude * amplitude; }
};

/// Stationary covariance of the base kernel at the given (already
/// transformed, if applicable) inputs.
double base_kernel(const KernelConfig& cfg, const Point& a, const Point& b);

/// k(x, x2), or k(T(x), T(x2)) when cfg.integer_transform is set.
/// Noise variance is never included.
double kernel_eval(const KernelConfig& cfg, const SearchSpace& space, const Point& x,
                   const Point& x2);

/// The point the base kernel actually sees.
Point effective_input(const KernelConfig& cfg, const SearchSpace& space, const Point& x);

/// Gram matrix. With include_noise, the diagonal gets noise_variance plus
/// `jitter_scale * amplitude^2`.
Eigen::MatrixXd gram(const KernelConfig& cfg, const SearchSpace& space,
                     std::span<const Point> X, bool include_noise,
                     double jitter_scale = 1e-10);

Eigen::VectorXd cross_covariance(const KernelConfig& cfg, const SearchSpace& space,
                                 std::span<const Point> X, const Point& x);

/// Thrown when Cholesky keeps failing after the jitter ladder is exhausted.
class ConditioningError : public std::runtime_error {
 public:
  ConditioningError(const std::string& what, double final_jitter)
      : std::runtime_error(what), final_jitter_(final_jitter) {}
  double final_jitter() const noexcept { return final_jitter_; }

 private:
  double final_jitter_;
};

struct JitteredCholesky {
  Eigen::MatrixXd lower;  // L with L L^T = K + jitter I
  double jitter = 0.0;    // absolute value added to the diagonal
};

/// Cholesky of `matrix + jitter * I`, starting at 1e-10 * signal_variance and
/// escalating by 10x up to 1e-4 * signal_variance.
JitteredCholesky cholesky_with_jitter(const Eigen::MatrixXd& matrix, double signal_variance);

}  // namespace intbo
