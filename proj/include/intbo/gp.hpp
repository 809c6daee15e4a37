#pragma once

#include <vector>

#include <Eigen/Core>

#include "intbo/kernel.hpp"
#include "intbo/space.hpp"

namespace intbo {

struct Dataset {
  std::vector<Point> X;
  Eigen::VectorXd y;

  std::size_t size() const noexcept { return X.size(); }
  void validate(const SearchSpace& space) const;
};

struct PredictiveDistribution {
  double mean = 0.0;
  double variance = 0.0;  // latent f, no observation noise
};

/// Zero-mean GP conditioned on a dataset. Immutable after construction.
class GpPosterior {
 public:
  /// Factorizes K + noise I (+ jitter) and solves for alpha. O(n^3).
  /// Throws ConditioningError if the jitter ladder is exhausted.
  GpPosterior(KernelConfig cfg, const SearchSpace& space, Dataset data);

  PredictiveDistribution predict(const Point& x) const;

  const KernelConfig& config() const noexcept { return cfg_; }
  const Dataset& dataset() const noexcept { return data_; }
  const Eigen::MatrixXd& cholesky() const noexcept { return chol_; }
  const Eigen::VectorXd& alpha() const noexcept { return alpha_; }
  double jitter() const noexcept { return jitter_; }

  /// -1/2 y^T alpha - sum log diag(L) - n/2 log 2 pi.
  double log_marginal_likelihood() const;

 private:
  KernelConfig cfg_;
  SearchSpace space_;
  Dataset data_;
  std::vector<Point> effective_;  // training inputs as the base kernel sees them
  Eigen::MatrixXd chol_;
  Eigen::VectorXd alpha_;
  double jitter_ = 0.0;
};

GpPosterior fit(const KernelConfig& cfg, const SearchSpace& space, const Dataset& data);

PredictiveDistribution predict(const GpPosterior& post, const Point& x);

double log_marginal_likelihood(const KernelConfig& cfg, const SearchSpace& space,
                               const Dataset& data);

/// One joint draw f = L z of the noise-free prior on `grid`. Grid points that
/// share an effective input (same cell under the integer transform) are drawn
/// once and receive identical values.
Eigen::VectorXd sample_prior_on_grid(const KernelConfig& cfg, const SearchSpace& space,
                                     const std::vector<Point>& grid, RandomStream& rng,
                                     std::size_t cap = SearchSpace::kDefaultGridCap);

}  // namespace intbo
