#pragma once

#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>

#include "intbo/gp.hpp"
#include "intbo/kernel.hpp"
#include "intbo/space.hpp"

namespace intbo {

struct LogNormalPrior {
  double log_mean = 0.0;
  double log_std = 1.0;

  double log_density(double value) const;
};

/// Independent log-normal priors over the kernel hyperparameters. When
/// `noise_std` is empty the noise variance is held at whatever the kernel
/// config carries.
struct HyperPrior {
  std::vector<LogNormalPrior> lengthscales;
  LogNormalPrior amplitude{0.0, 1.0};
  std::optional<LogNormalPrior> noise_std;

  /// Lengthscale medians at half the per-dimension width, log-std 1; amplitude
  /// log-normal(0, 1); noise fixed unless `infer_noise`, in which case its
  /// standard deviation gets log-normal(log 0.01, 1).
  static HyperPrior defaults(const SearchSpace& space, bool infer_noise = false);

  bool infers_noise() const noexcept { return noise_std.has_value(); }
  void validate(std::size_t dimension) const;
  double log_density(const KernelConfig& cfg) const;
};

struct HyperSample {
  KernelConfig config;
};

class SamplerStuckError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Log marginal likelihood plus log prior. A conditioning failure yields -inf.
/// Throws ContractError on an invalid config.
double log_posterior(const HyperPrior& prior, const KernelConfig& cfg, const SearchSpace& space,
                     const Dataset& data);

struct SliceOptions {
  double width = 1.0;            // initial bracket width per coordinate
  int max_step_out = 32;         // total expansions per coordinate update
  int max_shrink = 1000;         // shrinkage iterations before giving up
};

using LogDensity = std::function<double(const Eigen::VectorXd&)>;

/// Coordinate-wise univariate slice sampling with step-out and shrinkage.
/// Every sweep updates all coordinates in order; the first `burn_in` sweeps
/// are discarded and every later sweep is kept.
std::vector<Eigen::VectorXd> slice_sample(const LogDensity& log_density, Eigen::VectorXd init,
                                          std::size_t n_samples, std::size_t burn_in,
                                          RandomStream& rng, const SliceOptions& options = {});

/// Slice sampling of kernel hyperparameters in log space, targeting
/// log_posterior (with the change-of-variables term for the log transform).
std::vector<HyperSample> slice_sample(const HyperPrior& prior, const SearchSpace& space,
                                      const Dataset& data, const KernelConfig& init,
                                      std::size_t n_samples, std::size_t burn_in,
                                      RandomStream& rng, const SliceOptions& options = {});

/// Log-space parameter vector [log l_1..l_d, log amplitude, (log noise std)].
Eigen::VectorXd pack_log_hypers(const KernelConfig& cfg, bool with_noise);
KernelConfig unpack_log_hypers(const KernelConfig& base, const Eigen::VectorXd& theta,
                               bool with_noise);

/// Config at the prior medians, keeping family/transform/noise from `base`.
KernelConfig prior_median_config(const HyperPrior& prior, const KernelConfig& base);

}  // namespace intbo
