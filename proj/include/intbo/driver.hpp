#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

#include "intbo/acquisition.hpp"
#include "intbo/gp.hpp"
#include "intbo/inference.hpp"
#include "intbo/kernel.hpp"
#include "intbo/space.hpp"
#include "intbo/strategy.hpp"

namespace intbo {

using Objective = std::function<double(const Point&)>;

struct InferenceSettings {
  std::size_t n_samples = 10;
  std::size_t initial_burn_in = 20;
  std::size_t warm_burn_in = 5;
  /// Noise variance of the objective in its own units. When set, the model
  /// noise is fixed at this value (after standardization, floored at
  /// `min_noise_variance`); when empty, the noise is slice sampled too.
  std::optional<double> known_noise_variance = 0.0;
  double min_noise_variance = 1e-6;
  /// Overrides HyperPrior::defaults when set.
  std::optional<HyperPrior> prior;
  SliceOptions slice;
};

struct TrialRecord {
  std::size_t iteration = 0;
  Point suggested;  // before rounding
  Point evaluated;  // what the objective saw
  double observed = 0.0;
  double incumbent_after = 0.0;
};

struct BoConfig {
  SearchSpace space;
  Strategy strategy = Strategy::Proposed;
  std::size_t n_initial = 3;
  std::size_t n_iterations = 50;
  Objective objective;
  std::uint64_t seed = 0;
  KernelFamily kernel_family = KernelFamily::Matern52;
  InferenceSettings inference;
  MultistartOptions acquisition;
  /// Called after every record is appended (initial design included).
  std::function<void(const TrialRecord&)> on_record;

  void validate() const;
  HyperPrior prior() const;
};

/// The objective threw; `partial` holds every record completed before it.
class ObjectiveError : public std::runtime_error {
 public:
  ObjectiveError(const std::string& what, std::vector<TrialRecord> partial)
      : std::runtime_error(what), partial_(std::move(partial)) {}
  const std::vector<TrialRecord>& partial() const noexcept { return partial_; }

 private:
  std::vector<TrialRecord> partial_;
};

struct Suggestion {
  Point suggested;   // argmax of the acquisition
  Point evaluation;  // transform(suggested), passed to the objective
  Point storage;     // what goes into the dataset
};

/// Zero-mean, unit-std copy of the targets (std 1 when degenerate). A single
/// observation is left as is.
struct Standardized {
  Dataset data;
  double mean = 0.0;
  double scale = 1.0;
};
Standardized standardize(const Dataset& data);

/// Kernel config seeded for a strategy: family, transform flag and the prior
/// medians.
KernelConfig initial_kernel(const BoConfig& cfg);

/// Noise variance on the standardized scale for the current data.
double model_noise_variance(const BoConfig& cfg, double scale);

/// Fits one posterior per hyperparameter sample on the standardized data.
AcquisitionContext build_context(const BoConfig& cfg, const Dataset& data,
                                 const std::vector<HyperSample>& hypers);

Suggestion suggest_next(const BoConfig& cfg, const Dataset& data,
                        const std::vector<HyperSample>& hypers, RandomStream& rng);

std::vector<TrialRecord> run_bo(const BoConfig& cfg);

/// Minimizes the sample-averaged posterior mean and rounds the result.
Point recommend(const BoConfig& cfg, const Dataset& data, const std::vector<HyperSample>& hypers,
                RandomStream& rng);

/// Count of suggested evaluations (records past the first `n_initial`) that
/// repeat an earlier evaluated point while some cell of an all-integer space
/// is still unevaluated. Outside all-integer spaces every repeat counts.
std::size_t count_premature_duplicates(const SearchSpace& space,
                                       const std::vector<TrialRecord>& records,
                                       std::size_t n_initial = 0);

}  // namespace intbo
