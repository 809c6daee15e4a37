#pragma once

#include <functional>
#include <vector>

#include "intbo/gp.hpp"
#include "intbo/space.hpp"
#include "intbo/strategy.hpp"

namespace intbo {

/// EI for minimization: sigma * (gamma * Phi(gamma) + phi(gamma)) with
/// gamma = (incumbent - mean) / sigma. Falls back to max(0, incumbent - mean)
/// when std < 1e-12.
double expected_improvement(double mean, double std, double incumbent);

double normal_cdf(double z);
double normal_pdf(double z);

struct AcquisitionContext {
  SearchSpace space;
  std::vector<GpPosterior> posteriors;  // one per hyperparameter sample
  double incumbent = 0.0;
  Strategy strategy = Strategy::Proposed;
};

/// Point at which the posteriors are queried for a candidate.
Point effective_point(const AcquisitionContext& ctx, const Point& x);

/// EI averaged over the posteriors.
double acquisition_value(const AcquisitionContext& ctx, const Point& x);

struct MultistartOptions {
  std::size_t n_candidates = 1000;
  std::size_t n_starts = 5;
  double initial_step = 0.1;   // fraction of each variable's width
  double min_step = 1e-4;
  std::size_t max_evaluations_per_start = 4000;
};

using ScoreFunction = std::function<double(const Point&)>;

/// Scores uniform random candidates, refines the best few with a
/// derivative-free coordinate search and returns the best refined point.
/// Under Proposed, candidates and moves keep integer coordinates integral
/// (plus/minus one neighbor moves); otherwise integer coordinates are relaxed
/// to their real interval and searched like continuous ones.
Point multistart_maximize(const ScoreFunction& score, const SearchSpace& space,
                          Strategy strategy, RandomStream& rng,
                          const MultistartOptions& options = {});

Point maximize_acquisition(const AcquisitionContext& ctx, RandomStream& rng,
                           const MultistartOptions& options = {});

}  // namespace intbo
