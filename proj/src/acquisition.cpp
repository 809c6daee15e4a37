#include "intbo/acquisition.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

namespace intbo {

namespace {

constexpr double kMinStd = 1e-12;

}  // namespace

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double normal_pdf(double z) {
  return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
}

double expected_improvement(double mean, double std, double incumbent) {
  if (!(std >= kMinStd)) return std::max(0.0, incumbent - mean);
  const double gamma = (incumbent - mean) / std;
  return std::max(0.0, std * (gamma * normal_cdf(gamma) + normal_pdf(gamma)));
}

Point effective_point(const AcquisitionContext& ctx, const Point& x) {
  return ctx.strategy == Strategy::Proposed ? ctx.space.transform(x) : x;
}

double acquisition_value(const AcquisitionContext& ctx, const Point& x) {
  if (ctx.posteriors.empty()) throw ContractError("acquisition needs at least one posterior");
  const Point eff = effective_point(ctx, x);
  double total = 0.0;
  for (const auto& post : ctx.posteriors) {
    const auto pd = post.predict(eff);
    total += expected_improvement(pd.mean, std::sqrt(pd.variance), ctx.incumbent);
  }
  return total / static_cast<double>(ctx.posteriors.size());
}

namespace {

struct Scored {
  Point x;
  double value;
};

Scored refine(const ScoreFunction& score, const SearchSpace& space, Strategy strategy,
              Scored start, const MultistartOptions& options) {
  const bool integer_moves = strategy == Strategy::Proposed;
  Scored best = std::move(start);
  std::size_t evaluations = 0;
  double step = options.initial_step;

  auto try_move = [&](Point candidate) {
    if (evaluations >= options.max_evaluations_per_start) return false;
    ++evaluations;
    const double value = score(candidate);
    if (value > best.value) {
      best = {std::move(candidate), value};
      return true;
    }
    return false;
  };

  while (step >= options.min_step && evaluations < options.max_evaluations_per_start) {
    bool improved = false;
    for (std::size_t d = 0; d < space.dimension(); ++d) {
      const auto& var = space[d];
      const auto i = static_cast<Eigen::Index>(d);
      if (var.width() <= 0.0) continue;
      const double delta = (integer_moves && var.is_integer()) ? 1.0 : step * var.width();
      for (const double sign : {1.0, -1.0}) {
        Point candidate = best.x;
        candidate[i] = std::clamp(best.x[i] + sign * delta, var.lower, var.upper);
        if (candidate[i] == best.x[i]) continue;
        if (try_move(std::move(candidate))) {
          improved = true;
          break;
        }
      }
    }
    if (!improved) step *= 0.5;
  }
  return best;
}

}  // namespace

Point multistart_maximize(const ScoreFunction& score, const SearchSpace& space,
                          Strategy strategy, RandomStream& rng,
                          const MultistartOptions& options) {
  const std::size_t n_candidates = std::max<std::size_t>(1, options.n_candidates);
  std::vector<Scored> candidates;
  candidates.reserve(n_candidates);
  for (std::size_t i = 0; i < n_candidates; ++i) {
    Point x = strategy == Strategy::Proposed ? space.sample_uniform(rng)
                                             : space.sample_relaxed(rng);
    const double value = score(x);
    candidates.push_back({std::move(x), value});
  }

  std::vector<std::size_t> order(candidates.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return candidates[a].value > candidates[b].value;
  });

  const std::size_t n_starts = std::min(std::max<std::size_t>(1, options.n_starts), order.size());
  Scored best{Point(), -std::numeric_limits<double>::infinity()};
  for (std::size_t s = 0; s < n_starts; ++s) {
    Scored refined = refine(score, space, strategy, candidates[order[s]], options);
    if (best.x.size() == 0 || refined.value > best.value) best = std::move(refined);
  }
  return space.clamp(best.x);
}

Point maximize_acquisition(const AcquisitionContext& ctx, RandomStream& rng,
                           const MultistartOptions& options) {
  return multistart_maximize([&](const Point& x) { return acquisition_value(ctx, x); },
                             ctx.space, ctx.strategy, rng, options);
}

}  // namespace intbo
