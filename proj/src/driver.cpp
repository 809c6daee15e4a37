#include "intbo/driver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

namespace intbo {

void BoConfig::validate() const {
  if (n_initial < 2) throw ContractError("n_initial must be at least 2");
  if (n_iterations < 1) throw ContractError("n_iterations must be at least 1");
  if (!objective) throw ContractError("BO config has no objective");
  if (inference.n_samples < 1) throw ContractError("need at least one hyperparameter sample");
  if (inference.known_noise_variance && !(*inference.known_noise_variance >= 0.0)) {
    throw ContractError("known noise variance must be nonnegative");
  }
  prior().validate(space.dimension());
}

HyperPrior BoConfig::prior() const {
  if (inference.prior) return *inference.prior;
  return HyperPrior::defaults(space, !inference.known_noise_variance.has_value());
}

Standardized standardize(const Dataset& data) {
  Standardized out;
  out.data = data;
  const auto n = data.y.size();
  if (n < 2) return out;
  out.mean = data.y.mean();
  const double var = (data.y.array() - out.mean).square().sum() / static_cast<double>(n);
  out.scale = var > 0.0 ? std::sqrt(var) : 1.0;
  out.data.y = (data.y.array() - out.mean) / out.scale;
  return out;
}

double model_noise_variance(const BoConfig& cfg, double scale) {
  const double known = cfg.inference.known_noise_variance.value_or(0.0);
  return std::max(known / (scale * scale), cfg.inference.min_noise_variance);
}

KernelConfig initial_kernel(const BoConfig& cfg) {
  KernelConfig base;
  base.family = cfg.kernel_family;
  base.integer_transform = cfg.strategy == Strategy::Proposed;
  base.noise_variance = cfg.inference.min_noise_variance;
  return prior_median_config(cfg.prior(), base);
}

AcquisitionContext build_context(const BoConfig& cfg, const Dataset& data,
                                 const std::vector<HyperSample>& hypers) {
  if (data.size() == 0) throw ContractError("cannot build a model without data");
  if (hypers.empty()) throw ContractError("need at least one hyperparameter sample");
  const Standardized std_data = standardize(data);
  AcquisitionContext ctx{cfg.space, {}, std_data.data.y.minCoeff(), cfg.strategy};
  ctx.posteriors.reserve(hypers.size());
  for (const auto& h : hypers) ctx.posteriors.emplace_back(h.config, cfg.space, std_data.data);
  return ctx;
}

Suggestion suggest_next(const BoConfig& cfg, const Dataset& data,
                        const std::vector<HyperSample>& hypers, RandomStream& rng) {
  const AcquisitionContext ctx = build_context(cfg, data, hypers);
  Suggestion s;
  s.suggested = maximize_acquisition(ctx, rng, cfg.acquisition);
  s.evaluation = cfg.space.transform(s.suggested);
  s.storage = cfg.strategy == Strategy::Naive ? s.evaluation : s.suggested;
  return s;
}

Point recommend(const BoConfig& cfg, const Dataset& data, const std::vector<HyperSample>& hypers,
                RandomStream& rng) {
  const AcquisitionContext ctx = build_context(cfg, data, hypers);
  const auto neg_mean = [&](const Point& x) {
    const Point eff = effective_point(ctx, x);
    double total = 0.0;
    for (const auto& post : ctx.posteriors) total += post.predict(eff).mean;
    return -total / static_cast<double>(ctx.posteriors.size());
  };
  const Point argmin = multistart_maximize(neg_mean, cfg.space, cfg.strategy, rng, cfg.acquisition);
  return cfg.space.transform(argmin);
}

std::vector<TrialRecord> run_bo(const BoConfig& cfg) {
  cfg.validate();
  RandomStream rng(cfg.seed);
  const HyperPrior prior = cfg.prior();

  std::vector<TrialRecord> records;
  records.reserve(cfg.n_initial + cfg.n_iterations);
  Dataset data;
  data.y.resize(0);
  double incumbent = std::numeric_limits<double>::infinity();

  auto observe = [&](const Point& suggested, const Point& evaluated, const Point& storage) {
    double y = 0.0;
    try {
      y = cfg.objective(evaluated);
    } catch (const std::exception& e) {
      throw ObjectiveError(std::string("objective failed: ") + e.what(), records);
    }
    if (!std::isfinite(y)) throw ObjectiveError("objective returned a non-finite value", records);
    data.X.push_back(storage);
    data.y.conservativeResize(data.y.size() + 1);
    data.y[data.y.size() - 1] = y;
    incumbent = std::min(incumbent, y);
    records.push_back({records.size(), suggested, evaluated, y, incumbent});
    if (cfg.on_record) cfg.on_record(records.back());
  };

  for (std::size_t i = 0; i < cfg.n_initial; ++i) {
    const Point x = cfg.space.sample_uniform(rng);
    observe(x, cfg.space.transform(x), x);
  }

  KernelConfig current = initial_kernel(cfg);
  for (std::size_t it = 0; it < cfg.n_iterations; ++it) {
    const Standardized std_data = standardize(data);
    if (!prior.infers_noise()) current.noise_variance = model_noise_variance(cfg, std_data.scale);
    const std::size_t burn_in =
        it == 0 ? cfg.inference.initial_burn_in : cfg.inference.warm_burn_in;
    const auto hypers = slice_sample(prior, cfg.space, std_data.data, current,
                                     cfg.inference.n_samples, burn_in, rng, cfg.inference.slice);
    current = hypers.back().config;

    const Suggestion s = suggest_next(cfg, data, hypers, rng);
    observe(s.suggested, s.evaluation, s.storage);
  }
  return records;
}

std::size_t count_premature_duplicates(const SearchSpace& space,
                                       const std::vector<TrialRecord>& records,
                                       std::size_t n_initial) {
  const std::size_t n_cells = space.all_integer() ? space.grid_size(2) : 0;
  std::set<std::vector<double>> seen;
  std::size_t duplicates = 0;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const Point& x = records[i].evaluated;
    const bool exhausted = n_cells != 0 && seen.size() >= n_cells;
    const bool repeat = !seen.insert(std::vector<double>(x.data(), x.data() + x.size())).second;
    if (repeat && !exhausted && i >= n_initial) ++duplicates;
  }
  return duplicates;
}

}  // namespace intbo
