#include "intbo/inference.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace intbo {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

}  // namespace

double LogNormalPrior::log_density(double value) const {
  if (!(value > 0.0)) return kNegInf;
  const double z = (std::log(value) - log_mean) / log_std;
  return -0.5 * z * z - std::log(value) - std::log(log_std) -
         0.5 * std::log(2.0 * std::numbers::pi);
}

HyperPrior HyperPrior::defaults(const SearchSpace& space, bool infer_noise) {
  HyperPrior prior;
  for (const auto& v : space.variables()) {
    const double half_width = v.width() > 0.0 ? 0.5 * v.width() : 0.5;
    prior.lengthscales.push_back({std::log(half_width), 1.0});
  }
  prior.amplitude = {0.0, 1.0};
  if (infer_noise) prior.noise_std = LogNormalPrior{std::log(0.01), 1.0};
  return prior;
}

void HyperPrior::validate(std::size_t dimension) const {
  if (lengthscales.size() != dimension) {
    throw ContractError("hyperprior has " + std::to_string(lengthscales.size()) +
                        " lengthscale priors for a " + std::to_string(dimension) + "-d space");
  }
  auto check = [](const LogNormalPrior& p) {
    if (!(p.log_std > 0.0) || !std::isfinite(p.log_mean)) {
      throw ContractError("log-normal prior needs finite log-mean and log-std > 0");
    }
  };
  for (const auto& p : lengthscales) check(p);
  check(amplitude);
  if (noise_std) check(*noise_std);
}

double HyperPrior::log_density(const KernelConfig& cfg) const {
  double total = amplitude.log_density(cfg.amplitude);
  for (std::size_t d = 0; d < lengthscales.size(); ++d) {
    total += lengthscales[d].log_density(cfg.lengthscales[static_cast<Eigen::Index>(d)]);
  }
  if (noise_std) total += noise_std->log_density(std::sqrt(cfg.noise_variance));
  return total;
}

double log_posterior(const HyperPrior& prior, const KernelConfig& cfg, const SearchSpace& space,
                     const Dataset& data) {
  cfg.validate(space.dimension());
  prior.validate(space.dimension());
  const double lp = prior.log_density(cfg);
  if (!std::isfinite(lp)) return kNegInf;
  try {
    const double lml = log_marginal_likelihood(cfg, space, data);
    return std::isfinite(lml) ? lml + lp : kNegInf;
  } catch (const ConditioningError&) {
    return kNegInf;
  }
}

std::vector<Eigen::VectorXd> slice_sample(const LogDensity& log_density, Eigen::VectorXd init,
                                          std::size_t n_samples, std::size_t burn_in,
                                          RandomStream& rng, const SliceOptions& options) {
  if (n_samples == 0) throw ContractError("slice sampler needs n_samples >= 1");
  if (!(options.width > 0.0)) throw ContractError("slice width must be positive");

  Eigen::VectorXd x = std::move(init);
  double current = log_density(x);
  if (!std::isfinite(current)) {
    throw ContractError("slice sampler initial point has zero density");
  }

  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::exponential_distribution<double> expo(1.0);

  auto update_coordinate = [&](Eigen::Index d) {
    const double level = current - expo(rng);
    const double x0 = x[d];
    auto eval_at = [&](double value) {
      Eigen::VectorXd probe = x;
      probe[d] = value;
      return log_density(probe);
    };

    double left = x0 - options.width * unit(rng);
    double right = left + options.width;
    int left_steps = static_cast<int>(std::floor(options.max_step_out * unit(rng)));
    int right_steps = options.max_step_out - 1 - left_steps;
    while (left_steps-- > 0 && eval_at(left) > level) left -= options.width;
    while (right_steps-- > 0 && eval_at(right) > level) right += options.width;

    for (int iter = 0; iter < options.max_shrink; ++iter) {
      const double candidate = left + (right - left) * unit(rng);
      Eigen::VectorXd probe = x;
      probe[d] = candidate;
      const double value = log_density(probe);
      if (value > level) {
        x = std::move(probe);
        current = value;
        return;
      }
      if (candidate < x0) {
        left = candidate;
      } else {
        right = candidate;
      }
    }
    throw SamplerStuckError("slice shrinkage exceeded " + std::to_string(options.max_shrink) +
                            " iterations on coordinate " + std::to_string(d));
  };

  std::vector<Eigen::VectorXd> samples;
  samples.reserve(n_samples);
  for (std::size_t sweep = 0; sweep < burn_in + n_samples; ++sweep) {
    for (Eigen::Index d = 0; d < x.size(); ++d) update_coordinate(d);
    if (sweep >= burn_in) samples.push_back(x);
  }
  return samples;
}

Eigen::VectorXd pack_log_hypers(const KernelConfig& cfg, bool with_noise) {
  const auto dim = cfg.lengthscales.size();
  Eigen::VectorXd theta(dim + 1 + (with_noise ? 1 : 0));
  theta.head(dim) = cfg.lengthscales.array().log();
  theta[dim] = std::log(cfg.amplitude);
  if (with_noise) theta[dim + 1] = 0.5 * std::log(cfg.noise_variance);
  return theta;
}

KernelConfig unpack_log_hypers(const KernelConfig& base, const Eigen::VectorXd& theta,
                               bool with_noise) {
  KernelConfig cfg = base;
  const auto dim = base.lengthscales.size();
  cfg.lengthscales = theta.head(dim).array().exp();
  cfg.amplitude = std::exp(theta[dim]);
  if (with_noise) cfg.noise_variance = std::exp(2.0 * theta[dim + 1]);
  return cfg;
}

KernelConfig prior_median_config(const HyperPrior& prior, const KernelConfig& base) {
  KernelConfig cfg = base;
  cfg.lengthscales.resize(static_cast<Eigen::Index>(prior.lengthscales.size()));
  for (std::size_t d = 0; d < prior.lengthscales.size(); ++d) {
    cfg.lengthscales[static_cast<Eigen::Index>(d)] = std::exp(prior.lengthscales[d].log_mean);
  }
  cfg.amplitude = std::exp(prior.amplitude.log_mean);
  if (prior.noise_std) cfg.noise_variance = std::exp(2.0 * prior.noise_std->log_mean);
  return cfg;
}

std::vector<HyperSample> slice_sample(const HyperPrior& prior, const SearchSpace& space,
                                      const Dataset& data, const KernelConfig& init,
                                      std::size_t n_samples, std::size_t burn_in,
                                      RandomStream& rng, const SliceOptions& options) {
  init.validate(space.dimension());
  prior.validate(space.dimension());
  data.validate(space);
  const bool with_noise = prior.infers_noise();
  if (with_noise && !(init.noise_variance > 0.0)) {
    throw ContractError("inferring noise needs a positive initial noise variance");
  }

  // Density of theta = log(hyper) picks up the Jacobian sum(theta).
  const LogDensity target = [&](const Eigen::VectorXd& theta) {
    if (!theta.allFinite() || (theta.array().abs() > 50.0).any()) return kNegInf;
    const KernelConfig cfg = unpack_log_hypers(init, theta, with_noise);
    const double lp = log_posterior(prior, cfg, space, data);
    return std::isfinite(lp) ? lp + theta.sum() : kNegInf;
  };

  const auto draws =
      slice_sample(target, pack_log_hypers(init, with_noise), n_samples, burn_in, rng, options);
  std::vector<HyperSample> out;
  out.reserve(draws.size());
  for (const auto& theta : draws) out.push_back({unpack_log_hypers(init, theta, with_noise)});
  return out;
}

}  // namespace intbo
