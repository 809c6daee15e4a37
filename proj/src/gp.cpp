#include "intbo/gp.hpp"

#include <cmath>
#include <map>
#include <numbers>

namespace intbo {

void Dataset::validate(const SearchSpace& space) const {
  if (static_cast<Eigen::Index>(X.size()) != y.size()) {
    throw ContractError("dataset has " + std::to_string(X.size()) + " inputs and " +
                        std::to_string(y.size()) + " targets");
  }
  for (const auto& x : X) space.check_dimension(x);
}

GpPosterior::GpPosterior(KernelConfig cfg, const SearchSpace& space, Dataset data)
    : cfg_(std::move(cfg)), space_(space), data_(std::move(data)) {
  cfg_.validate(space.dimension());
  data_.validate(space);
  if (data_.size() == 0) throw ContractError("cannot fit a GP to an empty dataset");

  effective_.reserve(data_.size());
  for (const auto& x : data_.X) effective_.push_back(effective_input(cfg_, space, x));

  Eigen::MatrixXd K = gram(cfg_, space, data_.X, /*include_noise=*/true, /*jitter_scale=*/0.0);
  auto factor = cholesky_with_jitter(K, cfg_.signal_variance());
  chol_ = std::move(factor.lower);
  jitter_ = factor.jitter;

  const Eigen::VectorXd half = chol_.triangularView<Eigen::Lower>().solve(data_.y);
  alpha_ = chol_.transpose().triangularView<Eigen::Upper>().solve(half);
}

PredictiveDistribution GpPosterior::predict(const Point& x) const {
  space_.check_dimension(x);
  const Point ex = effective_input(cfg_, space_, x);
  const auto n = static_cast<Eigen::Index>(effective_.size());
  Eigen::VectorXd k(n);
  for (Eigen::Index i = 0; i < n; ++i) k[i] = base_kernel(cfg_, effective_[i], ex);

  PredictiveDistribution out;
  out.mean = k.dot(alpha_);
  const Eigen::VectorXd v = chol_.triangularView<Eigen::Lower>().solve(k);
  out.variance = std::max(0.0, base_kernel(cfg_, ex, ex) - v.squaredNorm());
  return out;
}

double GpPosterior::log_marginal_likelihood() const {
  const double n = static_cast<double>(data_.size());
  return -0.5 * data_.y.dot(alpha_) - chol_.diagonal().array().log().sum() -
         0.5 * n * std::log(2.0 * std::numbers::pi);
}

GpPosterior fit(const KernelConfig& cfg, const SearchSpace& space, const Dataset& data) {
  return GpPosterior(cfg, space, data);
}

PredictiveDistribution predict(const GpPosterior& post, const Point& x) {
  return post.predict(x);
}

double log_marginal_likelihood(const KernelConfig& cfg, const SearchSpace& space,
                               const Dataset& data) {
  return GpPosterior(cfg, space, data).log_marginal_likelihood();
}

Eigen::VectorXd sample_prior_on_grid(const KernelConfig& cfg, const SearchSpace& space,
                                     const std::vector<Point>& grid, RandomStream& rng,
                                     std::size_t cap) {
  cfg.validate(space.dimension());
  if (grid.empty()) throw ContractError("prior sampling needs a nonempty grid");
  if (grid.size() > cap) {
    throw CapacityError("grid of " + std::to_string(grid.size()) + " points exceeds cap of " +
                        std::to_string(cap));
  }
  std::map<std::vector<double>, std::size_t> cell_index;
  std::vector<Point> unique;
  std::vector<std::size_t> owner(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    space.check_dimension(grid[i]);
    const Point e = effective_input(cfg, space, grid[i]);
    std::vector<double> key(e.data(), e.data() + e.size());
    auto [it, inserted] = cell_index.emplace(std::move(key), unique.size());
    if (inserted) unique.push_back(e);
    owner[i] = it->second;
  }

  KernelConfig plain = cfg;
  plain.integer_transform = false;
  const Eigen::MatrixXd K = gram(plain, space, unique, /*include_noise=*/false, 0.0);
  const auto factor = cholesky_with_jitter(K, cfg.signal_variance());

  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd z(static_cast<Eigen::Index>(unique.size()));
  for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = normal(rng);
  const Eigen::VectorXd f_unique = factor.lower.triangularView<Eigen::Lower>() * z;

  Eigen::VectorXd f(static_cast<Eigen::Index>(grid.size()));
  for (std::size_t i = 0; i < grid.size(); ++i) {
    f[static_cast<Eigen::Index>(i)] = f_unique[static_cast<Eigen::Index>(owner[i])];
  }
  return f;
}

}  // namespace intbo
