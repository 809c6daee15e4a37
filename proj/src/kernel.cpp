#include "intbo/kernel.hpp"

#include <cmath>

namespace intbo {

namespace {

constexpr double kJitterStart = 1e-10;
constexpr double kJitterMax = 1e-4;

}  // namespace

std::string to_string(KernelFamily family) {
  switch (family) {
    case KernelFamily::Matern52:
      return "matern52";
    case KernelFamily::SquaredExponential:
      return "squared_exponential";
  }
  return "unknown";
}

KernelFamily kernel_family_from_string(const std::string& name) {
  if (name == "matern52" || name == "matern") return KernelFamily::Matern52;
  if (name == "squared_exponential" || name == "se" || name == "rbf") {
    return KernelFamily::SquaredExponential;
  }
  throw ContractError("unknown kernel family '" + name + "'");
}

void KernelConfig::validate(std::size_t dimension) const {
  if (static_cast<std::size_t>(lengthscales.size()) != dimension) {
    throw ContractError("kernel has " + std::to_string(lengthscales.size()) +
                        " lengthscales for a " + std::to_string(dimension) + "-d space");
  }
  for (Eigen::Index d = 0; d < lengthscales.size(); ++d) {
    if (!(lengthscales[d] > 0.0) || !std::isfinite(lengthscales[d])) {
      throw ContractError("lengthscale " + std::to_string(d) + " must be positive");
    }
  }
  if (!(amplitude > 0.0) || !std::isfinite(amplitude)) {
    throw ContractError("amplitude must be positive");
  }
  if (!(noise_variance >= 0.0) || !std::isfinite(noise_variance)) {
    throw ContractError("noise variance must be nonnegative");
  }
}

double base_kernel(const KernelConfig& cfg, const Point& a, const Point& b) {
  const double r2 = ((a - b).array() / cfg.lengthscales.array()).square().sum();
  const double s2 = cfg.signal_variance();
  switch (cfg.family) {
    case KernelFamily::SquaredExponential:
      return s2 * std::exp(-0.5 * r2);
    case KernelFamily::Matern52: {
      const double sqrt5_r = std::sqrt(5.0 * r2);
      return s2 * (1.0 + sqrt5_r + (5.0 / 3.0) * r2) * std::exp(-sqrt5_r);
    }
  }
  return 0.0;
}

Point effective_input(const KernelConfig& cfg, const SearchSpace& space, const Point& x) {
  return cfg.integer_transform ? space.transform(x) : x;
}

double kernel_eval(const KernelConfig& cfg, const SearchSpace& space, const Point& x,
                   const Point& x2) {
  space.check_dimension(x);
  space.check_dimension(x2);
  return base_kernel(cfg, effective_input(cfg, space, x), effective_input(cfg, space, x2));
}

Eigen::MatrixXd gram(const KernelConfig& cfg, const SearchSpace& space,
                     std::span<const Point> X, bool include_noise, double jitter_scale) {
  const auto n = static_cast<Eigen::Index>(X.size());
  std::vector<Point> eff;
  eff.reserve(X.size());
  for (const auto& x : X) {
    space.check_dimension(x);
    eff.push_back(effective_input(cfg, space, x));
  }
  Eigen::MatrixXd K(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    K(i, i) = base_kernel(cfg, eff[i], eff[i]);
    for (Eigen::Index j = 0; j < i; ++j) {
      K(i, j) = base_kernel(cfg, eff[i], eff[j]);
      K(j, i) = K(i, j);
    }
  }
  if (include_noise) {
    K.diagonal().array() += cfg.noise_variance + jitter_scale * cfg.signal_variance();
  }
  return K;
}

Eigen::VectorXd cross_covariance(const KernelConfig& cfg, const SearchSpace& space,
                                 std::span<const Point> X, const Point& x) {
  space.check_dimension(x);
  const Point ex = effective_input(cfg, space, x);
  Eigen::VectorXd k(static_cast<Eigen::Index>(X.size()));
  for (std::size_t i = 0; i < X.size(); ++i) {
    space.check_dimension(X[i]);
    k[static_cast<Eigen::Index>(i)] = base_kernel(cfg, effective_input(cfg, space, X[i]), ex);
  }
  return k;
}

JitteredCholesky cholesky_with_jitter(const Eigen::MatrixXd& matrix, double signal_variance) {
  double scale = kJitterStart;
  double jitter = scale * signal_variance;
  for (;;) {
    jitter = scale * signal_variance;
    Eigen::MatrixXd shifted = matrix;
    shifted.diagonal().array() += jitter;
    Eigen::LLT<Eigen::MatrixXd, Eigen::Lower> llt(shifted);
    if (llt.info() == Eigen::Success) {
      const auto& L = llt.matrixLLT();
      if (L.diagonal().allFinite() && (L.diagonal().array() > 0.0).all()) {
        return JitteredCholesky{llt.matrixL(), jitter};
      }
    }
    if (scale >= kJitterMax * (1.0 - 1e-9)) break;
    scale *= 10.0;
  }
  throw ConditioningError("Cholesky failed after escalating jitter to " + std::to_string(jitter),
                          jitter);
}

}  // namespace intbo
