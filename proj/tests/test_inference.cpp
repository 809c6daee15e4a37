#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "intbo/inference.hpp"
#include "oracles.hpp"

using namespace intbo;

namespace {

Point scalar(double v) { return Point::Constant(1, v); }

KernelConfig matern1d(double ls, double amp, double noise) {
  KernelConfig cfg;
  cfg.family = KernelFamily::Matern52;
  cfg.lengthscales = Eigen::VectorXd::Constant(1, ls);
  cfg.amplitude = amp;
  cfg.noise_variance = noise;
  return cfg;
}

double quantile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

}  // namespace

TEST_CASE("log-normal prior density") {
  const LogNormalPrior p{std::log(0.5), 0.7};
  for (double v : {0.1, 0.5, 2.0}) {
    CHECK(p.log_density(v) == doctest::Approx(oracle::lognormal_logpdf(v, std::log(0.5), 0.7)));
  }
  CHECK(p.log_density(0.0) == -std::numeric_limits<double>::infinity());
}

TEST_CASE("log posterior at the prior medians") {
  const SearchSpace line({Variable::continuous("x", 0.0, 2.0)});
  const HyperPrior prior = HyperPrior::defaults(line);
  REQUIRE(prior.lengthscales.size() == 1);
  CHECK(prior.lengthscales[0].log_mean == doctest::Approx(0.0));  // half of width 2

  const KernelConfig cfg = prior_median_config(prior, matern1d(1.0, 1.0, 0.01));
  CHECK(cfg.lengthscales[0] == doctest::Approx(1.0));
  CHECK(cfg.amplitude == doctest::Approx(1.0));

  Dataset data{{scalar(0.7)}, Eigen::VectorXd::Constant(1, 0.4)};
  const double lml = log_marginal_likelihood(cfg, line, data);
  // Each prior term at its median: log phi(0) - log(median * log_std).
  const double prior_terms = 2.0 * (oracle::normal_logpdf(0.0) - std::log(1.0 * 1.0));
  CHECK(std::abs(log_posterior(prior, cfg, line, data) - (lml + prior_terms)) <= 1e-10);

  // Scalar Gaussian oracle for the likelihood part: variance 1 + 0.01 + jitter.
  const double v = 1.01 + 1e-10;
  CHECK(lml == doctest::Approx(-0.5 * 0.16 / v - 0.5 * std::log(v) + oracle::normal_logpdf(0.0))
                   .epsilon(1e-12));
}

TEST_CASE("log posterior guards the domain") {
  const SearchSpace line({Variable::continuous("x", 0.0, 1.0)});
  const HyperPrior prior = HyperPrior::defaults(line);
  Dataset data{{scalar(0.3)}, Eigen::VectorXd::Constant(1, 1.0)};
  CHECK_THROWS_AS(log_posterior(prior, matern1d(0.0, 1.0, 0.0), line, data), ContractError);
  CHECK_THROWS_AS(log_posterior(prior, matern1d(-0.1, 1.0, 0.0), line, data), ContractError);
  HyperPrior bad = prior;
  bad.amplitude.log_std = 0.0;
  CHECK_THROWS_AS(log_posterior(bad, matern1d(0.3, 1.0, 0.0), line, data), ContractError);
}

TEST_CASE("likelihood falls as noise swamps an interpolatable dataset") {
  const SearchSpace line({Variable::continuous("x", 0.0, 1.0)});
  Dataset data;
  data.y = (Eigen::VectorXd(5) << 0.2, -0.4, 0.9, 0.1, -0.7).finished();
  for (int i = 0; i < 5; ++i) data.X.push_back(scalar(0.2 * i + 0.1));
  double previous = std::numeric_limits<double>::infinity();
  for (double noise_std : {2.0, 4.0, 8.0}) {
    const double lml = log_marginal_likelihood(matern1d(0.3, 1.0, noise_std * noise_std), line, data);
    CHECK(lml < previous);
    previous = lml;
  }
}

TEST_CASE("slice sampler recovers a standard normal") {
  RandomStream rng(42);
  const LogDensity target = [](const Eigen::VectorXd& x) { return -0.5 * x[0] * x[0]; };
  const auto draws = slice_sample(target, Eigen::VectorXd::Constant(1, 3.0), 5000, 100, rng);
  REQUIRE(draws.size() == 5000);
  double sum = 0.0;
  double sum2 = 0.0;
  for (const auto& d : draws) {
    sum += d[0];
    sum2 += d[0] * d[0];
  }
  const double mean = sum / 5000.0;
  const double var = sum2 / 5000.0 - mean * mean;
  CHECK(std::abs(mean) <= 0.05);
  CHECK(std::abs(var - 1.0) <= 0.1);
}

TEST_CASE("slice sampler stays inside a flat box") {
  RandomStream rng(1);
  const LogDensity box = [](const Eigen::VectorXd& x) {
    return (x.array() >= -1.0).all() && (x.array() <= 2.0).all()
               ? 0.0
               : -std::numeric_limits<double>::infinity();
  };
  const auto one = slice_sample(box, Eigen::VectorXd::Constant(2, 0.5), 1, 0, rng);
  REQUIRE(one.size() == 1);
  CHECK(((one[0].array() >= -1.0) && (one[0].array() <= 2.0)).all());
  for (const auto& d : slice_sample(box, Eigen::VectorXd::Constant(2, 0.5), 300, 0, rng)) {
    CHECK(((d.array() >= -1.0) && (d.array() <= 2.0)).all());
  }
}

TEST_CASE("slice sampler reports a stuck shrinkage loop") {
  RandomStream rng(1);
  const LogDensity spike = [](const Eigen::VectorXd& x) {
    return x[0] == 0.25 ? 0.0 : -std::numeric_limits<double>::infinity();
  };
  // Density that is finite only at the start and only on the first call, so
  // no proposal can ever be accepted.
  int calls = 0;
  const LogDensity vanishing = [&calls](const Eigen::VectorXd&) {
    return calls++ == 0 ? 0.0 : -std::numeric_limits<double>::infinity();
  };
  CHECK_THROWS_AS(slice_sample(vanishing, Eigen::VectorXd::Constant(1, 0.25), 1, 0, rng),
                  SamplerStuckError);
  CHECK_NOTHROW(slice_sample(spike, Eigen::VectorXd::Constant(1, 0.25), 1, 0, rng));
  CHECK_THROWS_AS(slice_sample(spike, Eigen::VectorXd::Constant(1, 0.5), 1, 0, rng), ContractError);
  CHECK_THROWS_AS(slice_sample(spike, Eigen::VectorXd::Constant(1, 0.25), 0, 0, rng), ContractError);
}

TEST_CASE("hyperparameter samples are positive, finite and reproducible") {
  const SearchSpace space({Variable::continuous("x", 0.0, 1.0), Variable::integer("z", 0, 2)});
  std::mt19937_64 gen(3);
  Dataset data;
  data.y.resize(12);
  std::normal_distribution<double> normal;
  for (int i = 0; i < 12; ++i) {
    data.X.push_back(space.sample_uniform(gen));
    data.y[i] = normal(gen);
  }
  for (bool infer_noise : {false, true}) {
    const HyperPrior prior = HyperPrior::defaults(space, infer_noise);
    KernelConfig base;
    base.integer_transform = true;
    base.noise_variance = 1e-4;
    const KernelConfig init = prior_median_config(prior, base);
    RandomStream a(9);
    RandomStream b(9);
    const auto s1 = slice_sample(prior, space, data, init, 10, 5, a);
    const auto s2 = slice_sample(prior, space, data, init, 10, 5, b);
    REQUIRE(s1.size() == 10);
    for (std::size_t i = 0; i < s1.size(); ++i) {
      CHECK_NOTHROW(s1[i].config.validate(2));
      CHECK(s1[i].config.integer_transform);
      CHECK(std::isfinite(log_posterior(prior, s1[i].config, space, data)));
      CHECK(s1[i].config.lengthscales == s2[i].config.lengthscales);
      CHECK(s1[i].config.amplitude == s2[i].config.amplitude);
      CHECK(s1[i].config.noise_variance == s2[i].config.noise_variance);
      if (!infer_noise) CHECK(s1[i].config.noise_variance == 1e-4);
    }
  }
}

TEST_CASE("posterior lengthscale brackets the generating value") {
  const SearchSpace line({Variable::continuous("x", 0.0, 1.0)});
  const KernelConfig truth = matern1d(0.3, 1.0, 0.0);
  const double noise = 1e-4;
  int covered = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    RandomStream rng(seed);
    std::vector<Point> X;
    for (int i = 0; i < 40; ++i) X.push_back(line.sample_uniform(rng));
    Dataset data{X, sample_prior_on_grid(truth, line, X, rng)};
    std::normal_distribution<double> eps(0.0, std::sqrt(noise));
    for (Eigen::Index i = 0; i < data.y.size(); ++i) data.y[i] += eps(rng);

    const HyperPrior prior = HyperPrior::defaults(line);
    const KernelConfig init = prior_median_config(prior, matern1d(1.0, 1.0, noise));
    const auto samples = slice_sample(prior, line, data, init, 200, 50, rng);
    std::vector<double> ls;
    for (const auto& s : samples) ls.push_back(s.config.lengthscales[0]);
    if (quantile(ls, 0.05) <= 0.3 && 0.3 <= quantile(ls, 0.95)) ++covered;
  }
  CHECK(covered >= 8);
}
