// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero when any criterion fails. Pass criterion numbers as arguments to
// run a subset.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <unistd.h>

#include "intbo/bench.hpp"
#include "intbo/cli.hpp"
#include "intbo/gp.hpp"
#include "intbo/inference.hpp"
#include "oracles.hpp"

using namespace intbo;

namespace {

struct Verdict {
  bool pass;
  std::string detail;
};

std::string fmt(double v) {
  std::ostringstream s;
  s << std::setprecision(4) << v;
  return s.str();
}

SearchSpace random_space(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> dims(1, 4);
  std::uniform_int_distribution<int> coin(0, 1);
  std::uniform_int_distribution<long> span(1, 5);
  std::vector<Variable> vars;
  const int d = dims(rng);
  for (int i = 0; i < d; ++i) {
    const std::string name = "v" + std::to_string(i);
    if (coin(rng)) {
      vars.push_back(Variable::integer(name, -1, -1 + span(rng)));
    } else {
      vars.push_back(Variable::continuous(name, 0.0, 1.0 + static_cast<double>(span(rng))));
    }
  }
  return SearchSpace(std::move(vars));
}

KernelConfig random_config(const SearchSpace& space, std::mt19937_64& rng, KernelFamily family,
                           bool transform, double noise) {
  KernelConfig cfg;
  cfg.family = family;
  cfg.integer_transform = transform;
  cfg.lengthscales.resize(static_cast<Eigen::Index>(space.dimension()));
  std::uniform_real_distribution<double> frac(0.1, 1.0);
  for (std::size_t d = 0; d < space.dimension(); ++d) {
    cfg.lengthscales[static_cast<Eigen::Index>(d)] = frac(rng) * std::max(1.0, space[d].width());
  }
  cfg.amplitude = 0.5 + frac(rng);
  cfg.noise_variance = noise * cfg.signal_variance();
  return cfg;
}

Dataset random_data(const SearchSpace& space, std::size_t n, std::mt19937_64& rng) {
  Dataset data;
  data.y.resize(static_cast<Eigen::Index>(n));
  std::normal_distribution<double> normal;
  for (std::size_t i = 0; i < n; ++i) {
    data.X.push_back(oracle::random_relaxed(space, rng));
    data.y[static_cast<Eigen::Index>(i)] = normal(rng);
  }
  return data;
}

// 1. GP posterior against dense-inverse oracles.
Verdict oracle_equivalence() {
  std::mt19937_64 rng(101);
  std::uniform_int_distribution<std::size_t> size(1, 20);
  std::uniform_real_distribution<double> log_noise(-3.0, -1.0);
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const SearchSpace space = random_space(rng);
    const auto family = trial % 2 ? KernelFamily::Matern52 : KernelFamily::SquaredExponential;
    const bool transform = (trial / 2) % 2 == 0;
    const KernelConfig cfg = random_config(space, rng, family, transform, std::pow(10.0, log_noise(rng)));
    const Dataset data = random_data(space, size(rng), rng);

    const GpPosterior post(cfg, space, data);
    const auto dense = oracle::dense_gp(cfg, space, data.X, data.y, cfg.noise_variance + post.jitter());
    worst = std::max(worst, std::abs(post.log_marginal_likelihood() - oracle::dense_lml(dense, data.y)));
    for (int t = 0; t < 10; ++t) {
      const Point x = oracle::random_relaxed(space, rng);
      const auto pd = post.predict(x);
      const auto [m, v] = oracle::dense_predict(dense, cfg, space, data.X, x);
      worst = std::max({worst, std::abs(pd.mean - m), std::abs(pd.variance - std::max(0.0, v))});
    }
  }
  return {worst <= 1e-8, "max abs deviation " + fmt(worst) + " (tol 1e-8)"};
}

// 2. Posterior constant on cells.
Verdict cell_constancy() {
  std::mt19937_64 rng(202);
  double worst = 0.0;
  int pairs = 0;
  for (int g = 0; g < 10; ++g) {
    SearchSpace space = random_space(rng);
    while (!space.has_integer()) space = random_space(rng);
    const auto family = g % 2 ? KernelFamily::Matern52 : KernelFamily::SquaredExponential;
    const KernelConfig cfg = random_config(space, rng, family, true, 1e-4);
    const GpPosterior post(cfg, space, random_data(space, 15, rng));
    for (int p = 0; p < 100; ++p, ++pairs) {
      const Point x = oracle::random_relaxed(space, rng);
      Point y = x;
      for (std::size_t d = 0; d < space.dimension(); ++d) {
        if (!space[d].is_integer()) continue;
        const auto i = static_cast<Eigen::Index>(d);
        const double cell = round_half_away(x[i]);
        const double lo = std::max(space[d].lower, cell - 0.49);
        const double hi = std::min(space[d].upper, cell + 0.49);
        y[i] = std::uniform_real_distribution<double>(lo, hi)(rng);
      }
      if (!(space.transform(x) == space.transform(y))) return {false, "pair generator left the cell"};
      const auto a = post.predict(x);
      const auto b = post.predict(y);
      worst = std::max({worst, std::abs(a.mean - b.mean), std::abs(a.variance - b.variance)});
    }
  }
  return {pairs == 1000 && worst <= 1e-9,
          std::to_string(pairs) + " pairs, max abs difference " + fmt(worst) + " (tol 1e-9)"};
}

// 3. No posterior uncertainty once every cell is observed.
Verdict exhaustion() {
  const SearchSpace ints({Variable::integer("z", 0, 4)});
  Dataset data;
  data.y = (Eigen::VectorXd(5) << 0.3, -1.1, 0.8, 0.2, -0.4).finished();
  for (int z = 0; z < 5; ++z) data.X.push_back(Point::Constant(1, z));
  double worst_ratio = 0.0;
  for (auto family : {KernelFamily::Matern52, KernelFamily::SquaredExponential}) {
    for (double ls : {0.3, 1.0, 2.0, 5.0}) {
      for (double amp : {0.5, 1.0, 3.0}) {
        KernelConfig cfg;
        cfg.family = family;
        cfg.lengthscales = Eigen::VectorXd::Constant(1, ls);
        cfg.amplitude = amp;
        cfg.noise_variance = 0.0;
        cfg.integer_transform = true;
        const GpPosterior post(cfg, ints, data);
        for (int i = 0; i < 500; ++i) {
          const double z = 4.0 * i / 499.0;
          const double sd = std::sqrt(post.predict(Point::Constant(1, z)).variance);
          worst_ratio = std::max(worst_ratio, sd / amp);
        }
      }
    }
  }
  return {worst_ratio <= 1e-3, "max std / amplitude " + fmt(worst_ratio) + " (tol 1e-3)"};
}

// 4. Expected improvement against Monte Carlo.
Verdict ei_correctness() {
  std::mt19937_64 rng(404);
  std::uniform_real_distribution<double> loc(-2.0, 2.0);
  std::uniform_real_distribution<double> scale(0.05, 2.0);
  double worst_z = 0.0;
  for (int i = 0; i < 20; ++i) {
    const double mean = loc(rng);
    const double sd = scale(rng);
    const double inc = loc(rng);
    const auto mc = oracle::expected_improvement(mean, sd, inc, 1000000, 1000 + i);
    worst_z = std::max(worst_z, std::abs(expected_improvement(mean, sd, inc) - mc.mean) / mc.stderr_);
  }
  const double at_zero = std::abs(expected_improvement(0.7, 1.0, 0.7) - 1.0 / std::sqrt(2.0 * std::numbers::pi));
  return {worst_z <= 3.0 && at_zero <= 1e-9,
          "max |EI - MC| / se " + fmt(worst_z) + " (tol 3), gamma=0 error " + fmt(at_zero) + " (tol 1e-9)"};
}

// 5. Naive stalls on the one-dimensional integer benchmark; proposed does not.
Verdict naive_stall() {
  bench::ExperimentSpec spec{bench::ObjectiveSpec::integer_1d()};
  spec.strategies = {Strategy::Naive, Strategy::Proposed};
  spec.n_repetitions = 20;
  spec.n_iterations = 15;
  spec.base_seed = 0;
  const auto result = bench::run_experiment(spec);
  const double naive = result.curves.at(Strategy::Naive).mean_duplicates;
  const double proposed = result.curves.at(Strategy::Proposed).mean_duplicates;
  return {result.failures == 0 && naive > 0.0 && proposed == 0.0,
          "mean premature duplicates naive " + fmt(naive) + " (need > 0), proposed " + fmt(proposed) +
              " (need 0)"};
}

// 6. Proposed ends at or below basic on the synthetic benchmarks.
Verdict synthetic_ordering() {
  struct Setting {
    const char* name;
    double noise;
    std::size_t iterations;
  };
  const Setting settings[] = {{"synthetic-2d", 0.0, 50},
                              {"synthetic-2d", 0.01, 50},
                              {"synthetic-4d", 0.0, 100},
                              {"synthetic-4d", 0.001, 100}};
  bool pass = true;
  std::string detail;
  for (const auto& s : settings) {
    bench::ExperimentSpec spec{bench::ObjectiveSpec::builtin(s.name, s.noise)};
    spec.strategies = {Strategy::Proposed, Strategy::Basic};
    spec.n_repetitions = 20;
    spec.n_iterations = s.iterations;
    spec.base_seed = 1;
    const auto result = bench::run_experiment(spec);
    const std::string tag = std::string(s.name) + "_noise" + bench::format_double(s.noise);
    std::ofstream csv("acceptance_" + tag + ".csv");
    bench::write_curves_csv(csv, spec, result);
    const double p = result.curves.at(Strategy::Proposed).mean.back();
    const double b = result.curves.at(Strategy::Basic).mean.back();
    const bool ok = p <= b;
    pass = pass && ok;
    detail += "\n    " + tag + ": proposed " + fmt(p) + " +- " +
              fmt(result.curves.at(Strategy::Proposed).stderr_.back()) + ", basic " + fmt(b) + " +- " +
              fmt(result.curves.at(Strategy::Basic).stderr_.back()) + (ok ? "" : "  <- ordering violated") +
              " (failures " + std::to_string(result.failures) + ")";
  }
  return {pass, "final mean log10 regret" + detail};
}

// 7. Slice sampler moments and lengthscale coverage. The moment check must
// hold on every one of 20 independently seeded chains.
Verdict slice_sanity() {
  const LogDensity normal = [](const Eigen::VectorXd& x) { return -0.5 * x[0] * x[0]; };
  double worst_mean = 0.0;
  double worst_var = 0.0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    RandomStream rng(seed);
    const auto draws = slice_sample(normal, Eigen::VectorXd::Zero(1), 5000, 100, rng);
    double sum = 0.0;
    double sum2 = 0.0;
    for (const auto& d : draws) {
      sum += d[0];
      sum2 += d[0] * d[0];
    }
    const double mean = sum / 5000.0;
    worst_mean = std::max(worst_mean, std::abs(mean));
    worst_var = std::max(worst_var, std::abs(sum2 / 5000.0 - mean * mean - 1.0));
  }

  const SearchSpace line({Variable::continuous("x", 0.0, 1.0)});
  KernelConfig truth;
  truth.lengthscales = Eigen::VectorXd::Constant(1, 0.3);
  const double noise = 1e-4;
  int covered = 0;
  for (std::uint64_t seed = 100; seed < 110; ++seed) {
    RandomStream r(seed);
    std::vector<Point> X;
    for (int i = 0; i < 40; ++i) X.push_back(line.sample_uniform(r));
    Dataset data{X, sample_prior_on_grid(truth, line, X, r)};
    std::normal_distribution<double> eps(0.0, std::sqrt(noise));
    for (Eigen::Index i = 0; i < data.y.size(); ++i) data.y[i] += eps(r);
    const HyperPrior prior = HyperPrior::defaults(line);
    KernelConfig base = truth;
    base.noise_variance = noise;
    const auto samples = slice_sample(prior, line, data, prior_median_config(prior, base), 200, 50, r);
    std::vector<double> ls;
    for (const auto& s : samples) ls.push_back(s.config.lengthscales[0]);
    std::sort(ls.begin(), ls.end());
    const double lo = ls[static_cast<std::size_t>(0.05 * (ls.size() - 1))];
    const double hi = ls[static_cast<std::size_t>(std::ceil(0.95 * (ls.size() - 1)))];
    if (lo <= 0.3 && 0.3 <= hi) ++covered;
  }
  const bool pass = worst_mean <= 0.05 && worst_var <= 0.1 && covered >= 8;
  return {pass, "over 20 chains max |mean| " + fmt(worst_mean) + " (tol 0.05), max |variance - 1| " +
                    fmt(worst_var) + " (tol 0.1); lengthscale coverage " + std::to_string(covered) +
                    "/10 (need 8)"};
}

// 8. Bench record files are byte-identical across invocations.
Verdict determinism() {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / ("intbo_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir);
  const fs::path config = dir / "bench.json";
  std::ofstream(config) << nlohmann::json{{"benchmark", "synthetic-2d"},
                                          {"repetitions", 2},
                                          {"iterations", 5},
                                          {"seed", 8}}
                               .dump();
  auto read = [](const fs::path& p) {
    std::ifstream in(p);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
  };
  std::string files[2];
  for (int i = 0; i < 2; ++i) {
    cli::Overrides o;
    o.out = (dir / ("out" + std::to_string(i))).string();
    std::ostringstream out;
    std::ostringstream err;
    if (cli::cmd_bench(config.string(), o, out, err) != 0) {
      fs::remove_all(dir);
      return {false, "cmd_bench failed: " + err.str()};
    }
    files[i] = read(fs::path(*o.out) / "records.jsonl");
  }
  fs::remove_all(dir);
  const bool same = !files[0].empty() && files[0] == files[1];
  return {same, std::to_string(files[0].size()) + " bytes, " + (same ? "identical" : "different")};
}

}  // namespace

int main(int argc, char** argv) {
  struct Criterion {
    int id;
    const char* name;
    double budget_seconds;
    std::function<Verdict()> run;
  };
  const Criterion criteria[] = {
      {1, "oracle equivalence", 10, oracle_equivalence},
      {2, "cell constancy", 5, cell_constancy},
      {3, "exhaustion", 5, exhaustion},
      {4, "expected improvement", 30, ei_correctness},
      {5, "naive stall", 300, naive_stall},
      {6, "synthetic ordering", 7200, synthetic_ordering},
      {7, "slice sampler", 300, slice_sanity},
      {8, "determinism", 60, determinism},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::stoi(argv[i]));

  int failures = 0;
  for (const auto& c : criteria) {
    if (!selected.empty() && !selected.count(c.id)) continue;
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.run();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = seconds <= c.budget_seconds;
    const bool pass = v.pass && in_time;
    if (!pass) ++failures;
    std::cout << (pass ? "PASS" : "FAIL") << "  criterion " << c.id << " (" << c.name << "): " << v.detail
              << "  [" << fmt(seconds) << " s, budget " << c.budget_seconds << " s"
              << (in_time ? "" : ", over budget") << "]" << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
