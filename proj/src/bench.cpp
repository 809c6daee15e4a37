#include "intbo/bench.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <mutex>
#include <numbers>
#include <thread>

namespace intbo::bench {

namespace {

constexpr double kRegretFloor = 1e-12;
constexpr double kMaxFailureFraction = 0.10;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

nlohmann::json space_to_json(const SearchSpace& space) {
  auto arr = nlohmann::json::array();
  for (const auto& v : space.variables()) {
    arr.push_back({{"name", v.name},
                   {"type", v.is_integer() ? "integer" : "continuous"},
                   {"lower", v.lower},
                   {"upper", v.upper}});
  }
  return arr;
}

nlohmann::json kernel_to_json(const KernelConfig& cfg) {
  return {{"family", to_string(cfg.family)},
          {"lengthscales", std::vector<double>(cfg.lengthscales.data(),
                                               cfg.lengthscales.data() + cfg.lengthscales.size())},
          {"amplitude", cfg.amplitude},
          {"noise_variance", cfg.noise_variance},
          {"integer_transform", cfg.integer_transform}};
}

}  // namespace

double regret_floor_policy(double raw_regret) {
  return std::log10(std::max(raw_regret, 0.0) + kRegretFloor);
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

KernelConfig default_generator(const SearchSpace& space) {
  KernelConfig cfg;
  cfg.family = KernelFamily::SquaredExponential;
  cfg.integer_transform = true;
  cfg.amplitude = 1.0;
  cfg.noise_variance = 0.0;
  cfg.lengthscales.resize(static_cast<Eigen::Index>(space.dimension()));
  for (std::size_t d = 0; d < space.dimension(); ++d) {
    cfg.lengthscales[static_cast<Eigen::Index>(d)] = space[d].is_integer() ? 1.0 : 0.2;
  }
  return cfg;
}

ObjectiveSpec ObjectiveSpec::synthetic_2d(double noise_variance) {
  SearchSpace space({Variable::continuous("x0", 0.0, 1.0), Variable::integer("z0", 0, 2)});
  return ObjectiveSpec{"synthetic-2d", ObjectiveKind::GpPrior, space, 201,
                       default_generator(space), noise_variance, 3};
}

ObjectiveSpec ObjectiveSpec::synthetic_4d(double noise_variance) {
  SearchSpace space({Variable::continuous("x0", 0.0, 1.0), Variable::continuous("x1", 0.0, 1.0),
                     Variable::integer("z0", 0, 3), Variable::integer("z1", 0, 2)});
  return ObjectiveSpec{"synthetic-4d", ObjectiveKind::GpPrior, space, 21,
                       default_generator(space), noise_variance, 5};
}

ObjectiveSpec ObjectiveSpec::integer_1d(double noise_variance) {
  SearchSpace space({Variable::integer("z0", 0, 4)});
  return ObjectiveSpec{"integer-1d", ObjectiveKind::GpPrior, space, 2,
                       default_generator(space), noise_variance, 2};
}

ObjectiveSpec ObjectiveSpec::analytic_mixed(double noise_variance) {
  SearchSpace space({Variable::continuous("x0", 0.0, 1.0), Variable::continuous("x1", 0.0, 1.0),
                     Variable::integer("z0", 0, 3), Variable::integer("z1", 0, 2)});
  return ObjectiveSpec{"analytic-mixed", ObjectiveKind::Analytic, space, 2,
                       default_generator(space), noise_variance, 5};
}

ObjectiveSpec ObjectiveSpec::builtin(const std::string& name, double noise_variance) {
  if (name == "synthetic-2d") return synthetic_2d(noise_variance);
  if (name == "synthetic-4d") return synthetic_4d(noise_variance);
  if (name == "integer-1d") return integer_1d(noise_variance);
  if (name == "analytic-mixed") return analytic_mixed(noise_variance);
  throw ContractError("unknown benchmark '" + name +
                      "' (expected synthetic-2d, synthetic-4d, integer-1d or analytic-mixed)");
}

nlohmann::json ObjectiveSpec::metadata() const {
  nlohmann::json j{{"name", name},
                   {"kind", kind == ObjectiveKind::GpPrior ? "gp-prior" : "analytic"},
                   {"space", space_to_json(space)},
                   {"noise_variance", noise_variance},
                   {"n_initial", n_initial}};
  if (kind == ObjectiveKind::GpPrior) {
    j["resolution"] = resolution;
    j["generator"] = kernel_to_json(generator);
  }
  return j;
}

double BenchmarkObjective::evaluate(const Point& x, RandomStream& noise) const {
  const double f = noise_free(x);
  if (noise_variance() <= 0.0) return f;
  std::normal_distribution<double> normal(0.0, std::sqrt(noise_variance()));
  return f + normal(noise);
}

SyntheticObjective::SyntheticObjective(const ObjectiveSpec& spec, RandomStream& rng)
    : space_(spec.space),
      resolution_(spec.resolution),
      grid_(spec.space.enumerate_grid(spec.resolution)),
      noise_variance_(spec.noise_variance) {
  if (!(noise_variance_ >= 0.0)) throw ContractError("noise variance must be nonnegative");
  KernelConfig gen = spec.generator;
  gen.integer_transform = true;
  values_ = sample_prior_on_grid(gen, space_, grid_, rng);
  true_min_ = values_.minCoeff();
}

std::size_t SyntheticObjective::locate(const Point& x) const {
  const Point p = space_.transform(space_.clamp(x));
  std::size_t index = 0;
  for (std::size_t d = 0; d < space_.dimension(); ++d) {
    const auto& v = space_[d];
    const double coord = p[static_cast<Eigen::Index>(d)];
    std::size_t count = 0;
    std::size_t pos = 0;
    if (v.is_integer()) {
      count = static_cast<std::size_t>(v.upper - v.lower) + 1;
      pos = static_cast<std::size_t>(coord - v.lower);
    } else {
      count = resolution_;
      const double t = (coord - v.lower) / v.width() * static_cast<double>(resolution_ - 1);
      pos = static_cast<std::size_t>(std::clamp(std::round(t), 0.0,
                                                static_cast<double>(resolution_ - 1)));
    }
    index = index * count + pos;
  }
  return index;
}

double SyntheticObjective::noise_free(const Point& x) const {
  return values_[static_cast<Eigen::Index>(locate(x))];
}

AnalyticObjective::AnalyticObjective(const ObjectiveSpec& spec)
    : space_(spec.space), noise_variance_(spec.noise_variance) {
  if (space_.dimension() != 4 || space_[0].is_integer() || space_[1].is_integer() ||
      !space_[2].is_integer() || !space_[3].is_integer()) {
    throw ContractError("analytic objective expects Cont x Cont x Int x Int");
  }
}

double AnalyticObjective::noise_free(const Point& x) const {
  const Point p = space_.transform(space_.clamp(x));
  const double a = p[0] - 0.3;
  const double b = p[1] - 0.65;
  const double u = p[2] - 2.0;
  const double w = p[3] - 1.0;
  using std::numbers::pi;
  return a * a + b * b + 0.15 * u * u + 0.1 * w * w + 0.1 * (1.0 - std::cos(4.0 * pi * a)) +
         0.05 * (1.0 - std::cos(6.0 * pi * b));
}

std::unique_ptr<BenchmarkObjective> make_objective(const ObjectiveSpec& spec, RandomStream& rng) {
  if (spec.kind == ObjectiveKind::Analytic) return std::make_unique<AnalyticObjective>(spec);
  return std::make_unique<SyntheticObjective>(spec, rng);
}

nlohmann::json ExperimentSpec::metadata() const {
  std::vector<std::string> names;
  for (auto s : strategies) names.push_back(to_string(s));
  return {{"objective", objective.metadata()},
          {"strategies", names},
          {"repetitions", n_repetitions},
          {"iterations", n_iterations},
          {"base_seed", base_seed},
          {"kernel", to_string(kernel_family)},
          {"hyper_samples", inference.n_samples},
          {"burn_in", {inference.initial_burn_in, inference.warm_burn_in}},
          {"candidates", acquisition.n_candidates},
          {"starts", acquisition.n_starts},
          {"regret_log_base", 10},
          {"regret_floor", kRegretFloor}};
}

RepetitionSeeds repetition_seeds(std::uint64_t base_seed, std::size_t repetition) {
  const std::uint64_t root = base_seed + repetition;
  return {root, splitmix64(root ^ 0x6f7074696d697a65ULL), splitmix64(root ^ 0x6e6f697365ULL)};
}

std::vector<double> regret_trace(const BenchmarkObjective& objective,
                                 const std::vector<TrialRecord>& records) {
  std::vector<double> out;
  out.reserve(records.size());
  double best = std::numeric_limits<double>::infinity();
  for (const auto& r : records) {
    best = std::min(best, objective.noise_free(r.evaluated));
    out.push_back(best - objective.true_min());
  }
  return out;
}

ExperimentResult run_experiment(const ExperimentSpec& spec) {
  if (spec.n_repetitions < 1) throw ContractError("need at least one repetition");
  if (spec.strategies.empty()) throw ContractError("need at least one strategy");

  const std::size_t n_strategies = spec.strategies.size();
  std::vector<std::vector<std::optional<RunResult>>> slots(
      spec.n_repetitions, std::vector<std::optional<RunResult>>(n_strategies));
  std::vector<std::vector<std::string>> errors(spec.n_repetitions,
                                               std::vector<std::string>(n_strategies));

  auto run_repetition = [&](std::size_t rep) {
    const RepetitionSeeds seeds = repetition_seeds(spec.base_seed, rep);
    std::unique_ptr<BenchmarkObjective> objective;
    try {
      RandomStream objective_rng(seeds.objective);
      objective = make_objective(spec.objective, objective_rng);
    } catch (const std::exception& e) {
      for (std::size_t s = 0; s < n_strategies; ++s) errors[rep][s] = e.what();
      return;
    }
    for (std::size_t s = 0; s < n_strategies; ++s) {
      RandomStream noise_rng(seeds.noise);
      BoConfig cfg{objective->space()};
      cfg.strategy = spec.strategies[s];
      cfg.n_initial = spec.objective.n_initial;
      cfg.n_iterations = spec.n_iterations;
      cfg.seed = seeds.optimizer;
      cfg.kernel_family = spec.kernel_family;
      cfg.inference = spec.inference;
      cfg.inference.known_noise_variance = spec.objective.noise_variance;
      cfg.acquisition = spec.acquisition;
      cfg.objective = [&](const Point& x) { return objective->evaluate(x, noise_rng); };
      try {
        RunResult run;
        run.strategy = spec.strategies[s];
        run.repetition = rep;
        run.records = run_bo(cfg);
        run.regret = regret_trace(*objective, run.records);
        for (double r : run.regret) run.log_regret.push_back(regret_floor_policy(r));
        run.duplicates = count_premature_duplicates(objective->space(), run.records, cfg.n_initial);
        slots[rep][s] = std::move(run);
      } catch (const std::exception& e) {
        errors[rep][s] = e.what();
      }
    }
  };

  unsigned threads = spec.threads != 0 ? spec.threads : std::thread::hardware_concurrency();
  threads = std::clamp<unsigned>(threads, 1, static_cast<unsigned>(spec.n_repetitions));
  if (threads == 1) {
    for (std::size_t rep = 0; rep < spec.n_repetitions; ++rep) run_repetition(rep);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (std::size_t rep = next++; rep < spec.n_repetitions; rep = next++) run_repetition(rep);
      });
    }
    for (auto& th : pool) th.join();
  }

  ExperimentResult result;
  const std::size_t total_runs = spec.n_repetitions * n_strategies;
  for (std::size_t rep = 0; rep < spec.n_repetitions; ++rep) {
    for (std::size_t s = 0; s < n_strategies; ++s) {
      if (slots[rep][s]) {
        result.runs.push_back(std::move(*slots[rep][s]));
      } else {
        ++result.failures;
        result.failure_messages.push_back(to_string(spec.strategies[s]) + " rep " +
                                          std::to_string(rep) + ": " + errors[rep][s]);
      }
    }
  }
  if (static_cast<double>(result.failures) > kMaxFailureFraction * static_cast<double>(total_runs)) {
    throw std::runtime_error(std::to_string(result.failures) + " of " +
                             std::to_string(total_runs) + " runs failed; first: " +
                             result.failure_messages.front());
  }

  for (const Strategy strategy : spec.strategies) {
    RegretCurve curve;
    std::vector<const RunResult*> runs;
    for (const auto& run : result.runs) {
      if (run.strategy == strategy) runs.push_back(&run);
    }
    curve.repetitions = runs.size();
    if (!runs.empty()) {
      const std::size_t length = runs.front()->log_regret.size();
      const double n = static_cast<double>(runs.size());
      for (std::size_t i = 0; i < length; ++i) {
        double sum = 0.0;
        for (const auto* run : runs) sum += run->log_regret[i];
        const double mean = sum / n;
        double ss = 0.0;
        for (const auto* run : runs) ss += (run->log_regret[i] - mean) * (run->log_regret[i] - mean);
        curve.mean.push_back(mean);
        curve.stderr_.push_back(runs.size() > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0);
      }
      double dup = 0.0;
      for (const auto* run : runs) dup += static_cast<double>(run->duplicates);
      curve.mean_duplicates = dup / n;
    }
    result.curves[strategy] = std::move(curve);
  }
  return result;
}

nlohmann::json point_to_json(const Point& x) {
  return std::vector<double>(x.data(), x.data() + x.size());
}

Point point_from_json(const nlohmann::json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

void write_records(std::ostream& out, const ExperimentSpec& spec, const ExperimentResult& result) {
  out << nlohmann::json{{"metadata", spec.metadata()}}.dump() << '\n';
  for (const auto& run : result.runs) {
    for (std::size_t i = 0; i < run.records.size(); ++i) {
      const auto& r = run.records[i];
      nlohmann::json line{{"strategy", to_string(run.strategy)},
                          {"rep", run.repetition},
                          {"iter", r.iteration},
                          {"suggested", point_to_json(r.suggested)},
                          {"evaluated", point_to_json(r.evaluated)},
                          {"observed", r.observed},
                          {"incumbent", r.incumbent_after},
                          {"regret", run.regret[i]},
                          {"log_regret", run.log_regret[i]}};
      out << line.dump() << '\n';
    }
  }
}

void write_curves_csv(std::ostream& out, const ExperimentSpec& spec,
                      const ExperimentResult& result) {
  out << "# " << nlohmann::json(spec.metadata()).dump() << '\n';
  out << "# failures=" << result.failures << '\n';
  out << "strategy,iter,mean_log_regret,stderr\n";
  for (const Strategy strategy : spec.strategies) {
    const auto& curve = result.curves.at(strategy);
    for (std::size_t i = 0; i < curve.mean.size(); ++i) {
      out << to_string(strategy) << ',' << i << ',' << format_double(curve.mean[i]) << ','
          << format_double(curve.stderr_[i]) << '\n';
    }
  }
}

}  // namespace intbo::bench
