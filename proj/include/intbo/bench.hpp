#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "intbo/driver.hpp"
#include "intbo/kernel.hpp"
#include "intbo/space.hpp"
#include "intbo/strategy.hpp"

namespace intbo::bench {

/// log10(max(raw, 0) + 1e-12).
double regret_floor_policy(double raw_regret);

enum class ObjectiveKind { GpPrior, Analytic };

/// Recipe for a benchmark objective. GP-prior objectives are tabulated on a
/// grid; the analytic one is a closed-form mixed-integer function with known
/// minimum.
struct ObjectiveSpec {
  std::string name;
  ObjectiveKind kind = ObjectiveKind::GpPrior;
  SearchSpace space;
  std::size_t resolution = 21;  // grid points per continuous dimension
  KernelConfig generator;       // prior used to draw the objective
  double noise_variance = 0.0;  // injected observation noise
  std::size_t n_initial = 3;

  /// Cont[0,1] x Int{0,1,2}, 201 points per continuous dimension.
  static ObjectiveSpec synthetic_2d(double noise_variance = 0.0);
  /// Cont[0,1]^2 x Int{0..3} x Int{0..2}, 21 points per continuous dimension.
  static ObjectiveSpec synthetic_4d(double noise_variance = 0.0);
  /// Single integer variable in {0..4}.
  static ObjectiveSpec integer_1d(double noise_variance = 0.0);
  /// Closed-form Cont[0,1]^2 x Int{0..3} x Int{0..2} function, minimum 0.
  static ObjectiveSpec analytic_mixed(double noise_variance = 0.0);
  static ObjectiveSpec builtin(const std::string& name, double noise_variance = 0.0);

  nlohmann::json metadata() const;
};

/// Squared-exponential generator with the integer transform, lengthscale 0.2
/// on continuous and 1.0 on integer dimensions, amplitude 1.
KernelConfig default_generator(const SearchSpace& space);

class BenchmarkObjective {
 public:
  virtual ~BenchmarkObjective() = default;
  virtual const SearchSpace& space() const = 0;
  virtual double noise_free(const Point& x) const = 0;
  virtual double true_min() const = 0;
  virtual double noise_variance() const = 0;

  /// noise_free(x) plus fresh Gaussian noise of the configured variance.
  double evaluate(const Point& x, RandomStream& noise) const;
};

/// GP-prior draw tabulated on a grid.
class SyntheticObjective : public BenchmarkObjective {
 public:
  SyntheticObjective(const ObjectiveSpec& spec, RandomStream& rng);

  const SearchSpace& space() const override { return space_; }
  double noise_free(const Point& x) const override;
  double true_min() const override { return true_min_; }
  double noise_variance() const override { return noise_variance_; }

  const std::vector<Point>& grid() const noexcept { return grid_; }
  const Eigen::VectorXd& values() const noexcept { return values_; }
  /// Row of the grid point an arbitrary domain point maps to.
  std::size_t locate(const Point& x) const;

 private:
  SearchSpace space_;
  std::size_t resolution_;
  std::vector<Point> grid_;
  Eigen::VectorXd values_;
  double true_min_ = 0.0;
  double noise_variance_ = 0.0;
};

class AnalyticObjective : public BenchmarkObjective {
 public:
  explicit AnalyticObjective(const ObjectiveSpec& spec);

  const SearchSpace& space() const override { return space_; }
  double noise_free(const Point& x) const override;
  double true_min() const override { return 0.0; }
  double noise_variance() const override { return noise_variance_; }

 private:
  SearchSpace space_;
  double noise_variance_ = 0.0;
};

std::unique_ptr<BenchmarkObjective> make_objective(const ObjectiveSpec& spec, RandomStream& rng);

struct ExperimentSpec {
  ObjectiveSpec objective;
  std::vector<Strategy> strategies{Strategy::Proposed, Strategy::Basic};
  std::size_t n_repetitions = 20;
  std::size_t n_iterations = 50;
  std::uint64_t base_seed = 0;
  KernelFamily kernel_family = KernelFamily::Matern52;
  InferenceSettings inference;
  MultistartOptions acquisition;
  unsigned threads = 0;  // 0: hardware concurrency

  nlohmann::json metadata() const;
};

struct RunResult {
  Strategy strategy = Strategy::Proposed;
  std::size_t repetition = 0;
  std::vector<TrialRecord> records;
  std::vector<double> log_regret;  // per record
  std::vector<double> regret;      // raw noise-free regret per record
  std::size_t duplicates = 0;      // premature duplicate evaluations
};

struct RegretCurve {
  std::size_t repetitions = 0;
  std::vector<double> mean;
  std::vector<double> stderr_;
  double mean_duplicates = 0.0;
};

struct ExperimentResult {
  std::vector<RunResult> runs;  // ordered by (repetition, strategy)
  std::map<Strategy, RegretCurve> curves;
  std::size_t failures = 0;
  std::vector<std::string> failure_messages;
};

/// Seeds for one repetition, shared by every strategy.
struct RepetitionSeeds {
  std::uint64_t objective;
  std::uint64_t optimizer;
  std::uint64_t noise;
};
RepetitionSeeds repetition_seeds(std::uint64_t base_seed, std::size_t repetition);

/// Log regret per record against the noise-free objective.
std::vector<double> regret_trace(const BenchmarkObjective& objective,
                                 const std::vector<TrialRecord>& records);

ExperimentResult run_experiment(const ExperimentSpec& spec);

void write_records(std::ostream& out, const ExperimentSpec& spec, const ExperimentResult& result);
void write_curves_csv(std::ostream& out, const ExperimentSpec& spec,
                      const ExperimentResult& result);

nlohmann::json point_to_json(const Point& x);
Point point_from_json(const nlohmann::json& j);

/// Shortest round-trip text for a double.
std::string format_double(double v);

}  // namespace intbo::bench
