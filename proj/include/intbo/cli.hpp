#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "intbo/bench.hpp"
#include "intbo/driver.hpp"

namespace intbo::cli {

/// Bad or inconsistent configuration; maps to exit code 1.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;
inline constexpr int kExitRuntime = 2;

/// Flat command-line overrides applied on top of the config file.
struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> reps;
  std::optional<std::size_t> iters;
  std::optional<std::string> strategy;
  std::optional<std::string> out;
};

SearchSpace parse_space(const nlohmann::json& j);
nlohmann::json space_to_json(const SearchSpace& space);

/// Bench config -> experiment spec plus output directory.
struct BenchPlan {
  bench::ExperimentSpec spec;
  std::string out_dir;
};
BenchPlan parse_bench_config(const nlohmann::json& config, const Overrides& overrides);

/// Where a single run gets its objective values.
struct ObjectiveSource {
  std::string command;                      // external evaluator when nonempty
  std::optional<bench::ObjectiveSpec> builtin;
  std::uint64_t builtin_seed = 0;
};

struct RunSpec {
  SearchSpace space;
  Strategy strategy = Strategy::Proposed;
  std::size_t n_initial = 3;
  std::size_t n_iterations = 10;
  std::uint64_t seed = 0;
  KernelFamily kernel_family = KernelFamily::Matern52;
  std::optional<double> known_noise_variance = 0.0;  // empty: infer noise
  ObjectiveSource objective;
  std::string out_dir;

  nlohmann::json metadata() const;
};
RunSpec parse_run_config(const nlohmann::json& config, const Overrides& overrides);

struct SamplePlan {
  bench::ObjectiveSpec spec;
  std::uint64_t seed = 0;
  std::string out_dir;
};
SamplePlan parse_sample_config(const nlohmann::json& config, const Overrides& overrides);

/// Evaluates a point with an external command: the point goes to stdin as
/// one comma-separated line, one real number is read back from stdout.
double evaluate_external(const std::string& command, const Point& x);

/// One line of a run record file.
nlohmann::json record_to_json(const TrialRecord& record);
TrialRecord record_from_json(const nlohmann::json& j);

int cmd_bench(const std::string& config_path, const Overrides& overrides, std::ostream& out,
              std::ostream& err);
int cmd_run(const std::string& config_path, const Overrides& overrides, std::ostream& out,
            std::ostream& err);
int cmd_sample_objective(const std::string& config_path, const Overrides& overrides,
                         std::ostream& out, std::ostream& err);

/// Entry point for the `intbo` executable.
int main(int argc, char** argv);

}  // namespace intbo::cli
