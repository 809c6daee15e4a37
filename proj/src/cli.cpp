#include "intbo/cli.hpp"

#include <cerrno>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "intbo/subprocess.hpp"

namespace intbo::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& context) {
  if (!j.is_object()) throw ConfigError(context + " must be a JSON object");
  for (const auto& [key, _] : j.items()) {
    if (!allowed.contains(key)) throw ConfigError("unknown field '" + key + "' in " + context);
  }
}

template <class T>
T field(const json& j, const std::string& key, T fallback) {
  if (!j.contains(key) || j.at(key).is_null()) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError("field '" + key + "' has the wrong type: " + e.what());
  }
}

std::size_t count_field(const json& j, const std::string& key, std::size_t fallback) {
  if (!j.contains(key)) return fallback;
  const auto& v = j.at(key);
  if (!v.is_number_integer() || v.get<long long>() < 0) {
    throw ConfigError("field '" + key + "' must be a nonnegative integer");
  }
  return v.get<std::size_t>();
}

json read_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config file '" + path + "' is not valid JSON: " + e.what());
  }
}

Strategy parse_strategy(const std::string& name, const std::string& field_name) {
  try {
    return strategy_from_string(name);
  } catch (const ContractError& e) {
    throw ConfigError("field '" + field_name + "': " + e.what());
  }
}

KernelFamily parse_kernel(const json& j) {
  try {
    return kernel_family_from_string(field<std::string>(j, "kernel", "matern52"));
  } catch (const ContractError& e) {
    throw ConfigError(std::string("field 'kernel': ") + e.what());
  }
}

std::optional<double> parse_noise(const json& j, const std::string& key) {
  if (!j.contains(key)) return 0.0;
  const auto& v = j.at(key);
  if (v.is_string() && v.get<std::string>() == "infer") return std::nullopt;
  if (!v.is_number() || v.get<double>() < 0.0) {
    throw ConfigError("field '" + key + "' must be a nonnegative number or \"infer\"");
  }
  return v.get<double>();
}

bench::ObjectiveSpec parse_objective_spec(const json& config, double noise) {
  const std::string name = field<std::string>(config, "benchmark", "synthetic-2d");
  if (name == "custom") {
    if (!config.contains("space")) throw ConfigError("custom benchmark needs a 'space' field");
    const SearchSpace space = parse_space(config.at("space"));
    bench::ObjectiveSpec spec{"custom",
                              bench::ObjectiveKind::GpPrior,
                              space,
                              count_field(config, "resolution", 21),
                              bench::default_generator(space),
                              noise,
                              3};
    return spec;
  }
  if (config.contains("space")) {
    throw ConfigError("field 'space' is only used with benchmark \"custom\"");
  }
  try {
    auto spec = bench::ObjectiveSpec::builtin(name, noise);
    if (config.contains("resolution")) spec.resolution = count_field(config, "resolution", 0);
    return spec;
  } catch (const ContractError& e) {
    throw ConfigError(std::string("field 'benchmark': ") + e.what());
  }
}

std::size_t default_iterations(const std::string& benchmark) {
  if (benchmark == "synthetic-4d") return 100;
  if (benchmark == "integer-1d") return 15;
  return 50;
}

std::string point_line(const Point& x) {
  std::string line;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (i > 0) line += ',';
    line += bench::format_double(x[i]);
  }
  return line;
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory '" + dir + "': " + ec.message());
}

/// Maps exceptions to exit codes; config problems are 1, everything else 2.
template <class Fn>
int guarded(std::ostream& err, Fn&& fn) {
  try {
    return fn();
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const ContractError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}

}  // namespace

SearchSpace parse_space(const json& j) {
  if (!j.is_array() || j.empty()) throw ConfigError("field 'space' must be a nonempty array");
  std::vector<Variable> vars;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const auto& v = j[i];
    const std::string ctx = "space[" + std::to_string(i) + "]";
    check_keys(v, {"name", "type", "lower", "upper"}, ctx);
    const std::string name = field<std::string>(v, "name", "v" + std::to_string(i));
    const std::string type = field<std::string>(v, "type", "");
    if (!v.contains("lower") || !v.contains("upper") || !v["lower"].is_number() ||
        !v["upper"].is_number()) {
      throw ConfigError(ctx + " needs numeric 'lower' and 'upper'");
    }
    try {
      if (type == "continuous") {
        vars.push_back(Variable::continuous(name, v["lower"].get<double>(), v["upper"].get<double>()));
      } else if (type == "integer") {
        if (!v["lower"].is_number_integer() || !v["upper"].is_number_integer()) {
          throw ConfigError(ctx + " integer bounds must be integers");
        }
        vars.push_back(Variable::integer(name, v["lower"].get<long>(), v["upper"].get<long>()));
      } else {
        throw ConfigError("field 'type' of " + ctx + " must be \"continuous\" or \"integer\"");
      }
    } catch (const ContractError& e) {
      throw ConfigError(ctx + ": " + e.what());
    }
  }
  return SearchSpace(std::move(vars));
}

json space_to_json(const SearchSpace& space) {
  auto arr = json::array();
  for (const auto& v : space.variables()) {
    json item{{"name", v.name}, {"type", v.is_integer() ? "integer" : "continuous"}};
    if (v.is_integer()) {
      item["lower"] = static_cast<long>(v.lower);
      item["upper"] = static_cast<long>(v.upper);
    } else {
      item["lower"] = v.lower;
      item["upper"] = v.upper;
    }
    arr.push_back(item);
  }
  return arr;
}

BenchPlan parse_bench_config(const json& config, const Overrides& overrides) {
  check_keys(config,
             {"benchmark", "space", "resolution", "noise_variance", "strategies", "repetitions",
              "iterations", "seed", "n_initial", "kernel", "hyper_samples", "burn_in",
              "warm_burn_in", "candidates", "starts", "threads", "out"},
             "bench config");
  const double noise = field<double>(config, "noise_variance", 0.0);
  if (!(noise >= 0.0)) throw ConfigError("field 'noise_variance' must be nonnegative");
  BenchPlan plan{bench::ExperimentSpec{parse_objective_spec(config, noise)}, {}};
  auto& spec = plan.spec;
  spec.objective.n_initial = count_field(config, "n_initial", spec.objective.n_initial);

  spec.strategies.clear();
  if (overrides.strategy) {
    spec.strategies.push_back(parse_strategy(*overrides.strategy, "--strategy"));
  } else if (config.contains("strategies")) {
    if (!config["strategies"].is_array() || config["strategies"].empty()) {
      throw ConfigError("field 'strategies' must be a nonempty array");
    }
    for (const auto& s : config["strategies"]) {
      if (!s.is_string()) throw ConfigError("field 'strategies' must hold strings");
      spec.strategies.push_back(parse_strategy(s.get<std::string>(), "strategies"));
    }
  } else {
    spec.strategies = {Strategy::Proposed, Strategy::Basic};
  }

  spec.n_repetitions = overrides.reps.value_or(count_field(config, "repetitions", 20));
  spec.n_iterations = overrides.iters.value_or(
      count_field(config, "iterations", default_iterations(spec.objective.name)));
  spec.base_seed = overrides.seed.value_or(field<std::uint64_t>(config, "seed", 0));
  spec.kernel_family = parse_kernel(config);
  spec.inference.n_samples = count_field(config, "hyper_samples", spec.inference.n_samples);
  spec.inference.initial_burn_in = count_field(config, "burn_in", spec.inference.initial_burn_in);
  spec.inference.warm_burn_in = count_field(config, "warm_burn_in", spec.inference.warm_burn_in);
  spec.acquisition.n_candidates = count_field(config, "candidates", spec.acquisition.n_candidates);
  spec.acquisition.n_starts = count_field(config, "starts", spec.acquisition.n_starts);
  spec.threads = static_cast<unsigned>(count_field(config, "threads", 0));
  plan.out_dir = overrides.out.value_or(field<std::string>(config, "out", "results"));

  if (spec.n_repetitions < 1) throw ConfigError("field 'repetitions' must be at least 1");
  if (spec.n_iterations < 1) throw ConfigError("field 'iterations' must be at least 1");
  if (spec.objective.n_initial < 2) throw ConfigError("field 'n_initial' must be at least 2");
  if (spec.inference.n_samples < 1) throw ConfigError("field 'hyper_samples' must be at least 1");
  if (spec.objective.kind == bench::ObjectiveKind::GpPrior &&
      spec.objective.space.grid_size(spec.objective.resolution) > SearchSpace::kDefaultGridCap) {
    throw ConfigError("field 'resolution': grid exceeds the capacity cap");
  }
  return plan;
}

json RunSpec::metadata() const {
  json j{{"space", space_to_json(space)},
         {"strategy", to_string(strategy)},
         {"n_initial", n_initial},
         {"iterations", n_iterations},
         {"seed", seed},
         {"kernel", to_string(kernel_family)}};
  j["noise_variance"] = known_noise_variance ? json(*known_noise_variance) : json("infer");
  if (!objective.command.empty()) {
    j["objective"] = {{"command", objective.command}};
  } else {
    j["objective"] = {{"builtin", objective.builtin->name},
                      {"seed", objective.builtin_seed},
                      {"noise_variance", objective.builtin->noise_variance}};
  }
  return j;
}

RunSpec parse_run_config(const json& config, const Overrides& overrides) {
  check_keys(config,
             {"space", "strategy", "n_initial", "iterations", "seed", "kernel", "noise_variance",
              "objective", "out"},
             "run config");
  if (!config.contains("objective")) throw ConfigError("run config needs an 'objective' field");
  const json& obj = config.at("objective");
  check_keys(obj, {"command", "builtin", "seed", "noise_variance"}, "field 'objective'");

  RunSpec spec{config.contains("space") ? parse_space(config.at("space"))
                                        : SearchSpace({Variable::continuous("x0", 0.0, 1.0)})};
  if (obj.contains("command")) {
    spec.objective.command = field<std::string>(obj, "command", "");
    if (spec.objective.command.empty()) throw ConfigError("field 'objective.command' is empty");
    if (!config.contains("space")) throw ConfigError("an external objective needs a 'space'");
  } else if (obj.contains("builtin")) {
    if (config.contains("space")) throw ConfigError("field 'space' conflicts with a builtin objective");
    const double noise = field<double>(obj, "noise_variance", 0.0);
    try {
      spec.objective.builtin = bench::ObjectiveSpec::builtin(field<std::string>(obj, "builtin", ""),
                                                             noise);
    } catch (const ContractError& e) {
      throw ConfigError(std::string("field 'objective.builtin': ") + e.what());
    }
    spec.objective.builtin_seed = field<std::uint64_t>(obj, "seed", 0);
    spec.space = spec.objective.builtin->space;
  } else {
    throw ConfigError("field 'objective' needs 'command' or 'builtin'");
  }

  spec.strategy = parse_strategy(
      overrides.strategy.value_or(field<std::string>(config, "strategy", "proposed")),
      overrides.strategy ? "--strategy" : "strategy");
  spec.n_initial = count_field(config, "n_initial", 3);
  spec.n_iterations = overrides.iters.value_or(count_field(config, "iterations", 10));
  spec.seed = overrides.seed.value_or(field<std::uint64_t>(config, "seed", 0));
  spec.kernel_family = parse_kernel(config);
  spec.known_noise_variance = parse_noise(config, "noise_variance");
  spec.out_dir = overrides.out.value_or(field<std::string>(config, "out", "run"));
  if (spec.n_initial < 2) throw ConfigError("field 'n_initial' must be at least 2");
  if (spec.n_iterations < 1) throw ConfigError("field 'iterations' must be at least 1");
  return spec;
}

SamplePlan parse_sample_config(const json& config, const Overrides& overrides) {
  // Bench configs are accepted as-is; their run-only fields are ignored.
  check_keys(config,
             {"benchmark", "space", "resolution", "noise_variance", "seed", "out", "strategies",
              "repetitions", "iterations", "n_initial", "kernel", "hyper_samples", "burn_in",
              "warm_burn_in", "candidates", "starts", "threads"},
             "sample-objective config");
  SamplePlan plan{parse_objective_spec(config, field<double>(config, "noise_variance", 0.0))};
  if (plan.spec.kind != bench::ObjectiveKind::GpPrior) {
    throw ConfigError("field 'benchmark': only GP-prior benchmarks can be sampled");
  }
  if (plan.spec.space.grid_size(plan.spec.resolution) > SearchSpace::kDefaultGridCap) {
    throw ConfigError("field 'resolution': grid exceeds the capacity cap");
  }
  plan.seed = overrides.seed.value_or(field<std::uint64_t>(config, "seed", 0));
  plan.out_dir = overrides.out.value_or(field<std::string>(config, "out", "objective"));
  return plan;
}

double evaluate_external(const std::string& command, const Point& x) {
  const auto result = run_command(command, point_line(x) + "\n");
  if (result.exit_code != 0) {
    throw std::runtime_error("objective command exited with status " +
                             std::to_string(result.exit_code));
  }
  std::istringstream in(result.output);
  std::string token;
  in >> token;
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  std::string rest;
  in >> rest;
  if (token.empty() || ec != std::errc() || ptr != token.data() + token.size() || !rest.empty()) {
    throw std::runtime_error("objective command printed an unparsable value: '" +
                             result.output.substr(0, 80) + "'");
  }
  return value;
}

json record_to_json(const TrialRecord& r) {
  return {{"iter", r.iteration},
          {"suggested", bench::point_to_json(r.suggested)},
          {"evaluated", bench::point_to_json(r.evaluated)},
          {"observed", r.observed},
          {"incumbent", r.incumbent_after}};
}

TrialRecord record_from_json(const json& j) {
  TrialRecord r;
  r.iteration = j.at("iter").get<std::size_t>();
  r.suggested = bench::point_from_json(j.at("suggested"));
  r.evaluated = bench::point_from_json(j.at("evaluated"));
  r.observed = j.at("observed").get<double>();
  r.incumbent_after = j.at("incumbent").get<double>();
  return r;
}

int cmd_bench(const std::string& config_path, const Overrides& overrides, std::ostream& out,
              std::ostream& err) {
  return guarded(err, [&] {
    const BenchPlan plan = parse_bench_config(read_config(config_path), overrides);
    ensure_dir(plan.out_dir);
    const auto result = bench::run_experiment(plan.spec);

    const fs::path dir(plan.out_dir);
    {
      std::ofstream records(dir / "records.jsonl");
      bench::write_records(records, plan.spec, result);
      if (!records) throw std::runtime_error("failed writing records.jsonl");
    }
    {
      std::ofstream curves(dir / "curves.csv");
      bench::write_curves_csv(curves, plan.spec, result);
      if (!curves) throw std::runtime_error("failed writing curves.csv");
    }
    if (result.failures > 0) out << "excluded " << result.failures << " failed runs\n";
    for (const Strategy s : plan.spec.strategies) {
      const auto& curve = result.curves.at(s);
      if (curve.mean.empty()) continue;
      out << to_string(s) << ": final mean log10 regret " << curve.mean.back() << " +/- "
          << curve.stderr_.back() << " (" << curve.repetitions << " reps)\n";
    }
    return kExitOk;
  });
}

int cmd_run(const std::string& config_path, const Overrides& overrides, std::ostream& out,
            std::ostream& err) {
  return guarded(err, [&] {
    const RunSpec spec = parse_run_config(read_config(config_path), overrides);
    ensure_dir(spec.out_dir);
    const fs::path path = fs::path(spec.out_dir) / "records.jsonl";
    const json metadata = spec.metadata();

    // Replay whatever an earlier, interrupted run already recorded.
    std::vector<TrialRecord> replay;
    std::vector<std::string> kept_lines;
    if (fs::exists(path)) {
      std::ifstream in(path);
      std::string line;
      bool header_seen = false;
      while (std::getline(in, line)) {
        json j;
        try {
          j = json::parse(line);
        } catch (const json::parse_error&) {
          break;  // truncated tail
        }
        if (!header_seen) {
          if (!j.contains("metadata") || j["metadata"] != metadata) {
            throw ConfigError("existing record file '" + path.string() +
                              "' belongs to a different configuration");
          }
          header_seen = true;
        } else {
          try {
            replay.push_back(record_from_json(j));
          } catch (const json::exception&) {
            break;
          }
        }
        kept_lines.push_back(line);
      }
      if (!header_seen) kept_lines.clear();
    }
    {
      std::ofstream rewrite(path, std::ios::trunc);
      if (kept_lines.empty()) {
        rewrite << json{{"metadata", metadata}}.dump() << '\n';
      } else {
        for (const auto& l : kept_lines) rewrite << l << '\n';
      }
      if (!rewrite) throw std::runtime_error("cannot write '" + path.string() + "'");
    }
    if (!replay.empty()) out << "resuming after " << replay.size() << " recorded evaluations\n";

    std::unique_ptr<bench::BenchmarkObjective> builtin;
    RandomStream noise_rng(spec.objective.builtin_seed ^ 0x6e6f697365ULL);
    if (spec.objective.builtin) {
      RandomStream objective_rng(spec.objective.builtin_seed);
      builtin = bench::make_objective(*spec.objective.builtin, objective_rng);
    }

    std::size_t calls = 0;
    BoConfig cfg{spec.space};
    cfg.strategy = spec.strategy;
    cfg.n_initial = spec.n_initial;
    cfg.n_iterations = spec.n_iterations;
    cfg.seed = spec.seed;
    cfg.kernel_family = spec.kernel_family;
    cfg.inference.known_noise_variance = spec.known_noise_variance;
    cfg.objective = [&](const Point& x) {
      const std::size_t index = calls++;
      if (index < replay.size()) {
        if (replay[index].evaluated != x) {
          throw std::runtime_error("record " + std::to_string(index) +
                                   " does not match the replayed run");
        }
        if (builtin) builtin->evaluate(x, noise_rng);  // keep the noise stream aligned
        return replay[index].observed;
      }
      if (builtin) return builtin->evaluate(x, noise_rng);
      return evaluate_external(spec.objective.command, x);
    };
    std::ofstream append(path, std::ios::app);
    cfg.on_record = [&](const TrialRecord& r) {
      if (r.iteration < replay.size()) return;
      append << record_to_json(r).dump() << '\n';
      append.flush();
    };

    try {
      const auto records = run_bo(cfg);
      const auto best = std::min_element(records.begin(), records.end(), [](auto& a, auto& b) {
        return a.observed < b.observed;
      });
      out << "best observed " << best->observed << " at [" << point_line(best->evaluated)
          << "] after " << records.size() << " evaluations\n";
      return kExitOk;
    } catch (const ObjectiveError& e) {
      err << "error: " << e.what() << " (" << e.partial().size() << " records kept in "
          << path.string() << ")\n";
      return kExitRuntime;
    }
  });
}

int cmd_sample_objective(const std::string& config_path, const Overrides& overrides,
                         std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const SamplePlan plan = parse_sample_config(read_config(config_path), overrides);
    ensure_dir(plan.out_dir);
    RandomStream rng(plan.seed);
    const bench::SyntheticObjective objective(plan.spec, rng);

    const fs::path path = fs::path(plan.out_dir) / "objective.csv";
    std::ofstream file(path);
    json meta = plan.spec.metadata();
    meta["seed"] = plan.seed;
    file << "# " << meta.dump() << '\n';
    file << "# true_min=" << bench::format_double(objective.true_min()) << '\n';
    for (const auto& v : objective.space().variables()) file << v.name << ',';
    file << "value\n";
    for (std::size_t i = 0; i < objective.grid().size(); ++i) {
      file << point_line(objective.grid()[i]) << ','
           << bench::format_double(objective.values()[static_cast<Eigen::Index>(i)]) << '\n';
    }
    if (!file) throw std::runtime_error("failed writing '" + path.string() + "'");
    out << "wrote " << objective.grid().size() << " grid points to " << path.string()
        << " (true min " << objective.true_min() << ")\n";
    return kExitOk;
  });
}

int main(int argc, char** argv) {
  CLI::App app{"Bayesian optimization over mixed continuous/integer domains"};
  app.require_subcommand(1);

  std::string config;
  Overrides ov;
  std::uint64_t seed = 0;
  std::size_t reps = 0;
  std::size_t iters = 0;
  std::string strategy;
  std::string out_dir;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config, "JSON config file")->required();
    sub->add_option("--seed", seed, "Random seed");
    sub->add_option("--out", out_dir, "Output directory");
  };

  auto* bench_cmd = app.add_subcommand("bench", "Run a benchmark comparison");
  add_common(bench_cmd);
  bench_cmd->add_option("--reps", reps, "Repetitions");
  bench_cmd->add_option("--iters", iters, "BO iterations per run");
  bench_cmd->add_option("--strategy", strategy, "naive|basic|proposed");

  auto* run_cmd = app.add_subcommand("run", "Run one optimization");
  add_common(run_cmd);
  run_cmd->add_option("--iters", iters, "BO iterations");
  run_cmd->add_option("--strategy", strategy, "naive|basic|proposed");

  auto* sample_cmd = app.add_subcommand("sample-objective", "Draw and dump a synthetic objective");
  add_common(sample_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  auto* active = app.get_subcommands().front();
  if (active->count("--seed") > 0) ov.seed = seed;
  if (active->count("--out") > 0) ov.out = out_dir;
  if (active != sample_cmd && active->count("--iters") > 0) ov.iters = iters;
  if (active != sample_cmd && active->count("--strategy") > 0) ov.strategy = strategy;
  if (active == bench_cmd && bench_cmd->count("--reps") > 0) ov.reps = reps;

  if (active == bench_cmd) return cmd_bench(config, ov, std::cout, std::cerr);
  if (active == run_cmd) return cmd_run(config, ov, std::cout, std::cerr);
  return cmd_sample_objective(config, ov, std::cout, std::cerr);
}

}  // namespace intbo::cli
