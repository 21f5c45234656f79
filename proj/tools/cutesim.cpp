// cutesim: command-line front end for the simulator and the path analysis.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "cute/config_io.hpp"
#include "cute/experiment.hpp"
#include "cute/path_analysis.hpp"

namespace {

void write_output(const std::string &text, const std::string &path) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out)
    throw std::runtime_error("cannot open " + path + " for writing");
  out << text;
  if (!out.flush())
    throw std::runtime_error("failed writing " + path);
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

struct RunArgs {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string trace;
};

int cmd_run(const RunArgs &a) {
  auto parsed = cute::load_config(a.config);
  if (std::holds_alternative<cute::SweepConfig>(parsed))
    throw std::runtime_error(a.config +
                             " has a sweep section; use the sweep command");
  auto cfg = std::get<cute::NetworkConfig>(parsed);
  if (a.seed)
    cfg.seed = *a.seed;

  std::ofstream trace_file;
  cute::TraceSink sink;
  if (!a.trace.empty()) {
    trace_file.open(a.trace, std::ios::binary | std::ios::trunc);
    if (!trace_file)
      throw std::runtime_error("cannot open " + a.trace + " for writing");
    sink = cute::csv_trace_writer(trace_file);
  }
  const cute::ResultRow row = cute::run_single(cfg, sink);
  write_output(cute::format_csv(std::span(&row, 1)), a.out);
  return 0;
}

struct SweepArgs {
  std::string config;
  std::string preset;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint32_t> replications;
  unsigned threads = 0;
  std::string out;
  bool print_config = false;
};

int cmd_sweep(const SweepArgs &a) {
  cute::SweepConfig sweep;
  if (!a.preset.empty()) {
    sweep = cute::preset(a.preset);
  } else {
    auto parsed = cute::load_config(a.config);
    if (!std::holds_alternative<cute::SweepConfig>(parsed))
      throw std::runtime_error(a.config +
                               " has no sweep section; use the run command");
    sweep = std::get<cute::SweepConfig>(parsed);
  }
  if (a.seed)
    sweep.seed_base = *a.seed;
  if (a.replications)
    sweep.replications = *a.replications;

  if (a.print_config) {
    sweep.validate();
    write_output(cute::to_yaml(sweep), a.out);
    return 0;
  }
  const auto rows = cute::run_sweep(sweep, a.threads);
  write_output(cute::format_csv(rows), a.out);
  return 0;
}

struct AnalyzeArgs {
  std::vector<double> service_times;
  std::uint32_t c_max = 0;
  std::string out;
};

int cmd_analyze(const AnalyzeArgs &a) {
  const cute::ClosedNetworkModel model(a.service_times);
  std::string text = "C,throughput,response,power\n";
  for (const auto &p : cute::power_curve(model, a.c_max))
    text += std::to_string(p.customers) + ',' + fmt(p.throughput) + ',' +
            fmt(p.response) + ',' + fmt(p.power) + '\n';
  write_output(text, a.out);
  std::cerr << "optimal population: "
            << cute::optimal_population(model, a.c_max) << "\n";
  return 0;
}

struct PipeArgs {
  std::optional<std::uint32_t> hops;
  std::optional<double> min_delay;
  std::optional<double> bottleneck;
};

int cmd_pipesize(const PipeArgs &a) {
  if (a.hops) {
    std::cout << cute::terrestrial_pipe_size(*a.hops) << "\n";
    return 0;
  }
  if (!a.min_delay || !a.bottleneck)
    throw std::runtime_error(
        "pipesize needs --hops, or both --min-delay and --bottleneck");
  std::cout << cute::satellite_pipe_size(*a.min_delay, *a.bottleneck) << "\n";
  return 0;
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"Window flow control simulator and path analysis"};
  app.require_subcommand(1);

  RunArgs run_args;
  auto *run = app.add_subcommand("run", "Simulate one network configuration");
  run->add_option("config", run_args.config, "YAML configuration")
      ->required()
      ->check(CLI::ExistingFile);
  run->add_option("--seed", run_args.seed, "Override the configured seed");
  run->add_option("--out", run_args.out, "CSV destination (default stdout)");
  run->add_option("--trace", run_args.trace,
                  "Write a per-event trace (time,kind,connection,ws,sequence)");

  SweepArgs sweep_args;
  auto *sweep = app.add_subcommand("sweep", "Run a parameter sweep");
  auto *sweep_cfg =
      sweep->add_option("config", sweep_args.config, "YAML sweep definition")
          ->check(CLI::ExistingFile);
  auto *sweep_preset =
      sweep->add_option("--preset", sweep_args.preset, "Built-in sweep")
          ->check(CLI::IsMember(cute::preset_names()));
  sweep_cfg->excludes(sweep_preset);
  sweep->add_option("--seed", sweep_args.seed, "Override the seed base");
  sweep->add_option("--replications", sweep_args.replications,
                    "Override the replication count")
      ->check(CLI::PositiveNumber);
  sweep->add_option("--threads", sweep_args.threads,
                    "Worker threads (0 = hardware concurrency)");
  sweep->add_option("--out", sweep_args.out, "CSV destination (default stdout)");
  sweep->add_flag("--print-config", sweep_args.print_config,
                  "Print the resolved sweep as YAML instead of running it");

  AnalyzeArgs analyze_args;
  auto *analyze =
      app.add_subcommand("analyze", "Closed-network power curve by MVA");
  analyze
      ->add_option("--service-times", analyze_args.service_times,
                   "Mean service time of each queue")
      ->required()
      ->delimiter(',')
      ->expected(2, CLI::detail::expected_max_vector_size);
  analyze->add_option("--c-max", analyze_args.c_max, "Largest population")
      ->required()
      ->check(CLI::PositiveNumber);
  analyze->add_option("--out", analyze_args.out,
                      "CSV destination (default stdout)");

  PipeArgs pipe_args;
  auto *pipe = app.add_subcommand("pipesize", "Pipe size of a path");
  auto *hops = pipe->add_option("--hops", pipe_args.hops, "Terrestrial hops");
  auto *delay = pipe->add_option("--min-delay", pipe_args.min_delay,
                                 "Minimum round-trip delay");
  auto *bottleneck = pipe->add_option("--bottleneck", pipe_args.bottleneck,
                                      "Bottleneck service time");
  hops->excludes(delay)->excludes(bottleneck);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run)
      return cmd_run(run_args);
    if (*sweep) {
      if (sweep_args.config.empty() && sweep_args.preset.empty())
        throw std::runtime_error("sweep needs a config file or --preset");
      return cmd_sweep(sweep_args);
    }
    if (*analyze)
      return cmd_analyze(analyze_args);
    if (*pipe)
      return cmd_pipesize(pipe_args);
  } catch (const cute::ConfigError &e) {
    std::cerr << "cutesim: configuration error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception &e) {
    std::cerr << "cutesim: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
