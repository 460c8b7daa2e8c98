#include <cstdlib>
#include <iostream>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "commands.hpp"
#include "entry/errors.hpp"

namespace {

// ENTRYSIM_LOG_LEVEL: trace, debug, info (default), warn, error, off.
void setup_logging() {
  auto logger = spdlog::stderr_color_st("entrysim");
  logger->set_pattern("[%l] %v");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::info);
  if (const char* level = std::getenv("ENTRYSIM_LOG_LEVEL")) spdlog::set_level(spdlog::level::from_str(level));
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();

  CLI::App app{"Longitudinal entry guidance with angle-of-attack modulation"};
  app.require_subcommand(0, 1);
  app.fallthrough();

  std::string config_path;
  bool emit_defaults = false;
  entrysim::Options options;
  std::string out_dir;
  std::uint64_t seed = 0;
  std::size_t runs = 0;
  unsigned threads = 0;

  app.add_option("--config", config_path, "JSON scenario file (missing keys keep the pinned defaults)");
  app.add_option("--out", out_dir, "Output directory (overrides output.dir)");
  auto* seed_opt = app.add_option("--seed", seed, "Monte Carlo base seed");
  auto* runs_opt = app.add_option("--runs", runs, "Monte Carlo run count");
  auto* threads_opt = app.add_option("--threads", threads, "Worker threads (0: all cores)");
  app.add_option("--controller", options.controller, "proposed | shuttle | both")
      ->check(CLI::IsMember({"proposed", "shuttle", "both"}));
  app.add_flag("--emit-defaults", emit_defaults, "Print the effective config as JSON and exit");

  app.add_subcommand("make-reference", "Plan the reference trajectory and write reference.csv");
  app.add_subcommand("analyze-zero-dynamics", "Classify the zero dynamics along the reference");
  app.add_subcommand("run-nominal", "Fly the undispersed entry and write trajectory CSVs");
  app.add_subcommand("run-mc", "Dispersed Monte Carlo batch: metrics CSV and summary JSON");
  auto* cmp = app.add_subcommand("compare", "Side-by-side summary of two metric CSVs");
  cmp->add_option("files", options.inputs, "Two metrics CSV files")->expected(2)->required();

  CLI11_PARSE(app, argc, argv);

  try {
    const auto config = config_path.empty() ? entry::ScenarioConfig{} : entry::load_config(config_path);
    if (emit_defaults) {
      std::cout << entry::dump_config(config);
      return entrysim::kExitOk;
    }
    if (app.get_subcommands().empty()) {
      std::cerr << app.help();
      return entrysim::kExitConfig;
    }
    options.out = out_dir;
    if (seed_opt->count()) options.seed = seed;
    if (runs_opt->count()) options.runs = runs;
    if (threads_opt->count()) options.threads = threads;
    return entrysim::run_subcommand(app.get_subcommands().front()->get_name(), config, options);
  } catch (const entry::ConfigError& e) {
    spdlog::error("config: {}", e.what());
    return entrysim::kExitConfig;
  } catch (const entry::DependencyError& e) {
    spdlog::error("missing input: {}", e.what());
    return entrysim::kExitDependency;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return entrysim::kExitRunFailed;
  }
}
