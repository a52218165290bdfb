// qhsim: metric construction and moving-metric evolution for
// quasi-Hermitian Hamiltonians.
//
//   qhsim run <config>     evolve and write the result table
//   qhsim check <config>   static residual report at t0
//   qhsim sweep <config>   one summary row per parameter grid point
//
// QHSIM_LOG=quiet|info|debug selects diagnostic verbosity (default info).

#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "qhsim/app/commands.hpp"
#include "qhsim/errors.hpp"

namespace {

void configure_logging() {
  auto logger = spdlog::stderr_color_mt("qhsim");
  logger->set_pattern("qhsim: %l: %v");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::info);
  if (const char* env = std::getenv("QHSIM_LOG")) {
    const std::string level = env;
    if (level == "quiet") {
      spdlog::set_level(spdlog::level::err);
    } else if (level == "debug") {
      spdlog::set_level(spdlog::level::debug);
    } else if (level != "info") {
      spdlog::warn("ignoring unknown QHSIM_LOG level '{}'", level);
    }
  }
}

}  // namespace

int main(int argc, char** argv) {
  configure_logging();

  CLI::App app{"Quasi-Hermitian metric construction and unitary evolution under moving metrics"};
  app.require_subcommand(1);
  app.fallthrough();

  qhsim::app::CommandOptions options;
  std::string output_dir = ".";
  double dt = 0.0;
  std::uint64_t seed = 0;
  std::string format;
  std::string config_path;

  app.add_option("--output-dir", output_dir, "Directory for output files")->capture_default_str();
  auto* dt_opt = app.add_option("--dt", dt, "Override the schedule step size")->check(CLI::PositiveNumber);
  auto* seed_opt = app.add_option("--seed", seed, "Reserved; all computation is deterministic");
  auto* format_opt =
      app.add_option("--format", format, "Output format for every output")->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--jobs", options.jobs, "Worker threads for sweep (0 = all cores)");

  auto* run = app.add_subcommand("run", "Evolve a state and write the result table");
  auto* check = app.add_subcommand("check", "Print static residuals at t0");
  auto* sweep = app.add_subcommand("sweep", "Evaluate every point of the configured parameter grid");
  for (auto* sub : {run, check, sweep}) {
    sub->add_option("config", config_path, "Experiment configuration (JSON)")->required();
  }

  CLI11_PARSE(app, argc, argv);

  options.output_dir = output_dir;
  if (*dt_opt) options.dt = dt;
  if (*seed_opt) options.seed = seed;
  if (*format_opt) options.format = format;

  try {
    if (run->parsed()) return qhsim::app::run_command(config_path, options, std::cout);
    if (check->parsed()) return qhsim::app::check_command(config_path, options, std::cout);
    return qhsim::app::sweep_command(config_path, options, std::cout);
  } catch (const qhsim::ConfigError& e) {
    spdlog::error("{}: {}", e.kind(), e.what());
    return 2;
  } catch (const qhsim::Error& e) {
    spdlog::error("{}: {}", e.kind(), e.what());
    return 1;
  }
}
