#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>
#include <thread>

#include "etcabs/app.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Timed-automaton abstraction of event-triggered sampling traffic"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::optional<std::string> out_dir;
  std::size_t threads = std::max(1u, std::thread::hardware_concurrency());
  std::optional<std::uint64_t> seed;
  app.add_option("--config", config_path, "JSON run configuration (defaults reproduce the reference plant)");
  app.add_option("--out", out_dir, "output directory (overrides output.directory)");
  app.add_option("--threads", threads, "worker threads")->envname("ETCABS_THREADS")->check(CLI::PositiveNumber);
  app.add_option("--seed", seed, "simulation seed (overrides simulation.seed)");

  app.add_subcommand("abstract", "certify bounds, build flow pipes, transitions and the automaton");
  app.add_subcommand("simulate", "simulate seeded traces of the triggered loop");
  app.add_subcommand("validate", "replay traces against the automaton");
  app.add_subcommand("plot", "write SVG charts and their CSV data");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : etcabs::kExitConfig;
  }

  etcabs::RunConfig cfg;
  try {
    if (!config_path.empty()) cfg = etcabs::load_config(config_path);
    if (out_dir) cfg.output.directory = *out_dir;
    if (seed) cfg.simulation.seed = *seed;
    etcabs::validate_config(cfg);
  } catch (const etcabs::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return etcabs::kExitConfig;
  }

  const std::string cmd = app.get_subcommands().front()->get_name();
  return etcabs::run_command(cmd, cfg, {threads}, std::cerr);
}
