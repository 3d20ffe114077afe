#include <chrono>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <set>
#include <sstream>

#include "etcabs/app.hpp"

namespace etcabs {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr double kReplayTol = 1e-6;

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ArtifactError("cannot write '" + path.string() + "'");
  out << text;
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

std::string read_text(const fs::path& path, const char* hint) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ArtifactError("missing artifact '" + path.string() + "'; " + hint);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path output_dir(const RunConfig& cfg) {
  fs::path dir(cfg.output.directory);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ArtifactError("cannot create output directory '" + dir.string() + "': " + ec.message());
  return dir;
}

}  // namespace

int cmd_abstract(const RunConfig& cfg, const CommandOptions& opts, std::ostream& log) {
  const auto start = std::chrono::steady_clock::now();
  const fs::path dir = output_dir(cfg);
  const AbstractionRun run = run_abstraction(cfg, opts.threads);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  write_json(dir / "metadata.json", metadata_json(cfg, run));
  write_json(dir / "timing.json", json{{"command", "abstract"}, {"wall_time_s", wall}});
  if (!run.saturated_regions.empty()) {
    log << "error: " << run.saturated_regions.size()
        << " region(s) reached sigma_bar without a certified bound; increase sigma_bar and retry\n";
    return kExitAbstraction;
  }

  if (cfg.output.wants("csv")) write_text(dir / "bounds.csv", bounds_csv(run.partition, run.bounds));
  if (cfg.output.wants("json")) {
    write_json(dir / "bounds.json", bounds_json(run.partition, run.bounds));
    write_json(dir / "flowpipes.json", flow_pipes_json(run.pipes));
    write_json(dir / "automaton.json", automaton_json(run.automaton));
  }
  if (cfg.output.wants("xml")) write_text(dir / "automaton.xml", to_uppaal_xml(run.automaton, cfg.abstraction.xml_scale));

  for (const auto& w : run.automaton.warnings) log << "warning: " << w << '\n';
  log << "regions " << run.partition.size() << ", edges " << run.quotient.transitions.size() << ", epsilon "
      << format_real(run.automaton.epsilon) << '\n';
  return kExitOk;
}

int cmd_simulate(const RunConfig& cfg, const CommandOptions& opts, std::ostream& log) {
  const fs::path dir = output_dir(cfg);
  const Partition part = partition_for(cfg);
  const std::vector<SimulatedTrace> traces = run_simulation(cfg, opts.threads);

  json summary = json::array();
  std::size_t exceeded = 0;
  std::size_t events = 0;
  for (const auto& t : traces) {
    exceeded += t.horizon_exceeded ? 1 : 0;
    events += t.trace.events.size();
    summary.push_back({{"id", t.id},
                       {"x0", t.x0},
                       {"events", t.trace.events.size()},
                       {"reached_origin", t.trace.reached_origin},
                       {"horizon_exceeded", t.horizon_exceeded}});
  }
  write_text(dir / "traces.csv", traces_csv(traces, part));
  write_json(dir / "traces.json", json{{"seed", cfg.simulation.seed},
                                       {"horizon", cfg.simulation.horizon},
                                       {"traces", std::move(summary)}});
  if (exceeded > 0) log << "warning: " << exceeded << " trace(s) did not trigger within sigma_bar\n";
  log << "traces " << traces.size() << ", events " << events << '\n';
  return kExitOk;
}

int cmd_validate(const RunConfig& cfg, const CommandOptions& /*opts*/, std::ostream& log) {
  const fs::path dir(cfg.output.directory);
  const Partition part = partition_for(cfg);
  const TrafficAutomaton ta =
      automaton_from_json(json::parse(read_text(dir / "automaton.json", "run 'abstract' first")));
  if (ta.locations.size() != part.size())
    throw ArtifactError("automaton.json has " + std::to_string(ta.locations.size()) +
                        " locations but the configured partition has " + std::to_string(part.size()));
  const auto traces = parse_traces_csv(read_text(dir / "traces.csv", "run 'simulate' first"), part.n);

  json per_trace = json::array();
  std::size_t bound_violations = 0;
  std::size_t replay_failures = 0;
  std::set<std::pair<std::size_t, std::size_t>> observed;
  for (std::size_t id = 0; id < traces.size(); ++id) {
    const auto& ev = traces[id];
    std::size_t prev = 0;
    for (std::size_t k = 0; k < ev.size(); ++k) {
      const std::size_t s = locate_region(part, ev[k].x);
      const AutomatonLocation& loc = ta.locations[s];
      if (ev[k].tau < loc.tau_lo - kReplayTol || ev[k].tau > loc.tau_hi + kReplayTol) ++bound_violations;
      if (k > 0) observed.insert({prev, s});
      prev = s;
    }
    const ReplayResult r = replay_trace(ta, ev, part, kReplayTol);
    if (!r) ++replay_failures;
    json entry{{"id", id}, {"events", ev.size()}, {"accepted", r.accepted}};
    if (!r) {
      entry["step"] = r.step;
      entry["reason"] = r.reason;
    }
    per_trace.push_back(std::move(entry));
  }

  std::size_t covered = 0;
  json unexplained = json::array();
  for (const auto& [a, b] : observed) {
    if (ta.has_edge(a, b))
      ++covered;
    else
      unexplained.push_back({a, b});
  }
  const double coverage = ta.edges.empty() ? 0.0 : static_cast<double>(covered) / static_cast<double>(ta.edges.size());
  const json report{{"traces", std::move(per_trace)},
                    {"trace_count", traces.size()},
                    {"bound_violations", bound_violations},
                    {"replay_failures", replay_failures},
                    {"observed_edges", observed.size()},
                    {"abstraction_edges", ta.edges.size()},
                    {"coverage_ratio", coverage},
                    {"unexplained_edges", std::move(unexplained)},
                    {"tolerance", kReplayTol}};
  write_json(dir / "validation.json", report);
  log << "traces " << traces.size() << ", bound violations " << bound_violations << ", replay failures "
      << replay_failures << ", coverage " << format_real(coverage) << '\n';
  return bound_violations + replay_failures > 0 ? kExitViolation : kExitOk;
}

int run_command(const std::string& name, const RunConfig& cfg, const CommandOptions& opts, std::ostream& log) {
  try {
    if (name == "abstract") return cmd_abstract(cfg, opts, log);
    if (name == "simulate") return cmd_simulate(cfg, opts, log);
    if (name == "validate") return cmd_validate(cfg, opts, log);
    if (name == "plot") return cmd_plot(cfg, opts, log);
    log << "error: unknown command '" << name << "'\n";
    return kExitConfig;
  } catch (const AbstractionFailure& e) {
    log << "error: " << e.what() << '\n';
    return kExitAbstraction;
  } catch (const HorizonExceededError& e) {
    log << "error: " << e.what() << '\n';
    return kExitAbstraction;
  } catch (const ConfigError& e) {
    log << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const ArtifactError& e) {
    log << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const json::exception& e) {
    log << "error: malformed artifact: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    log << "error: " << e.what() << '\n';
    return kExitConfig;
  }
}

}  // namespace etcabs
