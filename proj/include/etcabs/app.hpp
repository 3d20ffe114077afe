#pragma once

#include <cstddef>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "etcabs/bounds.hpp"
#include "etcabs/config.hpp"
#include "etcabs/partition.hpp"
#include "etcabs/plant.hpp"
#include "etcabs/quotient.hpp"
#include "etcabs/reachability.hpp"

namespace etcabs {

/// A required artifact is missing or malformed.
class ArtifactError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum ExitCode : int { kExitOk = 0, kExitConfig = 1, kExitAbstraction = 2, kExitViolation = 3 };

struct AbstractionRun {
  EmbeddingTables tables;
  double tau_prime = 0.0;
  Partition partition;
  std::vector<RegionalBounds> bounds;
  std::vector<std::vector<FlowPipeSegment>> pipes;
  QuotientSystem quotient;
  TrafficAutomaton automaton;
  std::vector<std::size_t> saturated_regions;
};

Partition partition_for(const RunConfig& cfg);

/// Embedding, bounds, flow pipes, transitions and automaton. Throws
/// AbstractionFailure when no positive lower bound exists.
AbstractionRun run_abstraction(const RunConfig& cfg, std::size_t threads = 1);

struct SimulatedTrace {
  std::size_t id = 0;
  Vector x0;
  Trace trace;
  bool horizon_exceeded = false;
};

/// trace_count traces from seeded uniformly random unit initial states.
std::vector<SimulatedTrace> run_simulation(const RunConfig& cfg, std::size_t threads = 1);

/// printf("%.17g"): shortest text that round-trips every double we write.
std::string format_real(double v);

nlohmann::json bounds_json(const Partition& part, const std::vector<RegionalBounds>& bounds);
std::string bounds_csv(const Partition& part, const std::vector<RegionalBounds>& bounds);
nlohmann::json flow_pipes_json(const std::vector<std::vector<FlowPipeSegment>>& pipes);
nlohmann::json automaton_json(const TrafficAutomaton& ta);
TrafficAutomaton automaton_from_json(const nlohmann::json& j);
nlohmann::json metadata_json(const RunConfig& cfg, const AbstractionRun& run);

/// Columns: trace, k, t, x1..xn, tau, region.
std::string traces_csv(const std::vector<SimulatedTrace>& traces, const Partition& part);
/// Events grouped by trace id (ids are dense from 0).
std::vector<std::vector<TraceEvent>> parse_traces_csv(const std::string& text, std::size_t n);

struct CommandOptions {
  std::size_t threads = 1;
};

int cmd_abstract(const RunConfig& cfg, const CommandOptions& opts, std::ostream& log);
int cmd_simulate(const RunConfig& cfg, const CommandOptions& opts, std::ostream& log);
int cmd_validate(const RunConfig& cfg, const CommandOptions& opts, std::ostream& log);
int cmd_plot(const RunConfig& cfg, const CommandOptions& opts, std::ostream& log);

/// Runs "abstract", "simulate", "validate" or "plot" and maps failures onto
/// the exit-code contract; diagnostics go to `log`.
int run_command(const std::string& name, const RunConfig& cfg, const CommandOptions& opts, std::ostream& log);

}  // namespace etcabs
