#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "etcabs/bounds.hpp"
#include "etcabs/partition.hpp"
#include "etcabs/plant.hpp"
#include "etcabs/reachability.hpp"

namespace etcabs {

class QuotientAssemblyError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Regions whose cone meets the initial set: every region, or a listed subset.
struct InitialSetSpec {
  bool all = true;
  std::vector<std::size_t> regions;

  static InitialSetSpec everything() { return {}; }
  static InitialSetSpec only(std::vector<std::size_t> r) { return {false, std::move(r)}; }
};

/// Finite quotient: state s outputs the interval [τ̲ₛ, τ̄ₛ], successors come
/// from the transition set.
struct QuotientSystem {
  Partition partition;
  std::vector<RegionalBounds> bounds;
  TransitionSet transitions;
  std::vector<bool> initial;

  std::size_t size() const { return bounds.size(); }
};

QuotientSystem build_quotient(Partition part, std::vector<RegionalBounds> bounds, TransitionSet transitions,
                              const InitialSetSpec& x0);

/// max_s (τ̄ₛ - τ̲ₛ): the largest distance between a concrete inter-sample time
/// and the interval its region outputs.
double precision(const std::vector<RegionalBounds>& bounds);

struct AutomatonLocation {
  std::size_t id = 0;
  double tau_lo = 0.0;
  double tau_hi = 0.0;  // invariant c <= tau_hi
  bool initial = false;
};

struct AutomatonEdge {
  std::size_t src = 0;
  std::size_t dst = 0;
  double guard_lo = 0.0;
  double guard_hi = 0.0;
};

/// One-clock timed safety automaton. Each edge carries action "*", guard
/// guard_lo <= c <= guard_hi and reset c := 0.
struct TrafficAutomaton {
  std::vector<AutomatonLocation> locations;
  std::vector<AutomatonEdge> edges;  // sorted by (src, dst)
  std::string clock = "c";
  std::string action = "*";
  double epsilon = 0.0;
  std::vector<std::size_t> dead_ends;  // locations without outgoing edges
  std::vector<std::string> warnings;

  bool has_edge(std::size_t src, std::size_t dst) const;
};

TrafficAutomaton to_timed_automaton(const QuotientSystem& q);

struct ReplayResult {
  bool accepted = true;
  std::size_t step = 0;  // first failing event when !accepted
  std::string reason;

  explicit operator bool() const { return accepted; }
};

/// Checks that every event's τ_k lies in its location's guard (± tol) and
/// that each consecutive pair of regions is an automaton edge.
ReplayResult replay_trace(const TrafficAutomaton& ta, const std::vector<TraceEvent>& trace,
                          const Partition& part, double tol = 1e-6);

/// Timed-automaton XML for common model checkers. Clock bounds are integers
/// in units of 1/scale seconds: lower guards rounded down, upper bounds up.
std::string to_uppaal_xml(const TrafficAutomaton& ta, double scale = 1e4);

}  // namespace etcabs
