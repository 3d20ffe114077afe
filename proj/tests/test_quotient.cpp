#include <doctest.h>

#include <cmath>
#include <random>
#include <string>

#include "etcabs/app.hpp"
#include "etcabs/quotient.hpp"
#include "oracles.hpp"

using namespace etcabs;

namespace {

// Four planar cones with hand-picked bounds; regions 0 -> 1 -> 2 -> 3 -> 0.
QuotientSystem ring(const InitialSetSpec& x0 = InitialSetSpec::everything()) {
  const Partition part = isotropic_cover(2, 2);
  std::vector<RegionalBounds> b(4);
  const double lo[] = {0.12345, 0.2, 0.3, 0.4};
  const double hi[] = {0.15, 0.25, 0.30001, 0.5};
  for (std::size_t s = 0; s < 4; ++s) {
    b[s].region = s;
    b[s].tau_lo = lo[s];
    b[s].tau_hi = hi[s];
  }
  TransitionSet ts;
  for (std::size_t s = 0; s < 4; ++s) ts.edges.insert({s, (s + 1) % 4});
  return build_quotient(part, b, ts, x0);
}

std::size_t count(const std::string& hay, const std::string& needle) {
  std::size_t n = 0;
  for (std::size_t p = hay.find(needle); p != std::string::npos; p = hay.find(needle, p + needle.size())) ++n;
  return n;
}

Vector at_angle(double th) { return Vector{std::cos(th), std::sin(th)}; }

}  // namespace

TEST_CASE("build_quotient: initial set") {
  const QuotientSystem all = ring();
  CHECK(all.size() == 4);
  for (bool b : all.initial) CHECK(b);
  const QuotientSystem one = ring(InitialSetSpec::only({3}));
  CHECK(one.initial == std::vector<bool>{false, false, false, true});
  CHECK_THROWS_AS(ring(InitialSetSpec::only({4})), QuotientAssemblyError);
}

TEST_CASE("build_quotient: malformed inputs") {
  const Partition part = isotropic_cover(2, 2);
  std::vector<RegionalBounds> b(4);
  for (std::size_t s = 0; s < 4; ++s) b[s].region = s;
  CHECK_NOTHROW(build_quotient(part, b, {}, {}));
  CHECK_THROWS_AS(build_quotient(part, std::vector<RegionalBounds>(b.begin(), b.begin() + 3), {}, {}),
                  QuotientAssemblyError);
  auto swapped = b;
  std::swap(swapped[0], swapped[1]);
  CHECK_THROWS_AS(build_quotient(part, swapped, {}, {}), QuotientAssemblyError);
  auto inverted = b;
  inverted[2].tau_lo = 0.5;
  inverted[2].tau_hi = 0.4;
  CHECK_THROWS_AS(build_quotient(part, inverted, {}, {}), QuotientAssemblyError);
  TransitionSet bad;
  bad.edges.insert({0, 9});
  CHECK_THROWS_AS(build_quotient(part, b, bad, {}), QuotientAssemblyError);
}

TEST_CASE("precision is the widest interval") {
  const QuotientSystem q = ring();
  CHECK(precision(q.bounds) == doctest::Approx(0.1));
  std::vector<RegionalBounds> flat(3);
  for (auto& b : flat) b.tau_lo = b.tau_hi = 0.3;
  CHECK(precision(flat) == 0.0);
  CHECK(precision({}) == 0.0);
}

TEST_CASE("timed automaton: locations, guards and edges") {
  const QuotientSystem q = ring(InitialSetSpec::only({1}));
  const TrafficAutomaton ta = to_timed_automaton(q);
  CHECK(ta.locations.size() == 4);
  CHECK(ta.edges.size() == 4);
  CHECK(ta.epsilon == doctest::Approx(0.1));
  CHECK(ta.clock == "c");
  CHECK(ta.action == "*");
  CHECK(ta.dead_ends.empty());
  CHECK(ta.warnings.empty());
  for (const auto& e : ta.edges) {
    // The guard of an edge is the source's output interval; its upper end is the invariant.
    CHECK(e.guard_lo == q.bounds[e.src].tau_lo);
    CHECK(e.guard_hi == q.bounds[e.src].tau_hi);
    CHECK(e.guard_hi == ta.locations[e.src].tau_hi);
  }
  for (std::size_t k = 1; k < ta.edges.size(); ++k)
    CHECK(std::pair{ta.edges[k - 1].src, ta.edges[k - 1].dst} < std::pair{ta.edges[k].src, ta.edges[k].dst});
  CHECK(ta.has_edge(3, 0));
  CHECK_FALSE(ta.has_edge(0, 3));
  CHECK(ta.locations[1].initial);
  CHECK_FALSE(ta.locations[0].initial);
}

TEST_CASE("timed automaton: dead ends are reported") {
  QuotientSystem q = ring();
  q.transitions.edges.erase({2, 3});
  const TrafficAutomaton ta = to_timed_automaton(q);
  REQUIRE(ta.dead_ends.size() == 1);
  CHECK(ta.dead_ends[0] == 2);
  REQUIRE(ta.warnings.size() == 1);
  CHECK(ta.warnings[0].find("location 2") != std::string::npos);
}

TEST_CASE("replay: accepts the empty trace, rejects off-guard times and missing edges") {
  const QuotientSystem q = ring();
  const TrafficAutomaton ta = to_timed_automaton(q);
  const Partition& part = q.partition;
  CHECK(replay_trace(ta, {}, part));
  // Region centres: 0 at π/4, 1 at 3π/4, 2 at 5π/4, 3 at 7π/4.
  const double pi = std::acos(-1.0);
  std::vector<TraceEvent> tr{{0.0, at_angle(pi / 4), 0.13}, {0.13, at_angle(3 * pi / 4), 0.22}};
  CHECK(replay_trace(ta, tr, part));
  tr[1].tau = 0.25 + 2e-6;
  const ReplayResult late = replay_trace(ta, tr, part);
  CHECK_FALSE(late);
  CHECK(late.step == 1);
  tr[1].tau = 0.25 + 5e-7;
  CHECK(replay_trace(ta, tr, part));
  tr[1].x = at_angle(7 * pi / 4);
  tr[1].tau = 0.45;
  const ReplayResult jump = replay_trace(ta, tr, part);
  CHECK_FALSE(jump);
  CHECK(jump.step == 1);
  CHECK(jump.reason.find("no edge") != std::string::npos);
}

TEST_CASE("replay: simulated traces of the reference abstraction are accepted, perturbed ones are not") {
  const AbstractionRun run = run_abstraction(RunConfig{}, 2);
  const InterSampleTimer timer(oracle::reference_plant(), 1.0, 1e-3);
  std::mt19937_64 rng(131);
  for (int k = 0; k < 20; ++k) {
    Trace tr = simulate_traffic(timer, oracle::random_unit(rng, 2), 5.0);
    REQUIRE(tr.events.size() > 2);
    CHECK(replay_trace(run.automaton, tr.events, run.partition));
    const std::size_t s = locate_region(run.partition, tr.events[1].x);
    tr.events[1].tau = run.automaton.locations[s].tau_hi + 1e-3;
    const ReplayResult r = replay_trace(run.automaton, tr.events, run.partition);
    CHECK_FALSE(r);
    CHECK(r.step == 1);
  }
}

TEST_CASE("XML export: integer clock bounds round outward") {
  const TrafficAutomaton ta = to_timed_automaton(ring(InitialSetSpec::only({0})));
  const std::string xml = to_uppaal_xml(ta, 1e4);
  CHECK(count(xml, "<location id=") == 4);
  CHECK(count(xml, "<transition>") == 4);
  CHECK(xml.find("<init ref=\"id0\"/>") != std::string::npos);
  CHECK(xml.find("<committed/>") == std::string::npos);
  // 0.12345 s -> 1234 (floor); 0.30001 s -> 3001 (ceil).
  CHECK(xml.find("c &gt;= 1234 &amp;&amp; c &lt;= 1500") != std::string::npos);
  CHECK(xml.find("c &lt;= 3001</label>") != std::string::npos);
  CHECK(xml.find("c &gt;= 3000 &amp;&amp; c &lt;= 3001") != std::string::npos);
  CHECK(count(xml, "c = 0") == 4);
  CHECK_THROWS_AS(to_uppaal_xml(ta, 0.0), std::invalid_argument);
}

TEST_CASE("XML export: several initial locations enter through a committed start") {
  const TrafficAutomaton ta = to_timed_automaton(ring());
  const std::string xml = to_uppaal_xml(ta);
  CHECK(xml.find("<init ref=\"start\"/>") != std::string::npos);
  CHECK(count(xml, "<committed/>") == 1);
  CHECK(count(xml, "<source ref=\"start\"/>") == 4);
  CHECK(count(xml, "<transition>") == 8);
}

TEST_CASE("reference automaton: edge guard equals the source invariant") {
  const AbstractionRun run = run_abstraction(RunConfig{}, 1);
  CHECK(run.automaton.locations.size() == 20);
  CHECK(run.automaton.edges.size() == run.quotient.transitions.size());
  for (const auto& e : run.automaton.edges) {
    CHECK(e.guard_hi == run.automaton.locations[e.src].tau_hi);
    CHECK(e.guard_lo == run.automaton.locations[e.src].tau_lo);
  }
  CHECK(run.automaton.epsilon == precision(run.bounds));
}
