#include "etcabs/quotient.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace etcabs {

QuotientSystem build_quotient(Partition part, std::vector<RegionalBounds> bounds, TransitionSet transitions,
                              const InitialSetSpec& x0) {
  const std::size_t q = part.size();
  if (bounds.size() != q)
    throw QuotientAssemblyError("build_quotient: bounds table has " + std::to_string(bounds.size()) +
                                " entries for " + std::to_string(q) + " regions");
  for (std::size_t s = 0; s < q; ++s) {
    if (bounds[s].region != s) throw QuotientAssemblyError("build_quotient: bounds table is not indexed by region");
    if (!(bounds[s].tau_lo <= bounds[s].tau_hi))
      throw QuotientAssemblyError("build_quotient: region " + std::to_string(s) + " has tau_lo > tau_hi");
  }
  for (const auto& [a, b] : transitions.edges)
    if (a >= q || b >= q) throw QuotientAssemblyError("build_quotient: transition names an unknown region");

  QuotientSystem out;
  out.initial.assign(q, x0.all);
  for (std::size_t s : x0.regions) {
    if (s >= q) throw QuotientAssemblyError("build_quotient: initial region " + std::to_string(s) + " out of range");
    out.initial[s] = true;
  }
  out.partition = std::move(part);
  out.bounds = std::move(bounds);
  out.transitions = std::move(transitions);
  return out;
}

double precision(const std::vector<RegionalBounds>& bounds) {
  double eps = 0.0;
  for (const auto& b : bounds) eps = std::max(eps, b.width());
  return eps;
}

bool TrafficAutomaton::has_edge(std::size_t src, std::size_t dst) const {
  const auto it = std::lower_bound(edges.begin(), edges.end(), std::pair{src, dst},
                                   [](const AutomatonEdge& e, const std::pair<std::size_t, std::size_t>& k) {
                                     return std::pair{e.src, e.dst} < k;
                                   });
  return it != edges.end() && it->src == src && it->dst == dst;
}

TrafficAutomaton to_timed_automaton(const QuotientSystem& q) {
  TrafficAutomaton ta;
  ta.epsilon = precision(q.bounds);
  ta.locations.reserve(q.size());
  for (std::size_t s = 0; s < q.size(); ++s)
    ta.locations.push_back({s, q.bounds[s].tau_lo, q.bounds[s].tau_hi, q.initial[s]});
  for (const auto& [src, dst] : q.transitions.edges)
    ta.edges.push_back({src, dst, q.bounds[src].tau_lo, q.bounds[src].tau_hi});
  for (std::size_t s = 0; s < q.size(); ++s) {
    if (!q.transitions.successors(s).empty()) continue;
    ta.dead_ends.push_back(s);
    ta.warnings.push_back("location " + std::to_string(s) + " has no outgoing edge and deadlocks at c = tau_hi");
  }
  return ta;
}

ReplayResult replay_trace(const TrafficAutomaton& ta, const std::vector<TraceEvent>& trace,
                          const Partition& part, double tol) {
  ReplayResult res;
  auto fail = [&](std::size_t k, std::string why) {
    res.accepted = false;
    res.step = k;
    res.reason = std::move(why);
    return res;
  };
  std::size_t prev = 0;
  for (std::size_t k = 0; k < trace.size(); ++k) {
    const std::size_t s = locate_region(part, trace[k].x);
    if (s >= ta.locations.size()) return fail(k, "region outside the automaton");
    if (k > 0 && !ta.has_edge(prev, s))
      return fail(k, "no edge " + std::to_string(prev) + " -> " + std::to_string(s));
    const AutomatonLocation& loc = ta.locations[s];
    if (trace[k].tau < loc.tau_lo - tol || trace[k].tau > loc.tau_hi + tol)
      return fail(k, "inter-sample time outside the guard of location " + std::to_string(s));
    prev = s;
  }
  return res;
}

namespace {

std::string loc_id(std::size_t s) { return "id" + std::to_string(s); }

long long scaled_floor(double t, double scale) { return static_cast<long long>(std::floor(t * scale)); }
long long scaled_ceil(double t, double scale) { return static_cast<long long>(std::ceil(t * scale)); }

}  // namespace

std::string to_uppaal_xml(const TrafficAutomaton& ta, double scale) {
  if (!(scale > 0.0)) throw std::invalid_argument("to_uppaal_xml: scale must be positive");
  std::vector<std::size_t> init;
  for (const auto& l : ta.locations)
    if (l.initial) init.push_back(l.id);
  const bool use_start = init.size() != 1;

  std::ostringstream os;
  os << "<?xml version=\"1.0\" encoding=\"utf-8\"?>\n"
     << "<!DOCTYPE nta PUBLIC '-//Uppaal Team//DTD Flat System 1.1//EN' "
        "'http://www.it.uu.se/research/group/darts/uppaal/flat-1_2.dtd'>\n"
     << "<nta>\n"
     << "  <declaration>// clock unit: 1/" << scale << " s</declaration>\n"
     << "  <template>\n"
     << "    <name>Traffic</name>\n"
     << "    <declaration>clock " << ta.clock << ";</declaration>\n";
  for (const auto& l : ta.locations) {
    os << "    <location id=\"" << loc_id(l.id) << "\">\n"
       << "      <name>l" << l.id << "</name>\n"
       << "      <label kind=\"invariant\">" << ta.clock << " &lt;= " << scaled_ceil(l.tau_hi, scale)
       << "</label>\n"
       << "    </location>\n";
  }
  if (use_start) {
    os << "    <location id=\"start\">\n"
       << "      <name>start</name>\n"
       << "      <committed/>\n"
       << "    </location>\n"
       << "    <init ref=\"start\"/>\n";
  } else {
    os << "    <init ref=\"" << loc_id(init.front()) << "\"/>\n";
  }
  if (use_start) {
    for (std::size_t s : init) {
      os << "    <transition>\n"
         << "      <source ref=\"start\"/>\n"
         << "      <target ref=\"" << loc_id(s) << "\"/>\n"
         << "      <label kind=\"assignment\">" << ta.clock << " = 0</label>\n"
         << "    </transition>\n";
    }
  }
  for (const auto& e : ta.edges) {
    os << "    <transition>\n"
       << "      <source ref=\"" << loc_id(e.src) << "\"/>\n"
       << "      <target ref=\"" << loc_id(e.dst) << "\"/>\n"
       << "      <label kind=\"guard\">" << ta.clock << " &gt;= " << scaled_floor(e.guard_lo, scale)
       << " &amp;&amp; " << ta.clock << " &lt;= " << scaled_ceil(e.guard_hi, scale) << "</label>\n"
       << "      <label kind=\"assignment\">" << ta.clock << " = 0</label>\n"
       << "    </transition>\n";
  }
  os << "  </template>\n"
     << "  <system>system Traffic;</system>\n"
     << "</nta>\n";
  return os.str();
}

}  // namespace etcabs
