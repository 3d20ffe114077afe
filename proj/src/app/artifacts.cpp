#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <sstream>

#include "etcabs/app.hpp"

namespace etcabs {

using nlohmann::json;

std::string format_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

json certificate_json(const std::vector<VertexCertificate>& cert) {
  json out = json::array();
  for (const auto& c : cert) {
    json e{{"i", c.i}, {"j", c.j}, {"chi", c.chi}, {"margin", c.margin}};
    if (c.U.empty())
      e["epsilon"] = c.epsilon;
    else
      e["U"] = matrix_to_json(c.U);
    out.push_back(std::move(e));
  }
  return out;
}

json box_json(const ConicRegion& r) {
  json out = json::array();
  for (const auto& iv : r.angular_box) out.push_back({iv.lo, iv.hi});
  return out;
}

double number_at(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key) || !j.at(key).is_number()) throw ArtifactError(where + ": missing number '" + key + "'");
  return j.at(key).get<double>();
}

std::size_t index_at(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key) || !j.at(key).is_number_unsigned())
    throw ArtifactError(where + ": missing index '" + key + "'");
  return j.at(key).get<std::size_t>();
}

}  // namespace

json bounds_json(const Partition& part, const std::vector<RegionalBounds>& bounds) {
  json regions = json::array();
  for (const auto& b : bounds) {
    const ConicRegion& r = part.regions.at(b.region);
    regions.push_back({{"index", b.region},
                       {"mirror", r.mirror},
                       {"angular_box", box_json(r)},
                       {"tau_lo", b.tau_lo},
                       {"tau_hi", b.tau_hi},
                       {"lower_saturated", b.lower_saturated},
                       {"upper_saturated", b.upper_saturated},
                       {"lower_certificate", certificate_json(b.lower_certificate)},
                       {"upper_certificate", certificate_json(b.upper_certificate)}});
  }
  return json{{"n", part.n}, {"m_bar", part.m_bar}, {"regions", std::move(regions)}};
}

std::string bounds_csv(const Partition& part, const std::vector<RegionalBounds>& bounds) {
  std::ostringstream os;
  os << "s";
  for (std::size_t i = 1; i < part.n; ++i) os << ",theta" << i << "_lo,theta" << i << "_hi";
  os << ",tau_lo,tau_hi\n";
  for (const auto& b : bounds) {
    os << b.region;
    for (const auto& iv : part.regions.at(b.region).angular_box)
      os << ',' << format_real(iv.lo) << ',' << format_real(iv.hi);
    os << ',' << format_real(b.tau_lo) << ',' << format_real(b.tau_hi) << '\n';
  }
  return os.str();
}

json flow_pipes_json(const std::vector<std::vector<FlowPipeSegment>>& pipes) {
  json out = json::array();
  for (std::size_t s = 0; s < pipes.size(); ++s) {
    json segs = json::array();
    for (const auto& seg : pipes[s]) {
      segs.push_back({{"t_lo", seg.t_lo},
                      {"t_hi", seg.t_hi},
                      {"C", matrix_to_json(seg.C)},
                      {"d", seg.d},
                      {"bloat", seg.bloat},
                      {"arc_bloat", seg.arc_bloat},
                      {"degenerate", seg.degenerate},
                      {"bounding_box", seg.bounding_box}});
    }
    out.push_back({{"region", s}, {"segments", std::move(segs)}});
  }
  return json{{"regions", std::move(out)}};
}

json automaton_json(const TrafficAutomaton& ta) {
  json locs = json::array();
  for (const auto& l : ta.locations)
    locs.push_back({{"id", l.id}, {"tau_lo", l.tau_lo}, {"tau_hi", l.tau_hi}, {"initial", l.initial}});
  json edges = json::array();
  for (const auto& e : ta.edges)
    edges.push_back({{"src", e.src}, {"dst", e.dst}, {"guard_lo", e.guard_lo}, {"guard_hi", e.guard_hi}});
  return json{{"locations", std::move(locs)}, {"edges", std::move(edges)}, {"clock", ta.clock},
              {"action", ta.action},          {"epsilon", ta.epsilon},    {"dead_ends", ta.dead_ends},
              {"warnings", ta.warnings}};
}

TrafficAutomaton automaton_from_json(const json& j) {
  if (!j.is_object() || !j.contains("locations") || !j.contains("edges"))
    throw ArtifactError("automaton: expected 'locations' and 'edges'");
  TrafficAutomaton ta;
  for (const auto& l : j.at("locations")) {
    AutomatonLocation loc;
    loc.id = index_at(l, "id", "automaton location");
    loc.tau_lo = number_at(l, "tau_lo", "automaton location");
    loc.tau_hi = number_at(l, "tau_hi", "automaton location");
    loc.initial = l.value("initial", false);
    if (loc.id != ta.locations.size()) throw ArtifactError("automaton: location ids must be 0..q-1 in order");
    ta.locations.push_back(loc);
  }
  for (const auto& e : j.at("edges")) {
    AutomatonEdge edge;
    edge.src = index_at(e, "src", "automaton edge");
    edge.dst = index_at(e, "dst", "automaton edge");
    edge.guard_lo = number_at(e, "guard_lo", "automaton edge");
    edge.guard_hi = number_at(e, "guard_hi", "automaton edge");
    if (edge.src >= ta.locations.size() || edge.dst >= ta.locations.size())
      throw ArtifactError("automaton: edge names an unknown location");
    ta.edges.push_back(edge);
  }
  std::sort(ta.edges.begin(), ta.edges.end(), [](const AutomatonEdge& a, const AutomatonEdge& b) {
    return std::pair{a.src, a.dst} < std::pair{b.src, b.dst};
  });
  ta.clock = j.value("clock", std::string("c"));
  ta.action = j.value("action", std::string("*"));
  ta.epsilon = j.value("epsilon", 0.0);
  if (j.contains("dead_ends")) ta.dead_ends = j.at("dead_ends").get<std::vector<std::size_t>>();
  if (j.contains("warnings")) ta.warnings = j.at("warnings").get<std::vector<std::string>>();
  return ta;
}

json metadata_json(const RunConfig& cfg, const AbstractionRun& run) {
  std::size_t segments = 0;
  std::size_t degenerate = 0;
  std::size_t boxes = 0;
  for (const auto& pipe : run.pipes) {
    segments += pipe.size();
    for (const auto& seg : pipe) {
      degenerate += seg.degenerate ? 1 : 0;
      boxes += seg.bounding_box ? 1 : 0;
    }
  }
  const EmbeddingTables& t = run.tables;
  json config = config_to_json(cfg);
  config.erase("output");  // where artifacts go does not change them
  return json{
      {"regions", run.partition.size()},
      {"epsilon", run.automaton.epsilon},
      {"epsilon_definition", "maximum certified interval width over regions"},
      {"tau_prime", run.tau_prime},
      {"nu_lower", t.nu_lower},
      {"nu_upper", t.nu_upper},
      {"nu_lower_raw", t.nu_lower_raw},
      {"nu_upper_raw", t.nu_upper_raw},
      {"nu_method", "extremes over an equispaced grid per cell, widened by nu_safety"},
      {"edges", run.quotient.transitions.size()},
      {"flowpipe_segments", segments},
      {"degenerate_segments", degenerate},
      {"bounding_box_segments", boxes},
      {"saturated_regions", run.saturated_regions},
      {"dead_ends", run.automaton.dead_ends},
      {"origin_in_pipe_regions", run.quotient.transitions.origin_regions},
      {"warnings", run.automaton.warnings},
      {"config", std::move(config)},
  };
}

std::string traces_csv(const std::vector<SimulatedTrace>& traces, const Partition& part) {
  std::ostringstream os;
  os << "trace,k,t";
  for (std::size_t i = 1; i <= part.n; ++i) os << ",x" << i;
  os << ",tau,region\n";
  for (const auto& tr : traces) {
    const auto& ev = tr.trace.events;
    for (std::size_t k = 0; k < ev.size(); ++k) {
      os << tr.id << ',' << k << ',' << format_real(ev[k].t);
      for (double v : ev[k].x) os << ',' << format_real(v);
      os << ',' << format_real(ev[k].tau) << ',' << locate_region(part, ev[k].x) << '\n';
    }
  }
  return os.str();
}

std::vector<std::vector<TraceEvent>> parse_traces_csv(const std::string& text, std::size_t n) {
  std::vector<std::vector<TraceEvent>> out;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  const std::size_t expected = n + 5;
  while (std::getline(in, line)) {
    ++lineno;
    if (lineno == 1 || line.empty()) continue;
    std::vector<std::string> cells;
    std::istringstream ls(line);
    for (std::string cell; std::getline(ls, cell, ',');) cells.push_back(cell);
    if (cells.size() != expected)
      throw ArtifactError("traces.csv line " + std::to_string(lineno) + ": expected " + std::to_string(expected) +
                          " columns");
    std::vector<double> vals(cells.size());
    for (std::size_t i = 0; i < cells.size(); ++i) {
      char* end = nullptr;
      vals[i] = std::strtod(cells[i].c_str(), &end);
      if (end == cells[i].c_str() || *end != '\0')
        throw ArtifactError("traces.csv line " + std::to_string(lineno) + ": bad number '" + cells[i] + "'");
    }
    const auto id = static_cast<std::size_t>(vals[0]);
    if (id >= out.size()) out.resize(id + 1);
    TraceEvent ev;
    ev.t = vals[2];
    ev.x.assign(vals.begin() + 3, vals.begin() + 3 + static_cast<std::ptrdiff_t>(n));
    ev.tau = vals[3 + n];
    out[id].push_back(std::move(ev));
  }
  return out;
}

}  // namespace etcabs
