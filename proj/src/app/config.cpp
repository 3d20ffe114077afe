#include "etcabs/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <initializer_list>

namespace etcabs {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& field, const std::string& why) { throw ConfigError(field + ": " + why); }

void reject_unknown(const json& obj, const std::string& prefix, std::initializer_list<const char*> known) {
  if (!obj.is_object()) fail(prefix, "must be an object");
  for (const auto& [key, _] : obj.items()) {
    const bool ok = std::any_of(known.begin(), known.end(), [&](const char* k) { return key == k; });
    if (!ok) fail(prefix.empty() ? key : prefix + "." + key, "unknown field");
  }
}

double read_real(const json& obj, const char* key, const std::string& field, double fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number()) fail(field, "must be a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) fail(field, "must be finite");
  return d;
}

std::uint64_t read_uint(const json& obj, const char* key, const std::string& field, std::uint64_t fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer()) {
    if (v.get<std::int64_t>() < 0) fail(field, "must be nonnegative");
    return static_cast<std::uint64_t>(v.get<std::int64_t>());
  }
  fail(field, "must be an integer");
}

std::size_t read_count(const json& obj, const char* key, const std::string& field, std::size_t fallback) {
  const std::uint64_t v = read_uint(obj, key, field, fallback);
  if (v < 1) fail(field, "must be at least 1");
  return static_cast<std::size_t>(v);
}

}  // namespace

bool OutputConfig::wants(const std::string& fmt) const {
  return std::find(formats.begin(), formats.end(), fmt) != formats.end();
}

Plant RunConfig::default_plant() {
  return Plant{Matrix{{0.0, 1.0}, {-2.0, 3.0}}, Matrix{{0.0}, {1.0}}, Matrix{{1.0, -4.0}}, 0.05};
}

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (std::size_t r = 0; r < m.rows(); ++r) rows.push_back(m.row(r));
  return rows;
}

Matrix matrix_from_json(const json& j, const std::string& field) {
  if (!j.is_array() || j.empty()) fail(field, "must be a nonempty array of rows");
  std::vector<Vector> rows;
  std::size_t cols = 0;
  for (std::size_t r = 0; r < j.size(); ++r) {
    const json& row = j[r];
    const std::string rf = field + "[" + std::to_string(r) + "]";
    if (!row.is_array() || row.empty()) fail(rf, "must be a nonempty array of numbers");
    if (r == 0) cols = row.size();
    if (row.size() != cols) fail(rf, "row length differs from the first row");
    Vector vals;
    for (const auto& v : row) {
      if (!v.is_number()) fail(rf, "entries must be numbers");
      vals.push_back(v.get<double>());
      if (!std::isfinite(vals.back())) fail(rf, "entries must be finite");
    }
    rows.push_back(std::move(vals));
  }
  return Matrix::from_rows(rows, cols);
}

void validate_config(const RunConfig& c) {
  const Plant& p = c.plant;
  if (!p.A.square()) fail("plant.A", "must be square");
  if (p.B.rows() != p.A.rows()) fail("plant.B", "must have as many rows as plant.A");
  if (p.K.rows() != p.B.cols() || p.K.cols() != p.A.cols()) fail("plant.K", "must be m x n for B n x m");
  if (!(p.alpha > 0.0 && p.alpha < 1.0)) fail("plant.alpha", "must lie in (0, 1)");
  if (p.n() < 2) fail("plant.A", "state dimension must be at least 2");

  const AbstractionConfig& a = c.abstraction;
  if (!(a.sigma_bar > 0.0)) fail("abstraction.sigma_bar", "must be positive");
  if (a.nu_grid < 2) fail("abstraction.nu_grid", "must be at least 2");
  if (!(a.nu_safety >= 1.0)) fail("abstraction.nu_safety", "must be at least 1");
  if (!(a.flowpipe_step > 0.0)) fail("abstraction.flowpipe_step", "must be positive");
  if (!(a.xml_scale > 0.0)) fail("abstraction.xml_scale", "must be positive");
  if (p.n() >= 3 && a.m_bar < 2) fail("abstraction.m_bar", "must be at least 2 when n >= 3");
  std::size_t q = 2;
  for (std::size_t i = 0; i + 1 < p.n(); ++i) q *= a.m_bar;
  if (!a.initial_regions.all) {
    for (std::size_t s : a.initial_regions.regions)
      if (s >= q) fail("abstraction.initial_regions", "region " + std::to_string(s) + " out of range");
  }

  const SimulationConfig& s = c.simulation;
  if (!(s.horizon > 0.0)) fail("simulation.horizon", "must be positive");
  if (!(s.scan_dt > 0.0)) fail("simulation.scan_dt", "must be positive");

  for (const auto& f : c.output.formats)
    if (f != "csv" && f != "json" && f != "xml") fail("output.formats", "unknown format '" + f + "'");
  if (c.output.directory.empty()) fail("output.directory", "must not be empty");
}

RunConfig config_from_json(const json& j) {
  RunConfig c;
  reject_unknown(j, "", {"plant", "abstraction", "simulation", "output"});

  if (j.contains("plant")) {
    const json& p = j.at("plant");
    reject_unknown(p, "plant", {"A", "B", "K", "alpha"});
    if (p.contains("A")) c.plant.A = matrix_from_json(p.at("A"), "plant.A");
    if (p.contains("B")) c.plant.B = matrix_from_json(p.at("B"), "plant.B");
    if (p.contains("K")) c.plant.K = matrix_from_json(p.at("K"), "plant.K");
    c.plant.alpha = read_real(p, "alpha", "plant.alpha", c.plant.alpha);
  }

  if (j.contains("abstraction")) {
    const json& a = j.at("abstraction");
    AbstractionConfig& o = c.abstraction;
    reject_unknown(a, "abstraction",
                   {"sigma_bar", "l", "N_conv", "m_bar", "nu_grid", "nu_safety", "flowpipe_step",
                    "eps_max_doubling_cap", "bisection_iterations", "subgradient_iterations", "initial_regions",
                    "xml_scale"});
    o.sigma_bar = read_real(a, "sigma_bar", "abstraction.sigma_bar", o.sigma_bar);
    o.l = read_count(a, "l", "abstraction.l", o.l);
    o.n_conv = read_count(a, "N_conv", "abstraction.N_conv", o.n_conv);
    o.m_bar = read_count(a, "m_bar", "abstraction.m_bar", o.m_bar);
    o.nu_grid = read_count(a, "nu_grid", "abstraction.nu_grid", o.nu_grid);
    o.nu_safety = read_real(a, "nu_safety", "abstraction.nu_safety", o.nu_safety);
    o.flowpipe_step = read_real(a, "flowpipe_step", "abstraction.flowpipe_step", o.flowpipe_step);
    o.eps_max_doubling_cap =
        read_count(a, "eps_max_doubling_cap", "abstraction.eps_max_doubling_cap", o.eps_max_doubling_cap);
    o.bisection_iterations =
        read_count(a, "bisection_iterations", "abstraction.bisection_iterations", o.bisection_iterations);
    o.subgradient_iterations =
        read_count(a, "subgradient_iterations", "abstraction.subgradient_iterations", o.subgradient_iterations);
    o.xml_scale = read_real(a, "xml_scale", "abstraction.xml_scale", o.xml_scale);
    if (a.contains("initial_regions")) {
      const json& r = a.at("initial_regions");
      if (r.is_string() && r.get<std::string>() == "all") {
        o.initial_regions = InitialSetSpec::everything();
      } else if (r.is_array()) {
        std::vector<std::size_t> idx;
        for (const auto& v : r) {
          if (!v.is_number_unsigned()) fail("abstraction.initial_regions", "entries must be region indices");
          idx.push_back(v.get<std::size_t>());
        }
        std::sort(idx.begin(), idx.end());
        idx.erase(std::unique(idx.begin(), idx.end()), idx.end());
        o.initial_regions = InitialSetSpec::only(std::move(idx));
      } else {
        fail("abstraction.initial_regions", "must be \"all\" or an array of region indices");
      }
    }
  }

  if (j.contains("simulation")) {
    const json& s = j.at("simulation");
    SimulationConfig& o = c.simulation;
    reject_unknown(s, "simulation", {"horizon", "trace_count", "seed", "scan_dt"});
    o.horizon = read_real(s, "horizon", "simulation.horizon", o.horizon);
    o.trace_count = read_count(s, "trace_count", "simulation.trace_count", o.trace_count);
    o.seed = read_uint(s, "seed", "simulation.seed", o.seed);
    o.scan_dt = read_real(s, "scan_dt", "simulation.scan_dt", o.scan_dt);
  }

  if (j.contains("output")) {
    const json& o = j.at("output");
    reject_unknown(o, "output", {"directory", "formats"});
    if (o.contains("directory")) {
      if (!o.at("directory").is_string()) fail("output.directory", "must be a string");
      c.output.directory = o.at("directory").get<std::string>();
    }
    if (o.contains("formats")) {
      const json& f = o.at("formats");
      if (!f.is_array()) fail("output.formats", "must be an array of strings");
      c.output.formats.clear();
      for (const auto& v : f) {
        if (!v.is_string()) fail("output.formats", "must be an array of strings");
        c.output.formats.push_back(v.get<std::string>());
      }
    }
  }

  validate_config(c);
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: parse error: ") + e.what());
  }
  return config_from_json(j);
}

json config_to_json(const RunConfig& c) {
  const AbstractionConfig& a = c.abstraction;
  json initial = a.initial_regions.all ? json("all") : json(a.initial_regions.regions);
  return json{
      {"plant",
       {{"A", matrix_to_json(c.plant.A)},
        {"B", matrix_to_json(c.plant.B)},
        {"K", matrix_to_json(c.plant.K)},
        {"alpha", c.plant.alpha}}},
      {"abstraction",
       {{"sigma_bar", a.sigma_bar},
        {"l", a.l},
        {"N_conv", a.n_conv},
        {"m_bar", a.m_bar},
        {"nu_grid", a.nu_grid},
        {"nu_safety", a.nu_safety},
        {"flowpipe_step", a.flowpipe_step},
        {"eps_max_doubling_cap", a.eps_max_doubling_cap},
        {"bisection_iterations", a.bisection_iterations},
        {"subgradient_iterations", a.subgradient_iterations},
        {"initial_regions", initial},
        {"xml_scale", a.xml_scale}}},
      {"simulation",
       {{"horizon", c.simulation.horizon},
        {"trace_count", c.simulation.trace_count},
        {"seed", c.simulation.seed},
        {"scan_dt", c.simulation.scan_dt}}},
      {"output", {{"directory", c.output.directory}, {"formats", c.output.formats}}},
  };
}

}  // namespace etcabs
