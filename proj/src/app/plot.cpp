#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <ostream>
#include <sstream>

#include "etcabs/app.hpp"

namespace etcabs {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr double kW = 800.0;
constexpr double kH = 420.0;
constexpr double kMargin = 50.0;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

void save(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ArtifactError("cannot write '" + path.string() + "'");
  out << text;
}

std::string svg_open(double w, double h, const std::string& title) {
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(w) << "\" height=\"" << num(h)
     << "\" viewBox=\"0 0 " << num(w) << ' ' << num(h) << "\" font-family=\"sans-serif\" font-size=\"11\">\n"
     << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
     << "<text x=\"" << num(w / 2) << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">" << title << "</text>\n";
  return os.str();
}

// Maps region coordinate u ∈ [0, q] and time t ∈ [0, t_max] to the plot area.
struct Axes {
  double q;
  double t_max;
  double x(double u) const { return kMargin + (kW - 2 * kMargin) * u / q; }
  double y(double t) const { return kH - kMargin - (kH - 2 * kMargin) * t / t_max; }

  std::string frame(const std::string& xlabel) const {
    std::ostringstream os;
    os << "<line x1=\"" << num(x(0)) << "\" y1=\"" << num(y(0)) << "\" x2=\"" << num(x(q)) << "\" y2=\""
       << num(y(0)) << "\" stroke=\"black\"/>\n"
       << "<line x1=\"" << num(x(0)) << "\" y1=\"" << num(y(0)) << "\" x2=\"" << num(x(0)) << "\" y2=\""
       << num(y(t_max)) << "\" stroke=\"black\"/>\n";
    const auto count = static_cast<std::size_t>(q);
    const std::size_t label_every = std::max<std::size_t>(1, count / 20);
    for (std::size_t s = 0; s < count; ++s) {
      const double cx = x(static_cast<double>(s) + 0.5);
      os << "<line class=\"xtick\" x1=\"" << num(cx) << "\" y1=\"" << num(y(0)) << "\" x2=\"" << num(cx)
         << "\" y2=\"" << num(y(0) + 4) << "\" stroke=\"black\"/>\n";
      if (s % label_every == 0)
        os << "<text x=\"" << num(cx) << "\" y=\"" << num(y(0) + 16) << "\" text-anchor=\"middle\">" << s
           << "</text>\n";
    }
    for (int k = 0; k <= 4; ++k) {
      const double t = t_max * k / 4.0;
      os << "<text x=\"" << num(x(0) - 6) << "\" y=\"" << num(y(t) + 4) << "\" text-anchor=\"end\">" << num(t)
         << "</text>\n";
    }
    os << "<text x=\"" << num(kW / 2) << "\" y=\"" << num(kH - 10) << "\" text-anchor=\"middle\">" << xlabel
       << "</text>\n"
       << "<text x=\"14\" y=\"" << num(kH / 2) << "\" transform=\"rotate(-90 14 " << num(kH / 2)
       << ")\" text-anchor=\"middle\">inter-sample time [s]</text>\n";
    return os.str();
  }

  std::string steps(const std::vector<AutomatonLocation>& locs, bool upper, const char* color) const {
    std::ostringstream os;
    os << "<polyline class=\"" << (upper ? "upper" : "lower") << "\" fill=\"none\" stroke=\"" << color
       << "\" points=\"";
    for (const auto& l : locs) {
      const double t = upper ? l.tau_hi : l.tau_lo;
      const auto s = static_cast<double>(l.id);
      os << num(x(s)) << ',' << num(y(t)) << ' ' << num(x(s + 1)) << ',' << num(y(t)) << ' ';
    }
    os << "\"/>\n";
    return os.str();
  }
};

double time_scale(const TrafficAutomaton& ta) {
  double m = 0.0;
  for (const auto& l : ta.locations) m = std::max(m, l.tau_hi);
  return m > 0.0 ? 1.1 * m : 1.0;
}

std::string bounds_svg(const TrafficAutomaton& ta) {
  const Axes ax{static_cast<double>(ta.locations.size()), time_scale(ta)};
  return svg_open(kW, kH, "Regional inter-sample time bounds") + ax.frame("region") +
         ax.steps(ta.locations, false, "#1f77b4") + ax.steps(ta.locations, true, "#d62728") + "</svg>\n";
}

std::string polar_svg(const Partition& part, const TrafficAutomaton& ta) {
  const double size = 500.0;
  const double c = size / 2;
  const double r_max = (size / 2 - 30) / time_scale(ta);
  std::ostringstream os;
  os << svg_open(size, size, "Bounds by direction (radius = time)");
  auto pt = [&](double r, double th) { return num(c + r * std::cos(th)) + "," + num(c - r * std::sin(th)); };
  for (const auto& l : ta.locations) {
    const AngularInterval& iv = part.regions.at(l.id).angular_box.front();
    const double r0 = l.tau_lo * r_max;
    const double r1 = l.tau_hi * r_max;
    const int large = iv.width() > std::numbers::pi ? 1 : 0;
    os << "<path class=\"sector\" d=\"M " << pt(r0, iv.lo) << " L " << pt(r1, iv.lo) << " A " << num(r1) << ' '
       << num(r1) << " 0 " << large << " 0 " << pt(r1, iv.hi) << " L " << pt(r0, iv.hi) << " A " << num(r0) << ' '
       << num(r0) << " 0 " << large << " 1 " << pt(r0, iv.lo)
       << " Z\" fill=\"#9ecae1\" stroke=\"#08519c\" stroke-width=\"0.5\"/>\n";
  }
  os << "</svg>\n";
  return os.str();
}

// Horizontal position of x inside its region: s + fraction of the last angle's interval.
double region_position(const Partition& part, std::size_t s, const Vector& x) {
  if (part.n != 2) return static_cast<double>(s) + 0.5;
  const AngularInterval& iv = part.regions[s].angular_box.front();
  double th = angles_of(x).front();
  if (th < iv.lo - 1e-9) th += 2 * std::numbers::pi;
  if (th > iv.hi + 1e-9) th -= 2 * std::numbers::pi;
  return static_cast<double>(s) + std::clamp((th - iv.lo) / iv.width(), 0.0, 1.0);
}

}  // namespace

int cmd_plot(const RunConfig& cfg, const CommandOptions& /*opts*/, std::ostream& log) {
  const fs::path dir(cfg.output.directory);
  const Partition part = partition_for(cfg);
  std::ifstream ain(dir / "automaton.json", std::ios::binary);
  if (!ain) throw ArtifactError("missing artifact '" + (dir / "automaton.json").string() + "'; run 'abstract' first");
  const TrafficAutomaton ta = automaton_from_json(json::parse(ain));
  if (ta.locations.size() != part.size())
    throw ArtifactError("automaton.json does not match the configured partition");

  std::ostringstream bcsv;
  bcsv << "s,tau_lo,tau_hi\n";
  for (const auto& l : ta.locations) bcsv << l.id << ',' << format_real(l.tau_lo) << ',' << format_real(l.tau_hi) << '\n';
  save(dir / "plot_bounds.csv", bcsv.str());
  save(dir / "bounds.svg", bounds_svg(ta));

  if (part.n == 2)
    save(dir / "polar.svg", polar_svg(part, ta));
  else
    log << "notice: polar view needs n = 2; skipped\n";

  const std::size_t q = ta.locations.size();
  std::ostringstream tcsv;
  tcsv << "src,dst\n";
  const double cell = std::min(12.0, 600.0 / static_cast<double>(q));
  const double side = 2 * kMargin + cell * static_cast<double>(q);
  std::ostringstream tsvg;
  tsvg << svg_open(side, side, "Transitions (row: source, column: target)");
  tsvg << "<rect x=\"" << num(kMargin) << "\" y=\"" << num(kMargin) << "\" width=\"" << num(cell * q)
       << "\" height=\"" << num(cell * q) << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (const auto& e : ta.edges) {
    tcsv << e.src << ',' << e.dst << '\n';
    tsvg << "<circle class=\"edge\" cx=\"" << num(kMargin + cell * (e.dst + 0.5)) << "\" cy=\""
         << num(kMargin + cell * (e.src + 0.5)) << "\" r=\"" << num(cell * 0.35) << "\"/>\n";
  }
  tsvg << "</svg>\n";
  save(dir / "plot_transitions.csv", tcsv.str());
  save(dir / "transitions.svg", tsvg.str());

  std::ifstream tin(dir / "traces.csv", std::ios::binary);
  if (!tin) {
    log << "notice: no traces.csv; scatter plot skipped\n";
    return kExitOk;
  }
  std::ostringstream raw;
  raw << tin.rdbuf();
  const auto traces = parse_traces_csv(raw.str(), part.n);
  const Axes ax{static_cast<double>(q), time_scale(ta)};
  std::ostringstream scsv;
  std::ostringstream ssvg;
  scsv << "trace,k,region,position,tau\n";
  ssvg << svg_open(kW, kH, "Simulated inter-sample times against the bounds") << ax.frame("region");
  for (std::size_t id = 0; id < traces.size(); ++id) {
    for (std::size_t k = 0; k < traces[id].size(); ++k) {
      const TraceEvent& ev = traces[id][k];
      const std::size_t s = locate_region(part, ev.x);
      const double u = region_position(part, s, ev.x);
      scsv << id << ',' << k << ',' << s << ',' << format_real(u) << ',' << format_real(ev.tau) << '\n';
      ssvg << "<circle class=\"sample\" cx=\"" << num(ax.x(u)) << "\" cy=\"" << num(ax.y(ev.tau))
           << "\" r=\"1.5\" fill=\"#555\"/>\n";
    }
  }
  ssvg << ax.steps(ta.locations, false, "#1f77b4") << ax.steps(ta.locations, true, "#d62728") << "</svg>\n";
  save(dir / "plot_scatter.csv", scsv.str());
  save(dir / "scatter.svg", ssvg.str());
  return kExitOk;
}

}  // namespace etcabs
