#include "etcabs/reachability.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "etcabs/parallel.hpp"

namespace etcabs {

namespace {

constexpr double kCurvatureSafety = 1.5;
constexpr std::size_t kCurvatureSamples = 8;
constexpr double kDegenerateInflation = 1e-6;

std::vector<Vector> inflate(const std::vector<Vector>& pts, double r) {
  std::vector<Vector> out;
  out.reserve(pts.size() * (1 + 2 * (pts.empty() ? 0 : pts.front().size())));
  for (const auto& p : pts) {
    out.push_back(p);
    for (std::size_t i = 0; i < p.size(); ++i) {
      for (double sgn : {-1.0, 1.0}) {
        Vector q = p;
        q[i] += sgn * r;
        out.push_back(std::move(q));
      }
    }
  }
  return out;
}

}  // namespace

bool FlowPipeSegment::contains(std::span<const double> x, double tol) const {
  const Vector cx = C * x;
  for (std::size_t i = 0; i < cx.size(); ++i)
    if (cx[i] > d[i] + tol) return false;
  return true;
}

bool FlowPipeSegment::contains_origin() const {
  return std::all_of(d.begin(), d.end(), [](double v) { return v >= 0.0; });
}

std::vector<std::size_t> TransitionSet::successors(std::size_t from) const {
  std::vector<std::size_t> out;
  for (auto it = edges.lower_bound({from, 0}); it != edges.end() && it->first == from; ++it)
    out.push_back(it->second);
  return out;
}

std::vector<Vector> initial_polytope(const ConicRegion& region) {
  if (region.rays.size() < 2) throw std::invalid_argument("initial_polytope: region needs two rays");
  std::vector<Vector> out;
  out.reserve(region.rays.size());
  for (const auto& r : region.rays) out.push_back(scaled(r, 1.0 / norm2(r)));
  return out;
}

std::size_t segment_count(double tau_lo, double tau_hi, double step) {
  if (!(step > 0.0)) throw std::invalid_argument("segment_count: step must be positive");
  if (tau_hi < tau_lo) throw std::invalid_argument("segment_count: tau_hi < tau_lo");
  const double k = std::ceil((tau_hi - tau_lo) / step - 1e-9);
  return std::max<std::size_t>(1, static_cast<std::size_t>(k));
}

double curvature_bound(const Plant& p, double t0, double t1) {
  const Matrix f = p.closed_loop();
  double best = 0.0;
  for (std::size_t k = 0; k < kCurvatureSamples; ++k) {
    const double t = t0 + (t1 - t0) * static_cast<double>(k) / static_cast<double>(kCurvatureSamples - 1);
    best = std::max(best, norm_op2(p.A * expm(p.A, t) * f));
  }
  return kCurvatureSafety * best;
}

std::vector<FlowPipeSegment> flow_pipe(const Plant& p, const ConicRegion& region, double tau_lo,
                                       double tau_hi, std::size_t f_bar) {
  if (tau_hi < tau_lo) throw std::invalid_argument("flow_pipe: tau_hi < tau_lo");
  if (f_bar < 1) throw std::invalid_argument("flow_pipe: f_bar must be at least 1");
  const std::vector<Vector> init = initial_polytope(region);
  const double dt = (tau_hi - tau_lo) / static_cast<double>(f_bar);

  std::vector<FlowPipeSegment> out;
  out.reserve(f_bar);
  Matrix lam_prev = lambda_at(p, tau_lo);
  for (std::size_t f = 0; f < f_bar; ++f) {
    FlowPipeSegment seg;
    seg.region = region.index;
    seg.t_lo = tau_lo + dt * static_cast<double>(f);
    seg.t_hi = f + 1 == f_bar ? tau_hi : tau_lo + dt * static_cast<double>(f + 1);
    const Matrix lam_mid = lambda_at(p, 0.5 * (seg.t_lo + seg.t_hi));
    const Matrix lam_next = lambda_at(p, seg.t_hi);

    std::vector<Vector> pts;
    for (const Matrix* lam : {static_cast<const Matrix*>(&lam_prev), &lam_mid, &lam_next})
      for (const auto& v : init) pts.push_back(*lam * v);

    const double half = 0.5 * (seg.t_hi - seg.t_lo);
    seg.arc_bloat = half > 0.0 ? 0.5 * half * half * curvature_bound(p, seg.t_lo, seg.t_hi) : 0.0;
    HPolytope hull;
    try {
      hull = convex_hull(pts);
    } catch (const DegenerateHullError&) {
      hull = convex_hull(inflate(pts, kDegenerateInflation));
      seg.degenerate = true;
    }
    seg.bloat = seg.arc_bloat + (seg.degenerate ? kDegenerateInflation : 0.0);
    seg.C = std::move(hull.c);
    seg.d = std::move(hull.d);
    for (double& v : seg.d) v += seg.arc_bloat;
    seg.bounding_box = hull.bounding_box;
    out.push_back(std::move(seg));
    lam_prev = lam_next;
  }
  return out;
}

TransitionSet transitions(const Partition& part, const std::vector<std::vector<FlowPipeSegment>>& pipes,
                          std::size_t threads) {
  if (pipes.size() != part.size()) throw std::invalid_argument("transitions: one pipe per region required");
  const std::size_t q = part.size();
  std::vector<std::vector<char>> hit(q, std::vector<char>(q, 0));
  std::vector<char> origin(q, 0);
  parallel_for(q, threads, [&](std::size_t s) {
    for (const auto& seg : pipes[s]) {
      if (seg.contains_origin()) origin[s] = 1;
      for (std::size_t t = 0; t < q; ++t) {
        if (hit[s][t]) continue;
        if (lp_feasible(seg.C, seg.d, part.regions[t].E)) hit[s][t] = 1;
      }
    }
  });
  TransitionSet ts;
  for (std::size_t s = 0; s < q; ++s) {
    if (origin[s]) ts.origin_regions.push_back(s);
    for (std::size_t t = 0; t < q; ++t)
      if (hit[s][t]) ts.edges.insert({s, t});
  }
  return ts;
}

std::vector<std::vector<FlowPipeSegment>> all_flow_pipes(const Plant& p, const Partition& part,
                                                         const std::vector<RegionalBounds>& bounds,
                                                         double step, std::size_t threads) {
  if (bounds.size() != part.size()) throw std::invalid_argument("all_flow_pipes: one bound per region required");
  std::vector<std::vector<FlowPipeSegment>> pipes(part.size());
  parallel_for(part.size(), threads, [&](std::size_t s) {
    const RegionalBounds& b = bounds[s];
    pipes[s] = flow_pipe(p, part.regions[s], b.tau_lo, b.tau_hi, segment_count(b.tau_lo, b.tau_hi, step));
  });
  return pipes;
}

}  // namespace etcabs
