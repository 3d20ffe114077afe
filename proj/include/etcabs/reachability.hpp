#pragma once

#include <cstddef>
#include <set>
#include <utility>
#include <vector>

#include "etcabs/bounds.hpp"
#include "etcabs/linalg.hpp"
#include "etcabs/partition.hpp"
#include "etcabs/plant.hpp"

namespace etcabs {

/// Outer polytope {x : C x <= d} of the states reached from the region's
/// initial set over [t_lo, t_hi].
struct FlowPipeSegment {
  std::size_t region = 0;
  double t_lo = 0.0;
  double t_hi = 0.0;
  Matrix C;
  Vector d;
  double bloat = 0.0;      // total outward inflation radius
  double arc_bloat = 0.0;  // part of `bloat` covering the vertex arcs between samples
  bool degenerate = false; // hull was rebuilt on an inflated point cloud
  bool bounding_box = false;

  bool contains(std::span<const double> x, double tol = 1e-9) const;
  bool contains_origin() const;
};

/// Unit vectors on the extreme rays of the region. Every direction of the
/// cone meets conv(initial_polytope) away from the origin.
std::vector<Vector> initial_polytope(const ConicRegion& region);

/// max(1, ⌈(tau_hi - tau_lo)/step⌉)
std::size_t segment_count(double tau_lo, double tau_hi, double step);

/// Curvature bound max_t ‖A e^{At}(A + BK)‖₂ over [t0, t1], sampled at 8
/// points and scaled by 1.5.
double curvature_bound(const Plant& p, double t0, double t1);

/// Splits [tau_lo, tau_hi] into f_bar equal segments. Each segment is the hull
/// of Λ(t)v for every initial vertex v and t in {t_f, midpoint, t_{f+1}},
/// pushed outward by (Δt/2)²/2 · curvature_bound.
std::vector<FlowPipeSegment> flow_pipe(const Plant& p, const ConicRegion& region, double tau_lo,
                                       double tau_hi, std::size_t f_bar);

struct TransitionSet {
  std::set<std::pair<std::size_t, std::size_t>> edges;
  std::vector<std::size_t> origin_regions;  // sources whose pipe contains x = 0

  bool contains(std::size_t from, std::size_t to) const { return edges.count({from, to}) != 0; }
  std::size_t size() const { return edges.size(); }
  std::vector<std::size_t> successors(std::size_t from) const;
};

/// (s, s') is an edge iff some segment of pipe s meets cone s' (LP test).
/// pipes[s] holds the segments of region s.
TransitionSet transitions(const Partition& part, const std::vector<std::vector<FlowPipeSegment>>& pipes,
                          std::size_t threads = 1);

/// Flow pipes of every region over its certified window.
std::vector<std::vector<FlowPipeSegment>> all_flow_pipes(const Plant& p, const Partition& part,
                                                         const std::vector<RegionalBounds>& bounds,
                                                         double step, std::size_t threads = 1);

}  // namespace etcabs
