#include <algorithm>
#include <cmath>

#include "etcabs/linalg.hpp"

namespace etcabs {

namespace {

double extent(const std::vector<Vector>& pts) {
  double e = 0.0;
  for (const auto& p : pts)
    for (double v : p) e = std::max(e, std::abs(v));
  return std::max(e, 1.0);
}

// Andrew's monotone chain; returns CCW hull vertices without collinear points.
HPolytope hull_2d(const std::vector<Vector>& points) {
  std::vector<Vector> pts = points;
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  const double scale = extent(pts);
  const double area_tol = 1e-14 * scale * scale;
  auto cross = [](const Vector& o, const Vector& a, const Vector& b) {
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
  };
  std::vector<Vector> h(2 * pts.size());
  std::size_t k = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    while (k >= 2 && cross(h[k - 2], h[k - 1], pts[i]) <= area_tol) --k;
    h[k++] = pts[i];
  }
  for (std::size_t i = pts.size() - 1, t = k + 1; i-- > 0;) {
    while (k >= t && cross(h[k - 2], h[k - 1], pts[i]) <= area_tol) --k;
    h[k++] = pts[i];
  }
  if (k > 0) --k;
  h.resize(k);
  if (h.size() < 3) throw DegenerateHullError("convex_hull: points are collinear");

  HPolytope poly{Matrix(h.size(), 2), Vector(h.size()), false};
  for (std::size_t i = 0; i < h.size(); ++i) {
    const Vector& a = h[i];
    const Vector& b = h[(i + 1) % h.size()];
    // CCW order: outward normal of edge a->b is (dy, -dx).
    double nx = b[1] - a[1];
    double ny = -(b[0] - a[0]);
    const double len = std::hypot(nx, ny);
    nx /= len;
    ny /= len;
    poly.c(i, 0) = nx;
    poly.c(i, 1) = ny;
    double off = nx * a[0] + ny * a[1];
    for (const auto& p : points) off = std::max(off, nx * p[0] + ny * p[1]);
    poly.d[i] = off;
  }
  return poly;
}

Vector cross3(const Vector& a, const Vector& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

// Brute-force facet enumeration; the point clouds here are a few dozen points.
HPolytope hull_3d(const std::vector<Vector>& points) {
  std::vector<Vector> pts = points;
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  const double scale = extent(pts);
  const double plane_tol = 1e-10 * scale;

  std::vector<Vector> normals;
  Vector offsets;
  const std::size_t np = pts.size();
  for (std::size_t i = 0; i < np; ++i)
    for (std::size_t j = i + 1; j < np; ++j)
      for (std::size_t k = j + 1; k < np; ++k) {
        Vector nrm = cross3(sub(pts[j], pts[i]), sub(pts[k], pts[i]));
        const double len = norm2(nrm);
        if (len <= 1e-12 * scale * scale) continue;
        for (double& v : nrm) v /= len;
        const double off = dot(nrm, pts[i]);
        bool above = false;
        bool below = false;
        for (const auto& p : pts) {
          const double s = dot(nrm, p) - off;
          if (s > plane_tol) above = true;
          if (s < -plane_tol) below = true;
          if (above && below) break;
        }
        if (above && below) continue;
        if (!above && !below) throw DegenerateHullError("convex_hull: points are coplanar");
        if (above) {
          for (double& v : nrm) v = -v;
        }
        const double o = dot(nrm, pts[i]);
        bool dup = false;
        for (std::size_t f = 0; f < normals.size(); ++f)
          if (norm2(sub(normals[f], nrm)) < 1e-9 && std::abs(offsets[f] - o) < plane_tol) {
            dup = true;
            break;
          }
        if (!dup) {
          normals.push_back(nrm);
          offsets.push_back(o);
        }
      }
  if (normals.size() < 4) throw DegenerateHullError("convex_hull: points are coplanar");

  HPolytope poly{Matrix::from_rows(normals, 3), offsets, false};
  for (std::size_t f = 0; f < normals.size(); ++f)
    for (const auto& p : points) poly.d[f] = std::max(poly.d[f], dot(normals[f], p));
  return poly;
}

HPolytope bounding_box(const std::vector<Vector>& points) {
  const std::size_t n = points.front().size();
  HPolytope poly{Matrix(2 * n, n), Vector(2 * n), true};
  for (std::size_t i = 0; i < n; ++i) {
    double lo = points.front()[i];
    double hi = lo;
    for (const auto& p : points) {
      lo = std::min(lo, p[i]);
      hi = std::max(hi, p[i]);
    }
    if (hi - lo <= 1e-14 * extent(points))
      throw DegenerateHullError("convex_hull: bounding box is flat");
    poly.c(2 * i, i) = 1.0;
    poly.d[2 * i] = hi;
    poly.c(2 * i + 1, i) = -1.0;
    poly.d[2 * i + 1] = -lo;
  }
  return poly;
}

}  // namespace

bool HPolytope::contains(std::span<const double> x, double tol) const {
  const Vector cx = c * x;
  for (std::size_t i = 0; i < cx.size(); ++i)
    if (cx[i] > d[i] + tol) return false;
  return true;
}

HPolytope convex_hull(const std::vector<Vector>& points) {
  if (points.empty()) throw DimensionError("convex_hull: no points");
  const std::size_t n = points.front().size();
  for (const auto& p : points)
    if (p.size() != n) throw DimensionError("convex_hull: mixed point dimensions");
  if (n < 2) throw DimensionError("convex_hull: dimension must be at least 2");
  if (points.size() < n + 1) throw DegenerateHullError("convex_hull: fewer than n+1 points");
  if (n == 2) return hull_2d(points);
  if (n == 3) return hull_3d(points);
  return bounding_box(points);
}

}  // namespace etcabs
