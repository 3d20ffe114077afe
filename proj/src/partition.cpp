#include "etcabs/partition.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace etcabs {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kRayTol = 1e-10;

double determinant(Matrix m) {
  const std::size_t n = m.rows();
  double det = 1.0;
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(m(r, c)) > std::abs(m(piv, c))) piv = r;
    if (m(piv, c) == 0.0) return 0.0;
    if (piv != c) {
      for (std::size_t k = 0; k < n; ++k) std::swap(m(piv, k), m(c, k));
      det = -det;
    }
    det *= m(c, c);
    for (std::size_t r = c + 1; r < n; ++r) {
      const double f = m(r, c) / m(c, c);
      for (std::size_t k = c; k < n; ++k) m(r, k) -= f * m(c, k);
    }
  }
  return det;
}

// Vector orthogonal to the n-1 rows of `vs` (generalized cross product).
Vector orthogonal_complement(const std::vector<Vector>& vs, std::size_t n) {
  Vector out(n);
  Matrix minor(n - 1, n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t r = 0; r < n - 1; ++r)
      for (std::size_t c = 0, cc = 0; c < n; ++c)
        if (c != i) minor(r, cc++) = vs[r][c];
    out[i] = ((i % 2) ? -1.0 : 1.0) * determinant(minor);
  }
  return out;
}

std::vector<Vector> corner_rays(std::span<const AngularInterval> box) {
  const std::size_t dims = box.size();
  std::vector<Vector> rays;
  std::vector<double> ang(dims);
  for (std::size_t mask = 0; mask < (std::size_t{1} << dims); ++mask) {
    for (std::size_t i = 0; i < dims; ++i) ang[i] = (mask >> i) & 1 ? box[i].hi : box[i].lo;
    Vector r = direction_from_angles(ang);
    const bool dup = std::any_of(rays.begin(), rays.end(),
                                 [&](const Vector& o) { return norm2(sub(o, r)) < 1e-12; });
    if (!dup) rays.push_back(std::move(r));
  }
  return rays;
}

void validate_box(std::span<const AngularInterval> box) {
  const std::size_t n = box.size() + 1;
  if (box.empty()) throw InvalidSectorError("angular box needs at least one interval");
  for (std::size_t i = 0; i < box.size(); ++i) {
    const bool last = i + 1 == box.size();
    const double lo_lim = last ? -kPi : 0.0;
    const AngularInterval& iv = box[i];
    if (!(iv.hi > iv.lo)) throw InvalidSectorError("angular interval must have positive width");
    if (iv.lo < lo_lim - 1e-12 || iv.hi > kPi + 1e-12)
      throw InvalidSectorError("angular interval leaves its coordinate range");
    const bool half_plane_ok = n == 2 && iv.width() <= kPi + 1e-12;
    if (iv.width() >= kPi - 1e-12 && !half_plane_ok)
      throw InvalidSectorError("angular interval must be narrower than pi");
  }
}

}  // namespace

bool ConicRegion::contains(std::span<const double> x, double tol) const {
  const double scale = norm2(x);
  const Vector ex = E * x;
  return std::all_of(ex.begin(), ex.end(), [&](double v) { return v >= -tol * scale; });
}

std::vector<std::size_t> Partition::half_indices() const {
  std::vector<std::size_t> idx(half_count());
  for (std::size_t s = 0; s < idx.size(); ++s) idx[s] = s;
  return idx;
}

Vector direction_from_angles(std::span<const double> angles) {
  const std::size_t n = angles.size() + 1;
  Vector x(n);
  double prod = 1.0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    x[i] = prod * std::cos(angles[i]);
    prod *= std::sin(angles[i]);
  }
  x[n - 1] = prod;
  return x;
}

std::vector<double> angles_of(std::span<const double> x) {
  const std::size_t n = x.size();
  if (n < 2) throw DimensionError("angles_of: dimension must be at least 2");
  std::vector<double> ang(n - 1);
  for (std::size_t i = 0; i + 2 < n; ++i) {
    double tail = 0.0;
    for (std::size_t j = i + 1; j < n; ++j) tail += x[j] * x[j];
    ang[i] = std::atan2(std::sqrt(tail), x[i]);
  }
  ang[n - 2] = std::atan2(x[n - 1], x[n - 2]);
  return ang;
}

Matrix region_quadratic_form(std::span<const double> ray_a, std::span<const double> ray_b) {
  if (ray_a.size() != 2 || ray_b.size() != 2)
    throw DimensionError("region_quadratic_form: rays must be two-dimensional");
  Vector a(ray_a.begin(), ray_a.end());
  Vector b(ray_b.begin(), ray_b.end());
  double cr = a[0] * b[1] - a[1] * b[0];
  const double opening = std::abs(std::atan2(cr, dot(a, b)));
  if (opening >= kPi - 1e-12 || opening <= 0.0)
    throw InvalidSectorError("region_quadratic_form: opening angle must lie in (0, pi)");
  if (cr < 0.0) std::swap(a, b);
  const Vector na{-a[1], a[0]};  // a rotated by +90 degrees
  const Vector nb{b[1], -b[0]};  // b rotated by -90 degrees
  Matrix q(2, 2);
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 2; ++j) q(i, j) = 0.5 * (na[i] * nb[j] + nb[i] * na[j]);
  return q;
}

Matrix region_halfspace_form(std::span<const AngularInterval> angular_box) {
  validate_box(angular_box);
  const std::size_t n = angular_box.size() + 1;
  if (n == 2) {
    const double lo = angular_box[0].lo;
    const double hi = angular_box[0].hi;
    return Matrix{{-std::sin(lo), std::cos(lo)}, {std::sin(hi), -std::cos(hi)}};
  }

  const std::vector<Vector> rays = corner_rays(angular_box);
  if (rays.size() < n) throw InvalidSectorError("region_halfspace_form: cone is not full-dimensional");

  std::vector<Vector> rows;
  // Enumerate (n-1)-subsets of the rays; keep supporting hyperplanes.
  std::vector<bool> sel(rays.size(), false);
  std::fill(sel.begin(), sel.begin() + static_cast<std::ptrdiff_t>(n - 1), true);
  do {
    std::vector<Vector> basis;
    for (std::size_t i = 0; i < rays.size(); ++i)
      if (sel[i]) basis.push_back(rays[i]);
    Vector nrm = orthogonal_complement(basis, n);
    const double len = norm2(nrm);
    if (len < 1e-9) continue;
    for (double& v : nrm) v /= len;
    bool pos = false;
    bool neg = false;
    for (const auto& r : rays) {
      const double s = dot(nrm, r);
      if (s > kRayTol) pos = true;
      if (s < -kRayTol) neg = true;
    }
    if (pos && neg) continue;
    if (!pos && !neg) throw InvalidSectorError("region_halfspace_form: cone is flat");
    if (neg) {
      for (double& v : nrm) v = -v;
    }
    const bool dup = std::any_of(rows.begin(), rows.end(),
                                 [&](const Vector& o) { return norm2(sub(o, nrm)) < 1e-9; });
    if (!dup) rows.push_back(std::move(nrm));
  } while (std::prev_permutation(sel.begin(), sel.end()));
  return Matrix::from_rows(rows, n);
}

Partition isotropic_cover(std::size_t n, std::size_t m_bar) {
  if (n < 2) throw std::invalid_argument("isotropic_cover: n must be at least 2");
  if (m_bar < 1) throw std::invalid_argument("isotropic_cover: m_bar must be at least 1");
  if (n >= 3 && m_bar < 2)
    throw InvalidSectorError("isotropic_cover: n >= 3 needs m_bar >= 2 (pole-degenerate cells)");

  Partition part;
  part.n = n;
  part.m_bar = m_bar;
  const std::size_t dims = n - 1;
  std::size_t half = 1;
  for (std::size_t i = 0; i < dims; ++i) half *= m_bar;
  const double step = kPi / static_cast<double>(m_bar);

  part.regions.resize(2 * half);
  std::vector<std::size_t> k(dims, 0);
  for (std::size_t s = 0; s < half; ++s) {
    // Mixed-radix decode, last angle fastest.
    std::size_t rem = s;
    for (std::size_t i = dims; i-- > 0;) {
      k[i] = rem % m_bar;
      rem /= m_bar;
    }
    ConicRegion& reg = part.regions[s];
    reg.index = s;
    reg.mirror = s + half;
    reg.angular_box.resize(dims);
    for (std::size_t i = 0; i < dims; ++i)
      reg.angular_box[i] = {static_cast<double>(k[i]) * step, static_cast<double>(k[i] + 1) * step};
    reg.E = region_halfspace_form(reg.angular_box);
    reg.rays = corner_rays(reg.angular_box);
    if (n == 2 && reg.angular_box[0].width() >= kPi - 1e-12) {
      // A half-plane is not pointed; its bisector keeps conv(rays) spanning it.
      const double mid = 0.5 * (reg.angular_box[0].lo + reg.angular_box[0].hi);
      reg.rays.push_back(direction_from_angles(std::span<const double>(&mid, 1)));
    }
    if (n == 2) {
      reg.Q = reg.angular_box[0].width() < kPi - 1e-12 ? region_quadratic_form(reg.rays[0], reg.rays[1])
                                                       : Matrix(2, 2);
    }

    ConicRegion& mir = part.regions[s + half];
    mir.index = s + half;
    mir.mirror = s;
    mir.angular_box = reg.angular_box;
    for (std::size_t i = 0; i + 1 < dims; ++i)
      mir.angular_box[i] = {kPi - reg.angular_box[i].hi, kPi - reg.angular_box[i].lo};
    mir.angular_box[dims - 1] = {reg.angular_box[dims - 1].lo - kPi, reg.angular_box[dims - 1].hi - kPi};
    mir.E = -reg.E;
    for (const auto& r : reg.rays) mir.rays.push_back(scaled(r, -1.0));
    mir.Q = reg.Q;
  }
  return part;
}

std::size_t locate_region(const Partition& part, std::span<const double> x) {
  if (x.size() != part.n) throw DimensionError("locate_region: dimension mismatch");
  if (norm2(x) == 0.0) throw std::invalid_argument("locate_region: x = 0 has no region");
  for (const auto& reg : part.regions)
    if (reg.contains(x)) return reg.index;
  throw std::runtime_error("locate_region: point not covered by the partition");
}

}  // namespace etcabs
