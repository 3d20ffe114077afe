#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "etcabs/linalg.hpp"

namespace etcabs {

class InvalidSectorError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct AngularInterval {
  double lo = 0.0;
  double hi = 0.0;
  double width() const { return hi - lo; }
};

/// Convex polyhedral cone pointed at the origin.
///
/// Angles follow generalized spherical coordinates: θ₁..θ_{n-2} ∈ [0, π],
/// θ_{n-1} ∈ [-π, π], with x₁ = cos θ₁, ..., x_{n-1} = sin θ₁⋯sin θ_{n-2} cos θ_{n-1},
/// x_n = sin θ₁⋯sin θ_{n-1}. The cone is the conic hull of the unit vectors at
/// the corners of its angular box.
struct ConicRegion {
  std::size_t index = 0;
  std::size_t mirror = 0;  // index of the antipodal region (-x)
  std::vector<AngularInterval> angular_box;
  std::vector<Vector> rays;  // unit extreme rays (plus the bisector of a half-plane)
  Matrix E;                  // inward unit facet normals, E x >= 0 on the cone
  std::optional<Matrix> Q;   // n = 2 only: xᵀQx >= 0 exactly on cone ∪ -cone

  std::size_t dim() const { return E.cols(); }
  /// E x >= -tol |x|
  bool contains(std::span<const double> x, double tol = 1e-9) const;
};

struct Partition {
  std::size_t n = 0;
  std::size_t m_bar = 0;
  std::vector<ConicRegion> regions;  // q = 2 m̄^{n-1}; the first half covers θ_{n-1} ∈ [0, π]

  std::size_t size() const { return regions.size(); }
  std::size_t half_count() const { return regions.size() / 2; }
  /// Indices 0..half_count()-1, whose mirrors are index + half_count().
  std::vector<std::size_t> half_indices() const;
};

/// Point on the unit sphere for the given angular coordinates.
Vector direction_from_angles(std::span<const double> angles);
/// Inverse of direction_from_angles for x != 0 (θ_{n-1} in (-π, π]).
std::vector<double> angles_of(std::span<const double> x);

/// Equidistant subdivision of every angular coordinate into m̄ cells for the
/// half-space θ_{n-1} ∈ [0, π], mirrored to the other half.
Partition isotropic_cover(std::size_t n, std::size_t m_bar);

/// n = 2: Q = (n_a n_bᵀ + n_b n_aᵀ)/2 from the inward normals of the two
/// boundary rays. Throws InvalidSectorError if the opening angle is >= π.
Matrix region_quadratic_form(std::span<const double> ray_a, std::span<const double> ray_b);

/// Facet normals of the cone spanned by the corners of the angular box.
/// Throws InvalidSectorError if any interval is wider than π (n = 2 admits
/// exactly π, a half-plane) or leaves its coordinate range.
Matrix region_halfspace_form(std::span<const AngularInterval> angular_box);

/// Lowest-index region containing x (E-form, tolerance 1e-9 |x|).
/// Throws std::invalid_argument for x = 0.
std::size_t locate_region(const Partition& part, std::span<const double> x);

}  // namespace etcabs
