#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "etcabs/linalg.hpp"
#include "etcabs/partition.hpp"
#include "etcabs/plant.hpp"

namespace etcabs {

/// No positive lower bound could be certified; the embedding is too coarse.
class AbstractionFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Piecewise Taylor embedding of Φ over [0, σ̄] split into l cells of width
/// c = σ̄/l. On cell j, with σ = j c + σ',
///
///   Λ(σ) = Π₁ⱼ + (∫₀^{σ'} e^{Ar} dr) Π₂ⱼ,   Φ(σ) = Σₖ Lₖⱼ σ'ᵏ,
///
/// and the remainder of the order-N_conv truncation is bracketed by
/// ν̄ I ⪯ Φ - Φ̃ ⪯ ν̲ I (estimated on a σ' grid, then widened by nu_safety).
struct EmbeddingTables {
  double sigma_bar = 1.0;
  std::size_t l = 1;
  std::size_t n_conv = 1;
  std::size_t grid_per_cell = 16;
  double nu_safety = 1.5;
  double alpha = 0.0;

  std::vector<Matrix> M;    // ∫₀^{jc} e^{As} ds
  std::vector<Matrix> N;    // A Mⱼ + I
  std::vector<Matrix> Pi1;  // I + Mⱼ (A + BK)
  std::vector<Matrix> Pi2;  // Nⱼ (A + BK)
  std::vector<std::vector<Matrix>> L;  // L[j][k], k = 0..n_conv

  double nu_lower_raw = 0.0;  // grid max of λ_max(Φ - Φ̃)
  double nu_upper_raw = 0.0;  // grid min of λ_min(Φ - Φ̃)
  double nu_lower = 0.0;
  double nu_upper = 0.0;

  std::size_t dim() const { return L.empty() ? 0 : L.front().front().rows(); }
  double cell() const { return sigma_bar / static_cast<double>(l); }
  /// Σ_{k<=order} L[j][k] σ'^k
  Matrix truncated(std::size_t j, double sigma_prime, std::size_t order) const;
  Matrix truncated(std::size_t j, double sigma_prime) const { return truncated(j, sigma_prime, n_conv); }
};

EmbeddingTables build_embedding(const Plant& p, double sigma_bar, std::size_t l, std::size_t n_conv,
                                std::size_t grid_per_cell, double nu_safety = 1.5);

struct VertexMatrix {
  std::size_t i = 0;  // truncation order of the partial sum
  std::size_t j = 0;  // time cell
  double chi = 0.0;   // length of the covered part of the cell
  Matrix value;
};

/// Cell index and covered length used by the lower family at τ̲: cells
/// 0..J-1 in full, cell J over [0, τ̲ - J c].
struct CellSplit {
  std::size_t last = 0;
  double chi = 0.0;
};
CellSplit lower_split(const EmbeddingTables& tab, double tau_lo);
/// Upper family at τ̄: cell J with χ = (J+1)c - τ̄, cells J+1..l-1 in full.
/// τ̄ = σ̄ maps to J = l-1 with χ = 0.
CellSplit upper_split(const EmbeddingTables& tab, double tau_hi);

/// Φ̲_(i,j) = Σ_{k<=i} L_{k,j} χᵏ + ν̲ I over (i, j) ∈ {0..N} × {0..J}.
std::vector<VertexMatrix> vertex_matrices_lower(const EmbeddingTables& tab, double tau_lo);
/// Φ̄_(i,j) = Σ_{k<=i} L_{k,j} χᵏ + ν̄ I over (i, j) ∈ {0..N} × {J..l-1}.
std::vector<VertexMatrix> vertex_matrices_upper(const EmbeddingTables& tab, double tau_hi);

enum class BoundSense { lower, upper };

struct SprocOptions {
  double slack = 1e-9;
  std::size_t eps_doubling_cap = 60;
  std::size_t subgradient_iterations = 500;
};

struct SprocResult {
  bool feasible = false;
  double margin = 0.0;   // best λ_max(±V + multiplier term) reached
  double epsilon = 0.0;  // n = 2 multiplier
  Matrix U;              // n >= 3 multiplier (entrywise nonnegative)
};

/// S-procedure test on one vertex matrix.
///   lower:  ∃ ε >= 0 : V + ε Q ⪯ 0         (n = 2)
///           ∃ U >= 0 : V + Eᵀ U E ⪯ 0      (n >= 3)
///   upper:  V - ε Q ⪰ 0 / V - Eᵀ U E ⪰ 0
/// n = 2 is decided by golden-section search on the convex λ_max(±V + εQ);
/// n >= 3 by projected subgradient with a fixed budget (may miss feasibility,
/// never reports a false positive beyond the slack).
SprocResult sproc_feasible(const Matrix& v, const ConicRegion& region, BoundSense sense,
                           const SprocOptions& opts = {});

struct VertexCertificate {
  std::size_t i = 0;
  std::size_t j = 0;
  double chi = 0.0;
  double epsilon = 0.0;
  Matrix U;
  double margin = 0.0;
};

struct RegionalBounds {
  std::size_t region = 0;
  double tau_lo = 0.0;
  double tau_hi = 0.0;
  bool lower_saturated = false;  // τ̲ reached σ̄
  bool upper_saturated = false;  // no certificate even at σ̄
  std::vector<VertexCertificate> lower_certificate;
  std::vector<VertexCertificate> upper_certificate;

  double width() const { return tau_hi - tau_lo; }
};

struct BoundsOptions {
  SprocOptions sproc;
  std::size_t bisection_iterations = 30;
};

/// Line searches on top of the S-procedure tests. The global no-trigger time
/// τ̲' (no S-procedure) is computed once at construction.
class BoundsCertifier {
 public:
  explicit BoundsCertifier(EmbeddingTables tables, BoundsOptions opts = {});

  const EmbeddingTables& tables() const { return tables_; }
  const BoundsOptions& options() const { return opts_; }
  double global_lower_bound() const { return tau_prime_; }

  /// Largest τ̲ in [τ̲', σ̄] with every lower vertex certified on the region.
  double lower_bound(const ConicRegion& region, bool* saturated = nullptr) const;
  /// Smallest τ̄ in [τ̲, σ̄] with every upper vertex certified; σ̄ if none.
  double upper_bound(const ConicRegion& region, double tau_lo, bool* saturated = nullptr) const;

  RegionalBounds certify(const ConicRegion& region) const;
  /// Certifies the half-space regions in parallel and copies the results to
  /// their antipodal mirrors. Output is indexed by region.
  std::vector<RegionalBounds> certify_all(const Partition& part, std::size_t threads = 1) const;

  std::vector<VertexCertificate> certificate(const ConicRegion& region, BoundSense sense,
                                             double tau) const;

 private:
  bool family_feasible(const ConicRegion* region, BoundSense sense, double tau,
                       std::vector<signed char>& full_cells) const;
  Matrix vertex(std::size_t j, double chi, std::size_t i, BoundSense sense) const;

  EmbeddingTables tables_;
  BoundsOptions opts_;
  std::vector<std::vector<Matrix>> full_lower_;  // [j][i], χ = c, ν̲ included
  std::vector<std::vector<Matrix>> full_upper_;  // [j][i], χ = c, ν̄ included
  double tau_prime_ = 0.0;
};

double regional_lower_bound(const EmbeddingTables& tab, const ConicRegion& region);
double regional_upper_bound(const EmbeddingTables& tab, const ConicRegion& region, double tau_lo);

}  // namespace etcabs
