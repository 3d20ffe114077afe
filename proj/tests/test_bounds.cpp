#include <doctest.h>

#include <cmath>
#include <random>

#include "etcabs/bounds.hpp"
#include "oracles.hpp"

using namespace etcabs;

namespace {

double max_diff(const Matrix& a, const Matrix& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.data().size(); ++i) m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
  return m;
}

const EmbeddingTables& reference_tables() {
  static const EmbeddingTables tab = build_embedding(oracle::reference_plant(), 1.0, 100, 5, 16);
  return tab;
}

const BoundsCertifier& reference_certifier() {
  static const BoundsCertifier cert(reference_tables());
  return cert;
}

// Uniform direction inside a planar region's angular interval.
Vector sample_in(const ConicRegion& r, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(r.angular_box[0].lo, r.angular_box[0].hi);
  const double th = u(rng);
  return Vector{std::cos(th), std::sin(th)};
}

}  // namespace

TEST_CASE("embedding tables: first cell matches the derivatives of the triggering matrix") {
  const Plant p = oracle::reference_plant();
  const EmbeddingTables& tab = reference_tables();
  CHECK(tab.dim() == 2);
  CHECK(tab.L.size() == 100);
  CHECK(tab.L[0].size() == 6);
  CHECK(max_diff(tab.L[0][0], Matrix::identity(2) * -p.alpha) <= 1e-12);
  // d/dσ Φ at 0 is -α (F + Fᵀ) because I - Λ(0) = 0.
  const Matrix f = p.closed_loop();
  CHECK(max_diff(tab.L[0][1], (f + f.transpose()) * -p.alpha) <= 1e-12);
  for (const auto& lj : tab.L)
    for (const auto& lk : lj) CHECK(max_diff(lk, lk.transpose()) <= 1e-12);
  CHECK(max_diff(tab.Pi1[0], Matrix::identity(2)) == 0.0);
}

TEST_CASE("embedding tables: L0 of every cell equals the triggering matrix at the cell start") {
  const Plant p = oracle::reference_plant();
  const EmbeddingTables& tab = reference_tables();
  for (std::size_t j : {0u, 1u, 17u, 50u, 99u})
    CHECK(max_diff(tab.L[j][0], phi_at(p, static_cast<double>(j) * tab.cell())) <= 1e-10);
}

TEST_CASE("embedding tables: truncation error lies within the remainder bracket") {
  const Plant p = oracle::reference_plant();
  const EmbeddingTables& tab = reference_tables();
  CHECK(tab.nu_upper <= tab.nu_upper_raw);
  CHECK(tab.nu_lower >= tab.nu_lower_raw);
  CHECK(std::abs(tab.nu_lower) < 1e-2);
  CHECK(std::abs(tab.nu_upper) < 1e-2);
  std::mt19937_64 rng(89);
  std::uniform_real_distribution<double> u(0.0, tab.cell());
  std::uniform_int_distribution<std::size_t> cell(0, tab.l - 1);
  for (int k = 0; k < 500; ++k) {
    const std::size_t j = cell(rng);
    const double sp = u(rng);
    const Matrix diff = phi_at(p, static_cast<double>(j) * tab.cell() + sp) - tab.truncated(j, sp);
    const SymEigExtremes ex = sym_eig_extremes(diff);
    CHECK(ex.lambda_max <= tab.nu_lower + 1e-12);
    CHECK(ex.lambda_min >= tab.nu_upper - 1e-12);
  }
}

TEST_CASE("cell splits and family sizes") {
  const EmbeddingTables& tab = reference_tables();
  const CellSplit lo = lower_split(tab, 0.235);
  CHECK(lo.last == 23);
  CHECK(lo.chi == doctest::Approx(0.005));
  CHECK(vertex_matrices_lower(tab, 0.235).size() == 6 * 24);
  const CellSplit lo_end = lower_split(tab, 1.0);
  CHECK(lo_end.last == 99);
  CHECK(lo_end.chi == doctest::Approx(0.01));

  const CellSplit up = upper_split(tab, 0.235);
  CHECK(up.last == 23);
  CHECK(up.chi == doctest::Approx(0.005));
  CHECK(vertex_matrices_upper(tab, 0.235).size() == 6 * 77);
  const CellSplit up_end = upper_split(tab, 1.0);
  CHECK(up_end.last == 99);
  CHECK(up_end.chi == 0.0);
  CHECK(vertex_matrices_upper(tab, 1.0).size() == 6);

  // A grid point belongs to the cell it starts.
  CHECK(lower_split(tab, 0.3).last == 30);
  CHECK(lower_split(tab, 0.3).chi == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("vertex matrices: i indexes the partial sum order") {
  const EmbeddingTables& tab = reference_tables();
  for (const auto& vm : vertex_matrices_lower(tab, 0.05)) {
    Matrix expect = tab.truncated(vm.j, vm.chi, vm.i) + Matrix::identity(2) * tab.nu_lower;
    CHECK(max_diff(vm.value, expect) <= 1e-14);
  }
  for (const auto& vm : vertex_matrices_upper(tab, 0.95)) {
    Matrix expect = tab.truncated(vm.j, vm.chi, vm.i) + Matrix::identity(2) * tab.nu_upper;
    CHECK(max_diff(vm.value, expect) <= 1e-14);
  }
}

TEST_CASE("sproc_feasible: trivial matrices") {
  const Partition part = isotropic_cover(2, 10);
  const ConicRegion& r = part.regions[3];
  const SprocResult neg = sproc_feasible(Matrix::identity(2) * -1.0, r, BoundSense::lower);
  CHECK(neg.feasible);
  CHECK(neg.epsilon == 0.0);
  CHECK_FALSE(sproc_feasible(Matrix::identity(2), r, BoundSense::lower).feasible);
  CHECK(sproc_feasible(Matrix::identity(2), r, BoundSense::upper).feasible);
  CHECK_FALSE(sproc_feasible(Matrix::identity(2) * -1.0, r, BoundSense::upper).feasible);

  const Partition p3 = isotropic_cover(3, 4);
  CHECK(sproc_feasible(Matrix::identity(3) * -1.0, p3.regions[5], BoundSense::lower).feasible);
  CHECK_FALSE(sproc_feasible(Matrix::identity(3), p3.regions[5], BoundSense::lower).feasible);
}

TEST_CASE("sproc_feasible: indefinite matrix certified on a cone where it is negative") {
  // diag(-1, 1) is negative on the cone |θ| < π/4 - δ around the x1 axis.
  const Partition part = isotropic_cover(2, 10);
  const Matrix v{{-1.0, 0.0}, {0.0, 1.0}};
  int feasible_count = 0;
  std::mt19937_64 rng(97);
  for (const auto& r : part.regions) {
    const SprocResult res = sproc_feasible(v, r, BoundSense::lower);
    // Sampled oracle: the quadratic form is negative on the cone.
    bool neg_everywhere = true;
    for (int k = 0; k < 2000; ++k) neg_everywhere = neg_everywhere && quad_form(v, sample_in(r, rng)) <= 0.0;
    if (res.feasible) {
      ++feasible_count;
      CHECK(neg_everywhere);
    }
  }
  CHECK(feasible_count > 0);
}

TEST_CASE("sproc_feasible: certificates hold on 10^4 sampled directions") {
  const EmbeddingTables& tab = reference_tables();
  const Partition part = isotropic_cover(2, 10);
  std::mt19937_64 rng(101);
  for (std::size_t s : {0u, 4u, 8u}) {
    const ConicRegion& r = part.regions[s];
    const double tau = reference_certifier().lower_bound(r);
    for (const auto& vm : vertex_matrices_lower(tab, tau)) {
      const SprocResult res = sproc_feasible(vm.value, r, BoundSense::lower);
      REQUIRE(res.feasible);
      const SymEigExtremes ex = sym_eig_extremes(vm.value + *r.Q * res.epsilon);
      CHECK(ex.lambda_max <= 1e-9);
    }
    const VertexMatrix worst = vertex_matrices_lower(tab, tau).back();
    for (int k = 0; k < 10000; ++k) CHECK(quad_form(worst.value, sample_in(r, rng)) <= 1e-6);
  }
}

TEST_CASE("lower bound: certified family stays feasible below the bound") {
  const EmbeddingTables& tab = reference_tables();
  const BoundsCertifier& cert = reference_certifier();
  const Partition part = isotropic_cover(2, 10);
  for (std::size_t s = 0; s < part.half_count(); ++s) {
    const ConicRegion& r = part.regions[s];
    const double lo = cert.lower_bound(r);
    CHECK(lo >= cert.global_lower_bound());
    CHECK(lo > 0.0);
    for (int k = 0; k < 5; ++k) {
      const double t = cert.global_lower_bound() + (lo - cert.global_lower_bound()) * k / 5.0;
      for (const auto& vm : vertex_matrices_lower(tab, t))
        CHECK(sproc_feasible(vm.value, r, BoundSense::lower).feasible);
    }
  }
}

TEST_CASE("global lower bound: every direction is certified with no region constraint") {
  const EmbeddingTables& tab = reference_tables();
  const BoundsCertifier& cert = reference_certifier();
  const double tp = cert.global_lower_bound();
  CHECK(tp > 0.0);
  for (const auto& vm : vertex_matrices_lower(tab, tp)) CHECK(sym_eig_extremes(vm.value).lambda_max <= 1e-9);
  const Plant p = oracle::reference_plant();
  std::mt19937_64 rng(103);
  for (int k = 0; k < 200; ++k) CHECK(inter_sample_time(p, oracle::random_unit(rng, 2), 1.0, 1e-3) >= tp);
}

TEST_CASE("regional bounds contain every sampled inter-sample time") {
  const Plant p = oracle::reference_plant();
  const Partition part = isotropic_cover(2, 10);
  const std::vector<RegionalBounds> bounds = reference_certifier().certify_all(part, 2);
  REQUIRE(bounds.size() == 20);
  const InterSampleTimer timer(p, 1.0, 1e-3);
  std::mt19937_64 rng(107);
  for (const auto& r : part.regions) {
    const RegionalBounds& b = bounds[r.index];
    CHECK(b.region == r.index);
    CHECK(b.tau_lo > 0.0);
    CHECK(b.tau_lo <= b.tau_hi);
    CHECK_FALSE(b.lower_saturated);
    for (int k = 0; k < 100; ++k) {
      const double tau = timer(sample_in(r, rng));
      CHECK(tau >= b.tau_lo - 1e-9);
      CHECK(tau <= b.tau_hi + 1e-9);
    }
  }
}

TEST_CASE("mirror regions: direct certification equals the copied result") {
  const Partition part = isotropic_cover(2, 10);
  const BoundsCertifier& cert = reference_certifier();
  const std::vector<RegionalBounds> all = cert.certify_all(part);
  for (std::size_t s : {1u, 5u, 9u}) {
    const std::size_t m = part.regions[s].mirror;
    const RegionalBounds direct = cert.certify(part.regions[m]);
    CHECK(std::abs(direct.tau_lo - all[m].tau_lo) <= 1e-12);
    CHECK(std::abs(direct.tau_hi - all[m].tau_hi) <= 1e-12);
  }
}

TEST_CASE("stored certificates re-evaluate feasibly") {
  const EmbeddingTables& tab = reference_tables();
  const Partition part = isotropic_cover(2, 10);
  const RegionalBounds b = reference_certifier().certify(part.regions[2]);
  REQUIRE(b.lower_certificate.size() == vertex_matrices_lower(tab, b.tau_lo).size());
  const auto lower = vertex_matrices_lower(tab, b.tau_lo);
  for (std::size_t k = 0; k < lower.size(); ++k) {
    const VertexCertificate& c = b.lower_certificate[k];
    CHECK(c.epsilon >= 0.0);
    CHECK(sym_eig_extremes(lower[k].value + *part.regions[2].Q * c.epsilon).lambda_max <= 1e-9);
  }
  if (!b.upper_saturated) {
    const auto upper = vertex_matrices_upper(tab, b.tau_hi);
    for (std::size_t k = 0; k < upper.size(); ++k) {
      const VertexCertificate& c = b.upper_certificate[k];
      CHECK(sym_eig_extremes(upper[k].value - *part.regions[2].Q * c.epsilon).lambda_min >= -1e-9);
    }
  }
}

TEST_CASE("finer partitions never loosen the bounds") {
  const BoundsCertifier& cert = reference_certifier();
  const Partition coarse = isotropic_cover(2, 10);
  const Partition fine = isotropic_cover(2, 20);
  const auto bc = cert.certify_all(coarse);
  const auto bf = cert.certify_all(fine);
  for (std::size_t s = 0; s < fine.size(); ++s) {
    const std::size_t parent = locate_region(coarse, fine.regions[s].rays.size() > 1
                                                         ? add(fine.regions[s].rays[0], fine.regions[s].rays[1])
                                                         : fine.regions[s].rays[0]);
    CHECK(bf[s].tau_lo >= bc[parent].tau_lo - 1e-9);
    CHECK(bf[s].tau_hi <= bc[parent].tau_hi + 1e-9);
  }
}

TEST_CASE("abstraction failure on a horizon too short for any bound") {
  const Plant p = oracle::reference_plant();
  const EmbeddingTables tab = build_embedding(p, 1e-4, 10, 3, 4);
  const BoundsCertifier cert(tab);
  const Partition part = isotropic_cover(2, 4);
  bool saturated = false;
  const double lo = cert.lower_bound(part.regions[0], &saturated);
  CHECK(saturated);
  CHECK(lo == doctest::Approx(1e-4));
}

TEST_CASE("n = 3 smoke: bounds are ordered and contain samples") {
  Plant p;
  p.A = Matrix{{0, 1, 0}, {0, 0, 1}, {-1, -2, -2}};
  p.B = Matrix{{0}, {0}, {1}};
  p.K = Matrix{{0, 0, 0}};
  p.alpha = 0.1;
  p.validate();
  const EmbeddingTables tab = build_embedding(p, 1.0, 40, 4, 8);
  const BoundsCertifier cert(tab);
  const Partition part = isotropic_cover(3, 4);
  const RegionalBounds b = cert.certify(part.regions[5]);
  CHECK(b.tau_lo > 0.0);
  CHECK(b.tau_lo <= b.tau_hi);
  const InterSampleTimer timer(p, 1.0, 1e-3);
  for (const auto& ray : part.regions[5].rays) {
    const double tau = timer(ray);
    CHECK(tau >= b.tau_lo - 1e-9);
    CHECK(tau <= b.tau_hi + 1e-9);
  }
}
