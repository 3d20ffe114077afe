#include <doctest.h>

#include <cmath>
#include <random>

#include "etcabs/plant.hpp"
#include "oracles.hpp"

using namespace etcabs;

namespace {

double max_diff(const Matrix& a, const Matrix& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.data().size(); ++i) m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
  return m;
}

}  // namespace

TEST_CASE("plant validation") {
  Plant p = oracle::reference_plant();
  CHECK_NOTHROW(p.validate());
  CHECK(p.n() == 2);
  CHECK(p.m() == 1);
  CHECK(p.closed_loop() == Matrix{{0, 1}, {-1, -1}});
  p.alpha = 1.0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = oracle::reference_plant();
  p.K = Matrix{{1, 2, 3}};
  CHECK_THROWS_AS(p.validate(), DimensionError);
}

TEST_CASE("lambda_at: identity cases") {
  const Plant p = oracle::reference_plant();
  CHECK(max_diff(lambda_at(p, 0.0), Matrix::identity(2)) == 0.0);
  const Plant still{Matrix(2, 2), Matrix(2, 1), Matrix(1, 2), 0.1};
  for (double s : {0.1, 1.0, 5.0}) CHECK(max_diff(lambda_at(still, s), Matrix::identity(2)) < 1e-15);
}

TEST_CASE("lambda_at: matches the RK4 fundamental-solution oracle") {
  const Plant p = oracle::reference_plant();
  const Matrix lam = lambda_at(p, 0.2);
  for (std::size_t c = 0; c < 2; ++c) {
    Vector e(2, 0.0);
    e[c] = 1.0;
    const Vector col = oracle::rk4_state(p, e, 0.2, 1e-6);
    CHECK(std::abs(col[0] - lam(0, c)) < 1e-7);
    CHECK(std::abs(col[1] - lam(1, c)) < 1e-7);
  }
}

TEST_CASE("phi_at: value at zero is -alpha I") {
  const Plant p = oracle::reference_plant();
  const Matrix phi0 = phi_at(p, 0.0);
  CHECK(max_diff(phi0, Matrix::identity(2) * -p.alpha) <= 1e-12);
  std::mt19937_64 rng(41);
  for (int k = 0; k < 20; ++k) {
    const Vector x = oracle::random_unit(rng, 2);
    CHECK(quad_form(phi0, x) < 0.0);
  }
  const TriggeringEvaluation ev = evaluate_triggering(p, 0.37);
  CHECK(max_diff(ev.phi, ev.phi.transpose()) <= 1e-9);
  CHECK(max_diff(ev.phi, phi_at(p, 0.37)) == 0.0);
}

TEST_CASE("phi_at: quadratic form equals the error/state split from the ODE oracle") {
  const Plant p = oracle::reference_plant();
  std::mt19937_64 rng(43);
  std::uniform_real_distribution<double> ts(0.01, 1.0);
  for (int k = 0; k < 20; ++k) {
    const Vector x = oracle::random_unit(rng, 2);
    const double s = ts(rng);
    const Vector xi = oracle::rk4_state(p, x, s, 1e-4);
    CHECK(std::abs(quad_form(phi_at(p, s), x) - oracle::trigger_value(p, x, xi)) < 1e-6);
  }
}

TEST_CASE("phi_at: along (1, 0) the quadratic form changes sign exactly once on (0, 1]") {
  const Plant p = oracle::reference_plant();
  const Vector x{1.0, 0.0};
  int changes = 0;
  double prev = quad_form(phi_at(p, 1e-4), x);
  for (int k = 2; k <= 10000; ++k) {
    const double cur = quad_form(phi_at(p, k * 1e-4), x);
    if ((prev < 0.0) != (cur < 0.0)) ++changes;
    prev = cur;
  }
  CHECK(changes == 1);
}

TEST_CASE("inter_sample_time: agrees with RK4 trigger detection") {
  const Plant p = oracle::reference_plant();
  std::mt19937_64 rng(47);
  for (int k = 0; k < 10; ++k) {
    const Vector x = oracle::random_unit(rng, 2);
    const double tau = inter_sample_time(p, x, 1.0, 1e-4);
    const double ref = oracle::rk4_trigger_time(p, x, 1e-6, 1.0);
    CHECK(std::abs(tau - ref) < 2e-5);
  }
}

TEST_CASE("inter_sample_time: errors") {
  const Plant p = oracle::reference_plant();
  CHECK_THROWS_AS(inter_sample_time(p, Vector{0, 0}, 1.0, 1e-3), std::invalid_argument);
  CHECK_THROWS_AS(inter_sample_time(p, Vector{1, 0, 0}, 1.0, 1e-3), DimensionError);
  CHECK_THROWS_AS(inter_sample_time(p, Vector{1, 0}, 1e-4, 1e-5), HorizonExceededError);
  CHECK_THROWS_AS(inter_sample_time(p, Vector{1, 0}, 1.0, 0.0), std::invalid_argument);
}

TEST_CASE("inter_sample_time: scale and sign invariance") {
  const Plant p = oracle::reference_plant();
  const InterSampleTimer timer(p, 1.0, 1e-4);
  std::mt19937_64 rng(53);
  for (int k = 0; k < 50; ++k) {
    const Vector x = oracle::random_unit(rng, 2);
    const double tau = timer(x);
    for (double s : {-3.0, -1.0, 0.5, 2.0, 10.0}) CHECK(std::abs(timer(scaled(x, s)) - tau) <= 2e-9);
  }
}

TEST_CASE("InterSampleTimer reproduces the direct evaluation") {
  const Plant p = oracle::reference_plant();
  const InterSampleTimer timer(p, 1.0, 1e-3);
  std::mt19937_64 rng(59);
  for (int k = 0; k < 20; ++k) {
    const Vector x = oracle::random_unit(rng, 2);
    CHECK(timer(x) == inter_sample_time(p, x, 1.0, 1e-3));
  }
}

TEST_CASE("simulate_traffic: finite, bounded and suffix-consistent") {
  const Plant p = oracle::reference_plant();
  const InterSampleTimer timer(p, 1.0, 1e-3);
  const Trace tr = simulate_traffic(timer, Vector{0.6, -0.8}, 5.0);
  REQUIRE(tr.events.size() > 5);
  CHECK(tr.events.size() < 1000);
  CHECK_FALSE(tr.reached_origin);
  double t = 0.0;
  for (const auto& ev : tr.events) {
    CHECK(ev.t == doctest::Approx(t).epsilon(1e-12));
    CHECK(ev.t <= 5.0);
    CHECK(norm2(ev.x) <= 1.0 + 1e-9);
    t += ev.tau;
  }
  CHECK(t > 5.0);

  const std::size_t k0 = tr.events.size() / 2;
  const Trace suffix = simulate_traffic(timer, tr.events[k0].x, 5.0 - tr.events[k0].t);
  for (std::size_t k = 0; k < suffix.events.size() && k0 + k < tr.events.size(); ++k)
    CHECK(std::abs(suffix.events[k].tau - tr.events[k0 + k].tau) < 1e-9);

  const Trace scaled_tr = simulate_traffic(timer, Vector{6.0, -8.0}, 5.0);
  REQUIRE(scaled_tr.events.size() == tr.events.size());
  for (std::size_t k = 0; k < tr.events.size(); ++k)
    CHECK(std::abs(scaled_tr.events[k].tau - tr.events[k].tau) < 2e-9);
}

TEST_CASE("simulate_traffic: stops at the origin") {
  const Plant p = oracle::reference_plant();
  const Trace tr = simulate_traffic(p, Vector{1e-13, 0.0}, 1.0, 1.0, 1e-3);
  CHECK(tr.events.empty());
  CHECK(tr.reached_origin);
}

TEST_CASE("simulate_traffic: propagates a missed trigger") {
  const Plant p = oracle::reference_plant();
  CHECK_THROWS_AS(simulate_traffic(p, Vector{1.0, 0.0}, 1.0, 1e-3, 1e-4), HorizonExceededError);
}
