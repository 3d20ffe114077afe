#pragma once

// Independent reference computations used by the tests. None of these call
// into the library's numerical kernels.

#include <cmath>
#include <cstddef>
#include <random>
#include <vector>

#include "etcabs/linalg.hpp"
#include "etcabs/plant.hpp"

namespace oracle {

using etcabs::Matrix;
using etcabs::Vector;

inline etcabs::Plant reference_plant() {
  return etcabs::Plant{Matrix{{0.0, 1.0}, {-2.0, 3.0}}, Matrix{{0.0}, {1.0}}, Matrix{{1.0, -4.0}}, 0.05};
}

inline Matrix mul(const Matrix& a, const Matrix& b) {
  Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k)
      for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += a(i, k) * b(k, j);
  return c;
}

/// Σ_{k<terms} (At)^k / k!, no scaling.
inline Matrix taylor_expm(const Matrix& a, double t, int terms = 60) {
  const std::size_t n = a.rows();
  Matrix sum(n, n);
  Matrix term(n, n);
  for (std::size_t i = 0; i < n; ++i) term(i, i) = 1.0;
  for (int k = 0; k < terms; ++k) {
    for (std::size_t i = 0; i < n * n; ++i) sum.data()[i] += term.data()[i];
    term = mul(term, a);
    for (double& v : term.data()) v *= t / (k + 1);
  }
  return sum;
}

/// Composite Simpson rule for ∫₀ᵗ e^{Ar} dr with the Taylor oracle as integrand.
inline Matrix simpson_int_expm(const Matrix& a, double t, int panels = 10000) {
  const std::size_t n = a.rows();
  Matrix sum(n, n);
  const double h = t / panels;
  for (int k = 0; k <= panels; ++k) {
    const double w = (k == 0 || k == panels) ? 1.0 : (k % 2 ? 4.0 : 2.0);
    const Matrix e = taylor_expm(a, k * h, 30);
    for (std::size_t i = 0; i < n * n; ++i) sum.data()[i] += w * e.data()[i];
  }
  for (double& v : sum.data()) v *= h / 3.0;
  return sum;
}

/// RK4 integration of ξ' = Aξ + BK x0 from ξ(0) = x0 up to t.
inline Vector rk4_state(const etcabs::Plant& p, const Vector& x0, double t, double dt) {
  const std::size_t n = x0.size();
  const Matrix bk = mul(p.B, p.K);
  Vector u(n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) u[i] += bk(i, j) * x0[j];
  auto f = [&](const Vector& x) {
    Vector d(u);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) d[i] += p.A(i, j) * x[j];
    return d;
  };
  Vector x = x0;
  const auto steps = static_cast<long>(std::llround(t / dt));
  const double h = t / static_cast<double>(std::max(1L, steps));
  for (long s = 0; s < std::max(1L, steps); ++s) {
    const Vector k1 = f(x);
    Vector tmp(n);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + 0.5 * h * k1[i];
    const Vector k2 = f(tmp);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + 0.5 * h * k2[i];
    const Vector k3 = f(tmp);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + h * k3[i];
    const Vector k4 = f(tmp);
    for (std::size_t i = 0; i < n; ++i) x[i] += h / 6.0 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
  }
  return x;
}

/// |x0 - ξ|² - α|ξ|²
inline double trigger_value(const etcabs::Plant& p, const Vector& x0, const Vector& xi) {
  double e2 = 0.0;
  double x2 = 0.0;
  for (std::size_t i = 0; i < x0.size(); ++i) {
    e2 += (x0[i] - xi[i]) * (x0[i] - xi[i]);
    x2 += xi[i] * xi[i];
  }
  return e2 - p.alpha * x2;
}

/// First time the triggering rule fires along an RK4 trajectory with step dt,
/// linearly interpolated inside the crossing step. Returns -1 if none by t_max.
inline double rk4_trigger_time(const etcabs::Plant& p, const Vector& x0, double dt, double t_max) {
  const std::size_t n = x0.size();
  const Matrix bk = mul(p.B, p.K);
  Vector u(n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) u[i] += bk(i, j) * x0[j];
  auto f = [&](const Vector& x, Vector& d) {
    for (std::size_t i = 0; i < n; ++i) {
      d[i] = u[i];
      for (std::size_t j = 0; j < n; ++j) d[i] += p.A(i, j) * x[j];
    }
  };
  Vector x = x0, k1(n), k2(n), k3(n), k4(n), tmp(n);
  double prev = trigger_value(p, x0, x);
  for (long s = 1; s * dt <= t_max; ++s) {
    f(x, k1);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + 0.5 * dt * k1[i];
    f(tmp, k2);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + 0.5 * dt * k2[i];
    f(tmp, k3);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + dt * k3[i];
    f(tmp, k4);
    for (std::size_t i = 0; i < n; ++i) x[i] += dt / 6.0 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
    const double cur = trigger_value(p, x0, x);
    if (cur >= 0.0) return (s - 1) * dt + dt * prev / (prev - cur);
    prev = cur;
  }
  return -1.0;
}

/// Eigenvalues of a symmetric 2x2 matrix from the characteristic quadratic.
inline std::pair<double, double> eig2(double a, double b, double d) {
  const double tr = a + d;
  const double det = a * d - b * b;
  const double disc = std::sqrt(std::max(0.0, tr * tr / 4 - det));
  return {tr / 2 - disc, tr / 2 + disc};
}

/// Real roots of a monic polynomial with only real roots (coefficients c[0] +
/// c[1] x + ... + x^deg) by sign-change scanning plus bisection on [-r, r].
inline std::vector<double> real_roots(const std::vector<double>& c, double r, int grid = 200000) {
  auto eval = [&](double x) {
    double v = 1.0;
    for (std::size_t k = c.size(); k-- > 0;) v = v * x + c[k];
    return v;
  };
  std::vector<double> roots;
  double x0 = -r;
  double f0 = eval(x0);
  for (int i = 1; i <= grid; ++i) {
    const double x1 = -r + 2 * r * i / grid;
    const double f1 = eval(x1);
    if (f0 == 0.0) {
      roots.push_back(x0);
    } else if (f0 * f1 < 0.0) {
      double lo = x0, hi = x1, flo = f0;
      for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = eval(mid);
        if ((fm < 0) == (flo < 0)) {
          lo = mid;
          flo = fm;
        } else {
          hi = mid;
        }
      }
      roots.push_back(0.5 * (lo + hi));
    }
    x0 = x1;
    f0 = f1;
  }
  return roots;
}

inline Vector random_unit(std::mt19937_64& rng, std::size_t n) {
  std::normal_distribution<double> g;
  Vector x(n);
  double s = 0.0;
  do {
    s = 0.0;
    for (double& v : x) {
      v = g(rng);
      s += v * v;
    }
  } while (s < 1e-12);
  for (double& v : x) v /= std::sqrt(s);
  return x;
}

}  // namespace oracle
