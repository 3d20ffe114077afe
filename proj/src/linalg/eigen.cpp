#include <algorithm>
#include <cmath>
#include <numeric>

#include "etcabs/linalg.hpp"

namespace etcabs {

namespace {

constexpr double kSymmetryTol = 1e-9;
constexpr double kOffDiagTol = 1e-12;
constexpr int kMaxSweeps = 100;

double off_diagonal_norm(const Matrix& m) {
  double s = 0.0;
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j)
      if (i != j) s += m(i, j) * m(i, j);
  return std::sqrt(s);
}

}  // namespace

SymEigen sym_eigen(const Matrix& m) {
  if (!m.square()) throw DimensionError("sym_eigen: matrix not square");
  const std::size_t n = m.rows();
  const double scale = std::max(1.0, m.max_abs());
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (std::abs(m(i, j) - m(j, i)) > kSymmetryTol * scale)
        throw ContractError("sym_eigen: matrix is not symmetric");

  Matrix a = m.symmetrized();
  Matrix v = Matrix::identity(n);
  // Absolute target from the contract, relaxed to round-off level for large entries.
  const double tol = std::max(kOffDiagTol, 1e-15 * a.norm_fro());

  for (int sweep = 0; sweep < kMaxSweeps && off_diagonal_norm(a) > tol; ++sweep) {
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return a(x, x) < a(y, y); });
  SymEigen out{Vector(n), Matrix(n, n)};
  for (std::size_t k = 0; k < n; ++k) {
    out.values[k] = a(order[k], order[k]);
    for (std::size_t i = 0; i < n; ++i) out.vectors(i, k) = v(i, order[k]);
  }
  return out;
}

SymEigExtremes sym_eig_extremes(const Matrix& m) {
  SymEigen e = sym_eigen(m);
  const std::size_t n = e.values.size();
  if (n == 0) throw DimensionError("sym_eig_extremes: empty matrix");
  SymEigExtremes r;
  r.lambda_min = e.values.front();
  r.lambda_max = e.values.back();
  r.v_max = e.vectors.col(n - 1);
  const double nv = norm2(r.v_max);
  for (double& x : r.v_max) x /= nv;
  return r;
}

double norm_op2(const Matrix& m) {
  const Matrix g = m.transpose() * m;
  return std::sqrt(std::max(0.0, sym_eig_extremes(g.symmetrized()).lambda_max));
}

}  // namespace etcabs
