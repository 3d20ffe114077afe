#include <cmath>

#include "etcabs/linalg.hpp"

namespace etcabs {

namespace {

constexpr int kTaylorOrder = 13;
constexpr double kScaledNormTarget = 0.5;

}  // namespace

Matrix expm(const Matrix& a, double t) {
  if (!a.square()) throw DimensionError("expm: matrix not square");
  if (!(t >= 0.0)) throw std::invalid_argument("expm: t must be nonnegative");
  const std::size_t n = a.rows();

  Matrix x = a * t;
  const double norm = x.norm_inf();
  int squarings = 0;
  if (norm > kScaledNormTarget) {
    squarings = static_cast<int>(std::ceil(std::log2(norm / kScaledNormTarget)));
    x *= std::ldexp(1.0, -squarings);
  }

  // Horner form of sum_{k=0}^{13} X^k / k!
  Matrix result = Matrix::identity(n);
  for (int k = kTaylorOrder; k >= 1; --k) {
    result = x * result;
    result *= 1.0 / k;
    for (std::size_t i = 0; i < n; ++i) result(i, i) += 1.0;
  }
  for (int s = 0; s < squarings; ++s) result = result * result;
  return result;
}

Matrix int_expm(const Matrix& a, double t) {
  if (!a.square()) throw DimensionError("int_expm: matrix not square");
  const std::size_t n = a.rows();
  Matrix aug(2 * n, 2 * n);
  aug.set_block(0, 0, a);
  aug.set_block(0, n, Matrix::identity(n));
  return expm(aug, t).block(0, n, n, n);
}

}  // namespace etcabs
