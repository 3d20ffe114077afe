#include <cmath>
#include <limits>

#include "etcabs/linalg.hpp"

namespace etcabs {

namespace {

constexpr double kFeasibilityTol = 1e-9;
constexpr double kPivotTol = 1e-12;

// Dense phase-1 tableau for  A y = b, y >= 0, b >= 0 after row sign fixes.
class PhaseOneTableau {
 public:
  PhaseOneTableau(const Matrix& a, const Vector& b, const std::vector<bool>& needs_artificial,
                  std::size_t slack_offset)
      : rows_(a.rows()), slack_offset_(slack_offset) {
    std::size_t n_art = 0;
    for (bool x : needs_artificial) n_art += x ? 1 : 0;
    structural_ = a.cols();
    cols_ = structural_ + n_art;
    t_ = Matrix(rows_, cols_ + 1);
    basis_.resize(rows_);
    cost_ = Vector(cols_ + 1, 0.0);

    std::size_t art = structural_;
    for (std::size_t i = 0; i < rows_; ++i) {
      for (std::size_t j = 0; j < structural_; ++j) t_(i, j) = a(i, j);
      t_(i, cols_) = b[i];
      if (needs_artificial[i]) {
        t_(i, art) = 1.0;
        basis_[i] = art++;
      } else {
        basis_[i] = slack_column(i);
      }
    }
    // Reduced costs of the phase-1 objective (sum of artificials), expressed
    // through the nonbasic columns; the last entry holds -objective.
    for (std::size_t i = 0; i < rows_; ++i) {
      if (basis_[i] < structural_) continue;
      for (std::size_t j = 0; j <= cols_; ++j) cost_[j] -= t_(i, j);
    }
    for (std::size_t j = structural_; j < cols_; ++j) cost_[j] += 1.0;
  }

  double solve() {
    const std::size_t guard = 50 * (rows_ + cols_) + 1000;
    for (std::size_t iter = 0; iter < guard; ++iter) {
      // Bland: lowest-index improving column.
      std::size_t enter = cols_;
      for (std::size_t j = 0; j < cols_; ++j)
        if (cost_[j] < -kPivotTol) {
          enter = j;
          break;
        }
      if (enter == cols_) return -cost_[cols_];

      std::size_t leave = rows_;
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < rows_; ++i) {
        const double aij = t_(i, enter);
        if (aij <= kPivotTol) continue;
        const double ratio = t_(i, cols_) / aij;
        if (ratio < best - 1e-15 || (std::abs(ratio - best) <= 1e-15 && leave < rows_ && basis_[i] < basis_[leave])) {
          best = ratio;
          leave = i;
        }
      }
      // Unbounded direction cannot occur: the objective is bounded below by 0.
      if (leave == rows_) return -cost_[cols_];
      pivot(leave, enter);
    }
    throw std::runtime_error("lp_feasible: simplex iteration guard exceeded");
  }

 private:
  std::size_t slack_column(std::size_t row) const { return slack_offset_ + row; }

  void pivot(std::size_t r, std::size_t c) {
    const double p = t_(r, c);
    for (std::size_t j = 0; j <= cols_; ++j) t_(r, j) /= p;
    for (std::size_t i = 0; i < rows_; ++i) {
      if (i == r) continue;
      const double f = t_(i, c);
      if (f == 0.0) continue;
      for (std::size_t j = 0; j <= cols_; ++j) t_(i, j) -= f * t_(r, j);
    }
    const double f = cost_[c];
    if (f != 0.0)
      for (std::size_t j = 0; j <= cols_; ++j) cost_[j] -= f * t_(r, j);
    basis_[r] = c;
  }

  std::size_t rows_;
  std::size_t slack_offset_;
  std::size_t structural_ = 0;
  std::size_t cols_ = 0;
  Matrix t_;
  Vector cost_;
  std::vector<std::size_t> basis_;
};

}  // namespace

bool lp_feasible(const Matrix& c, std::span<const double> d, const Matrix& e) {
  const std::size_t n = c.cols();
  if (c.rows() != d.size()) throw DimensionError("lp_feasible: C rows and d length differ");
  if (!e.empty() && e.cols() != n) throw DimensionError("lp_feasible: E and C column counts differ");
  const std::size_t f = c.rows();
  const std::size_t p = e.empty() ? 0 : e.rows();
  const std::size_t m = f + p;
  if (m == 0) return true;

  // Columns: x+ (n), x- (n), slacks (m).
  const std::size_t slack0 = 2 * n;
  Matrix a(m, 2 * n + m);
  Vector b(m, 0.0);
  std::vector<bool> needs_art(m, false);
  for (std::size_t i = 0; i < m; ++i) {
    double sign = 1.0;
    const double rhs = i < f ? d[i] : 0.0;
    if (rhs < 0.0) sign = -1.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double coef = i < f ? c(i, j) : -e(i - f, j);
      a(i, j) = sign * coef;
      a(i, n + j) = -sign * coef;
    }
    a(i, slack0 + i) = sign;
    b[i] = sign * rhs;
    needs_art[i] = sign < 0.0;
  }

  PhaseOneTableau tab(a, b, needs_art, slack0);
  return tab.solve() <= kFeasibilityTol;
}

}  // namespace etcabs
