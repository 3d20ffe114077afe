#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace etcabs {

class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A documented precondition was violated (e.g. a non-symmetric input to a
/// symmetric eigensolver).
class ContractError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// All hull input points are affinely dependent; the caller has to inflate
/// the point cloud before retrying.
class DegenerateHullError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Vector = std::vector<double>;

/// Dense row-major real matrix with value semantics.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix identity(std::size_t n);
  static Matrix zeros(std::size_t rows, std::size_t cols) { return {rows, cols}; }
  static Matrix from_rows(const std::vector<Vector>& rows, std::size_t cols);
  static Matrix diagonal(std::span<const double> diag);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool square() const noexcept { return rows_ == cols_; }
  bool empty() const noexcept { return rows_ == 0 || cols_ == 0; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }

  Vector row(std::size_t r) const;
  Vector col(std::size_t c) const;
  Matrix block(std::size_t r0, std::size_t c0, std::size_t nr, std::size_t nc) const;
  void set_block(std::size_t r0, std::size_t c0, const Matrix& b);

  Matrix transpose() const;
  /// (M + Mᵀ)/2
  Matrix symmetrized() const;

  double norm_inf() const;   // max absolute row sum
  double norm_fro() const;
  double max_abs() const;

  Matrix& operator+=(const Matrix& o);
  Matrix& operator-=(const Matrix& o);
  Matrix& operator*=(double s);

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

Matrix operator+(Matrix a, const Matrix& b);
Matrix operator-(Matrix a, const Matrix& b);
Matrix operator-(Matrix a);
Matrix operator*(const Matrix& a, const Matrix& b);
Matrix operator*(Matrix a, double s);
Matrix operator*(double s, Matrix a);
Vector operator*(const Matrix& a, std::span<const double> x);

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);
Vector scaled(std::span<const double> a, double s);
Vector add(std::span<const double> a, std::span<const double> b);
Vector sub(std::span<const double> a, std::span<const double> b);

/// xᵀ M x
double quad_form(const Matrix& m, std::span<const double> x);

/// e^{At} by scaling and squaring around a degree-13 Taylor core.
Matrix expm(const Matrix& a, double t);

/// ∫₀ᵗ e^{Ar} dr, read off the top-right block of exp([[A, I], [0, 0]] t).
/// Valid for singular A.
Matrix int_expm(const Matrix& a, double t);

struct SymEigExtremes {
  double lambda_min = 0.0;
  double lambda_max = 0.0;
  Vector v_max;  // unit eigenvector for lambda_max
};

struct SymEigen {
  Vector values;  // ascending
  Matrix vectors; // column k pairs with values[k]
};

/// Full eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
/// Throws ContractError if M is asymmetric beyond 1e-9 (scaled by max|M|).
SymEigen sym_eigen(const Matrix& m);
SymEigExtremes sym_eig_extremes(const Matrix& m);

/// Spectral norm ‖M‖₂ = sqrt(λ_max(MᵀM)).
double norm_op2(const Matrix& m);

/// Is there an x with C x <= d and E x >= 0?  Phase-1 simplex, Bland's rule.
/// E may have zero rows.
bool lp_feasible(const Matrix& c, std::span<const double> d, const Matrix& e);

struct HPolytope {
  Matrix c;  // outward unit normals, one per row
  Vector d;
  bool bounding_box = false;  // true when n > 3 and an axis box was used

  bool contains(std::span<const double> x, double tol = 1e-9) const;
};

/// H-representation of the convex hull. Exact for n = 2 and n = 3; n > 3
/// falls back to the axis-aligned bounding box (flagged).
HPolytope convex_hull(const std::vector<Vector>& points);

}  // namespace etcabs
