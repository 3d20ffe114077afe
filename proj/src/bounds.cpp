#include "etcabs/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "etcabs/parallel.hpp"

namespace etcabs {

namespace {

constexpr double kSplitTol = 1e-9;
constexpr double kGolden = 0.6180339887498949;

double lambda_max_sym(const Matrix& m) {
  if (m.rows() == 2) {
    const double a = m(0, 0);
    const double d = m(1, 1);
    const double b = 0.5 * (m(0, 1) + m(1, 0));
    const double h = 0.5 * (a - d);
    return 0.5 * (a + d) + std::hypot(h, b);
  }
  return sym_eig_extremes(m).lambda_max;
}

Matrix add_identity(Matrix m, double s) {
  for (std::size_t i = 0; i < m.rows(); ++i) m(i, i) += s;
  return m;
}

// λ_max(V + εQ) for 2x2 inputs without allocating.
struct PencilMax2 {
  double va, vb, vd, qa, qb, qd;
  double operator()(double eps) const {
    const double a = va + eps * qa;
    const double d = vd + eps * qd;
    const double b = vb + eps * qb;
    return 0.5 * (a + d) + std::hypot(0.5 * (a - d), b);
  }
};

SprocResult sproc_n2(const Matrix& v, const Matrix& q, const SprocOptions& opts) {
  const PencilMax2 g{v(0, 0), 0.5 * (v(0, 1) + v(1, 0)), v(1, 1),
                     q(0, 0), 0.5 * (q(0, 1) + q(1, 0)), q(1, 1)};
  SprocResult res;
  res.epsilon = 0.0;
  res.margin = g(0.0);
  auto consider = [&](double eps, double val) {
    if (val < res.margin) {
      res.margin = val;
      res.epsilon = eps;
    }
    return val <= opts.slack;
  };
  if (res.margin <= opts.slack) {
    res.feasible = true;
    return res;
  }

  // Bracket the minimizer of the convex g: eps_{k-2} <= argmin <= eps_k.
  double prev2 = 0.0;
  double prev = 0.0;
  double prev_val = res.margin;
  double eps = 1.0;
  double hi = 0.0;
  for (std::size_t k = 0; k < opts.eps_doubling_cap; ++k, eps *= 2.0) {
    const double val = g(eps);
    if (consider(eps, val)) {
      res.feasible = true;
      return res;
    }
    if (val >= prev_val) {
      hi = eps;
      break;
    }
    prev2 = prev;
    prev = eps;
    prev_val = val;
  }
  if (hi == 0.0) return res;  // still decreasing at the cap; best value recorded

  double lo = prev2;
  double x1 = hi - kGolden * (hi - lo);
  double x2 = lo + kGolden * (hi - lo);
  double f1 = g(x1);
  double f2 = g(x2);
  for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, hi); ++it) {
    if (consider(x1, f1) || consider(x2, f2)) {
      res.feasible = true;
      return res;
    }
    if (f1 <= f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - kGolden * (hi - lo);
      f1 = g(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + kGolden * (hi - lo);
      f2 = g(x2);
    }
  }
  consider(x1, f1);
  consider(x2, f2);
  res.feasible = res.margin <= opts.slack;
  return res;
}

// min over U >= 0 of λ_max(V + Eᵀ U E) by projected subgradient.
SprocResult sproc_subgradient(const Matrix& v, const Matrix& e, const SprocOptions& opts) {
  const std::size_t p = e.rows();
  const Matrix et = e.transpose();
  Matrix u(p, p);
  SprocResult res;
  res.U = u;
  res.margin = std::numeric_limits<double>::infinity();
  const double eta0 = std::max(v.norm_fro(), 1e-12);
  for (std::size_t k = 0; k <= opts.subgradient_iterations; ++k) {
    const Matrix w_mat = (v + et * u * e).symmetrized();
    const SymEigExtremes ext = sym_eig_extremes(w_mat);
    if (ext.lambda_max < res.margin) {
      res.margin = ext.lambda_max;
      res.U = u;
    }
    if (res.margin <= opts.slack || k == opts.subgradient_iterations) break;
    const Vector ew = e * ext.v_max;
    double gnorm = 0.0;
    for (double a : ew)
      for (double b : ew) gnorm += a * a * b * b;
    gnorm = std::sqrt(gnorm);
    if (gnorm < 1e-300) break;  // top eigenvector orthogonal to every facet normal
    const double step = eta0 / std::sqrt(static_cast<double>(k + 1)) / gnorm;
    for (std::size_t r = 0; r < p; ++r)
      for (std::size_t c = 0; c < p; ++c) u(r, c) = std::max(0.0, u(r, c) - step * ew[r] * ew[c]);
  }
  res.feasible = res.margin <= opts.slack;
  return res;
}

}  // namespace

Matrix EmbeddingTables::truncated(std::size_t j, double sigma_prime, std::size_t order) const {
  const auto& lj = L.at(j);
  order = std::min(order, lj.size() - 1);
  // Horner in σ'.
  Matrix acc = lj[order];
  for (std::size_t k = order; k-- > 0;) {
    acc *= sigma_prime;
    acc += lj[k];
  }
  return acc;
}

EmbeddingTables build_embedding(const Plant& p, double sigma_bar, std::size_t l, std::size_t n_conv,
                                std::size_t grid_per_cell, double nu_safety) {
  p.validate();
  if (!(sigma_bar > 0.0) || !std::isfinite(sigma_bar))
    throw std::invalid_argument("build_embedding: sigma_bar must be positive");
  if (l < 1) throw std::invalid_argument("build_embedding: l must be at least 1");
  if (n_conv < 1) throw std::invalid_argument("build_embedding: N_conv must be at least 1");
  if (grid_per_cell < 2) throw std::invalid_argument("build_embedding: grid_per_cell must be at least 2");
  if (!(nu_safety >= 1.0)) throw std::invalid_argument("build_embedding: nu_safety must be >= 1");

  EmbeddingTables tab;
  tab.sigma_bar = sigma_bar;
  tab.l = l;
  tab.n_conv = n_conv;
  tab.grid_per_cell = grid_per_cell;
  tab.nu_safety = nu_safety;
  tab.alpha = p.alpha;

  const std::size_t n = p.n();
  const Matrix eye = Matrix::identity(n);
  const Matrix f = p.closed_loop();
  const double c = tab.cell();
  const double beta = 1.0 - p.alpha;

  // S_k = A^{k-1}/k!, the Taylor coefficients of ∫₀^{σ'} e^{Ar} dr.
  std::vector<Matrix> s(n_conv + 1);
  Matrix apow = eye;
  double fact = 1.0;
  for (std::size_t k = 1; k <= n_conv; ++k) {
    fact *= static_cast<double>(k);
    s[k] = apow * (1.0 / fact);
    apow = apow * p.A;
  }
  // T_k = Σ_{i=1}^{k-1} S_iᵀ S_{k-i}
  std::vector<Matrix> t(n_conv + 1, Matrix(n, n));
  for (std::size_t k = 2; k <= n_conv; ++k)
    for (std::size_t i = 1; i < k; ++i) t[k] += s[i].transpose() * s[k - i];

  tab.M.resize(l);
  tab.N.resize(l);
  tab.Pi1.resize(l);
  tab.Pi2.resize(l);
  tab.L.resize(l);
  for (std::size_t j = 0; j < l; ++j) {
    tab.M[j] = int_expm(p.A, static_cast<double>(j) * c);
    tab.N[j] = p.A * tab.M[j] + eye;
    tab.Pi1[j] = eye + tab.M[j] * f;
    tab.Pi2[j] = tab.N[j] * f;
    const Matrix& pi1 = tab.Pi1[j];
    const Matrix& pi2 = tab.Pi2[j];
    const Matrix pi1t = pi1.transpose();
    const Matrix pi2t = pi2.transpose();
    const Matrix pm = beta * pi1 - eye;
    const Matrix pmt = pm.transpose();

    auto& lj = tab.L[j];
    lj.resize(n_conv + 1);
    lj[0] = (eye - pi1 - pi1t + beta * (pi1t * pi1)).symmetrized();
    for (std::size_t k = 1; k <= n_conv; ++k) {
      const Matrix lin = pmt * s[k] * pi2;
      Matrix lk = lin + lin.transpose();
      if (k >= 2) lk += beta * (pi2t * t[k] * pi2);
      lj[k] = lk.symmetrized();
    }
  }

  double lo_raw = -std::numeric_limits<double>::infinity();
  double up_raw = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < l; ++j) {
    for (std::size_t g = 0; g < grid_per_cell; ++g) {
      const double sp = c * static_cast<double>(g) / static_cast<double>(grid_per_cell - 1);
      const Matrix diff = (phi_at(p, static_cast<double>(j) * c + sp) - tab.truncated(j, sp)).symmetrized();
      const SymEigExtremes ext = sym_eig_extremes(diff);
      lo_raw = std::max(lo_raw, ext.lambda_max);
      up_raw = std::min(up_raw, ext.lambda_min);
    }
  }
  tab.nu_lower_raw = lo_raw;
  tab.nu_upper_raw = up_raw;
  tab.nu_lower = lo_raw + (nu_safety - 1.0) * std::abs(lo_raw);
  tab.nu_upper = up_raw - (nu_safety - 1.0) * std::abs(up_raw);
  return tab;
}

CellSplit lower_split(const EmbeddingTables& tab, double tau_lo) {
  const double c = tab.cell();
  auto last = static_cast<std::size_t>(std::floor(tau_lo / c + kSplitTol));
  if (last >= tab.l) return {tab.l - 1, c};
  return {last, std::clamp(tau_lo - static_cast<double>(last) * c, 0.0, c)};
}

CellSplit upper_split(const EmbeddingTables& tab, double tau_hi) {
  const double c = tab.cell();
  auto first = static_cast<std::size_t>(std::floor(tau_hi / c + kSplitTol));
  if (first >= tab.l) return {tab.l - 1, 0.0};
  return {first, std::clamp(static_cast<double>(first + 1) * c - tau_hi, 0.0, c)};
}

namespace {

Matrix partial_vertex(const EmbeddingTables& tab, std::size_t j, double chi, std::size_t i, double nu) {
  return add_identity(tab.truncated(j, chi, i), nu);
}

void check_tau(const EmbeddingTables& tab, double tau, const char* what) {
  if (!(tau > 0.0) || tau > tab.sigma_bar * (1.0 + 1e-12))
    throw std::invalid_argument(std::string(what) + ": tau must lie in (0, sigma_bar]");
}

}  // namespace

std::vector<VertexMatrix> vertex_matrices_lower(const EmbeddingTables& tab, double tau_lo) {
  check_tau(tab, tau_lo, "vertex_matrices_lower");
  const CellSplit sp = lower_split(tab, tau_lo);
  std::vector<VertexMatrix> out;
  out.reserve((tab.n_conv + 1) * (sp.last + 1));
  for (std::size_t j = 0; j <= sp.last; ++j) {
    const double chi = j == sp.last ? sp.chi : tab.cell();
    for (std::size_t i = 0; i <= tab.n_conv; ++i)
      out.push_back({i, j, chi, partial_vertex(tab, j, chi, i, tab.nu_lower)});
  }
  return out;
}

std::vector<VertexMatrix> vertex_matrices_upper(const EmbeddingTables& tab, double tau_hi) {
  check_tau(tab, tau_hi, "vertex_matrices_upper");
  const CellSplit sp = upper_split(tab, tau_hi);
  std::vector<VertexMatrix> out;
  out.reserve((tab.n_conv + 1) * (tab.l - sp.last));
  for (std::size_t j = sp.last; j < tab.l; ++j) {
    const double chi = j == sp.last ? sp.chi : tab.cell();
    for (std::size_t i = 0; i <= tab.n_conv; ++i)
      out.push_back({i, j, chi, partial_vertex(tab, j, chi, i, tab.nu_upper)});
  }
  return out;
}

SprocResult sproc_feasible(const Matrix& v, const ConicRegion& region, BoundSense sense,
                           const SprocOptions& opts) {
  const std::size_t n = v.rows();
  if (!v.square() || n != region.dim()) throw DimensionError("sproc_feasible: dimension mismatch");
  const Matrix vp = sense == BoundSense::lower ? v : -v;

  // Every multiplier term is >= 0 on the extreme rays, so a ray with rᵀV'r > 0
  // rules out any certificate.
  for (const auto& r : region.rays) {
    if (quad_form(vp, r) > opts.slack) {
      SprocResult res;
      res.margin = quad_form(vp, r);
      if (n != 2) res.U = Matrix(region.E.rows(), region.E.rows());
      return res;
    }
  }
  if (n == 2) {
    const Matrix q = region.Q ? *region.Q : Matrix(2, 2);
    return sproc_n2(vp, q, opts);
  }
  return sproc_subgradient(vp, region.E, opts);
}

BoundsCertifier::BoundsCertifier(EmbeddingTables tables, BoundsOptions opts)
    : tables_(std::move(tables)), opts_(opts) {
  const std::size_t l = tables_.l;
  const double c = tables_.cell();
  full_lower_.resize(l);
  full_upper_.resize(l);
  for (std::size_t j = 0; j < l; ++j) {
    for (std::size_t i = 0; i <= tables_.n_conv; ++i) {
      full_lower_[j].push_back(partial_vertex(tables_, j, c, i, tables_.nu_lower));
      full_upper_[j].push_back(partial_vertex(tables_, j, c, i, tables_.nu_upper));
    }
  }

  // Step 1: largest τ with every lower vertex negative semidefinite.
  std::vector<signed char> memo(l, -1);
  const double sb = tables_.sigma_bar;
  if (!family_feasible(nullptr, BoundSense::lower, 0.0, memo))
    throw AbstractionFailure(
        "no positive lower bound: the embedding is infeasible as tau -> 0; increase l or N_conv");
  if (family_feasible(nullptr, BoundSense::lower, sb, memo)) {
    tau_prime_ = sb;
    return;
  }
  double lo = 0.0;
  double hi = sb;
  for (std::size_t it = 0; it < opts_.bisection_iterations; ++it) {
    const double mid = 0.5 * (lo + hi);
    (family_feasible(nullptr, BoundSense::lower, mid, memo) ? lo : hi) = mid;
  }
  tau_prime_ = lo;
}

Matrix BoundsCertifier::vertex(std::size_t j, double chi, std::size_t i, BoundSense sense) const {
  if (chi == tables_.cell()) return (sense == BoundSense::lower ? full_lower_ : full_upper_)[j][i];
  const double nu = sense == BoundSense::lower ? tables_.nu_lower : tables_.nu_upper;
  return partial_vertex(tables_, j, chi, i, nu);
}

bool BoundsCertifier::family_feasible(const ConicRegion* region, BoundSense sense, double tau,
                                      std::vector<signed char>& full_cells) const {
  const double c = tables_.cell();
  const std::size_t n_conv = tables_.n_conv;
  auto vertex_ok = [&](const Matrix& v) {
    if (region == nullptr) return lambda_max_sym(v) <= opts_.sproc.slack;
    return sproc_feasible(v, *region, sense, opts_.sproc).feasible;
  };
  auto full_ok = [&](std::size_t j) {
    if (full_cells[j] < 0) {
      bool ok = true;
      for (std::size_t i = 0; i <= n_conv && ok; ++i) ok = vertex_ok(vertex(j, c, i, sense));
      full_cells[j] = ok ? 1 : 0;
    }
    return full_cells[j] == 1;
  };
  auto partial_ok = [&](std::size_t j, double chi) {
    if (chi == c) return full_ok(j);
    for (std::size_t i = 0; i <= n_conv; ++i)
      if (!vertex_ok(vertex(j, chi, i, sense))) return false;
    return true;
  };

  if (sense == BoundSense::lower) {
    const CellSplit sp = lower_split(tables_, tau);
    if (!partial_ok(sp.last, sp.chi)) return false;
    for (std::size_t j = sp.last; j-- > 0;)
      if (!full_ok(j)) return false;
    return true;
  }
  const CellSplit sp = upper_split(tables_, tau);
  if (!partial_ok(sp.last, sp.chi)) return false;
  for (std::size_t j = sp.last + 1; j < tables_.l; ++j)
    if (!full_ok(j)) return false;
  return true;
}

double BoundsCertifier::lower_bound(const ConicRegion& region, bool* saturated) const {
  std::vector<signed char> memo(tables_.l, -1);
  const double sb = tables_.sigma_bar;
  if (saturated) *saturated = false;
  if (family_feasible(&region, BoundSense::lower, sb, memo)) {
    if (saturated) *saturated = true;
    return sb;
  }
  double lo = tau_prime_;
  double hi = sb;
  for (std::size_t it = 0; it < opts_.bisection_iterations; ++it) {
    const double mid = 0.5 * (lo + hi);
    (family_feasible(&region, BoundSense::lower, mid, memo) ? lo : hi) = mid;
  }
  if (!(lo > 0.0))
    throw AbstractionFailure("region " + std::to_string(region.index) +
                             ": no positive lower bound certified; increase l or N_conv");
  return lo;
}

double BoundsCertifier::upper_bound(const ConicRegion& region, double tau_lo, bool* saturated) const {
  std::vector<signed char> memo(tables_.l, -1);
  const double sb = tables_.sigma_bar;
  if (saturated) *saturated = false;
  if (!family_feasible(&region, BoundSense::upper, sb, memo)) {
    if (saturated) *saturated = true;
    return sb;
  }
  if (family_feasible(&region, BoundSense::upper, tau_lo, memo)) return tau_lo;
  double lo = tau_lo;
  double hi = sb;
  for (std::size_t it = 0; it < opts_.bisection_iterations; ++it) {
    const double mid = 0.5 * (lo + hi);
    (family_feasible(&region, BoundSense::upper, mid, memo) ? hi : lo) = mid;
  }
  return hi;
}

std::vector<VertexCertificate> BoundsCertifier::certificate(const ConicRegion& region, BoundSense sense,
                                                            double tau) const {
  const std::vector<VertexMatrix> family = sense == BoundSense::lower
                                               ? vertex_matrices_lower(tables_, tau)
                                               : vertex_matrices_upper(tables_, tau);
  std::vector<VertexCertificate> out;
  out.reserve(family.size());
  for (const auto& vm : family) {
    const SprocResult r = sproc_feasible(vm.value, region, sense, opts_.sproc);
    out.push_back({vm.i, vm.j, vm.chi, r.epsilon, r.U, r.margin});
  }
  return out;
}

RegionalBounds BoundsCertifier::certify(const ConicRegion& region) const {
  RegionalBounds rb;
  rb.region = region.index;
  rb.tau_lo = lower_bound(region, &rb.lower_saturated);
  rb.tau_hi = upper_bound(region, rb.tau_lo, &rb.upper_saturated);
  rb.lower_certificate = certificate(region, BoundSense::lower, rb.tau_lo);
  rb.upper_certificate = certificate(region, BoundSense::upper, rb.tau_hi);
  return rb;
}

std::vector<RegionalBounds> BoundsCertifier::certify_all(const Partition& part, std::size_t threads) const {
  std::vector<RegionalBounds> out(part.size());
  const std::size_t half = part.half_count();
  parallel_for(half, threads, [&](std::size_t s) { out[s] = certify(part.regions[s]); });
  for (std::size_t s = 0; s < half; ++s) {
    const std::size_t m = part.regions[s].mirror;
    out[m] = out[s];
    out[m].region = m;
  }
  return out;
}

double regional_lower_bound(const EmbeddingTables& tab, const ConicRegion& region) {
  return BoundsCertifier(tab).lower_bound(region);
}

double regional_upper_bound(const EmbeddingTables& tab, const ConicRegion& region, double tau_lo) {
  return BoundsCertifier(tab).upper_bound(region, tau_lo);
}

}  // namespace etcabs
