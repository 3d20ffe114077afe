#include "etcabs/plant.hpp"

#include <cmath>
#include <string>

namespace etcabs {

namespace {

constexpr double kBisectionResolution = 1e-9;
constexpr double kOriginNorm = 1e-12;

void check_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v))
    throw std::invalid_argument(std::string(what) + " must be positive and finite");
}

double bisect_trigger(const Plant& p, std::span<const double> x, double lo, double hi) {
  // Invariant: xᵀΦ(lo)x < 0 <= xᵀΦ(hi)x.
  while (hi - lo > kBisectionResolution) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (quad_form(phi_at(p, mid), x) >= 0.0)
      hi = mid;
    else
      lo = mid;
  }
  return hi;
}

}  // namespace

void Plant::validate() const {
  if (!A.square() || A.empty()) throw DimensionError("plant: A must be square and nonempty");
  if (B.rows() != A.rows()) throw DimensionError("plant: B must have as many rows as A");
  if (K.rows() != B.cols() || K.cols() != A.cols())
    throw DimensionError("plant: K must be m x n");
  for (const Matrix* mat : {&A, &B, &K})
    for (double v : mat->data())
      if (!std::isfinite(v)) throw std::invalid_argument("plant: matrix entries must be finite");
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("plant: alpha must lie in (0, 1)");
}

Matrix lambda_at(const Plant& p, double sigma) {
  if (!(sigma >= 0.0)) throw std::invalid_argument("lambda_at: sigma must be nonnegative");
  Matrix lam = int_expm(p.A, sigma) * p.closed_loop();
  for (std::size_t i = 0; i < lam.rows(); ++i) lam(i, i) += 1.0;
  return lam;
}

Matrix phi_at(const Plant& p, double sigma) {
  const Matrix lam = lambda_at(p, sigma);
  const Matrix err = Matrix::identity(p.n()) - lam;
  Matrix phi = err.transpose() * err - p.alpha * (lam.transpose() * lam);
  return phi.symmetrized();
}

TriggeringEvaluation evaluate_triggering(const Plant& p, double sigma) {
  TriggeringEvaluation ev;
  ev.sigma = sigma;
  ev.lambda = lambda_at(p, sigma);
  const Matrix err = Matrix::identity(p.n()) - ev.lambda;
  ev.phi = (err.transpose() * err - p.alpha * (ev.lambda.transpose() * ev.lambda)).symmetrized();
  return ev;
}

double inter_sample_time(const Plant& p, std::span<const double> x, double sigma_bar, double dt) {
  check_positive(sigma_bar, "inter_sample_time: sigma_bar");
  check_positive(dt, "inter_sample_time: dt");
  if (x.size() != p.n()) throw DimensionError("inter_sample_time: state dimension mismatch");
  if (norm2(x) == 0.0) throw std::invalid_argument("inter_sample_time: x must be nonzero");

  double prev = 0.0;
  for (std::size_t k = 1;; ++k) {
    const double s = std::min(sigma_bar, static_cast<double>(k) * dt);
    if (quad_form(phi_at(p, s), x) >= 0.0) return bisect_trigger(p, x, prev, s);
    if (s >= sigma_bar) break;
    prev = s;
  }
  throw HorizonExceededError("no triggering on (0, sigma_bar]; increase sigma_bar");
}

InterSampleTimer::InterSampleTimer(Plant plant, double sigma_bar, double dt)
    : plant_(std::move(plant)), sigma_bar_(sigma_bar), dt_(dt) {
  plant_.validate();
  check_positive(sigma_bar_, "InterSampleTimer: sigma_bar");
  check_positive(dt_, "InterSampleTimer: dt");
  for (std::size_t k = 1;; ++k) {
    const double s = std::min(sigma_bar_, static_cast<double>(k) * dt_);
    grid_.push_back(s);
    phi_grid_.push_back(phi_at(plant_, s));
    if (s >= sigma_bar_) break;
  }
}

double InterSampleTimer::operator()(std::span<const double> x) const {
  if (x.size() != plant_.n()) throw DimensionError("inter_sample_time: state dimension mismatch");
  if (norm2(x) == 0.0) throw std::invalid_argument("inter_sample_time: x must be nonzero");
  double prev = 0.0;
  for (std::size_t k = 0; k < grid_.size(); ++k) {
    if (quad_form(phi_grid_[k], x) >= 0.0) return bisect_trigger(plant_, x, prev, grid_[k]);
    prev = grid_[k];
  }
  throw HorizonExceededError("no triggering on (0, sigma_bar]; increase sigma_bar");
}

Trace simulate_traffic(const InterSampleTimer& timer, std::span<const double> x0, double horizon) {
  check_positive(horizon, "simulate_traffic: horizon");
  Trace trace;
  Vector x(x0.begin(), x0.end());
  double t = 0.0;
  while (t <= horizon) {
    if (norm2(x) < kOriginNorm) {
      trace.reached_origin = true;
      break;
    }
    const double tau = timer(x);
    trace.events.push_back({t, x, tau});
    x = lambda_at(timer.plant(), tau) * x;
    t += tau;
  }
  return trace;
}

Trace simulate_traffic(const Plant& p, std::span<const double> x0, double horizon, double sigma_bar,
                       double dt) {
  return simulate_traffic(InterSampleTimer(p, sigma_bar, dt), x0, horizon);
}

}  // namespace etcabs
