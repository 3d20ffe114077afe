#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "etcabs/linalg.hpp"

namespace etcabs {

/// Closed-loop LTI plant with sample-and-hold state feedback u = K x(t_k) and
/// the relative triggering rule |e|² >= alpha |xi|².
struct Plant {
  Matrix A;  // n x n
  Matrix B;  // n x m
  Matrix K;  // m x n
  double alpha = 0.05;

  std::size_t n() const { return A.rows(); }
  std::size_t m() const { return B.cols(); }
  Matrix closed_loop() const { return A + B * K; }

  /// Throws DimensionError / std::invalid_argument on inconsistent data.
  void validate() const;
};

/// The triggering condition did not fire on (0, sigma_bar].
class HorizonExceededError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TriggeringEvaluation {
  double sigma = 0.0;
  Matrix lambda;
  Matrix phi;
};

/// Λ(σ) = I + (∫₀^σ e^{Ar} dr)(A + BK): the state σ after a sample is Λ(σ) x.
Matrix lambda_at(const Plant& p, double sigma);

/// Φ(σ) = (I - Λ)ᵀ(I - Λ) - α ΛᵀΛ, symmetrized. xᵀΦ(σ)x >= 0 means the
/// triggering rule fires at σ for the sample x.
Matrix phi_at(const Plant& p, double sigma);

TriggeringEvaluation evaluate_triggering(const Plant& p, double sigma);

/// First σ in (0, sigma_bar] with xᵀΦ(σ)x >= 0: forward scan with step dt,
/// then bisection of the bracketing step down to 1e-9.
double inter_sample_time(const Plant& p, std::span<const double> x, double sigma_bar, double dt);

/// Caches Φ on the scan grid so repeated τ(x) evaluations for one plant only
/// pay for quadratic forms and the final bisection.
class InterSampleTimer {
 public:
  InterSampleTimer(Plant plant, double sigma_bar, double dt);

  double operator()(std::span<const double> x) const;

  const Plant& plant() const { return plant_; }
  double sigma_bar() const { return sigma_bar_; }
  double dt() const { return dt_; }

 private:
  Plant plant_;
  double sigma_bar_;
  double dt_;
  std::vector<double> grid_;
  std::vector<Matrix> phi_grid_;
};

struct TraceEvent {
  double t = 0.0;   // sampling instant t_k
  Vector x;         // state at t_k
  double tau = 0.0; // inter-sample time τ(x_k)
};

struct Trace {
  std::vector<TraceEvent> events;
  bool reached_origin = false;  // stopped early at |x_k| < 1e-12
};

/// x_{k+1} = Λ(τ(x_k)) x_k from x0 until t_k exceeds the horizon.
Trace simulate_traffic(const Plant& p, std::span<const double> x0, double horizon, double sigma_bar,
                       double dt);
Trace simulate_traffic(const InterSampleTimer& timer, std::span<const double> x0, double horizon);

}  // namespace etcabs
