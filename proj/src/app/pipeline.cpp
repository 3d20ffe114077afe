#include <cmath>
#include <random>

#include "etcabs/app.hpp"
#include "etcabs/parallel.hpp"

namespace etcabs {

namespace {

constexpr double kOriginNorm = 1e-12;

// Like simulate_traffic, but keeps the events recorded before a missed trigger.
SimulatedTrace simulate_one(const InterSampleTimer& timer, std::size_t id, Vector x0, double horizon) {
  SimulatedTrace out;
  out.id = id;
  out.x0 = x0;
  Vector x = std::move(x0);
  double t = 0.0;
  while (t <= horizon) {
    if (norm2(x) < kOriginNorm) {
      out.trace.reached_origin = true;
      break;
    }
    double tau = 0.0;
    try {
      tau = timer(x);
    } catch (const HorizonExceededError&) {
      out.horizon_exceeded = true;
      break;
    }
    out.trace.events.push_back({t, x, tau});
    x = lambda_at(timer.plant(), tau) * x;
    t += tau;
  }
  return out;
}

}  // namespace

Partition partition_for(const RunConfig& cfg) { return isotropic_cover(cfg.plant.n(), cfg.abstraction.m_bar); }

AbstractionRun run_abstraction(const RunConfig& cfg, std::size_t threads) {
  const AbstractionConfig& a = cfg.abstraction;
  AbstractionRun run;
  run.partition = partition_for(cfg);

  BoundsOptions bo;
  bo.bisection_iterations = a.bisection_iterations;
  bo.sproc.eps_doubling_cap = a.eps_max_doubling_cap;
  bo.sproc.subgradient_iterations = a.subgradient_iterations;
  const BoundsCertifier cert(build_embedding(cfg.plant, a.sigma_bar, a.l, a.n_conv, a.nu_grid, a.nu_safety), bo);
  run.tables = cert.tables();
  run.tau_prime = cert.global_lower_bound();
  run.bounds = cert.certify_all(run.partition, threads);
  for (const auto& b : run.bounds)
    if (b.lower_saturated || b.upper_saturated) run.saturated_regions.push_back(b.region);

  run.pipes = all_flow_pipes(cfg.plant, run.partition, run.bounds, a.flowpipe_step, threads);
  TransitionSet ts = transitions(run.partition, run.pipes, threads);
  run.quotient = build_quotient(run.partition, run.bounds, std::move(ts), a.initial_regions);
  run.automaton = to_timed_automaton(run.quotient);
  if (!run.quotient.transitions.origin_regions.empty())
    run.automaton.warnings.push_back("a flow pipe contains the origin; its region has edges to every region");
  return run;
}

std::vector<SimulatedTrace> run_simulation(const RunConfig& cfg, std::size_t threads) {
  const SimulationConfig& s = cfg.simulation;
  const std::size_t n = cfg.plant.n();
  std::mt19937_64 rng(s.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<Vector> starts(s.trace_count);
  for (auto& x : starts) {
    do {
      x.assign(n, 0.0);
      for (double& v : x) v = gauss(rng);
    } while (norm2(x) < 1e-8);
    x = scaled(x, 1.0 / norm2(x));
  }

  const InterSampleTimer timer(cfg.plant, cfg.abstraction.sigma_bar, s.scan_dt);
  std::vector<SimulatedTrace> out(s.trace_count);
  parallel_for(s.trace_count, threads,
               [&](std::size_t k) { out[k] = simulate_one(timer, k, starts[k], s.horizon); });
  return out;
}

}  // namespace etcabs
