#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "til/market_model.hpp"
#include "til/policy.hpp"

namespace til {

// Discretization grid for the coupled (Y, D, H) simulation. The guard
// dt * R_eff <= 1/4 keeps the stiff distortion mean reversion resolved; the
// horizon must satisfy e^{-rho T} < 1e-4 unless explicitly overridden.
struct SimConfig {
  double dt = 0.01;
  double horizon = 10.0;
  long paths = 10000;
  std::uint64_t seed = 1;
  bool stiffness_guard = true;
  bool allow_short_horizon = false;
};

struct InitState {
  Eigen::VectorXd d0;  // physical distortion
  Eigen::VectorXd h0;
  Eigen::VectorXd y0;
};

struct PathState {
  double t = 0.0;
  Eigen::VectorXd y;
  Eigen::VectorXd d;  // physical distortion
  Eigen::VectorXd h;
};

// One step with noise ~ N(0, dt I) supplied by the harness. Y advances by
// Euler-Maruyama (exact transition for the OU factor coordinate); the rate is
// frozen over the step; D uses the exact exponential update
//   D <- e^{-R_eff dt} D + (1 - e^{-R_eff dt}) / R_eff * C_eff * rate.
PathState step(const PathState& state, const PolicySpec& policy, const MarketModel& model,
               const FrictionSpec& frictions, double dt, const Eigen::VectorXd& noise);

struct ObjectiveEstimate {
  double value = 0.0;
  double std_error = 0.0;
  // mean of e^{-rho T} (|H_T|^2 + |D_T|^2); flagged when above 1e-3 |J|
  double transversality = 0.0;
  bool transversality_flagged = false;
  // mean discounted state integrals, the measurable shadows of the
  // state-convergence hypothesis
  double disc_d2 = 0.0;
  double disc_hm2 = 0.0;
};

struct TraceRow {
  long path = 0;
  double t = 0.0;
  Eigen::VectorXd y, d, h, rate;
};

struct BatchOptions {
  bool decomposition = false;
  int trace_paths = 0;
};

// Common-random-number evaluation of several policies on shared factor noise.
// Per-path values are retained so callers can form paired statistics; the
// reduction runs in path order and is independent of the worker count.
struct BatchResult {
  std::vector<ObjectiveEstimate> estimates;              // one per policy
  std::vector<std::vector<double>> objective_per_path;   // [policy][path]
  std::vector<std::vector<double>> decomp_per_path;      // [policy][path], optional
  std::vector<TraceRow> trace;                           // first policy only
  double actual_horizon = 0.0;
};

BatchResult simulate_batch(const std::vector<const PolicySpec*>& policies,
                           const MarketModel& model, const FrictionSpec& frictions,
                           const InitState& init, const SimConfig& cfg,
                           const BatchOptions& options = {});

// Monte Carlo estimate of the frictional objective J^eps.
ObjectiveEstimate evaluate_objective(const PolicySpec& policy, const MarketModel& model,
                                     const FrictionSpec& frictions, const InitState& init,
                                     const SimConfig& cfg);

// Exact-decomposition estimate of J - V0 (Lemma-style identity at the
// effective parameter level), evaluated on the same noise streams as the
// direct estimate for a paired comparison.
struct DecompositionEstimate {
  double value = 0.0;  // decomposition estimate of J - V0
  double std_error = 0.0;
  double direct_value = 0.0;  // direct estimate of J - V0, same noise
  double direct_std_error = 0.0;
  double paired_diff = 0.0;  // mean of per-path (direct - decomposition)
  double paired_diff_std_error = 0.0;
  double v0 = 0.0;
};

DecompositionEstimate evaluate_via_decomposition(const PolicySpec& policy,
                                                 const MarketModel& model,
                                                 const FrictionSpec& frictions,
                                                 const InitState& init,
                                                 const SimConfig& cfg);

}  // namespace til
