#include "til/simulator.hpp"

#include <cmath>
#include <optional>

#include "til/errors.hpp"
#include "til/parallel.hpp"
#include "til/rng.hpp"

namespace til {

namespace {

// horizon <= 0 selects max(-ln(1e-4)/rho, 10/lambda), covering both the
// discount and the factor mixing time.
double effective_horizon(const MarketModel& model, const SimConfig& cfg) {
  if (cfg.horizon > 0.0) return cfg.horizon;
  double t = -std::log(1e-4) / model.rho();
  if (const auto& ou = model.ou_params()) t = std::max(t, 10.0 / ou->lambda);
  return t;
}

long validated_steps(const MarketModel& model, const FrictionSpec& frictions,
                     const SimConfig& cfg, double horizon) {
  if (!(cfg.dt > 0.0)) throw config_error("simulation needs dt > 0");
  if (cfg.paths < 2) throw config_error("simulation needs at least 2 paths");
  if (!cfg.allow_short_horizon && !(std::exp(-model.rho() * horizon) < 1e-4)) {
    throw config_error("horizon too short: e^{-rho T} >= 1e-4 (override to proceed)");
  }
  if (cfg.stiffness_guard && cfg.dt * frictions.r_eff() > 0.25) {
    throw numeric_error("stiffness guard: dt * R_eff = " +
                        std::to_string(cfg.dt * frictions.r_eff()) +
                        " exceeds 1/4; refine dt or disable the guard");
  }
  return std::max<long>(1, static_cast<long>(std::llround(horizon / cfg.dt)));
}

void check_init(const MarketModel& model, const InitState& init) {
  if (init.d0.size() != model.n() || init.h0.size() != model.n() ||
      init.y0.size() != model.state_dim()) {
    throw config_error("initial state dimensions do not match the model");
  }
  if (!init.d0.allFinite() || !init.h0.allFinite() || !init.y0.allFinite()) {
    throw config_error("initial state has non-finite entries");
  }
}

struct PolicyAccum {
  double objective = 0.0;
  double decomp = 0.0;
  double disc_d2 = 0.0;
  double disc_hm2 = 0.0;
  double transversality = 0.0;
};

// Scalar kernel for the 1-asset OU benchmark; keeps the per-step cost at a
// handful of flops plus two normal draws.
class OUKernel {
 public:
  OUKernel(const MarketModel& model, const FrictionSpec& frictions,
           const std::vector<PolicyGains>& gains, const SimConfig& cfg, long steps)
      : nu_(model.ou_params()->nu.value),
        gamma_sigma2_(model.gamma() * model.ou_params()->sigma * model.ou_params()->sigma),
        sigma_(model.ou_params()->sigma),
        rho_(model.rho()),
        dt_(cfg.dt),
        sqrt_dt_(std::sqrt(cfg.dt)),
        steps_(steps),
        lam_eff_(frictions.lambda_eff()(0, 0)),
        c_eff_(frictions.c_eff()(0, 0)),
        r_eff_(frictions.r_eff()),
        d_decay_(std::exp(-frictions.r_eff() * cfg.dt)),
        d_gain_((1.0 - std::exp(-frictions.r_eff() * cfg.dt)) / frictions.r_eff() *
                frictions.c_eff()(0, 0)),
        disc_step_(std::exp(-model.rho() * cfg.dt)),
        ou_decay_(std::exp(-model.ou_params()->lambda * cfg.dt)),
        ou_noise_(model.ou_params()->eta *
                  std::sqrt((1.0 - std::exp(-2.0 * model.ou_params()->lambda * cfg.dt)) /
                            (2.0 * model.ou_params()->lambda))),
        w_decomp_d_(0.5 * (2.0 * frictions.r_eff() + model.rho()) /
                    frictions.c_eff()(0, 0)) {
    for (const auto& g : gains) {
      kd_.push_back(g.kd(0, 0));
      kh_.push_back(g.kh(0, 0));
    }
  }

  void run_path(const InitState& init, PhiloxStream& rng, std::vector<PolicyAccum>& acc,
                std::vector<TraceRow>* trace, long path_index) const {
    const std::size_t np = kd_.size();
    double y1 = init.y0[0];
    double y2 = init.y0[1];
    std::vector<double> dd(np, init.d0[0]);
    std::vector<double> hh(np, init.h0[0]);
    double disc = 1.0;
    double t = 0.0;
    for (long k = 0; k < steps_; ++k) {
      const double mu = nu_(y2);
      const double mert = mu / gamma_sigma2_;
      for (std::size_t i = 0; i < np; ++i) {
        const double dev = hh[i] - mert;
        const double rate = -(kd_[i] * dd[i] + kh_[i] * dev);
        const double wdt = disc * dt_;
        acc[i].objective += wdt * (hh[i] * (mu - r_eff_ * dd[i] + c_eff_ * rate) -
                                   0.5 * gamma_sigma2_ * hh[i] * hh[i] -
                                   0.5 * lam_eff_ * rate * rate);
        acc[i].decomp += wdt * (rho_ * hh[i] * dd[i] - w_decomp_d_ * dd[i] * dd[i] -
                                0.5 * (gamma_sigma2_ * dev * dev +
                                       lam_eff_ * rate * rate));
        acc[i].disc_d2 += wdt * dd[i] * dd[i];
        acc[i].disc_hm2 += wdt * dev * dev;
        if (trace && i == 0) {
          TraceRow row;
          row.path = path_index;
          row.t = t;
          row.y = Eigen::Vector2d(y1, y2);
          row.d = Eigen::VectorXd::Constant(1, dd[i]);
          row.h = Eigen::VectorXd::Constant(1, hh[i]);
          row.rate = Eigen::VectorXd::Constant(1, rate);
          trace->push_back(std::move(row));
        }
        dd[i] = d_decay_ * dd[i] + d_gain_ * rate;
        hh[i] += rate * dt_;
      }
      const double z1 = rng.normal();
      const double z2 = rng.normal();
      y1 += mu * dt_ + sigma_ * sqrt_dt_ * z1;
      y2 = ou_decay_ * y2 + ou_noise_ * z2;
      disc *= disc_step_;
      t += dt_;
    }
    for (std::size_t i = 0; i < np; ++i) {
      acc[i].transversality = disc * (hh[i] * hh[i] + dd[i] * dd[i]);
      if (!std::isfinite(acc[i].objective) || !std::isfinite(dd[i]) ||
          !std::isfinite(hh[i])) {
        throw numeric_error("non-finite state on path " + std::to_string(path_index));
      }
    }
  }

 private:
  ScalarFun nu_;
  double gamma_sigma2_, sigma_, rho_, dt_, sqrt_dt_;
  long steps_;
  double lam_eff_, c_eff_, r_eff_, d_decay_, d_gain_, disc_step_, ou_decay_, ou_noise_;
  double w_decomp_d_;
  std::vector<double> kd_, kh_;
};

// Generic Eigen kernel for arbitrary models (any n, state-dependent
// coefficients). Temporaries are preallocated per path.
class GenericKernel {
 public:
  GenericKernel(const MarketModel& model, const FrictionSpec& frictions,
                const std::vector<PolicyGains>& gains, const SimConfig& cfg, long steps)
      : model_(model),
        gains_(gains),
        n_(model.n()),
        q_(model.q()),
        steps_(steps),
        dt_(cfg.dt),
        sqrt_dt_(std::sqrt(cfg.dt)),
        rho_(model.rho()),
        gamma_(model.gamma()),
        lam_eff_(frictions.lambda_eff()),
        c_eff_(frictions.c_eff()),
        r_eff_(frictions.r_eff()),
        d_decay_(std::exp(-frictions.r_eff() * cfg.dt)),
        d_gain_((1.0 - std::exp(-frictions.r_eff() * cfg.dt)) / frictions.r_eff() *
                frictions.c_eff()),
        disc_step_(std::exp(-model.rho() * cfg.dt)),
        c_eff_inv_(frictions.c_eff().llt().solve(
            Eigen::MatrixXd::Identity(model.n(), model.n()))) {
    if (const auto& ou = model.ou_params()) {
      ou_decay_ = std::exp(-ou->lambda * cfg.dt);
      ou_noise_ = ou->eta *
                  std::sqrt((1.0 - std::exp(-2.0 * ou->lambda * cfg.dt)) / (2.0 * ou->lambda));
    }
    if (model.constant_covariance()) {
      const Eigen::VectorXd probe = Eigen::VectorXd::Zero(model.state_dim());
      sigma_const_ = model.covariance(probe);
      sigma_llt_.compute(sigma_const_);
    }
  }

  void run_path(const InitState& init, PhiloxStream& rng, std::vector<PolicyAccum>& acc,
                std::vector<TraceRow>* trace, long path_index) const {
    const std::size_t np = gains_.size();
    Eigen::VectorXd y = init.y0;
    std::vector<Eigen::VectorXd> dd(np, init.d0), hh(np, init.h0);
    Eigen::VectorXd z(q_), mu(n_), mert(n_), rate(n_), dev(n_);
    Eigen::MatrixXd sigma;
    double disc = 1.0;
    double t = 0.0;
    const double w_d_scalar = 0.5 * (2.0 * r_eff_ + rho_);
    for (long k = 0; k < steps_; ++k) {
      mu = model_.price_drift(y);
      if (model_.constant_covariance()) {
        sigma = sigma_const_;
        mert = sigma_llt_.solve(mu) / gamma_;
      } else {
        sigma = model_.covariance(y);
        mert = sigma.llt().solve(mu) / gamma_;
      }
      for (std::size_t i = 0; i < np; ++i) {
        dev = hh[i] - mert;
        rate.noalias() = -(gains_[i].kd * dd[i] + gains_[i].kh * dev);
        const double wdt = disc * dt_;
        const double quad_h = hh[i].dot(sigma * hh[i]);
        acc[i].objective +=
            wdt * (hh[i].dot(mu - r_eff_ * dd[i] + c_eff_ * rate) -
                   0.5 * gamma_ * quad_h - 0.5 * rate.dot(lam_eff_ * rate));
        acc[i].decomp +=
            wdt * (rho_ * hh[i].dot(dd[i]) -
                   w_d_scalar * dd[i].dot(c_eff_inv_ * dd[i]) -
                   0.5 * (gamma_ * dev.dot(sigma * dev) + rate.dot(lam_eff_ * rate)));
        acc[i].disc_d2 += wdt * dd[i].squaredNorm();
        acc[i].disc_hm2 += wdt * dev.squaredNorm();
        if (trace && i == 0) {
          trace->push_back(TraceRow{path_index, t, y, dd[i], hh[i], rate});
        }
        dd[i] = d_decay_ * dd[i] + d_gain_ * rate;
        hh[i] += rate * dt_;
      }
      for (int j = 0; j < q_; ++j) z[j] = rng.normal();
      if (const auto& ou = model_.ou_params()) {
        y[0] += ou->nu.value(y[1]) * dt_ + ou->sigma * sqrt_dt_ * z[0];
        y[1] = ou_decay_ * y[1] + ou_noise_ * z[1];
      } else {
        y += model_.drift_y(y) * dt_ + model_.vol_y(y) * (sqrt_dt_ * z);
      }
      disc *= disc_step_;
      t += dt_;
    }
    for (std::size_t i = 0; i < np; ++i) {
      acc[i].transversality = disc * (hh[i].squaredNorm() + dd[i].squaredNorm());
      if (!std::isfinite(acc[i].objective) || !dd[i].allFinite() || !hh[i].allFinite()) {
        throw numeric_error("non-finite state on path " + std::to_string(path_index));
      }
    }
  }

 private:
  const MarketModel& model_;
  const std::vector<PolicyGains>& gains_;
  int n_, q_;
  long steps_;
  double dt_, sqrt_dt_, rho_, gamma_;
  Eigen::MatrixXd lam_eff_, c_eff_;
  double r_eff_, d_decay_;
  Eigen::MatrixXd d_gain_;
  double disc_step_;
  Eigen::MatrixXd c_eff_inv_;
  double ou_decay_ = 0.0, ou_noise_ = 0.0;
  Eigen::MatrixXd sigma_const_;
  Eigen::LLT<Eigen::MatrixXd> sigma_llt_;
};

struct Moments {
  double mean = 0.0, se = 0.0;
};

Moments moments(const std::vector<double>& xs) {
  const long n = static_cast<long>(xs.size());
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (double x : xs) var += (x - mean) * (x - mean);
  var /= static_cast<double>(n - 1);
  return Moments{mean, std::sqrt(var / static_cast<double>(n))};
}

}  // namespace

PathState step(const PathState& state, const PolicySpec& policy, const MarketModel& model,
               const FrictionSpec& frictions, double dt, const Eigen::VectorXd& noise) {
  if (!(dt > 0.0)) throw config_error("step needs dt > 0");
  if (noise.size() != model.q()) throw config_error("noise must have q entries");
  if (!state.y.allFinite() || !state.d.allFinite() || !state.h.allFinite()) {
    throw numeric_error("non-finite state entering step at t = " + std::to_string(state.t));
  }

  const PolicyGains g = policy_gains(policy, frictions);
  const Eigen::VectorXd mert = merton_portfolio(model, state.y);
  const Eigen::VectorXd rate = -(g.kd * state.d + g.kh * (state.h - mert));

  PathState next;
  next.t = state.t + dt;

  const double r_eff = frictions.r_eff();
  const double decay = std::exp(-r_eff * dt);
  next.d = decay * state.d + (1.0 - decay) / r_eff * (frictions.c_eff() * rate);
  next.h = state.h + rate * dt;

  next.y = state.y;
  const double sqrt_dt = std::sqrt(dt);
  if (const auto& ou = model.ou_params()) {
    const double decay_y = std::exp(-ou->lambda * dt);
    const double vol_y =
        ou->eta * std::sqrt((1.0 - decay_y * decay_y) / (2.0 * ou->lambda));
    next.y[0] += ou->nu.value(state.y[1]) * dt + ou->sigma * noise[0];
    next.y[1] = decay_y * state.y[1] + vol_y * (noise[1] / sqrt_dt);
  } else {
    next.y += model.drift_y(state.y) * dt + model.vol_y(state.y) * noise;
  }

  if (!next.y.allFinite() || !next.d.allFinite() || !next.h.allFinite()) {
    throw numeric_error("non-finite state produced by step at t = " +
                        std::to_string(next.t));
  }
  return next;
}

BatchResult simulate_batch(const std::vector<const PolicySpec*>& policies,
                           const MarketModel& model, const FrictionSpec& frictions,
                           const InitState& init, const SimConfig& cfg,
                           const BatchOptions& options) {
  if (policies.empty()) throw config_error("simulate_batch needs at least one policy");
  check_init(model, init);
  const double horizon = effective_horizon(model, cfg);
  const long steps = validated_steps(model, frictions, cfg, horizon);
  const std::size_t np = policies.size();

  std::vector<PolicyGains> gains;
  gains.reserve(np);
  for (const PolicySpec* p : policies) gains.push_back(policy_gains(*p, frictions));

  const bool fast = model.ou_params().has_value() && model.n() == 1;
  std::optional<OUKernel> ou_kernel;
  std::optional<GenericKernel> generic_kernel;
  if (fast) {
    ou_kernel.emplace(model, frictions, gains, cfg, steps);
  } else {
    generic_kernel.emplace(model, frictions, gains, cfg, steps);
  }

  BatchResult result;
  result.actual_horizon = static_cast<double>(steps) * cfg.dt;
  result.objective_per_path.assign(np, std::vector<double>(cfg.paths));
  if (options.decomposition) {
    result.decomp_per_path.assign(np, std::vector<double>(cfg.paths));
  }
  std::vector<std::vector<double>> trans(np, std::vector<double>(cfg.paths));
  std::vector<std::vector<double>> d2(np, std::vector<double>(cfg.paths));
  std::vector<std::vector<double>> hm2(np, std::vector<double>(cfg.paths));

  const int trace_paths = std::min<long>(options.trace_paths, cfg.paths);
  std::vector<std::vector<TraceRow>> traces(std::max(trace_paths, 0));

  parallel_for(0, cfg.paths, [&](long p) {
    PhiloxStream rng(cfg.seed, static_cast<std::uint64_t>(p));
    std::vector<PolicyAccum> acc(np);
    std::vector<TraceRow>* trace = p < trace_paths ? &traces[p] : nullptr;
    if (fast) {
      ou_kernel->run_path(init, rng, acc, trace, p);
    } else {
      generic_kernel->run_path(init, rng, acc, trace, p);
    }
    for (std::size_t i = 0; i < np; ++i) {
      result.objective_per_path[i][p] = acc[i].objective;
      if (options.decomposition) result.decomp_per_path[i][p] = acc[i].decomp;
      trans[i][p] = acc[i].transversality;
      d2[i][p] = acc[i].disc_d2;
      hm2[i][p] = acc[i].disc_hm2;
    }
  });

  for (int p = 0; p < trace_paths; ++p) {
    for (auto& row : traces[p]) result.trace.push_back(std::move(row));
  }

  result.estimates.resize(np);
  for (std::size_t i = 0; i < np; ++i) {
    const Moments m = moments(result.objective_per_path[i]);
    ObjectiveEstimate est;
    est.value = m.mean;
    est.std_error = m.se;
    est.transversality = moments(trans[i]).mean;
    est.transversality_flagged = est.transversality > 1e-3 * std::abs(est.value);
    est.disc_d2 = moments(d2[i]).mean;
    est.disc_hm2 = moments(hm2[i]).mean;
    result.estimates[i] = est;
  }

  // Decomposition carries the state-independent boundary terms
  // -h0^T D0 + D0^T C_eff^{-1} D0 / 2.
  if (options.decomposition) {
    const Eigen::VectorXd c_inv_d = frictions.c_eff().llt().solve(init.d0);
    const double boundary = -init.h0.dot(init.d0) + 0.5 * init.d0.dot(c_inv_d);
    for (std::size_t i = 0; i < np; ++i) {
      for (long p = 0; p < cfg.paths; ++p) result.decomp_per_path[i][p] += boundary;
    }
  }
  return result;
}

ObjectiveEstimate evaluate_objective(const PolicySpec& policy, const MarketModel& model,
                                     const FrictionSpec& frictions, const InitState& init,
                                     const SimConfig& cfg) {
  const BatchResult batch = simulate_batch({&policy}, model, frictions, init, cfg);
  return batch.estimates[0];
}

DecompositionEstimate evaluate_via_decomposition(const PolicySpec& policy,
                                                 const MarketModel& model,
                                                 const FrictionSpec& frictions,
                                                 const InitState& init,
                                                 const SimConfig& cfg) {
  BatchOptions options;
  options.decomposition = true;
  const BatchResult batch = simulate_batch({&policy}, model, frictions, init, cfg, options);

  const double v0 = frictionless_value(model, init.y0, ClosedForm{}).value;
  const long paths = cfg.paths;
  std::vector<double> direct(paths), diff(paths);
  for (long p = 0; p < paths; ++p) {
    direct[p] = batch.objective_per_path[0][p] - v0;
    diff[p] = direct[p] - batch.decomp_per_path[0][p];
  }
  const Moments md = moments(direct);
  const Moments mdec = moments(batch.decomp_per_path[0]);
  const Moments mdiff = moments(diff);

  DecompositionEstimate out;
  out.value = mdec.mean;
  out.std_error = mdec.se;
  out.direct_value = md.mean;
  out.direct_std_error = md.se;
  out.paired_diff = mdiff.mean;
  out.paired_diff_std_error = mdiff.se;
  out.v0 = v0;
  return out;
}

}  // namespace til
