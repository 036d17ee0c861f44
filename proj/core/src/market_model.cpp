#include "til/market_model.hpp"

#include <cmath>
#include <vector>

#include "path_integral.hpp"
#include "til/errors.hpp"
#include "til/linalg.hpp"
#include "til/parallel.hpp"
#include "til/rng.hpp"

namespace til {

namespace {

constexpr double kConditionLimit = 1e12;

void check_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw config_error(std::string(what) + " must be a positive finite number");
  }
}

}  // namespace

SignalFunction linear_signal() {
  SignalFunction s;
  s.name = "linear";
  s.value = [](double x) { return x; };
  s.d1 = [](double) { return 1.0; };
  s.d2 = [](double) { return 0.0; };
  s.is_linear = true;
  return s;
}

SignalFunction tanh_signal() {
  SignalFunction s;
  s.name = "tanh";
  s.value = [](double x) { return std::tanh(x); };
  s.d1 = [](double x) {
    const double t = std::tanh(x);
    return 1.0 - t * t;
  };
  s.d2 = [](double x) {
    const double t = std::tanh(x);
    return -2.0 * t * (1.0 - t * t);
  };
  return s;
}

SignalFunction signal_by_name(const std::string& name) {
  if (name == "linear") return linear_signal();
  if (name == "tanh") return tanh_signal();
  throw config_error("unknown signal function '" + name + "' (expected linear|tanh)");
}

MarketModel MarketModel::ou(const OUParams& params, double gamma, double rho) {
  check_positive(params.lambda, "lambda");
  check_positive(params.eta, "eta");
  check_positive(params.sigma, "sigma");
  check_positive(gamma, "gamma");
  check_positive(rho, "rho");
  if (!params.nu.value || !params.nu.d1 || !params.nu.d2) {
    throw config_error("OU model requires nu with first two derivatives");
  }

  MarketModel m;
  m.n_ = 1;
  m.m_ = 1;
  m.q_ = 2;
  m.gamma_ = gamma;
  m.rho_ = rho;
  m.ou_ = params;
  m.constant_covariance_ = true;
  m.constant_coefficients_ = false;

  const double lambda = params.lambda, eta = params.eta, sigma = params.sigma;
  const ScalarFun nu = params.nu.value;
  m.drift_y_ = [nu, lambda](const Eigen::VectorXd& y) {
    Eigen::VectorXd out(2);
    out << nu(y[1]), -lambda * y[1];
    return out;
  };
  m.vol_y_ = [sigma, eta](const Eigen::VectorXd&) {
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(2, 2);
    out(0, 0) = sigma;
    out(1, 1) = eta;
    return out;
  };
  m.price_drift_ = [nu](const Eigen::VectorXd& y) {
    Eigen::VectorXd out(1);
    out << nu(y[1]);
    return out;
  };
  m.price_vol_ = [sigma](const Eigen::VectorXd&) {
    Eigen::MatrixXd out(1, 2);
    out << sigma, 0.0;
    return out;
  };
  return m;
}

MarketModel MarketModel::constant(const Eigen::VectorXd& mu, const Eigen::MatrixXd& sigma,
                                  double gamma, double rho) {
  check_positive(gamma, "gamma");
  check_positive(rho, "rho");
  const int n = static_cast<int>(mu.size());
  if (sigma.rows() != n || sigma.cols() != n) {
    throw config_error("Sigma must be n x n with n = len(mu)");
  }
  if (!linalg::is_spd(sigma, 1e-12)) {
    throw config_error("Sigma must be symmetric positive definite");
  }

  MarketModel m;
  m.n_ = n;
  m.m_ = 0;
  m.q_ = n;
  m.gamma_ = gamma;
  m.rho_ = rho;
  m.constant_covariance_ = true;
  m.constant_coefficients_ = true;

  const Eigen::MatrixXd vol = sigma.llt().matrixL();
  m.drift_y_ = [mu](const Eigen::VectorXd&) { return mu; };
  m.vol_y_ = [vol](const Eigen::VectorXd&) { return vol; };
  m.price_drift_ = [mu](const Eigen::VectorXd&) { return mu; };
  m.price_vol_ = [vol](const Eigen::VectorXd&) { return vol; };
  return m;
}

MarketModel MarketModel::custom(int n, int m_extra, int q, VectorMap drift_y,
                                MatrixMap vol_y, VectorMap price_drift,
                                MatrixMap price_vol, double gamma, double rho) {
  check_positive(gamma, "gamma");
  check_positive(rho, "rho");
  if (n <= 0 || m_extra < 0 || q <= 0) {
    throw config_error("custom model needs n > 0, m >= 0, q > 0");
  }
  MarketModel m;
  m.n_ = n;
  m.m_ = m_extra;
  m.q_ = q;
  m.gamma_ = gamma;
  m.rho_ = rho;
  m.drift_y_ = std::move(drift_y);
  m.vol_y_ = std::move(vol_y);
  m.price_drift_ = std::move(price_drift);
  m.price_vol_ = std::move(price_vol);
  return m;
}

Eigen::MatrixXd MarketModel::covariance(const Eigen::VectorXd& y) const {
  const Eigen::MatrixXd vol = price_vol_(y);
  Eigen::MatrixXd sigma = vol * vol.transpose();
  sigma = 0.5 * (sigma + sigma.transpose());
  const double cond = linalg::spd_condition(sigma);
  if (!(cond < kConditionLimit)) {
    throw numeric_error("covariance at queried state is singular (condition number " +
                        std::to_string(cond) + " exceeds 1e12)");
  }
  return sigma;
}

FrictionSpec::FrictionSpec(Eigen::MatrixXd lambda0_in, Eigen::MatrixXd c0_in, double r0_in,
                           double eps_in)
    : lambda0(std::move(lambda0_in)), c0(std::move(c0_in)), r0(r0_in), eps(eps_in) {
  check_positive(r0, "R");
  check_positive(eps, "eps");
  if (lambda0.rows() != lambda0.cols() || c0.rows() != c0.cols() ||
      lambda0.rows() != c0.rows()) {
    throw config_error("Lambda and C must be square matrices of equal size");
  }
  if (linalg::symmetry_gap(lambda0) > 1e-12 * std::max(1.0, lambda0.norm()) ||
      linalg::min_eigenvalue(lambda0) <= 0.0) {
    throw config_error("Lambda must be symmetric positive definite (tol 1e-12)");
  }
  if (linalg::symmetry_gap(c0) > 1e-12 * std::max(1.0, c0.norm()) ||
      linalg::min_eigenvalue(c0) <= 0.0) {
    throw config_error("C must be symmetric positive definite (tol 1e-12)");
  }
}

FrictionSpec FrictionSpec::with_eps(double new_eps) const {
  return FrictionSpec(lambda0, c0, r0, new_eps);
}

Eigen::VectorXd merton_portfolio(const MarketModel& model, const Eigen::VectorXd& y) {
  const Eigen::MatrixXd sigma = model.covariance(y);
  return sigma.llt().solve(model.price_drift(y)) / model.gamma();
}

Eigen::MatrixXd merton_jacobian(const MarketModel& model, const Eigen::VectorXd& y) {
  const int dim = model.state_dim();
  if (const auto& ou = model.ou_params()) {
    Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(1, 2);
    jac(0, 1) = ou->nu.d1(y[1]) / (model.gamma() * ou->sigma * ou->sigma);
    return jac;
  }
  const double h = 1e-5 * (1.0 + y.norm());
  Eigen::MatrixXd jac(model.n(), dim);
  Eigen::VectorXd yp = y, ym = y;
  for (int i = 0; i < dim; ++i) {
    yp[i] = y[i] + h;
    ym[i] = y[i] - h;
    jac.col(i) = (merton_portfolio(model, yp) - merton_portfolio(model, ym)) / (2.0 * h);
    yp[i] = y[i];
    ym[i] = y[i];
  }
  return jac;
}

Eigen::MatrixXd merton_qv(const MarketModel& model, const Eigen::VectorXd& y) {
  if (model.constant_coefficients()) {
    return Eigen::MatrixXd::Zero(model.n(), model.n());
  }
  const Eigen::MatrixXd jac = merton_jacobian(model, y);
  const Eigen::MatrixXd vol = model.vol_y(y);
  const Eigen::MatrixXd jv = jac * vol;
  Eigen::MatrixXd qv = jv * jv.transpose();
  return 0.5 * (qv + qv.transpose());
}

namespace {

double default_horizon(const MarketModel& model, double tail_tol) {
  double t = -std::log(std::min(tail_tol, 1e-6)) / model.rho();
  if (const auto& ou = model.ou_params()) t = std::max(t, 10.0 / ou->lambda);
  return t;
}

}  // namespace

namespace detail {

// Discounted integral E[int_0^T e^{-rho t} f(Y_t) dt] by trapezoidal
// quadrature over simulated factor paths. The OU factor coordinate advances
// by its exact transition; all other coordinates use Euler-Maruyama. Paths
// draw from streams keyed by (seed, path index) and are reduced in path
// order, so the estimate does not depend on the worker count.
Estimate discounted_path_integral(const MarketModel& model, const Eigen::VectorXd& y0,
                                  const McConfig& mc,
                                  const std::function<double(const Eigen::VectorXd&)>& f) {
  if (mc.paths < 2) throw config_error("Monte Carlo needs at least 2 paths");
  if (!(mc.dt > 0.0)) throw config_error("Monte Carlo dt must be positive");
  const double horizon =
      mc.horizon > 0.0 ? mc.horizon : default_horizon(model, mc.tail_tol);
  const long steps = std::max<long>(1, static_cast<long>(std::llround(horizon / mc.dt)));
  const double rho = model.rho();
  const int q = model.q();
  const auto& ou = model.ou_params();
  const double disc_step = std::exp(-rho * mc.dt);
  const double sqrt_dt = std::sqrt(mc.dt);
  double ou_decay = 0.0, ou_noise = 0.0;
  if (ou) {
    ou_decay = std::exp(-ou->lambda * mc.dt);
    ou_noise = ou->eta * std::sqrt((1.0 - ou_decay * ou_decay) / (2.0 * ou->lambda));
  }

  std::vector<double> integral(mc.paths);
  std::vector<double> terminal(mc.paths);

  parallel_for(0, mc.paths, [&](long p) {
    PhiloxStream rng(mc.seed, static_cast<std::uint64_t>(p));
    Eigen::VectorXd y = y0;
    Eigen::VectorXd z(q);
    double disc = 1.0;
    double acc = 0.0;
    double prev = f(y);
    for (long k = 0; k < steps; ++k) {
      for (int i = 0; i < q; ++i) z[i] = rng.normal();
      if (ou) {
        y[0] += ou->nu.value(y[1]) * mc.dt + ou->sigma * sqrt_dt * z[0];
        y[1] = ou_decay * y[1] + ou_noise * z[1];
      } else {
        y += model.drift_y(y) * mc.dt + model.vol_y(y) * (sqrt_dt * z);
      }
      const double cur = f(y);
      const double disc_next = disc * disc_step;
      acc += 0.5 * (disc * prev + disc_next * cur) * mc.dt;
      disc = disc_next;
      prev = cur;
    }
    integral[p] = acc;
    terminal[p] = prev;
  });

  double mean = 0.0;
  for (long p = 0; p < mc.paths; ++p) mean += integral[p];
  mean /= static_cast<double>(mc.paths);
  double var = 0.0;
  for (long p = 0; p < mc.paths; ++p) {
    const double d = integral[p] - mean;
    var += d * d;
  }
  var /= static_cast<double>(mc.paths - 1);

  double tail_mean = 0.0;
  for (long p = 0; p < mc.paths; ++p) tail_mean += terminal[p];
  tail_mean /= static_cast<double>(mc.paths);
  const double tail = std::exp(-rho * horizon) * std::abs(tail_mean) / rho;
  if (tail > mc.tail_tol * (1.0 + std::abs(mean))) {
    throw numeric_error("horizon too short: discounted tail bound " + std::to_string(tail) +
                        " exceeds tolerance");
  }

  return Estimate{mean, std::sqrt(var / static_cast<double>(mc.paths))};
}

}  // namespace detail

Estimate frictionless_value(const MarketModel& model, const Eigen::VectorXd& y,
                            const ValueEstimator& estimator) {
  if (std::holds_alternative<ClosedForm>(estimator)) {
    if (const auto& ou = model.ou_params(); ou && ou->nu.is_linear) {
      const double lambda = ou->lambda, eta = ou->eta, sigma = ou->sigma;
      const double rho = model.rho();
      const double y2 = y[1];
      const double moment = y2 * y2 / (rho + 2.0 * lambda) +
                            (eta * eta / (2.0 * lambda)) *
                                (1.0 / rho - 1.0 / (rho + 2.0 * lambda));
      return Estimate{moment / (2.0 * model.gamma() * sigma * sigma), 0.0};
    }
    if (model.constant_coefficients()) {
      const Eigen::VectorXd mu = model.price_drift(y);
      const Eigen::MatrixXd sigma = model.covariance(y);
      const double v =
          mu.dot(sigma.llt().solve(mu)) / (2.0 * model.gamma() * model.rho());
      return Estimate{v, 0.0};
    }
    throw config_error(
        "closed-form frictionless value requires the linear-signal OU model or "
        "constant coefficients");
  }
  const auto& mc = std::get<McConfig>(estimator);
  const double gamma = model.gamma();
  return detail::discounted_path_integral(
      model, y, mc, [&model, gamma](const Eigen::VectorXd& yy) {
        const Eigen::VectorXd mu = model.price_drift(yy);
        return mu.dot(model.covariance(yy).llt().solve(mu)) / (2.0 * gamma);
      });
}

}  // namespace til
