#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <variant>

namespace til {

using VectorMap = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;
using MatrixMap = std::function<Eigen::MatrixXd(const Eigen::VectorXd&)>;
using ScalarFun = std::function<double(double)>;

// Signal-to-drift function nu with its first two derivatives.
struct SignalFunction {
  std::string name;
  ScalarFun value;
  ScalarFun d1;
  ScalarFun d2;
  bool is_linear = false;
};

SignalFunction linear_signal();
SignalFunction tanh_signal();
SignalFunction signal_by_name(const std::string& name);

// Ornstein-Uhlenbeck benchmark: dY2 = -lambda Y2 dt + eta dW2,
// dS = nu(Y2) dt + sigma dW1.
struct OUParams {
  double lambda;
  double eta;
  double sigma;
  SignalFunction nu;
};

// Markovian market: state Y in R^{n+m}, price drift/vol as functions of the
// state, local mean-variance preferences (gamma, rho). Immutable after
// construction; safe to share across workers.
class MarketModel {
 public:
  static MarketModel ou(const OUParams& params, double gamma, double rho);
  static MarketModel constant(const Eigen::VectorXd& mu, const Eigen::MatrixXd& sigma,
                              double gamma, double rho);
  static MarketModel custom(int n, int m, int q, VectorMap drift_y, MatrixMap vol_y,
                            VectorMap price_drift, MatrixMap price_vol, double gamma,
                            double rho);

  int n() const { return n_; }
  int m() const { return m_; }
  int q() const { return q_; }
  int state_dim() const { return n_ + m_; }
  double gamma() const { return gamma_; }
  double rho() const { return rho_; }

  Eigen::VectorXd drift_y(const Eigen::VectorXd& y) const { return drift_y_(y); }
  Eigen::MatrixXd vol_y(const Eigen::VectorXd& y) const { return vol_y_(y); }
  Eigen::VectorXd price_drift(const Eigen::VectorXd& y) const { return price_drift_(y); }
  Eigen::MatrixXd price_vol(const Eigen::VectorXd& y) const { return price_vol_(y); }

  // Sigma(y) = sigma sigma^T, rejected when the 2-norm condition number
  // exceeds 1e12.
  Eigen::MatrixXd covariance(const Eigen::VectorXd& y) const;

  const std::optional<OUParams>& ou_params() const { return ou_; }
  // mu and Sigma do not depend on y (constant kind, or OU through Sigma only).
  bool constant_covariance() const { return constant_covariance_; }
  bool constant_coefficients() const { return constant_coefficients_; }

 private:
  MarketModel() = default;

  int n_ = 0, m_ = 0, q_ = 0;
  double gamma_ = 1.0, rho_ = 1.0;
  VectorMap drift_y_, price_drift_;
  MatrixMap vol_y_, price_vol_;
  std::optional<OUParams> ou_;
  bool constant_covariance_ = false;
  bool constant_coefficients_ = false;
};

// Base impact matrices with the critical-regime rescaling
// Lambda_eff = eps^2 Lambda0, C_eff = eps C0, R_eff = R0 / eps.
struct FrictionSpec {
  Eigen::MatrixXd lambda0;
  Eigen::MatrixXd c0;
  double r0 = 1.0;
  double eps = 1.0;

  FrictionSpec(Eigen::MatrixXd lambda0_in, Eigen::MatrixXd c0_in, double r0_in,
               double eps_in);

  int n() const { return static_cast<int>(lambda0.rows()); }
  Eigen::MatrixXd lambda_eff() const { return eps * eps * lambda0; }
  Eigen::MatrixXd c_eff() const { return eps * c0; }
  double r_eff() const { return r0 / eps; }
  FrictionSpec with_eps(double new_eps) const;
};

// Myopic Merton portfolio Sigma(y)^{-1} mu(y) / gamma.
Eigen::VectorXd merton_portfolio(const MarketModel& model, const Eigen::VectorXd& y);

// Jacobian dM/dy, n x (n+m); analytic for the OU model, central finite
// differences with step 1e-5 (1 + |y|) otherwise.
Eigen::MatrixXd merton_jacobian(const MarketModel& model, const Eigen::VectorXd& y);

// Infinitesimal quadratic variation of the Merton portfolio,
// c_M(y) = (dM/dy) sigma_Y sigma_Y^T (dM/dy)^T.
Eigen::MatrixXd merton_qv(const MarketModel& model, const Eigen::VectorXd& y);

struct Estimate {
  double value = 0.0;
  double std_error = 0.0;
};

// Monte Carlo settings for discounted infinite-horizon integrals. The
// integral is truncated at `horizon`; the analytic tail bound
// e^{-rho T} E[integrand_T] / rho is checked against tail_tol.
struct McConfig {
  long paths = 10000;
  double horizon = 0.0;  // <= 0: pick max(-ln(1e-6)/rho, 10/lambda)
  double dt = 0.01;
  std::uint64_t seed = 1;
  double tail_tol = 1e-6;
};

struct ClosedForm {};
using ValueEstimator = std::variant<ClosedForm, McConfig>;

// Frictionless value V0(y). The closed form requires the linear-signal OU
// model (or constant coefficients); Monte Carlo integrates
// mu^T Sigma^{-1} mu / (2 gamma) along simulated factor paths.
Estimate frictionless_value(const MarketModel& model, const Eigen::VectorXd& y,
                            const ValueEstimator& estimator);

}  // namespace til
