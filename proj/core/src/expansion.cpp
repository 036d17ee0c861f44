#include "til/expansion.hpp"

#include <cmath>

#include "path_integral.hpp"
#include "til/errors.hpp"

namespace til {

double source_a(const MarketModel& model, const RiccatiSolution& riccati_at_y,
                const Eigen::VectorXd& y) {
  const Eigen::MatrixXd qv = merton_qv(model, y);
  const double a = 0.5 * (qv * riccati_at_y.a2).trace();
  if (a < -1e-12) {
    throw numeric_error("source a(y) came out negative: " + std::to_string(a));
  }
  return std::max(a, 0.0);
}

Estimate corrector_u(const MarketModel& model, const FrictionSpec& frictions,
                     const Eigen::VectorXd& y, const ValueEstimator& estimator) {
  if (std::holds_alternative<ClosedForm>(estimator)) {
    const auto& ou = model.ou_params();
    if (!ou || !ou->nu.is_linear) {
      throw config_error("closed-form corrector requires the linear-signal OU model");
    }
    const RiccatiSolution sol = solve_maximal(build_problem(model, frictions, y));
    // a = (1/2) c_M A_2 with c_M = (nu' / (gamma sigma^2))^2 eta^2 and nu' = 1,
    // so u = a / rho = A_2 eta^2 / (2 rho gamma^2 sigma^4).
    const double gs2 = model.gamma() * ou->sigma * ou->sigma;
    const double u = sol.a2(0, 0) * ou->eta * ou->eta / (2.0 * model.rho() * gs2 * gs2);
    return Estimate{u, 0.0};
  }

  const auto& mc = std::get<McConfig>(estimator);
  if (model.constant_covariance()) {
    // A(y) constant: solve once and integrate a(Y_t) along factor paths.
    const RiccatiSolution sol = solve_maximal(build_problem(model, frictions, y));
    return detail::discounted_path_integral(
        model, y, mc,
        [&](const Eigen::VectorXd& yy) { return source_a(model, sol, yy); });
  }
  return detail::discounted_path_integral(model, y, mc, [&](const Eigen::VectorXd& yy) {
    const RiccatiSolution sol = solve_maximal(build_problem(model, frictions, yy));
    return source_a(model, sol, yy);
  });
}

ExpansionTerms assemble_vhat(const MarketModel& model, const FrictionSpec& frictions,
                             const RiccatiSolution& riccati, const Estimate& u,
                             const Eigen::VectorXd& d_rescaled, const Eigen::VectorXd& h,
                             const Eigen::VectorXd& y, const ValueEstimator& v0_estimator) {
  const int n = model.n();
  if (d_rescaled.size() != n || h.size() != n) {
    throw config_error("d and h must have length n");
  }
  if (u.value < -1e-12) {
    throw numeric_error("corrector u must be nonnegative");
  }

  ExpansionTerms terms;
  terms.v0 = frictionless_value(model, y, v0_estimator).value;
  terms.u = u.value;
  terms.u_std_error = u.std_error;

  const Eigen::VectorXd c_inv_d = frictions.c0.llt().solve(d_rescaled);
  terms.initial_term = h.dot(d_rescaled) - 0.5 * d_rescaled.dot(c_inv_d);

  const Eigen::VectorXd m = merton_portfolio(model, y);
  Eigen::VectorXd xi(2 * n);
  xi.head(n) = d_rescaled;
  xi.tail(n) = h - m;
  terms.varpi = 0.5 * xi.dot(riccati.a * xi);
  if (terms.varpi < -1e-12) {
    throw numeric_error("quadratic form varpi must be nonnegative");
  }

  const double eps = frictions.eps;
  terms.vhat = terms.v0 - eps * (terms.u + terms.initial_term) - eps * terms.varpi;
  return terms;
}

}  // namespace til
