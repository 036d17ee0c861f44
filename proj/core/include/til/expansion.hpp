#pragma once

#include <Eigen/Dense>

#include "til/market_model.hpp"
#include "til/riccati.hpp"

namespace til {

// First-order value expansion at rescaled initial data (d, h, y):
//   vhat = v0 - eps (u + h^T d - d^T C^{-1} d / 2) - eps * (1/2) xi^T A xi,
// with xi = (d, h - M(y)); the quadratic form is evaluated through the
// identity eps^2 varpi(xi / sqrt(eps)) = eps * (1/2) xi^T A xi to avoid the
// sqrt(eps) cancellation.
struct ExpansionTerms {
  double v0 = 0.0;
  double u = 0.0;
  double u_std_error = 0.0;
  double initial_term = 0.0;  // h^T d - d^T C^{-1} d / 2
  double varpi = 0.0;         // (1/2) xi^T A(y) xi
  double vhat = 0.0;
};

// Second-corrector source a(y) = (1/2) Tr(c_M(y) A_2(y)).
double source_a(const MarketModel& model, const RiccatiSolution& riccati_at_y,
                const Eigen::VectorXd& y);

// Corrector u(y) = E[int_0^infty e^{-rho t} a(Y_t) dt]. The closed form
// requires the linear-signal OU model, where a is state independent and
//   u = A_2 eta^2 / (2 rho gamma^2 sigma^4).
Estimate corrector_u(const MarketModel& model, const FrictionSpec& frictions,
                     const Eigen::VectorXd& y, const ValueEstimator& estimator);

ExpansionTerms assemble_vhat(const MarketModel& model, const FrictionSpec& frictions,
                             const RiccatiSolution& riccati, const Estimate& u,
                             const Eigen::VectorXd& d_rescaled, const Eigen::VectorXd& h,
                             const Eigen::VectorXd& y,
                             const ValueEstimator& v0_estimator = ClosedForm{});

}  // namespace til
