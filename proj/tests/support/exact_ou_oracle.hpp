#pragma once

// Test-only oracle: exact J^eps - V0 for the one-asset linear-signal OU model
// under an affine feedback rate
//   Hdot = -(beta_d * d + beta_e * (h - M)) / eps,   d = D/eps (rescaled units).
//
// The controlled state Z = (d, h - M, M) is linear-Gaussian, so the
// discounted second-moment integral S = int_0^inf e^{-rho t} E[Z Z^T] dt
// solves a 3x3 Lyapunov equation and the objective gap is an exact quadratic
// functional of S. Continuous time, infinite horizon; independent of the
// Monte Carlo implementation path.

#include <Eigen/Dense>
#include <cmath>

namespace til_test {

struct OuInstance {
  double gamma = 1.0;
  double sigma = 1.0;
  double eta = 1.0;
  double lambda = 1.0;
  double rho = 1.0;
  double lam_cost = 1.0;  // base temporary impact Lambda
  double c_cost = 1.0;    // base transient impact C
  double resilience = 1.0;
  double m0 = 1.0;  // Merton value at the initial state
};

// J - V0 for initial state D0 = eps * d0_rescaled, h0 = M + e0.
inline double exact_gap_j_minus_v0(const OuInstance& in, double eps, double beta_d,
                                   double beta_e, double d0_rescaled = 0.0,
                                   double e0 = 0.0) {
  using Eigen::Matrix3d;
  using Eigen::Vector3d;

  Matrix3d f = Matrix3d::Zero();
  f(0, 0) = -(in.resilience + in.c_cost * beta_d) / eps;
  f(0, 1) = -in.c_cost * beta_e / eps;
  f(1, 0) = -beta_d / eps;
  f(1, 1) = -beta_e / eps;
  f(1, 2) = in.lambda;
  f(2, 2) = -in.lambda;

  const double gs2 = in.gamma * in.sigma * in.sigma;
  const Vector3d g(0.0, -in.eta / gs2, in.eta / gs2);
  const Matrix3d q = g * g.transpose();
  const Vector3d z0(d0_rescaled, e0, in.m0);
  const Matrix3d p0 = z0 * z0.transpose();

  // (F - rho/2 I) S + S (F - rho/2 I)^T = -(P0 + Q/rho)
  const Matrix3d a = f - 0.5 * in.rho * Matrix3d::Identity();
  const Matrix3d w = p0 + q / in.rho;
  Eigen::Matrix<double, 9, 9> k = Eigen::Matrix<double, 9, 9>::Zero();
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      for (int l = 0; l < 3; ++l) {
        k(3 * i + j, 3 * l + j) += a(i, l);
        k(3 * i + j, 3 * i + l) += a(j, l);
      }
    }
  }
  Eigen::Matrix<double, 9, 1> rhs;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) rhs(3 * i + j) = -w(i, j);
  const Eigen::Matrix<double, 9, 1> sv = k.fullPivLu().solve(rhs);
  Matrix3d s;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) s(i, j) = sv(3 * i + j);

  const double r_eff = in.resilience / eps;
  const double c_eff = eps * in.c_cost;
  const double l_eff = eps * eps * in.lam_cost;

  // Decomposition weights on Z = (d, e, M): the running terms are
  //   rho (M + e)(eps d) - (2 R_eff + rho)/(2 C_eff) (eps d)^2
  //   - (1/2)[gamma Sigma e^2 + Lambda_eff Hdot^2].
  Matrix3d wq = Matrix3d::Zero();
  wq(2, 0) += 0.5 * in.rho * eps;
  wq(0, 2) += 0.5 * in.rho * eps;
  wq(1, 0) += 0.5 * in.rho * eps;
  wq(0, 1) += 0.5 * in.rho * eps;
  wq(0, 0) += -(2.0 * r_eff + in.rho) / (2.0 * c_eff) * eps * eps;
  wq(1, 1) += -0.5 * gs2;
  const Vector3d b(beta_d / eps, beta_e / eps, 0.0);
  wq += -0.5 * l_eff * (b * b.transpose());

  const double running = (wq.cwiseProduct(s)).sum();
  const double h0 = in.m0 + e0;
  const double d0_phys = eps * d0_rescaled;
  const double boundary = -h0 * d0_phys + d0_phys * d0_phys / (2.0 * c_eff);
  return boundary + running;
}

}  // namespace til_test
