#pragma once

#include <Eigen/Dense>

#include "til/market_model.hpp"

namespace til {

// Data of the algebraic Riccati equation
//   -Psi - Gamma A - A Gamma + A Chat Lambda^{-1} Chat^T A = 0
// at the base (unscaled) friction level, with
//   Gamma = diag(-R I_n, 0), Psi(y) = diag(2 R C^{-1}, gamma Sigma(y)),
//   Chat = (C; I_n).
struct RiccatiProblem {
  Eigen::MatrixXd gamma_blk;  // 2n x 2n
  Eigen::MatrixXd psi;        // 2n x 2n
  Eigen::MatrixXd chat;       // 2n x n
  Eigen::MatrixXd lambda;     // n x n
  int n = 0;
};

RiccatiProblem build_problem(const MarketModel& model, const FrictionSpec& frictions,
                             const Eigen::VectorXd& y);

// Maximal (stabilizing) solution with its derived gains
//   Q_d = (C A_1 + A_12^T)^T,  Q_h = (C A_12 + A_2)^T,
// i.e. Chat^T A = [Q_d^T  Q_h^T].
struct RiccatiSolution {
  Eigen::MatrixXd a;    // 2n x 2n, symmetric positive definite
  Eigen::MatrixXd a1;   // n x n upper-left block
  Eigen::MatrixXd a12;  // n x n upper-right block
  Eigen::MatrixXd a2;   // n x n lower-right block
  Eigen::MatrixXd qd;   // n x n
  Eigen::MatrixXd qh;   // n x n
  double residual_norm = 0.0;
  Eigen::VectorXcd closed_loop_spectrum;  // eig(Gamma - Chat Lambda^{-1} Chat^T A)

  int n() const { return static_cast<int>(a1.rows()); }
};

// Ordered Schur of the 4n x 4n Hamiltonian selecting the stable invariant
// subspace, refined by Newton-Kleinman steps (one Lyapunov solve each) until
// the residual is at solver precision. Requires n <= 32.
RiccatiSolution solve_maximal(const RiccatiProblem& problem);

// Scalar closed forms: Q_h = sqrt(Lambda gamma Sigma), Q_d the positive root
// of Q_d^2/(2 R Lambda) + (Q_d / C)(sqrt(gamma Sigma / (R^2 Lambda)) + 1) = 1/C,
// and the explicit 2x2 block matrix built from them.
RiccatiSolution solve_1d_closed_form(double gamma, double sigma, double lambda, double c,
                                     double r);

// R -> infinity limits of the relative trading speeds:
//   distortion weight  Lambda^{-1},
//   tracking weight    Lambda^{-1/2}(Lambda^{-1/2} gamma Sigma Lambda^{-1/2})^{1/2} Lambda^{1/2}.
struct HighResilienceLimits {
  Eigen::MatrixXd rate_d;
  Eigen::MatrixXd rate_h;
};

HighResilienceLimits high_resilience_limits(double gamma, const Eigen::MatrixXd& sigma,
                                            const Eigen::MatrixXd& lambda,
                                            const Eigen::MatrixXd& c);

// Diagnostics for admissibility and well-posedness:
//  - lyapunov_gap_min_eig: smallest eigenvalue of A N + N^T A - Psi for the
//    closed-loop block matrix N = -Gamma + Chat Lambda^{-1} Chat^T A; the
//    Riccati equation makes this equal to lambda_min(A S A) >= 0.
//  - concavity condition (2 R + rho) gamma / rho^2 > ||Sigma^{-1/2} C Sigma^{-1/2}||
//    evaluated at the effective (eps-scaled) parameters.
//  - delta0 = lambda_min(A) / 2, the instance-specific lower-bound constant of
//    the quadratic form.
//  - models with state-independent A satisfy the generator-domination
//    assumption trivially; reported as such.
struct CertificateReport {
  double lyapunov_gap_min_eig = 0.0;
  bool concavity_ok = false;
  double concavity_lhs = 0.0;
  double concavity_rhs = 0.0;
  double delta0 = 0.0;
  bool constant_a = false;
  bool assumption_holds_trivially = false;
};

CertificateReport certify(const RiccatiSolution& solution, const RiccatiProblem& problem,
                          const MarketModel& model, const FrictionSpec& frictions,
                          double rho);

}  // namespace til
