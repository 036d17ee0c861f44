#include "til/riccati.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

#include "til/errors.hpp"
#include "til/linalg.hpp"

namespace til {

namespace {

Eigen::MatrixXd riccati_residual(const Eigen::MatrixXd& a, const RiccatiProblem& p,
                                 const Eigen::MatrixXd& s) {
  return -p.psi - p.gamma_blk * a - a * p.gamma_blk + a * s * a;
}

RiccatiSolution finalize(Eigen::MatrixXd a, const RiccatiProblem& p,
                         const Eigen::MatrixXd& s) {
  const int n = p.n;
  a = 0.5 * (a + a.transpose());

  RiccatiSolution sol;
  sol.a = a;
  sol.a1 = a.topLeftCorner(n, n);
  sol.a12 = a.topRightCorner(n, n);
  sol.a2 = a.bottomRightCorner(n, n);
  // Chat^T A = [Q_d^T  Q_h^T]
  const Eigen::MatrixXd gains = p.chat.transpose() * a;
  sol.qd = gains.leftCols(n).transpose();
  sol.qh = gains.rightCols(n).transpose();
  sol.residual_norm = riccati_residual(a, p, s).norm();
  const Eigen::MatrixXd closed_loop = p.gamma_blk - s * a;
  sol.closed_loop_spectrum = closed_loop.eigenvalues();
  return sol;
}

void validate_solution(const RiccatiSolution& sol) {
  const double scale = 1.0 + sol.a.squaredNorm();
  if (!(sol.residual_norm <= 1e-10 * scale)) {
    throw numeric_error("Riccati residual " + std::to_string(sol.residual_norm) +
                        " above tolerance 1e-10 * (1 + |A|^2)");
  }
  if (linalg::symmetry_gap(sol.a) > 1e-10 * std::max(1.0, sol.a.norm())) {
    throw numeric_error("Riccati solution is not symmetric to 1e-10");
  }
  if (linalg::min_eigenvalue(sol.a) <= 0.0) {
    throw numeric_error("Riccati solution is not positive definite");
  }
  for (int i = 0; i < sol.closed_loop_spectrum.size(); ++i) {
    if (sol.closed_loop_spectrum[i].real() > 1e-8) {
      throw numeric_error("closed-loop eigenvalue with positive real part " +
                          std::to_string(sol.closed_loop_spectrum[i].real()) +
                          "; maximal solution not certified");
    }
  }
}

}  // namespace

RiccatiProblem build_problem(const MarketModel& model, const FrictionSpec& frictions,
                             const Eigen::VectorXd& y) {
  const int n = model.n();
  if (frictions.n() != n) {
    throw config_error("friction matrices are " + std::to_string(frictions.n()) +
                       "x" + std::to_string(frictions.n()) + " but the model has n = " +
                       std::to_string(n));
  }
  const Eigen::MatrixXd sigma = model.covariance(y);

  RiccatiProblem p;
  p.n = n;
  p.gamma_blk = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  p.gamma_blk.topLeftCorner(n, n) = -frictions.r0 * Eigen::MatrixXd::Identity(n, n);
  p.psi = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  p.psi.topLeftCorner(n, n) = 2.0 * frictions.r0 * frictions.c0.llt().solve(
                                                       Eigen::MatrixXd::Identity(n, n));
  p.psi.topLeftCorner(n, n) =
      0.5 * (p.psi.topLeftCorner(n, n) + p.psi.topLeftCorner(n, n).transpose()).eval();
  p.psi.bottomRightCorner(n, n) = model.gamma() * sigma;
  p.chat.resize(2 * n, n);
  p.chat.topRows(n) = frictions.c0;
  p.chat.bottomRows(n) = Eigen::MatrixXd::Identity(n, n);
  p.lambda = frictions.lambda0;

  if (!linalg::is_spd(p.psi, 1e-12)) {
    throw numeric_error("Psi(y) is not symmetric positive definite");
  }
  return p;
}

RiccatiSolution solve_maximal(const RiccatiProblem& p) {
  const int n = p.n;
  if (n < 1 || n > 32) {
    throw config_error("dense Riccati solver supports 1 <= n <= 32");
  }
  if (!linalg::is_spd(p.psi, 1e-10) || !linalg::is_spd(p.lambda, 1e-10)) {
    throw numeric_error("Riccati problem matrices fail the SPD invariants");
  }

  const Eigen::MatrixXd lam_inv_chat_t =
      p.lambda.llt().solve(p.chat.transpose());           // Lambda^{-1} Chat^T
  Eigen::MatrixXd s = p.chat * lam_inv_chat_t;            // Chat Lambda^{-1} Chat^T
  s = 0.5 * (s + s.transpose());

  const int nn = 2 * n;
  Eigen::MatrixXd ham(2 * nn, 2 * nn);
  ham.topLeftCorner(nn, nn) = p.gamma_blk;
  ham.topRightCorner(nn, nn) = -s;
  ham.bottomLeftCorner(nn, nn) = -p.psi;
  ham.bottomRightCorner(nn, nn) = -p.gamma_blk;

  const auto schur = linalg::ordered_schur(
      ham, [](std::complex<double> ev) { return ev.real() < 0.0; });
  if (schur.n_selected != nn) {
    throw numeric_error("no " + std::to_string(nn) +
                        "-dimensional stable invariant subspace found (got " +
                        std::to_string(schur.n_selected) + ")");
  }
  const Eigen::MatrixXcd u11 = schur.u.topLeftCorner(nn, nn);
  const Eigen::MatrixXcd u21 = schur.u.bottomLeftCorner(nn, nn);
  Eigen::PartialPivLU<Eigen::MatrixXcd> lu(u11.transpose());
  Eigen::MatrixXd a = lu.solve(u21.transpose()).transpose().real();
  a = 0.5 * (a + a.transpose());

  // Newton-Kleinman polish: each step solves
  //   Acl^T X + X Acl = -(Psi + K^T Lambda K),  Acl = Gamma - Chat K,
  // which converges monotonically from a stabilizing iterate.
  double best_norm = riccati_residual(a, p, s).norm();
  Eigen::MatrixXd best = a;
  for (int iter = 0; iter < 8; ++iter) {
    if (best_norm <= 1e-14 * (1.0 + best.squaredNorm())) break;
    const Eigen::MatrixXd k = lam_inv_chat_t * a;               // Lambda^{-1} Chat^T A
    const Eigen::MatrixXd acl = p.gamma_blk - p.chat * k;
    const Eigen::MatrixXd w = p.psi + k.transpose() * p.lambda * k;
    a = linalg::solve_lyapunov(acl, w);
    const double norm = riccati_residual(a, p, s).norm();
    if (norm < best_norm) {
      best_norm = norm;
      best = a;
    } else {
      break;
    }
  }

  RiccatiSolution sol = finalize(best, p, s);
  validate_solution(sol);
  return sol;
}

RiccatiSolution solve_1d_closed_form(double gamma, double sigma, double lambda, double c,
                                     double r) {
  for (double v : {gamma, sigma, lambda, c, r}) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw config_error("closed form requires strictly positive inputs");
    }
  }
  const double qh = std::sqrt(lambda * gamma * sigma);
  const double qd =
      (std::sqrt(lambda * (gamma * sigma + r * (2.0 * c + r * lambda +
                                                2.0 * std::sqrt(gamma * lambda * sigma)))) -
       r * lambda - std::sqrt(gamma * sigma * lambda)) /
      c;
  const double root = std::sqrt(gamma * sigma / lambda);

  RiccatiProblem p;
  p.n = 1;
  p.gamma_blk = Eigen::MatrixXd::Zero(2, 2);
  p.gamma_blk(0, 0) = -r;
  p.psi = Eigen::MatrixXd::Zero(2, 2);
  p.psi(0, 0) = 2.0 * r / c;
  p.psi(1, 1) = gamma * sigma;
  p.chat.resize(2, 1);
  p.chat << c, 1.0;
  p.lambda = Eigen::MatrixXd::Constant(1, 1, lambda);

  Eigen::MatrixXd a(2, 2);
  a(0, 0) = qd / (r * c) * (root + r);
  a(0, 1) = -qd / r * root;
  a(1, 0) = a(0, 1);
  a(1, 1) = qh * (1.0 + c * qd / (r * lambda));

  const Eigen::MatrixXd s = p.chat * p.lambda.llt().solve(p.chat.transpose());
  return finalize(a, p, s);
}

HighResilienceLimits high_resilience_limits(double gamma, const Eigen::MatrixXd& sigma,
                                            const Eigen::MatrixXd& lambda,
                                            const Eigen::MatrixXd& c) {
  if (!(gamma > 0.0) || !linalg::is_spd(sigma, 1e-10) || !linalg::is_spd(lambda, 1e-10) ||
      !linalg::is_spd(c, 1e-10)) {
    throw config_error("high-resilience limits require SPD inputs and gamma > 0");
  }
  const int n = static_cast<int>(lambda.rows());
  const Eigen::MatrixXd lam_inv = lambda.llt().solve(Eigen::MatrixXd::Identity(n, n));
  const Eigen::MatrixXd lam_sqrt = linalg::spd_sqrt(lambda);
  const Eigen::MatrixXd lam_inv_sqrt = linalg::spd_sqrt(lam_inv);
  const Eigen::MatrixXd inner =
      linalg::spd_sqrt(lam_inv_sqrt * (gamma * sigma) * lam_inv_sqrt);
  HighResilienceLimits out;
  out.rate_d = 0.5 * (lam_inv + lam_inv.transpose());
  out.rate_h = lam_inv_sqrt * inner * lam_sqrt;
  return out;
}

CertificateReport certify(const RiccatiSolution& solution, const RiccatiProblem& problem,
                          const MarketModel& model, const FrictionSpec& frictions,
                          double rho) {
  const int n = problem.n;
  CertificateReport rep;

  const Eigen::MatrixXd lam_inv_chat_t = problem.lambda.llt().solve(problem.chat.transpose());
  const Eigen::MatrixXd big_n = -problem.gamma_blk + problem.chat * lam_inv_chat_t * solution.a;
  const Eigen::MatrixXd gap =
      solution.a * big_n + big_n.transpose() * solution.a - problem.psi;
  rep.lyapunov_gap_min_eig = linalg::min_eigenvalue(gap);

  const Eigen::MatrixXd sigma = problem.psi.bottomRightCorner(n, n) / model.gamma();
  const Eigen::MatrixXd sigma_inv_sqrt =
      linalg::spd_sqrt(sigma.llt().solve(Eigen::MatrixXd::Identity(n, n)));
  const Eigen::MatrixXd scaled = sigma_inv_sqrt * frictions.c_eff() * sigma_inv_sqrt;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (scaled + scaled.transpose()),
                                                    Eigen::EigenvaluesOnly);
  rep.concavity_lhs = (2.0 * frictions.r_eff() + rho) * model.gamma() / (rho * rho);
  rep.concavity_rhs = es.eigenvalues().cwiseAbs().maxCoeff();
  rep.concavity_ok = rep.concavity_lhs > rep.concavity_rhs;

  rep.delta0 = 0.5 * linalg::min_eigenvalue(solution.a);

  rep.constant_a = model.constant_covariance();
  rep.assumption_holds_trivially = rep.constant_a;
  return rep;
}

}  // namespace til
