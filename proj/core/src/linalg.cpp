#include "til/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

#include "til/errors.hpp"

namespace til::linalg {

namespace {

// Unitary swap of adjacent diagonal entries k, k+1 of an upper-triangular T.
// G's first column is the (normalized) eigenvector of the 2x2 block for the
// trailing eigenvalue, so G^H [T block] G is triangular with the eigenvalues
// exchanged.
void swap_adjacent(Eigen::MatrixXcd& t, Eigen::MatrixXcd& u, int k) {
  using cd = std::complex<double>;
  const cd l1 = t(k, k);
  const cd l2 = t(k + 1, k + 1);
  const cd t12 = t(k, k + 1);
  const double scale = std::abs(t12) + std::abs(l2 - l1);
  if (scale == 0.0) return;  // equal eigenvalues, nothing to move
  cd a = t12 / scale;
  cd b = (l2 - l1) / scale;
  const double nrm = std::sqrt(std::norm(a) + std::norm(b));
  if (nrm == 0.0) return;
  a /= nrm;
  b /= nrm;
  Eigen::Matrix2cd g;
  g << a, -std::conj(b), b, std::conj(a);

  const int n = static_cast<int>(t.rows());
  t.block(0, k, k + 2, 2) = t.block(0, k, k + 2, 2) * g;
  t.block(k, k, 2, n - k) = g.adjoint() * t.block(k, k, 2, n - k);
  t(k + 1, k) = cd(0.0, 0.0);
  u.middleCols(k, 2) = u.middleCols(k, 2) * g;
}

}  // namespace

OrderedSchur ordered_schur(const Eigen::MatrixXd& m,
                           const std::function<bool(std::complex<double>)>& select) {
  Eigen::ComplexSchur<Eigen::MatrixXcd> schur(m.cast<std::complex<double>>(), true);
  if (schur.info() != Eigen::Success) {
    throw numeric_error("complex Schur decomposition did not converge");
  }
  OrderedSchur out{schur.matrixU(), schur.matrixT(), 0};
  const int n = static_cast<int>(m.rows());
  int target = 0;
  for (int i = 0; i < n; ++i) {
    if (select(out.t(i, i))) {
      for (int j = i; j > target; --j) swap_adjacent(out.t, out.u, j - 1);
      ++target;
    }
  }
  out.n_selected = target;
  return out;
}

Eigen::MatrixXd solve_lyapunov(const Eigen::MatrixXd& a, const Eigen::MatrixXd& w) {
  const int n = static_cast<int>(a.rows());
  Eigen::ComplexSchur<Eigen::MatrixXcd> schur(a.cast<std::complex<double>>(), true);
  if (schur.info() != Eigen::Success) {
    throw numeric_error("Lyapunov solve: Schur decomposition failed");
  }
  const Eigen::MatrixXcd& u = schur.matrixU();
  const Eigen::MatrixXcd& t = schur.matrixT();
  const Eigen::MatrixXcd f = u.adjoint() * w.cast<std::complex<double>>() * u;

  // T^H Y + Y T = -F, solved column by column; T^H + T(k,k) I is lower
  // triangular with diagonal conj(l_i) + l_k.
  Eigen::MatrixXcd y = Eigen::MatrixXcd::Zero(n, n);
  Eigen::MatrixXcd th = t.adjoint();
  for (int k = 0; k < n; ++k) {
    Eigen::VectorXcd rhs = -f.col(k);
    if (k > 0) rhs.noalias() -= y.leftCols(k) * t.block(0, k, k, 1);
    Eigen::MatrixXcd lhs = th;
    lhs.diagonal().array() += t(k, k);
    y.col(k) = lhs.triangularView<Eigen::Lower>().solve(rhs);
  }
  Eigen::MatrixXd x = (u * y * u.adjoint()).real();
  return 0.5 * (x + x.transpose());
}

Eigen::MatrixXd spd_sqrt(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
  if (es.info() != Eigen::Success) {
    throw numeric_error("spd_sqrt: eigendecomposition failed");
  }
  Eigen::VectorXd ev = es.eigenvalues();
  for (int i = 0; i < ev.size(); ++i) {
    if (ev[i] < -1e-12) {
      throw numeric_error("spd_sqrt: matrix has eigenvalue " + std::to_string(ev[i]) +
                          " below the -1e-12 floor");
    }
    ev[i] = std::max(ev[i], 0.0);
  }
  return es.eigenvectors() * ev.cwiseSqrt().asDiagonal() * es.eigenvectors().transpose();
}

double symmetry_gap(const Eigen::MatrixXd& m) {
  return (m - m.transpose()).norm();
}

double min_eigenvalue(const Eigen::MatrixXd& m) {
  const Eigen::MatrixXd sym = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

double spd_condition(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (m + m.transpose()),
                                                    Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues().minCoeff();
  const double hi = es.eigenvalues().maxCoeff();
  if (lo <= 0.0) return std::numeric_limits<double>::infinity();
  return hi / lo;
}

bool is_spd(const Eigen::MatrixXd& m, double sym_tol) {
  if (m.rows() != m.cols()) return false;
  if (symmetry_gap(m) > sym_tol * std::max(1.0, m.norm())) return false;
  return min_eigenvalue(m) > 0.0;
}

}  // namespace til::linalg
