#pragma once

#include <Eigen/Dense>
#include <complex>
#include <functional>

namespace til::linalg {

// Complex Schur decomposition M = U T U^H with the eigenvalues accepted by
// `select` moved to the leading diagonal positions by unitary adjacent swaps.
struct OrderedSchur {
  Eigen::MatrixXcd u;
  Eigen::MatrixXcd t;
  int n_selected = 0;
};

OrderedSchur ordered_schur(const Eigen::MatrixXd& m,
                           const std::function<bool(std::complex<double>)>& select);

// Solves A^T X + X A + W = 0 for real A with spectrum off the anti-stability
// set (lambda_i + conj(lambda_j) != 0), symmetric W. Bartels-Stewart on the
// complex Schur form of A.
Eigen::MatrixXd solve_lyapunov(const Eigen::MatrixXd& a, const Eigen::MatrixXd& w);

// Symmetric square root via eigendecomposition. Eigenvalues in [-1e-12, 0)
// are clipped to zero; anything more negative throws numeric_error.
Eigen::MatrixXd spd_sqrt(const Eigen::MatrixXd& m);

// Frobenius norm of M - M^T.
double symmetry_gap(const Eigen::MatrixXd& m);

// Smallest eigenvalue of the symmetric part of M.
double min_eigenvalue(const Eigen::MatrixXd& m);

// 2-norm condition number of a symmetric matrix; infinity when singular or
// indefinite in the smallest eigenvalue.
double spd_condition(const Eigen::MatrixXd& m);

bool is_spd(const Eigen::MatrixXd& m, double sym_tol = 1e-12);

}  // namespace til::linalg
