#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <til/errors.hpp>
#include <til/linalg.hpp>
#include <til/rng.hpp>

using namespace til;

namespace {

Eigen::MatrixXd random_matrix(int n, PhiloxStream& rng) {
  Eigen::MatrixXd m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = rng.normal();
  return m;
}

Eigen::MatrixXd random_spd(int n, PhiloxStream& rng, double lo = 0.1, double hi = 10.0) {
  const Eigen::MatrixXd g = random_matrix(n, rng);
  const Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(g).householderQ();
  Eigen::VectorXd ev(n);
  for (int i = 0; i < n; ++i) ev[i] = lo + (hi - lo) * rng.uniform();
  return q * ev.asDiagonal() * q.transpose();
}

}  // namespace

TEST_CASE("ordered_schur sorts selected eigenvalues first and stays unitary") {
  PhiloxStream rng(11, 0);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 2 + trial % 7;
    const Eigen::MatrixXd m = random_matrix(n, rng);
    const auto schur =
        linalg::ordered_schur(m, [](std::complex<double> ev) { return ev.real() < 0.0; });

    // reconstruction and unitarity
    const Eigen::MatrixXcd rec = schur.u * schur.t * schur.u.adjoint();
    CHECK((rec - m.cast<std::complex<double>>()).norm() < 1e-10 * (1.0 + m.norm()));
    CHECK((schur.u.adjoint() * schur.u - Eigen::MatrixXcd::Identity(n, n)).norm() < 1e-12);

    // ordering: all selected diagonal entries precede unselected ones
    bool seen_unselected = false;
    int selected = 0;
    for (int i = 0; i < n; ++i) {
      const bool sel = schur.t(i, i).real() < 0.0;
      if (sel) {
        CHECK(!seen_unselected);
        ++selected;
      } else {
        seen_unselected = true;
      }
    }
    CHECK(selected == schur.n_selected);

    // strict triangularity
    double below = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < i; ++j) below += std::abs(schur.t(i, j));
    CHECK(below < 1e-10);
  }
}

TEST_CASE("solve_lyapunov inverts the Lyapunov operator") {
  PhiloxStream rng(17, 0);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 2 + trial % 5;
    // stable A by spectral shift
    Eigen::MatrixXd a = random_matrix(n, rng);
    a -= (a.eigenvalues().real().maxCoeff() + 0.5) * Eigen::MatrixXd::Identity(n, n);
    Eigen::MatrixXd w = random_spd(n, rng);
    const Eigen::MatrixXd x = linalg::solve_lyapunov(a, w);
    CHECK((a.transpose() * x + x * a + w).norm() < 1e-9 * (1.0 + x.norm()));
    CHECK(linalg::symmetry_gap(x) < 1e-10 * (1.0 + x.norm()));
  }
}

TEST_CASE("spd_sqrt squares back and rejects indefinite input") {
  PhiloxStream rng(23, 0);
  const Eigen::MatrixXd m = random_spd(4, rng);
  const Eigen::MatrixXd r = linalg::spd_sqrt(m);
  CHECK((r * r - m).norm() < 1e-10 * (1.0 + m.norm()));

  Eigen::MatrixXd bad = m;
  bad(0, 0) -= 100.0;
  CHECK_THROWS_AS(linalg::spd_sqrt(bad), numeric_error);
}

TEST_CASE("spd_condition flags singular matrices") {
  Eigen::MatrixXd m = Eigen::MatrixXd::Identity(3, 3);
  CHECK(linalg::spd_condition(m) == doctest::Approx(1.0));
  m(2, 2) = 0.0;
  CHECK(std::isinf(linalg::spd_condition(m)));
}
