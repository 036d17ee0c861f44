#include "til/policy.hpp"

#include "til/errors.hpp"
#include "til/linalg.hpp"

namespace til {

const char* to_string(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::asymptotic: return "asymptotic";
    case PolicyKind::constant_coeff: return "constant_coeff";
    case PolicyKind::temporary_only: return "temporary_only";
    case PolicyKind::zero: return "zero";
  }
  return "?";
}

PolicySpec PolicySpec::asymptotic(RiccatiSolution riccati) {
  PolicySpec p(PolicyKind::asymptotic, riccati.n());
  p.riccati_ = std::move(riccati);
  return p;
}

PolicySpec PolicySpec::temporary_only(RiccatiSolution riccati) {
  PolicySpec p(PolicyKind::temporary_only, riccati.n());
  p.riccati_ = std::move(riccati);
  return p;
}

PolicySpec PolicySpec::constant_coeff(const Eigen::MatrixXd& alpha,
                                      const FrictionSpec& frictions) {
  const int n = frictions.n();
  if (alpha.rows() != n || alpha.cols() != n) {
    throw config_error("constant_coeff alpha must be n x n");
  }
  Eigen::MatrixXd blk(2 * n, 2 * n);
  blk.topLeftCorner(n, n) =
      frictions.r0 * Eigen::MatrixXd::Identity(n, n) + frictions.c0 * alpha * frictions.c0;
  blk.topRightCorner(n, n) = frictions.c0 * alpha;
  blk.bottomLeftCorner(n, n) = alpha * frictions.c0;
  blk.bottomRightCorner(n, n) = alpha;
  if (linalg::min_eigenvalue(blk) <= 0.0) {
    throw config_error(
        "constant_coeff alpha rejected: closed-loop block matrix does not have "
        "positive-definite symmetric part");
  }
  PolicySpec p(PolicyKind::constant_coeff, n);
  p.alpha_ = alpha;
  return p;
}

PolicySpec PolicySpec::zero(int n) {
  if (n < 1) throw config_error("zero policy needs n >= 1");
  return PolicySpec(PolicyKind::zero, n);
}

PolicyGains policy_gains(const PolicySpec& policy, const FrictionSpec& frictions) {
  const int n = policy.n();
  if (frictions.n() != n) {
    throw config_error("policy and frictions disagree on the number of assets");
  }
  if (!(frictions.eps > 0.0)) throw config_error("frictions.eps must be positive");
  const double eps = frictions.eps;

  PolicyGains g{Eigen::MatrixXd::Zero(n, n), Eigen::MatrixXd::Zero(n, n)};
  switch (policy.kind()) {
    case PolicyKind::zero:
      break;
    case PolicyKind::constant_coeff:
      g.kh = policy.alpha() / eps;
      g.kd = policy.alpha() * frictions.c0 / (eps * eps);
      break;
    case PolicyKind::asymptotic:
    case PolicyKind::temporary_only: {
      if (!policy.riccati()) {
        throw config_error(std::string(to_string(policy.kind())) +
                           " policy needs a Riccati solution");
      }
      const auto& sol = *policy.riccati();
      g.kh = frictions.lambda0.llt().solve(sol.qh.transpose()) / eps;
      if (policy.kind() == PolicyKind::asymptotic) {
        g.kd = frictions.lambda0.llt().solve(sol.qd.transpose()) / (eps * eps);
      }
      break;
    }
  }
  return g;
}

Eigen::VectorXd trading_rate(const PolicySpec& policy, const MarketModel& model,
                             const FrictionSpec& frictions, const Eigen::VectorXd& d,
                             const Eigen::VectorXd& h, const Eigen::VectorXd& y) {
  const PolicyGains g = policy_gains(policy, frictions);
  const Eigen::VectorXd m = merton_portfolio(model, y);
  return -(g.kd * d + g.kh * (h - m));
}

FieldTable policy_vector_field(const PolicySpec& policy, const MarketModel& model,
                               const FrictionSpec& frictions, const FieldGrid& grid,
                               const Eigen::VectorXd& y, const Eigen::VectorXd& d_fixed) {
  const int n = policy.n();
  if (n != 1 && n != 2) {
    throw config_error("field emission supports n in {1, 2}");
  }
  if (grid.n1 < 2 || grid.n2 < 2) {
    throw config_error("degenerate grid: need at least 2 points per axis");
  }

  const PolicyGains g = policy_gains(policy, frictions);
  const Eigen::VectorXd m = merton_portfolio(model, y);

  Eigen::VectorXd d = Eigen::VectorXd::Zero(n);
  if (n == 2) {
    if (d_fixed.size() != 2) {
      throw config_error("2-asset field needs the fixed distortion vector");
    }
    d = d_fixed;
  }

  FieldTable table;
  table.n = n;
  table.points.reserve(static_cast<std::size_t>(grid.n1) * grid.n2);
  const double dx1 = (grid.x1_max - grid.x1_min) / (grid.n1 - 1);
  const double dx2 = (grid.x2_max - grid.x2_min) / (grid.n2 - 1);
  Eigen::VectorXd h(n);
  for (int i = 0; i < grid.n1; ++i) {
    const double x1 = grid.x1_min + i * dx1;
    for (int j = 0; j < grid.n2; ++j) {
      const double x2 = grid.x2_min + j * dx2;
      if (n == 1) {
        d[0] = x1;
        h[0] = x2;
      } else {
        h[0] = x1;
        h[1] = x2;
      }
      FieldPoint pt;
      pt.x1 = x1;
      pt.x2 = x2;
      pt.rate = -(g.kd * d + g.kh * (h - m));
      table.points.push_back(std::move(pt));
    }
  }
  return table;
}

}  // namespace til
