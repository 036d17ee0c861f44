#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "til/market_model.hpp"
#include "til/riccati.hpp"

namespace til {

enum class PolicyKind { asymptotic, constant_coeff, temporary_only, zero };

const char* to_string(PolicyKind kind);

// A feedback trading-rate rule. All kinds are affine in the physical
// distortion D and the deviation h - M(y); the engine stores D and converts
// to the rescaled d = D/eps internally.
class PolicySpec {
 public:
  static PolicySpec asymptotic(RiccatiSolution riccati);
  static PolicySpec temporary_only(RiccatiSolution riccati);
  // Requires the closed-loop block matrix [[R I + alpha C^2, alpha C],
  // [alpha C, alpha]] (base parameters) to have positive-definite symmetric
  // part; checked here.
  static PolicySpec constant_coeff(const Eigen::MatrixXd& alpha,
                                   const FrictionSpec& frictions);
  static PolicySpec zero(int n);

  PolicyKind kind() const { return kind_; }
  int n() const { return n_; }
  const std::optional<RiccatiSolution>& riccati() const { return riccati_; }
  const Eigen::MatrixXd& alpha() const { return alpha_; }

 private:
  PolicySpec(PolicyKind kind, int n) : kind_(kind), n_(n) {}
  PolicyKind kind_;
  int n_;
  std::optional<RiccatiSolution> riccati_;
  Eigen::MatrixXd alpha_;
};

// Gains of the affine rule rate = -(kd D + kh (h - M(y))) with D physical:
//   asymptotic     kd = Lambda^{-1} Q_d^T / eps^2, kh = Lambda^{-1} Q_h^T / eps
//   constant_coeff kd = alpha C / eps^2,           kh = alpha / eps
//   temporary_only kd = 0,                         kh = Lambda^{-1} Q_h^T / eps
//   zero           kd = kh = 0
struct PolicyGains {
  Eigen::MatrixXd kd;
  Eigen::MatrixXd kh;
};

PolicyGains policy_gains(const PolicySpec& policy, const FrictionSpec& frictions);

// Trading rate in shares per unit time at physical distortion d, position h,
// state y.
Eigen::VectorXd trading_rate(const PolicySpec& policy, const MarketModel& model,
                             const FrictionSpec& frictions, const Eigen::VectorXd& d,
                             const Eigen::VectorXd& h, const Eigen::VectorXd& y);

// Dense rate-field evaluation for plots. For n = 1 the axes are
// (x1, x2) = (d, h); for n = 2 they are (h1, h2) at a fixed distortion.
struct FieldGrid {
  double x1_min = 0.0, x1_max = 0.0;
  double x2_min = 0.0, x2_max = 0.0;
  int n1 = 0, n2 = 0;
};

struct FieldPoint {
  double x1 = 0.0, x2 = 0.0;
  Eigen::VectorXd rate;
};

struct FieldTable {
  int n = 0;
  std::vector<FieldPoint> points;
};

FieldTable policy_vector_field(const PolicySpec& policy, const MarketModel& model,
                               const FrictionSpec& frictions, const FieldGrid& grid,
                               const Eigen::VectorXd& y,
                               const Eigen::VectorXd& d_fixed = Eigen::VectorXd());

}  // namespace til
