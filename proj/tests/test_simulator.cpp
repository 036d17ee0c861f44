#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <til/errors.hpp>
#include <til/rng.hpp>
#include <til/simulator.hpp>

#include "support/exact_ou_oracle.hpp"

using namespace til;

namespace {

struct Rig {
  MarketModel model = MarketModel::ou(OUParams{1.0, 1.0, 1.0, linear_signal()}, 1.0, 1.0);
  Eigen::VectorXd y0 = (Eigen::VectorXd(2) << 0.0, 1.0).finished();

  FrictionSpec frictions(double eps) const {
    return FrictionSpec(Eigen::MatrixXd::Identity(1, 1), Eigen::MatrixXd::Identity(1, 1),
                        1.0, eps);
  }
  InitState at_target(const FrictionSpec&) const {
    return InitState{Eigen::VectorXd::Zero(1), merton_portfolio(model, y0), y0};
  }
};

Eigen::VectorXd v1(double x) { return Eigen::VectorXd::Constant(1, x); }

}  // namespace

TEST_CASE("single step") {
  Rig rig;
  const FrictionSpec fr = rig.frictions(0.1);  // R_eff = 10

  SUBCASE("distortion decays exponentially under the zero policy") {
    PathState st{0.0, rig.y0, v1(1.0), v1(0.0)};
    const PathState next =
        step(st, PolicySpec::zero(1), rig.model, fr, 0.1, Eigen::VectorXd::Zero(2));
    CHECK(next.d[0] == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
    CHECK(next.h[0] == 0.0);
  }

  SUBCASE("zero distortion stays zero under the zero policy") {
    PathState st{0.0, rig.y0, v1(0.0), v1(0.0)};
    PathState cur = st;
    PhiloxStream rng(3, 0);
    for (int k = 0; k < 50; ++k) {
      Eigen::VectorXd noise(2);
      noise << rng.normal() * std::sqrt(0.05), rng.normal() * std::sqrt(0.05);
      cur = step(cur, PolicySpec::zero(1), rig.model, fr, 0.05, noise);
      CHECK(cur.d[0] == 0.0);
    }
  }

  SUBCASE("vanishing resilience turns the update into C_eff rate dt") {
    // constant_coeff alpha = 1, state picked so the rate is exactly one
    const MarketModel flat = MarketModel::constant(
        Eigen::VectorXd::Ones(1), Eigen::MatrixXd::Identity(1, 1), 1.0, 1.0);
    const FrictionSpec tiny_r(Eigen::MatrixXd::Identity(1, 1),
                              Eigen::MatrixXd::Identity(1, 1), 1e-9, 1.0);
    const PolicySpec pol = PolicySpec::constant_coeff(Eigen::MatrixXd::Identity(1, 1), tiny_r);
    PathState st{0.0, Eigen::VectorXd::Zero(1), v1(0.0), v1(0.0)};  // h - M = -1
    const PathState next = step(st, pol, flat, tiny_r, 0.1, Eigen::VectorXd::Zero(1));
    CHECK(next.d[0] == doctest::Approx(0.1).epsilon(1e-8));
  }

  SUBCASE("non-finite states are rejected") {
    PathState st{0.0, rig.y0, v1(std::nan("")), v1(0.0)};
    CHECK_THROWS_AS(step(st, PolicySpec::zero(1), rig.model, fr, 0.1,
                         Eigen::VectorXd::Zero(2)),
                    numeric_error);
  }
}

TEST_CASE("batch kernel and public step agree on the OU fast path") {
  Rig rig;
  const FrictionSpec fr = rig.frictions(0.25);
  const RiccatiSolution sol = solve_maximal(build_problem(rig.model, fr, rig.y0));
  const PolicySpec pol = PolicySpec::asymptotic(sol);
  InitState init{v1(0.2), v1(1.4), rig.y0};

  SimConfig cfg;
  cfg.dt = 0.01;
  cfg.horizon = 0.5;
  cfg.paths = 2;
  cfg.seed = 123;
  cfg.allow_short_horizon = true;
  BatchOptions opts;
  opts.trace_paths = 1;
  const BatchResult batch = simulate_batch({&pol}, rig.model, fr, init, cfg, opts);

  PathState st{0.0, init.y0, init.d0, init.h0};
  PhiloxStream rng(cfg.seed, 0);
  const double sq = std::sqrt(cfg.dt);
  for (const auto& row : batch.trace) {
    CHECK(std::abs(row.t - st.t) < 1e-12);
    CHECK(std::abs(row.y[1] - st.y[1]) < 1e-12);
    CHECK(std::abs(row.d[0] - st.d[0]) < 1e-12);
    CHECK(std::abs(row.h[0] - st.h[0]) < 1e-12);
    Eigen::VectorXd noise(2);
    noise << rng.normal() * sq, rng.normal() * sq;
    st = step(st, pol, rig.model, fr, cfg.dt, noise);
  }
}

TEST_CASE("objective estimates") {
  Rig rig;

  SUBCASE("zero policy from the zero state earns exactly zero") {
    const FrictionSpec fr = rig.frictions(0.25);
    InitState init{v1(0.0), v1(0.0), rig.y0};
    SimConfig cfg;
    cfg.dt = 0.01;
    cfg.horizon = 10.0;
    cfg.paths = 64;
    cfg.seed = 5;
    const ObjectiveEstimate est = evaluate_objective(PolicySpec::zero(1), rig.model, fr,
                                                     init, cfg);
    CHECK(est.value == 0.0);
    CHECK(est.std_error == 0.0);
  }

  SUBCASE("holding the Merton portfolio attains V0 when coefficients are constant") {
    const MarketModel flat = MarketModel::constant(
        Eigen::VectorXd::Ones(1), Eigen::MatrixXd::Identity(1, 1), 1.0, 1.0);
    const FrictionSpec fr(Eigen::MatrixXd::Identity(1, 1), Eigen::MatrixXd::Identity(1, 1),
                          1.0, 0.25);
    const Eigen::VectorXd y = Eigen::VectorXd::Zero(1);
    InitState init{v1(0.0), merton_portfolio(flat, y), y};
    SimConfig cfg;
    cfg.dt = 0.002;
    cfg.horizon = 14.0;
    cfg.paths = 16;
    cfg.seed = 5;
    const ObjectiveEstimate est =
        evaluate_objective(PolicySpec::zero(1), flat, fr, init, cfg);
    const double v0 = frictionless_value(flat, y, ClosedForm{}).value;
    CHECK(std::abs(est.value - v0) < 2e-3);
  }

  SUBCASE("stiffness guard") {
    const FrictionSpec fr = rig.frictions(0.01);  // R_eff = 100
    InitState init = rig.at_target(fr);
    SimConfig cfg;
    cfg.dt = 0.01;  // dt R_eff = 1 > 1/4
    cfg.horizon = 10.0;
    cfg.paths = 8;
    CHECK_THROWS_AS(evaluate_objective(PolicySpec::zero(1), rig.model, fr, init, cfg),
                    numeric_error);
    cfg.stiffness_guard = false;
    CHECK_NOTHROW(evaluate_objective(PolicySpec::zero(1), rig.model, fr, init, cfg));
  }

  SUBCASE("horizon guard") {
    const FrictionSpec fr = rig.frictions(0.25);
    InitState init = rig.at_target(fr);
    SimConfig cfg;
    cfg.dt = 0.01;
    cfg.horizon = 2.0;  // e^{-rho T} = e^{-2} >= 1e-4
    cfg.paths = 8;
    CHECK_THROWS_AS(evaluate_objective(PolicySpec::zero(1), rig.model, fr, init, cfg),
                    config_error);
    cfg.allow_short_horizon = true;
    CHECK_NOTHROW(evaluate_objective(PolicySpec::zero(1), rig.model, fr, init, cfg));
  }

  SUBCASE("transversality diagnostic shrinks when the horizon doubles") {
    const FrictionSpec fr = rig.frictions(0.25);
    const RiccatiSolution sol = solve_maximal(build_problem(rig.model, fr, rig.y0));
    const PolicySpec pol = PolicySpec::asymptotic(sol);
    InitState init = rig.at_target(fr);
    SimConfig cfg;
    cfg.dt = 0.0025;
    cfg.horizon = 10.0;
    cfg.paths = 2000;
    cfg.seed = 17;
    const double t1 = evaluate_objective(pol, rig.model, fr, init, cfg).transversality;
    cfg.horizon = 20.0;
    const double t2 = evaluate_objective(pol, rig.model, fr, init, cfg).transversality;
    CHECK(t2 < t1);
  }
}

TEST_CASE("determinism: estimates are bit-identical across worker counts") {
  Rig rig;
  const FrictionSpec fr = rig.frictions(0.25);
  const RiccatiSolution sol = solve_maximal(build_problem(rig.model, fr, rig.y0));
  const PolicySpec pol = PolicySpec::asymptotic(sol);
  InitState init = rig.at_target(fr);
  SimConfig cfg;
  cfg.dt = 0.005;
  cfg.horizon = 10.0;
  cfg.paths = 3000;
  cfg.seed = 2718;

  setenv("TIL_THREADS", "1", 1);
  const ObjectiveEstimate a = evaluate_objective(pol, rig.model, fr, init, cfg);
  setenv("TIL_THREADS", "3", 1);
  const ObjectiveEstimate b = evaluate_objective(pol, rig.model, fr, init, cfg);
  unsetenv("TIL_THREADS");
  CHECK(a.value == b.value);
  CHECK(a.std_error == b.std_error);
  CHECK(a.transversality == b.transversality);
}

TEST_CASE("decomposition oracle") {
  Rig rig;
  const FrictionSpec fr = rig.frictions(0.25);
  const double v0 = frictionless_value(rig.model, rig.y0, ClosedForm{}).value;

  SUBCASE("all terms vanish holding Merton in a constant market") {
    const MarketModel flat = MarketModel::constant(
        Eigen::VectorXd::Ones(1), Eigen::MatrixXd::Identity(1, 1), 1.0, 1.0);
    const FrictionSpec ffr(Eigen::MatrixXd::Identity(1, 1),
                           Eigen::MatrixXd::Identity(1, 1), 1.0, 0.25);
    const Eigen::VectorXd y = Eigen::VectorXd::Zero(1);
    InitState init{v1(0.0), merton_portfolio(flat, y), y};
    SimConfig cfg;
    cfg.dt = 0.005;
    cfg.horizon = 10.0;
    cfg.paths = 16;
    cfg.seed = 5;
    const DecompositionEstimate d =
        evaluate_via_decomposition(PolicySpec::zero(1), flat, ffr, init, cfg);
    CHECK(std::abs(d.value) < 1e-10);
  }

  SUBCASE("off-target zero policy loses the pure risk penalty") {
    InitState init{v1(0.0), merton_portfolio(rig.model, rig.y0) + v1(0.5), rig.y0};
    SimConfig cfg;
    cfg.dt = 0.005;
    cfg.horizon = 12.0;
    cfg.paths = 2000;
    cfg.seed = 23;
    const DecompositionEstimate d =
        evaluate_via_decomposition(PolicySpec::zero(1), rig.model, fr, init, cfg);
    CHECK(d.value < 0.0);
    CHECK(d.value + 3.0 * d.std_error < 0.0);
  }

  SUBCASE("direct and decomposition estimates agree pathwise-paired") {
    const RiccatiSolution sol = solve_maximal(build_problem(rig.model, fr, rig.y0));
    const PolicySpec pol = PolicySpec::asymptotic(sol);
    InitState init = rig.at_target(fr);
    SimConfig cfg;
    cfg.dt = 0.0025;
    cfg.horizon = 12.0;
    cfg.paths = 5000;
    cfg.seed = 37;
    const DecompositionEstimate d =
        evaluate_via_decomposition(pol, rig.model, fr, init, cfg);
    const double tol = std::max(3.0 * d.paired_diff_std_error, 5.0 * cfg.dt * std::abs(v0));
    CHECK(std::abs(d.paired_diff) <= tol);
  }
}

TEST_CASE("estimates converge to the exact linear-model value as dt -> 0") {
  Rig rig;
  const double eps = 0.4;
  const FrictionSpec fr = rig.frictions(eps);
  const RiccatiSolution sol = solve_maximal(build_problem(rig.model, fr, rig.y0));
  const PolicySpec pol = PolicySpec::asymptotic(sol);
  InitState init = rig.at_target(fr);

  til_test::OuInstance exact_in;
  const double exact =
      til_test::exact_gap_j_minus_v0(exact_in, eps, sol.qd(0, 0), sol.qh(0, 0));

  double values[4];
  int idx = 0;
  for (double div : {25.0, 50.0, 100.0, 200.0}) {
    SimConfig cfg;
    cfg.dt = eps / div;
    cfg.horizon = 12.0;
    cfg.paths = 30000;
    cfg.seed = 11;
    values[idx++] =
        evaluate_via_decomposition(pol, rig.model, fr, init, cfg).value;
  }
  // |J(dt) - J(dt/2)| with consecutive ratios in the first-order band [1.5, 3]
  const double d1 = values[0] - values[1];
  const double d2 = values[1] - values[2];
  const double d3 = values[2] - values[3];
  CHECK(std::abs(d1) > std::abs(d2));
  CHECK(std::abs(d2) > std::abs(d3));
  CHECK(d1 / d2 >= 1.5);
  CHECK(d1 / d2 <= 3.0);
  CHECK(d2 / d3 >= 1.5);
  CHECK(d2 / d3 <= 3.0);
  // and the finest grid sits closest to the continuous-time oracle
  CHECK(std::abs(values[3] - exact) < std::abs(values[0] - exact));
  CHECK(std::abs(values[3] - exact) < 5e-4 + 3.0 * 0.0006);
}
