#include <benchmark/benchmark.h>

#include <til/simulator.hpp>

using namespace til;

static void BM_OuPathSteps(benchmark::State& state) {
  const MarketModel model =
      MarketModel::ou(OUParams{1.0, 1.0, 1.0, linear_signal()}, 1.0, 1.0);
  const double eps = 0.25;
  const FrictionSpec fr(Eigen::MatrixXd::Identity(1, 1), Eigen::MatrixXd::Identity(1, 1),
                        1.0, eps);
  Eigen::VectorXd y0(2);
  y0 << 0.0, 1.0;
  const RiccatiSolution sol = solve_maximal(build_problem(model, fr, y0));
  const PolicySpec pol = PolicySpec::asymptotic(sol);
  const InitState init{Eigen::VectorXd::Zero(1), merton_portfolio(model, y0), y0};
  SimConfig cfg;
  cfg.dt = eps / 100.0;
  cfg.horizon = 10.0;
  cfg.paths = static_cast<long>(state.range(0));
  cfg.seed = 3;
  const long steps_per_path = static_cast<long>(cfg.horizon / cfg.dt);
  for (auto _ : state) {
    benchmark::DoNotOptimize(evaluate_objective(pol, model, fr, init, cfg));
  }
  state.SetItemsProcessed(state.iterations() * cfg.paths * steps_per_path);
}

BENCHMARK(BM_OuPathSteps)->Unit(benchmark::kMillisecond)->Arg(64)->Arg(512);

static void BM_GenericPathSteps(benchmark::State& state) {
  Eigen::MatrixXd sigma(2, 2);
  sigma << 1.0, 0.2, 0.2, 2.0;
  const MarketModel model =
      MarketModel::constant(Eigen::VectorXd::Ones(2), sigma, 1.0, 1.0);
  const FrictionSpec fr(0.5 * sigma, 2.0 * sigma, 0.5, 0.25);
  const RiccatiSolution sol = solve_maximal(build_problem(model, fr, Eigen::VectorXd::Zero(2)));
  const PolicySpec pol = PolicySpec::asymptotic(sol);
  const InitState init{Eigen::VectorXd::Zero(2),
                       merton_portfolio(model, Eigen::VectorXd::Zero(2)),
                       Eigen::VectorXd::Zero(2)};
  SimConfig cfg;
  cfg.dt = 0.0025;
  cfg.horizon = 10.0;
  cfg.paths = static_cast<long>(state.range(0));
  cfg.seed = 3;
  const long steps_per_path = static_cast<long>(cfg.horizon / cfg.dt);
  for (auto _ : state) {
    benchmark::DoNotOptimize(evaluate_objective(pol, model, fr, init, cfg));
  }
  state.SetItemsProcessed(state.iterations() * cfg.paths * steps_per_path);
}

BENCHMARK(BM_GenericPathSteps)->Unit(benchmark::kMillisecond)->Arg(64);
