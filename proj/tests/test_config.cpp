#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <til/config.hpp>
#include <til/errors.hpp>

using namespace til;

namespace {

const char* kGood = R"(# example
[model]
kind = "ou_linear"
lambda = 1.0
eta = 1.0
sigma = 1.0
gamma = 2.0
rho = 0.5
y0 = [0.0, 1.0]

[frictions]
Lambda = [[2.0, 0.0], [0.0, 2.0]]   # trailing comment
C = [[1.0, 0.0],
     [0.0, 1.0]]
R = 1.5
eps = 0.25

[sim]
dt = 0.01
horizon = 12.0
paths = 500
seed = 12345678901234
h0 = "merton"
stiffness_guard = false
)";

}  // namespace

TEST_CASE("parser handles sections, arrays, comments, strings") {
  const Config cfg = Config::parse(kGood, "good.toml");
  CHECK(cfg.has("model"));
  CHECK(cfg.at("model").str("kind") == "ou_linear");
  CHECK(cfg.at("model").real("gamma") == doctest::Approx(2.0));
  const Eigen::VectorXd y0 = cfg.at("model").vector("y0");
  CHECK(y0.size() == 2);
  CHECK(y0[1] == doctest::Approx(1.0));

  const Eigen::MatrixXd lam = cfg.at("frictions").matrix("Lambda");
  CHECK(lam.rows() == 2);
  CHECK(lam(1, 1) == doctest::Approx(2.0));
  // multi-line nested array
  const Eigen::MatrixXd c = cfg.at("frictions").matrix("C");
  CHECK(c(0, 0) == doctest::Approx(1.0));

  CHECK(cfg.at("sim").uint_or("seed", 0) == 12345678901234ull);
  CHECK(cfg.at("sim").bool_or("stiffness_guard", true) == false);
  CHECK(cfg.text() == std::string(kGood));
}

TEST_CASE("diagnostics carry origin and line") {
  try {
    Config::parse("[model]\nkind = \n", "broken.toml");
    FAIL("expected a parse error");
  } catch (const config_error& e) {
    const std::string msg = e.what();
    CHECK(msg.find("broken.toml") != std::string::npos);
    CHECK(msg.find(":2") != std::string::npos);
  }
  CHECK_THROWS_AS(Config::parse("key_outside = 1\n", "x.toml"), config_error);
  CHECK_THROWS_AS(Config::parse("[sec]\nv = [1, 2\n", "x.toml"), config_error);
  CHECK_THROWS_AS(Config::parse("[sec]\nv = \"abc\n", "x.toml"), config_error);
}

TEST_CASE("loaders build domain objects") {
  const Config cfg = Config::parse(kGood, "good.toml");
  const MarketModel model = load_model(cfg);
  CHECK(model.n() == 1);
  CHECK(model.gamma() == doctest::Approx(2.0));
  CHECK(model.ou_params().has_value());
  CHECK(model.ou_params()->nu.is_linear);

  // friction matrices are 2x2 but the model has n = 1
  CHECK_THROWS_AS(load_frictions(cfg, model.n()), config_error);
  const FrictionSpec fr = load_frictions(cfg, 2);
  CHECK(fr.r_eff() == doctest::Approx(6.0));

  const SimConfig sim = load_sim(cfg);
  CHECK(sim.paths == 500);
  CHECK(sim.stiffness_guard == false);

  const InitState init = load_init(cfg, model);
  CHECK(init.h0[0] ==
        doctest::Approx(merton_portfolio(model, init.y0)[0]));  // h0 = "merton"
  CHECK(init.d0[0] == 0.0);
}

TEST_CASE("model kinds and signals") {
  CHECK_THROWS_AS(
      load_model(Config::parse("[model]\nkind = \"bogus\"\n", "x.toml")),
      config_error);
  const Config tanh_cfg = Config::parse(
      "[model]\nkind = \"ou_custom\"\nnu = \"tanh\"\nlambda = 1.0\neta = 1.0\nsigma = "
      "1.0\n",
      "x.toml");
  const MarketModel m = load_model(tanh_cfg);
  CHECK(!m.ou_params()->nu.is_linear);

  const Config flat = Config::parse(
      "[model]\nkind = \"matrix_constant\"\nmu = [1.0, 0.5]\nSigma = [[1.0, 0.1], [0.1, "
      "2.0]]\n",
      "x.toml");
  CHECK(load_model(flat).constant_coefficients());
}

TEST_CASE("sweep plan loader") {
  const Config cfg = Config::parse(R"(
[model]
kind = "ou_linear"
lambda = 1.0
eta = 1.0
sigma = 1.0
y0 = [0.0, 1.0]

[frictions]
Lambda = [[1.0]]
C = [[1.0]]
R = 1.0
eps = 1.0

[sweep]
eps_grid = [0.5, 0.25]
dt_over_eps = 0.01
paths = 100
seed = 9
h0 = "merton"
policies = ["asymptotic", "zero"]
mode = "ranking"
)",
                                   "plan.toml");
  const MarketModel model = load_model(cfg);
  const SweepPlan plan = load_plan(cfg, model);
  CHECK(plan.eps_grid.size() == 2);
  CHECK(plan.h0_at_merton);
  CHECK(plan.mode == "ranking");
  REQUIRE(plan.policies.size() == 2);
  CHECK(plan.policies[1].kind == PolicyKind::zero);
}
