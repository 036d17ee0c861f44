// til: asymptotically optimal trading with temporary and transient price
// impact. Subcommands: riccati, field, expand, simulate, sweep, figures.
#include <CLI11.hpp>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "til/config.hpp"
#include "til/errors.hpp"
#include "til/expansion.hpp"
#include "til/serialize.hpp"
#include "til/simulator.hpp"
#include "til/sweep.hpp"
#include "til/version.hpp"

namespace fs = std::filesystem;
using namespace til;

namespace {

struct CommonOpts {
  std::string config_path;
  std::string out_dir = ".";
  std::string format = "json";
  std::uint64_t seed = 0;
  bool seed_set = false;
  long paths = 0;
  double dt = 0.0;
  int trace = 0;
};

void write_text(const fs::path& path, const std::string& text,
                std::vector<std::string>& artifacts) {
  std::ofstream out(path);
  if (!out) throw config_error("cannot write " + path.string());
  out << text;
  artifacts.push_back(path.string());
}

class ManifestScope {
 public:
  ManifestScope(const CommonOpts& opts, const std::string& subcommand,
                const std::string& config_snapshot)
      : out_dir_(opts.out_dir), start_(std::chrono::steady_clock::now()) {
    manifest_.subcommand = subcommand;
    manifest_.config_path = opts.config_path;
    manifest_.config_snapshot = config_snapshot;
    manifest_.tool_version = kVersion;
    manifest_.git_describe = kGitDescribe;
  }

  RunManifest& manifest() { return manifest_; }

  void finish() {
    manifest_.wall_time_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    fs::create_directories(out_dir_);
    std::ofstream out(fs::path(out_dir_) / "manifest.json");
    out << manifest_json(manifest_);
  }

 private:
  RunManifest manifest_;
  std::string out_dir_;
  std::chrono::steady_clock::time_point start_;
};

int run_riccati(const CommonOpts& opts) {
  const Config cfg = Config::parse_file(opts.config_path);
  ManifestScope scope(opts, "riccati", cfg.text());
  const MarketModel model = load_model(cfg);
  const FrictionSpec frictions = load_frictions(cfg, model.n());
  const Eigen::VectorXd y0 = load_y0(cfg, model);

  const RiccatiProblem problem = build_problem(model, frictions, y0);
  const RiccatiSolution sol = solve_maximal(problem);
  const CertificateReport cert = certify(sol, problem, model, frictions, model.rho());

  fs::create_directories(opts.out_dir);
  if (opts.format == "csv") {
    write_text(fs::path(opts.out_dir) / "riccati.csv", riccati_csv(sol, &cert),
               scope.manifest().artifacts);
  } else {
    write_text(fs::path(opts.out_dir) / "riccati.json", riccati_json(sol, &cert),
               scope.manifest().artifacts);
  }
  std::cout << riccati_json(sol, &cert) << "\n";
  scope.finish();
  return 0;
}

int run_field(const CommonOpts& opts) {
  const Config cfg = Config::parse_file(opts.config_path);
  ManifestScope scope(opts, "field", cfg.text());
  const MarketModel model = load_model(cfg);
  const FrictionSpec frictions = load_frictions(cfg, model.n());
  const Eigen::VectorXd y0 = load_y0(cfg, model);
  const PolicySpec policy = load_policy(cfg, model, frictions);

  const ConfigSection& sec = cfg.at("field");
  FieldGrid grid;
  const Eigen::VectorXd x1 = sec.vector("x1");
  const Eigen::VectorXd x2 = sec.vector("x2");
  if (x1.size() != 2 || x2.size() != 2) {
    throw config_error("[field].x1 and x2 must be [min, max] pairs");
  }
  grid.x1_min = x1[0];
  grid.x1_max = x1[1];
  grid.x2_min = x2[0];
  grid.x2_max = x2[1];
  grid.n1 = grid.n2 = static_cast<int>(sec.integer_or("points", 21));
  Eigen::VectorXd d_fixed;
  if (sec.has("d")) d_fixed = sec.vector("d");

  const FieldTable table = policy_vector_field(policy, model, frictions, grid, y0, d_fixed);

  fs::create_directories(opts.out_dir);
  std::ostringstream csv;
  csv << "x1,x2,rate1";
  if (table.n == 2) csv << ",rate2";
  csv << "\n";
  for (const auto& pt : table.points) {
    csv << format_full(pt.x1) << ',' << format_full(pt.x2) << ','
        << format_full(pt.rate[0]);
    if (table.n == 2) csv << ',' << format_full(pt.rate[1]);
    csv << "\n";
  }
  write_text(fs::path(opts.out_dir) / "field.csv", csv.str(), scope.manifest().artifacts);

  std::ostringstream sidecar;
  sidecar << "{\n  \"policy\": \"" << to_string(policy.kind()) << "\",\n"
          << "  \"eps\": " << format_full(frictions.eps) << ",\n"
          << "  \"gamma\": " << format_full(model.gamma()) << ",\n"
          << "  \"gamma_assumption\": " << (model.gamma() == 1.0 ? "true" : "false")
          << ",\n  \"axes\": \"" << (table.n == 1 ? "(d, h)" : "(h1, h2)") << "\"\n}\n";
  write_text(fs::path(opts.out_dir) / "field_params.json", sidecar.str(),
             scope.manifest().artifacts);
  scope.finish();
  return 0;
}

int run_expand(const CommonOpts& opts) {
  const Config cfg = Config::parse_file(opts.config_path);
  ManifestScope scope(opts, "expand", cfg.text());
  const MarketModel model = load_model(cfg);
  FrictionSpec frictions = load_frictions(cfg, model.n());
  const Eigen::VectorXd y0 = load_y0(cfg, model);

  const ConfigSection& ex = cfg.at("expand");
  if (ex.has("eps")) frictions = frictions.with_eps(ex.real("eps"));
  const Eigen::VectorXd d = ex.has("d") ? ex.vector("d") : Eigen::VectorXd::Zero(model.n());
  Eigen::VectorXd h;
  if (ex.has("h") && ex.at("h").kind == ConfigValue::Kind::string) {
    if (ex.str("h") != "merton") {
      throw config_error("[expand].h must be a vector or \"merton\"");
    }
    h = merton_portfolio(model, y0);
  } else {
    h = ex.has("h") ? ex.vector("h") : merton_portfolio(model, y0);
  }

  const RiccatiSolution sol = solve_maximal(build_problem(model, frictions, y0));
  ValueEstimator estimator = ClosedForm{};
  if (ex.str_or("estimator", "closed_form") == "monte_carlo") {
    McConfig mc;
    mc.paths = ex.integer_or("paths", 20000);
    mc.dt = ex.real_or("dt", 0.01);
    mc.horizon = ex.real_or("horizon", 0.0);
    mc.seed = ex.uint_or("seed", 1);
    estimator = mc;
  }
  const Estimate u = corrector_u(model, frictions, y0, estimator);
  const ExpansionTerms terms = assemble_vhat(model, frictions, sol, u, d, h, y0, estimator);

  const std::string json = expansion_json(terms, frictions.eps);
  std::cout << json << "\n";
  fs::create_directories(opts.out_dir);
  write_text(fs::path(opts.out_dir) / "expansion.json", json, scope.manifest().artifacts);
  scope.finish();
  return 0;
}

int run_simulate(const CommonOpts& opts) {
  const Config cfg = Config::parse_file(opts.config_path);
  ManifestScope scope(opts, "simulate", cfg.text());
  const MarketModel model = load_model(cfg);
  const FrictionSpec frictions = load_frictions(cfg, model.n());
  const PolicySpec policy = load_policy(cfg, model, frictions);
  const InitState init = load_init(cfg, model);
  SimConfig sim = load_sim(cfg);
  if (opts.seed_set) sim.seed = opts.seed;
  if (opts.paths > 0) sim.paths = opts.paths;
  if (opts.dt > 0.0) sim.dt = opts.dt;
  scope.manifest().seed = sim.seed;

  BatchOptions batch_opts;
  batch_opts.trace_paths = opts.trace;
  const BatchResult batch = simulate_batch({&policy}, model, frictions, init, sim, batch_opts);

  fs::create_directories(opts.out_dir);
  write_text(fs::path(opts.out_dir) / "objective.json",
             objective_json(batch.estimates[0], batch.actual_horizon),
             scope.manifest().artifacts);
  write_text(fs::path(opts.out_dir) / "paths.csv",
             per_path_csv(batch.objective_per_path[0]), scope.manifest().artifacts);
  if (opts.trace > 0) {
    write_text(fs::path(opts.out_dir) / "trace.csv",
               trace_csv(batch.trace, model.n(), model.state_dim()),
               scope.manifest().artifacts);
  }
  std::cout << objective_json(batch.estimates[0], batch.actual_horizon) << "\n";
  scope.finish();
  return 0;
}

int run_sweep(const CommonOpts& opts) {
  const Config cfg = Config::parse_file(opts.config_path);
  ManifestScope scope(opts, "sweep", cfg.text());
  const MarketModel model = load_model(cfg);
  const FrictionSpec frictions = load_frictions(cfg, model.n());
  SweepPlan plan = load_plan(cfg, model);
  if (opts.seed_set) plan.seed = opts.seed;
  if (opts.paths > 0) plan.paths = opts.paths;
  scope.manifest().seed = plan.seed;

  const SweepReport report = run_expansion_sweep(plan, model, frictions);

  fs::create_directories(opts.out_dir);
  write_text(fs::path(opts.out_dir) / "sweep_report.json", sweep_report_json(report),
             scope.manifest().artifacts);
  write_text(fs::path(opts.out_dir) / "sweep_report.csv", sweep_report_csv(report),
             scope.manifest().artifacts);
  std::cout << sweep_report_json(report) << "\n";
  scope.finish();
  return 0;
}

int run_figures(const CommonOpts& opts) {
  std::string snapshot;
  FigureConfig fig;
  if (!opts.config_path.empty()) {
    const Config cfg = Config::parse_file(opts.config_path);
    snapshot = cfg.text();
    if (cfg.has("figures")) {
      const ConfigSection& s = cfg.at("figures");
      fig.corr = s.real_or("corr", fig.corr);
      fig.eps = s.real_or("eps", fig.eps);
      fig.d1 = s.real_or("d1", fig.d1);
      fig.grid_points = static_cast<int>(s.integer_or("grid_points", fig.grid_points));
      fig.grid_halfwidth = s.real_or("grid_halfwidth", fig.grid_halfwidth);
    }
  }
  ManifestScope scope(opts, "figures", snapshot);

  const FigureReport report = reproduce_figures(opts.out_dir, fig);
  for (const auto& f : report.files) scope.manifest().artifacts.push_back(f);
  write_text(fs::path(opts.out_dir) / "figures_report.json",
             figure_report_json(report, fig), scope.manifest().artifacts);
  std::cout << figure_report_json(report, fig) << "\n";
  scope.finish();
  if (!report.diag_rate2_unchanged || !report.diag_rate1_negative ||
      !report.corr_crossing_increases) {
    std::cerr << "figures: a qualitative sign pattern failed\n";
    return 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"numerical toolkit for portfolio choice with small temporary and "
               "transient price impact"};
  app.require_subcommand(1);

  CommonOpts opts;
  const auto add_common = [&](CLI::App* sub, bool needs_config) {
    auto* c = sub->add_option("--config", opts.config_path, "declarative config file");
    if (needs_config) c->required();
    sub->add_option("--out", opts.out_dir, "output directory (default .)");
    sub->add_option("--seed", opts.seed, "override RNG seed")
        ->each([&](const std::string&) { opts.seed_set = true; });
    sub->add_option("--paths", opts.paths, "override Monte Carlo path count");
    sub->add_option("--dt", opts.dt, "override time step");
    sub->add_option("--trace", opts.trace, "dump the first k path trajectories");
    sub->add_option("--format", opts.format, "json|csv")
        ->check(CLI::IsMember({"json", "csv"}));
  };

  auto* riccati = app.add_subcommand("riccati", "solve the Riccati gains and certify");
  add_common(riccati, true);
  auto* field = app.add_subcommand("field", "emit a trading-rate vector field");
  add_common(field, true);
  auto* expand = app.add_subcommand("expand", "first-order value expansion terms");
  add_common(expand, true);
  auto* simulate = app.add_subcommand("simulate", "Monte Carlo objective evaluation");
  add_common(simulate, true);
  auto* sweep = app.add_subcommand("sweep", "eps-sweep of the expansion and rankings");
  add_common(sweep, false);
  sweep->add_option("--plan", opts.config_path, "sweep plan config");
  auto* figures = app.add_subcommand("figures", "reproduce the figure-style artifacts");
  add_common(figures, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (app.got_subcommand(riccati)) return run_riccati(opts);
    if (app.got_subcommand(field)) return run_field(opts);
    if (app.got_subcommand(expand)) return run_expand(opts);
    if (app.got_subcommand(simulate)) return run_simulate(opts);
    if (app.got_subcommand(sweep)) {
      if (opts.config_path.empty()) throw config_error("sweep needs --plan <config>");
      return run_sweep(opts);
    }
    if (app.got_subcommand(figures)) return run_figures(opts);
  } catch (const config_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const numeric_error& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
