#include "til/serialize.hpp"

#include <cstdio>
#include <nlohmann/json.hpp>
#include <sstream>

namespace til {

using nlohmann::json;

namespace {

json matrix_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (int r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (int c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

json spectrum_json(const Eigen::VectorXcd& v) {
  json out = json::array();
  for (int i = 0; i < v.size(); ++i) {
    out.push_back(json{{"re", v[i].real()}, {"im", v[i].imag()}});
  }
  return out;
}

json certificate_json(const CertificateReport& cert) {
  return json{{"lyapunov_gap_min_eig", cert.lyapunov_gap_min_eig},
              {"concavity_ok", cert.concavity_ok},
              {"concavity_lhs", cert.concavity_lhs},
              {"concavity_rhs", cert.concavity_rhs},
              {"delta0", cert.delta0},
              {"constant_a", cert.constant_a},
              {"assumption_holds_trivially", cert.assumption_holds_trivially}};
}

void append_matrix_csv(std::ostringstream& out, const std::string& name,
                       const Eigen::MatrixXd& m) {
  out << name;
  for (int r = 0; r < m.rows(); ++r) {
    for (int c = 0; c < m.cols(); ++c) out << ',' << format_full(m(r, c));
  }
  out << "\n";
}

}  // namespace

std::string format_full(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string riccati_json(const RiccatiSolution& sol, const CertificateReport* cert) {
  json j{{"A", matrix_json(sol.a)},
         {"A1", matrix_json(sol.a1)},
         {"A12", matrix_json(sol.a12)},
         {"A2", matrix_json(sol.a2)},
         {"Qd", matrix_json(sol.qd)},
         {"Qh", matrix_json(sol.qh)},
         {"residual_norm", sol.residual_norm},
         {"closed_loop_spectrum", spectrum_json(sol.closed_loop_spectrum)}};
  if (cert) j["certificate"] = certificate_json(*cert);
  return j.dump(2);
}

std::string riccati_csv(const RiccatiSolution& sol, const CertificateReport* cert) {
  std::ostringstream out;
  out << "field,values...\n";
  append_matrix_csv(out, "A1", sol.a1);
  append_matrix_csv(out, "A12", sol.a12);
  append_matrix_csv(out, "A2", sol.a2);
  append_matrix_csv(out, "Qd", sol.qd);
  append_matrix_csv(out, "Qh", sol.qh);
  out << "residual_norm," << format_full(sol.residual_norm) << "\n";
  out << "closed_loop_spectrum_re";
  for (int i = 0; i < sol.closed_loop_spectrum.size(); ++i) {
    out << ',' << format_full(sol.closed_loop_spectrum[i].real());
  }
  out << "\nclosed_loop_spectrum_im";
  for (int i = 0; i < sol.closed_loop_spectrum.size(); ++i) {
    out << ',' << format_full(sol.closed_loop_spectrum[i].imag());
  }
  out << "\n";
  if (cert) {
    out << "lyapunov_gap_min_eig," << format_full(cert->lyapunov_gap_min_eig) << "\n";
    out << "concavity_ok," << (cert->concavity_ok ? 1 : 0) << "\n";
    out << "delta0," << format_full(cert->delta0) << "\n";
  }
  return out.str();
}

std::string expansion_json(const ExpansionTerms& terms, double eps) {
  json j{{"eps", eps},
         {"v0", terms.v0},
         {"u", terms.u},
         {"u_std_error", terms.u_std_error},
         {"initial_term", terms.initial_term},
         {"varpi", terms.varpi},
         {"vhat", terms.vhat}};
  return j.dump(2);
}

std::string objective_json(const ObjectiveEstimate& est, double actual_horizon) {
  json j{{"j_estimate", est.value},
         {"std_error", est.std_error},
         {"transversality", est.transversality},
         {"transversality_flagged", est.transversality_flagged},
         {"disc_d2", est.disc_d2},
         {"disc_hm2", est.disc_hm2},
         {"horizon", actual_horizon}};
  return j.dump(2);
}

std::string decomposition_json(const DecompositionEstimate& est) {
  json j{{"decomposition_gap", est.value},
         {"decomposition_se", est.std_error},
         {"direct_gap", est.direct_value},
         {"direct_se", est.direct_std_error},
         {"paired_diff", est.paired_diff},
         {"paired_diff_se", est.paired_diff_std_error},
         {"v0", est.v0}};
  return j.dump(2);
}

std::string sweep_report_json(const SweepReport& report) {
  json points = json::array();
  for (const auto& pt : report.points) {
    json policies = json::array();
    for (const auto& p : pt.policies) {
      policies.push_back(json{{"kind", p.kind},
                              {"j", p.j},
                              {"j_se", p.j_se},
                              {"gap", p.gap},
                              {"gap_se", p.gap_se},
                              {"deviation", p.deviation},
                              {"transversality", p.transversality},
                              {"transversality_flagged", p.transversality_flagged},
                              {"state_proxy_d2", p.state_proxy_d2},
                              {"state_proxy_hm2", p.state_proxy_hm2},
                              {"rank_diff", p.rank_diff},
                              {"rank_diff_se", p.rank_diff_se}});
    }
    points.push_back(json{{"eps", pt.eps}, {"dt", pt.dt}, {"policies", policies}});
  }
  json j{{"mode", report.mode},
         {"v0", report.v0},
         {"u", report.u_value},
         {"initial_term", report.initial_term},
         {"varpi", report.varpi},
         {"target", report.target},
         {"points", points},
         {"convergence_order", report.convergence_order},
         {"deviation_monotone", report.deviation_monotone},
         {"half_factor_convention", report.half_factor_convention}};
  return j.dump(2);
}

std::string sweep_report_csv(const SweepReport& report) {
  std::ostringstream out;
  out << "eps,dt,policy,j,j_se,gap,gap_se,deviation,transversality,"
         "state_proxy_d2,state_proxy_hm2,rank_diff,rank_diff_se\n";
  for (const auto& pt : report.points) {
    for (const auto& p : pt.policies) {
      out << format_full(pt.eps) << ',' << format_full(pt.dt) << ',' << p.kind << ','
          << format_full(p.j) << ',' << format_full(p.j_se) << ',' << format_full(p.gap)
          << ',' << format_full(p.gap_se) << ',' << format_full(p.deviation) << ','
          << format_full(p.transversality) << ',' << format_full(p.state_proxy_d2) << ','
          << format_full(p.state_proxy_hm2) << ',' << format_full(p.rank_diff) << ','
          << format_full(p.rank_diff_se) << "\n";
    }
  }
  return out.str();
}

std::string figure_report_json(const FigureReport& report, const FigureConfig& cfg) {
  json j{{"gamma_assumption", report.gamma_assumption},
         {"linear_signal_assumption", true},
         {"parameters",
          json{{"corr", cfg.corr},
               {"eps", cfg.eps},
               {"d1", cfg.d1},
               {"grid_points", cfg.grid_points},
               {"grid_halfwidth", cfg.grid_halfwidth},
               {"Sigma", json::array({json::array({1.0, 0.0}), json::array({0.0, 2.0})})},
               {"Lambda", "Sigma/2"},
               {"C", "2*Sigma"},
               {"R", 0.5}}},
         {"diag_rate2_max_change", report.diag_rate2_max_change},
         {"diag_rate2_unchanged", report.diag_rate2_unchanged},
         {"diag_rate1_at_merton", report.diag_rate1_at_merton},
         {"diag_rate1_negative", report.diag_rate1_negative},
         {"crossing_zero", report.crossing_zero},
         {"crossing_pos", report.crossing_pos},
         {"crossing_shift", report.crossing_shift},
         {"corr_crossing_increases", report.corr_crossing_increases},
         {"files", report.files}};
  return j.dump(2);
}

std::string trace_csv(const std::vector<TraceRow>& rows, int n, int state_dim) {
  std::ostringstream out;
  out << "path,t";
  for (int i = 0; i < state_dim; ++i) out << ",y" << (i + 1);
  for (int i = 0; i < n; ++i) out << ",d" << (i + 1);
  for (int i = 0; i < n; ++i) out << ",h" << (i + 1);
  for (int i = 0; i < n; ++i) out << ",rate" << (i + 1);
  out << "\n";
  for (const auto& row : rows) {
    out << row.path << ',' << format_full(row.t);
    for (int i = 0; i < state_dim; ++i) out << ',' << format_full(row.y[i]);
    for (int i = 0; i < n; ++i) out << ',' << format_full(row.d[i]);
    for (int i = 0; i < n; ++i) out << ',' << format_full(row.h[i]);
    for (int i = 0; i < n; ++i) out << ',' << format_full(row.rate[i]);
    out << "\n";
  }
  return out.str();
}

std::string per_path_csv(const std::vector<double>& values) {
  std::ostringstream out;
  out << "path,objective\n";
  for (std::size_t p = 0; p < values.size(); ++p) {
    out << p << ',' << format_full(values[p]) << "\n";
  }
  return out.str();
}

std::string manifest_json(const RunManifest& manifest) {
  json j{{"subcommand", manifest.subcommand},
         {"config_path", manifest.config_path},
         {"config_snapshot", manifest.config_snapshot},
         {"seed", manifest.seed},
         {"tool_version", manifest.tool_version},
         {"git_describe", manifest.git_describe},
         {"wall_time_seconds", manifest.wall_time_seconds},
         {"artifacts", manifest.artifacts},
         {"notes", manifest.notes}};
  return j.dump(2);
}

}  // namespace til
