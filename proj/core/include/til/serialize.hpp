#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "til/expansion.hpp"
#include "til/riccati.hpp"
#include "til/simulator.hpp"
#include "til/sweep.hpp"

namespace til {

// 17-significant-digit decimal rendering used by every CSV artifact, so that
// downstream diffs are meaningful.
std::string format_full(double v);

std::string riccati_json(const RiccatiSolution& sol, const CertificateReport* cert);
std::string riccati_csv(const RiccatiSolution& sol, const CertificateReport* cert);
std::string expansion_json(const ExpansionTerms& terms, double eps);
std::string objective_json(const ObjectiveEstimate& est, double actual_horizon);
std::string decomposition_json(const DecompositionEstimate& est);
std::string sweep_report_json(const SweepReport& report);
std::string sweep_report_csv(const SweepReport& report);
std::string figure_report_json(const FigureReport& report, const FigureConfig& cfg);

std::string trace_csv(const std::vector<TraceRow>& rows, int n, int state_dim);
std::string per_path_csv(const std::vector<double>& values);

// Every run writes a manifest listing its inputs and artifacts. Timing lives
// only here; result files stay byte-reproducible.
struct RunManifest {
  std::string subcommand;
  std::string config_path;
  std::string config_snapshot;
  std::uint64_t seed = 0;
  std::string tool_version;
  std::string git_describe;
  double wall_time_seconds = 0.0;
  std::vector<std::string> artifacts;
  std::vector<std::string> notes;
};

std::string manifest_json(const RunManifest& manifest);

}  // namespace til
