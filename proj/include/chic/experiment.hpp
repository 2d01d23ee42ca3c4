#pragma once

#include <functional>
#include <string>
#include <vector>

#include "chic/diagnostics.hpp"
#include "chic/run_config.hpp"

namespace chic::app {

struct RunArtifacts {
  std::vector<diag::DiagnosticsRecord> records;
  diag::AuditVerdict verdict;
  double audit_budget = 0.0;  // 10 (picard_tol + gmres_rel_tol) |Omega| + clip
  double clip_budget = 0.0;   // accumulated |clipped Q-mass|
  double final_drift = 0.0;   // err_v(T) - err_v(0)
  double initial_energy = 0.0;
  double min_energy = 0.0;
  std::int64_t total_steps = 0;
  std::int64_t rejected_steps = 0;
  double avg_picard = 0.0;
  double avg_gmres = 0.0;  // per linear solve
  std::string csv_path, field_path, summary_path, config_path;
};

// Runs the configured experiment to t_end with the iteration-count dt
// controller (seeded at dt_min*1e3) and rejection-halving. Writes
// diagnostics.csv, field_final.vtk, summary.txt and config.txt into out_dir
// (nothing is written when out_dir is empty). on_record fires for every
// emitted diagnostics row, in order.
RunArtifacts run_experiment(
    const RunConfig& cfg,
    const std::function<void(const diag::DiagnosticsRecord&)>& on_record = {});

// Canned configurations for the reported experiments (out_dir left empty).
RunConfig preset_flower(const std::string& kernel, double eps_dx, bool full);
RunConfig preset_droplets(const std::string& kernel, double eps_dx);
RunConfig preset_two_droplets(const std::string& kernel);
RunConfig preset_disc(const std::string& kernel, double eps_dx);
RunConfig preset_planar(const std::string& kernel);

// name in {flower_full, flower_fast, droplets, two_droplets, disc, planar}.
RunConfig preset_by_name(const std::string& name, const std::string& kernel,
                         double eps_dx);
std::vector<std::string> preset_names();

}  // namespace chic::app
