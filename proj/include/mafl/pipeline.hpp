#pragma once

// End-to-end scenario execution: main flows, auxiliary flows over the (s, t0)
// grids, every enabled check, and the report.

#include <filesystem>
#include <optional>

#include "mafl/report.hpp"
#include "mafl/scenario.hpp"

namespace mafl {

struct PipelineOptions {
  /// Where checkpoints and report files go; no files are written when empty.
  std::filesystem::path out_dir;
  /// Reuse complete main-flow checkpoints from out_dir when their scenario hash matches.
  bool resume = true;
  /// Restrict the run to these checks (intersected with the scenario's enabled list).
  std::optional<std::vector<std::string>> only_checks;
  /// Write report files into out_dir at the end.
  bool emit = true;
};

/// Label of one (Theta, operator) variant, e.g. "log-ma" or "power1-sigma1".
std::string variant_label(const ThetaProfile& theta, const OperatorSpec& op);

/// Never throws for solver failures: they end the run with complete = false.
EstimateReport run_scenario(const Scenario& scenario, const PipelineOptions& options = {});

/// Loads a main-flow trajectory written by run_scenario, or nothing when absent
/// or written for a different scenario hash.
std::optional<FlowTrajectory> load_trajectory(const std::filesystem::path& run_dir, const FlowProblem& problem,
                                              const std::string& scenario_hash);

}  // namespace mafl
