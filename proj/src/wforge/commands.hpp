#pragma once

#include <optional>
#include <string>
#include <vector>

#include "wforge/analysis.hpp"
#include "wforge/config.hpp"
#include "wforge/scheme.hpp"

namespace wforge {

// ---------------------------------------------------------------------------
// Command layer shared by the C API and the CLI: run the construction and
// persist artifacts, verify persisted grids against the configured target,
// answer degree queries, and summarize a finished run.
// ---------------------------------------------------------------------------

struct ConstructSummary {
  std::string out_dir;
  std::string phase;
  int stages = 0;
  double final_defect = 0.0;
  RunArtifacts artifacts;
};

/// Runs the full pipeline for `config` and writes into config.out_dir:
/// run.log (JSON lines), v/w grids (binary + CSV), defect_trace.csv, and the
/// serialized configuration (config.txt).  Deterministic for a fixed config.
ConstructSummary cmd_construct(const RunConfig& config, bool quiet = false);

/// Reads v/w grids from `artifact_dir`, rebuilds the target field from the
/// configuration, and reports: weak-Hessian residuals over a battery of ten
/// test bumps, lattice defect norms, and gradient Hoelder estimates at two
/// resolutions.  Writes verify.csv into `artifact_dir` and returns the CSV.
std::string cmd_verify(const RunConfig& config, const std::string& artifact_dir);

struct DegreeCommand {
  std::vector<Vec2> polygon;         // counterclockwise boundary of U
  Vec2 y{0.0, 0.0};                  // target point
  std::optional<double> delta;       // if set, use the rotated perturbation map
  std::optional<TestFunction> g;     // if set, also report the degree formula residual
  int quad_resolution = 128;
};

/// Degree of the gradient map of the configured v0 over the query polygon.
/// Returns a JSON object; a clearance failure is reported in-band as
/// degree_defined = false rather than as an error.
std::string cmd_degree(const RunConfig& config, const DegreeCommand& command);

/// Human-readable summary of a finished run directory (reads run.log).
std::string cmd_report(const std::string& artifact_dir);

}  // namespace wforge
