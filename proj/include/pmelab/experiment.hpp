#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "pmelab/comparison.hpp"
#include "pmelab/config.hpp"

namespace pmelab {

/// Everything a run needs, assembled from a config.
struct Problem {
  RunConfig cfg;
  std::optional<HoleGeometry> hole;
  SolverState initial;
  std::function<std::shared_ptr<const Mesh>(const Mesh&)> extend;
  /// Discrete phi on a mesh (zeros without a hole).
  std::function<std::vector<double>(const std::shared_ptr<const Mesh>&)> phi_on;
  /// phi at arbitrary points; empty functions without a hole.
  Potential potential;
};

std::optional<HoleGeometry> make_hole(const RunConfig& cfg);
/// Radial for disks and whole-plane runs unless grid.kind says otherwise.
bool uses_radial_grid(const RunConfig& cfg);
std::shared_ptr<const Mesh> make_initial_mesh(const RunConfig& cfg, const std::optional<HoleGeometry>& hole);
Problem build_problem(const RunConfig& cfg);
RunOptions run_options(const Problem& p);

/// One row per checkpoint with t > e (only when a hole is present).
struct DiagnosticRow {
  double t = 0;
  double mass_ratio = 0;
  double support_minus = 0;
  double support_plus = 0;
  ErrorStat near;
  ErrorStat far;
  std::vector<double> compact;  ///< one per probe
};

struct ProfileSample {
  double t, xi, w, F_star;
};

struct CriterionResult {
  std::string name;
  std::string status;  ///< pass | fail | skipped
  std::string detail;
  bool ok() const { return status != "fail"; }
};

struct Analysis {
  bool has_hole = false;
  CriticalOuterSpec spec;
  double delta = 0;
  double M_phi_drift = 0;  ///< max relative deviation of the weighted moment
  std::vector<DiagnosticRow> rows;
  std::vector<ProfileSample> profile;
  std::vector<CriterionResult> criteria;
};

/// Discrete phi for each snapshot, solved once per distinct mesh.
std::vector<std::vector<double>> phi_per_snapshot(const Problem& p, const RunRecord& rec);

/// Trend functionals over the snapshots.  phi[k] lives on snapshots[k]'s mesh.
Analysis analyze_run(const Problem& p, const RunRecord& rec, const std::vector<std::vector<double>>& phi);
/// Times used for trend decisions: powers of ten within [trend_from, t_end], plus t_end.
std::vector<double> trend_times(const std::vector<double>& t, double trend_from);

/// The six diagnostic CSVs.
std::vector<std::string> write_diagnostics(const std::string& dir, const RunRecord& rec, const Analysis& a);
/// Four SVGs built from the diagnostic CSVs in dir.  Throws SeriesError on short series.
std::vector<std::string> emit_plots(const std::string& dir);

struct RunSummary {
  std::string config_hash;
  std::string tool_version;
  double wall_time = 0;
  bool cached = false;
  bool degenerate = false;
  std::size_t series_length = 0;
  std::map<std::string, std::string> criteria;  ///< name -> pass | fail | skipped
  std::vector<std::string> files;               ///< relative to the run directory
  std::string directory;

  bool all_pass() const;
  std::string to_text() const;
  static RunSummary from_text(const std::string& text);
};

/// Runs the stationary solve, the evolution, the asymptotic functionals and the
/// configured comparison checks under out_root/<config hash>.  A completed
/// directory with the same hash is reused and reported as cached.
RunSummary run_experiment(const RunConfig& cfg, const std::string& out_root);

/// Reloads snapshots written by run_experiment or simulate.
struct LoadedRun {
  Problem problem;
  RunRecord record;
  std::vector<std::vector<double>> phi;
};
LoadedRun load_run(const std::string& dir);

struct ComparisonOutcome {
  std::vector<CriterionResult> criteria;
  std::vector<std::string> files;
};
/// Sign sweeps (analytic phi) and, given snapshots, ordering checks.  Writes
/// comparison.csv and ordering.csv into dir.
ComparisonOutcome run_comparison(const Problem& p, const RunRecord& rec, const std::vector<std::vector<double>>& phi,
                                 const Analysis& a, const std::string& dir);

/// Three lockstep runs: disk(inner_radius), the configured hole, disk(outer_radius),
/// all on aligned masked grids.  Writes sandwich.csv.
struct SandwichOutcome {
  bool ordered = false;
  double bounded_spread = 0;  ///< max/min of (M+ - M-) log t over decades
  std::vector<double> t, M_plus, M_minus, mass;
  std::size_t violations = 0;
  bool pass = false;
};
SandwichOutcome run_sandwich(const RunConfig& cfg, const std::string& csv_path);

}  // namespace pmelab
