#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pmelab/vec2.hpp"

namespace pmelab {

inline constexpr const char* kToolVersion = "0.1.0";

/// Flat key = value configuration.  Every field has a dotted key; see
/// config_keys() for the table and README for the meaning of each.
struct RunConfig {
  // hole
  std::string hole_kind = "disk";  // disk | ellipse | curve | none
  double hole_radius = 1.0;
  Vec2 hole_semi_axes{2.0, 1.0};
  std::string hole_points_file;

  std::string grid_kind = "auto";  // auto | radial | masked

  // solver
  double m = 2.0;
  std::size_t n = 200;
  double stretch = 1.01;
  double r_out = 12.0;
  double h = 0.1;
  double extent = 0.0;  // 0: chosen from the hole and the initial data
  double safety = 0.9;
  double dt_max = 1.0;
  double t_start = 3.0;
  double t_end = 1e4;
  double checkpoint_ratio = 1.333521432163324;
  double support_threshold = 1e-12;
  double split_exponent = 2.0;
  bool auto_extend = true;
  bool keep_snapshots = true;

  // initial data
  std::string init_kind = "ring";  // ring | bump | barenblatt | file
  Vec2 init_center{3.0, 0.0};
  double init_radius = 1.0;
  double init_amplitude = 1.0;
  double init_mass = 1.0;
  std::string init_file;

  // asymptotics
  double delta = 0.0;  // 0: half of delta_*
  std::vector<Vec2> probes{{2.718281828459045, 0.0}};
  double trend_from = 1e3;

  // comparison
  std::string comparison_side = "both";  // super | sub | both | none
  double eta_super = 2.0;
  double eta_sub = 0.5;
  double kappa0_super = 1.0;
  double kappa0_sub = 0.5;
  double mu = 0.1;
  double k = 1.0;
  double alpha0 = 0.0;  // 0: half of the boundary-layer minimum of phi
  double T = 100.0;
  std::size_t sample_nt = 100;
  std::size_t sample_nr = 100;
  double sweep_decades = 10.0;  // t-window of each sign sweep, in decades above T

  double stationary_tol = 1e-10;

  double sandwich_inner_radius = 0.5;
  double sandwich_outer_radius = 1.0;
};

/// Throws ConfigError listing every offending line and field.
RunConfig parse_config(const std::string& text);
/// Sorted "key = value" lines with all defaults present and numbers at 17 digits.
std::string normalize_config(const RunConfig& cfg);
/// FNV-1a of the tool version and the normalized text.
std::uint64_t config_hash(const RunConfig& cfg);
std::string config_hash_hex(const RunConfig& cfg);
/// Semantic checks that do not depend on a solve.  Throws ConfigError.
void validate_config(const RunConfig& cfg);

std::vector<std::string> config_keys();

RunConfig load_config_file(const std::string& path);

/// key=value files without sections (the check-comparison parameter file).
std::vector<std::pair<std::string, std::string>> read_key_values(const std::string& text);

}  // namespace pmelab
