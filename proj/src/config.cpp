#include "pmelab/config.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <variant>

#include "pmelab/errors.hpp"
#include "pmelab/util.hpp"

namespace pmelab {

namespace {

using Member = std::variant<double RunConfig::*, std::size_t RunConfig::*, bool RunConfig::*, std::string RunConfig::*,
                            Vec2 RunConfig::*, std::vector<Vec2> RunConfig::*>;

struct KeyDef {
  const char* key;
  Member member;
  std::vector<std::string> choices;  // strings only; empty means free text
};

const std::vector<KeyDef>& table() {
  static const std::vector<KeyDef> t = {
      {"hole.kind", &RunConfig::hole_kind, {"disk", "ellipse", "curve", "none"}},
      {"hole.radius", &RunConfig::hole_radius, {}},
      {"hole.semi_axes", &RunConfig::hole_semi_axes, {}},
      {"hole.points_file", &RunConfig::hole_points_file, {}},
      {"grid.kind", &RunConfig::grid_kind, {"auto", "radial", "masked"}},
      {"solver.m", &RunConfig::m, {}},
      {"solver.n", &RunConfig::n, {}},
      {"solver.stretch", &RunConfig::stretch, {}},
      {"solver.r_out", &RunConfig::r_out, {}},
      {"solver.h", &RunConfig::h, {}},
      {"solver.extent", &RunConfig::extent, {}},
      {"solver.safety", &RunConfig::safety, {}},
      {"solver.dt_max", &RunConfig::dt_max, {}},
      {"solver.t_start", &RunConfig::t_start, {}},
      {"solver.t_end", &RunConfig::t_end, {}},
      {"solver.checkpoint_ratio", &RunConfig::checkpoint_ratio, {}},
      {"solver.support_threshold", &RunConfig::support_threshold, {}},
      {"solver.split_exponent", &RunConfig::split_exponent, {}},
      {"solver.auto_extend", &RunConfig::auto_extend, {}},
      {"solver.keep_snapshots", &RunConfig::keep_snapshots, {}},
      {"init.kind", &RunConfig::init_kind, {"ring", "bump", "barenblatt", "file"}},
      {"init.center", &RunConfig::init_center, {}},
      {"init.radius", &RunConfig::init_radius, {}},
      {"init.amplitude", &RunConfig::init_amplitude, {}},
      {"init.mass", &RunConfig::init_mass, {}},
      {"init.file", &RunConfig::init_file, {}},
      {"asymptotics.delta", &RunConfig::delta, {}},
      {"asymptotics.probes", &RunConfig::probes, {}},
      {"asymptotics.trend_from", &RunConfig::trend_from, {}},
      {"comparison.side", &RunConfig::comparison_side, {"super", "sub", "both", "none"}},
      {"comparison.eta_super", &RunConfig::eta_super, {}},
      {"comparison.eta_sub", &RunConfig::eta_sub, {}},
      {"comparison.kappa0_super", &RunConfig::kappa0_super, {}},
      {"comparison.kappa0_sub", &RunConfig::kappa0_sub, {}},
      {"comparison.mu", &RunConfig::mu, {}},
      {"comparison.k", &RunConfig::k, {}},
      {"comparison.alpha0", &RunConfig::alpha0, {}},
      {"comparison.T", &RunConfig::T, {}},
      {"comparison.sample_nt", &RunConfig::sample_nt, {}},
      {"comparison.sample_nr", &RunConfig::sample_nr, {}},
      {"comparison.sweep_decades", &RunConfig::sweep_decades, {}},
      {"stationary.tol", &RunConfig::stationary_tol, {}},
      {"sandwich.inner_radius", &RunConfig::sandwich_inner_radius, {}},
      {"sandwich.outer_radius", &RunConfig::sandwich_outer_radius, {}},
  };
  return t;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

bool parse_double(const std::string& s, double& out) {
  if (s.empty()) return false;
  errno = 0;
  char* end = nullptr;
  out = std::strtod(s.c_str(), &end);
  return errno == 0 && end == s.c_str() + s.size() && std::isfinite(out);
}

bool parse_vec2(const std::string& s, Vec2& out) {
  const auto comma = s.find(',');
  if (comma == std::string::npos) return false;
  return parse_double(trim(std::string_view(s).substr(0, comma)), out.x) &&
         parse_double(trim(std::string_view(s).substr(comma + 1)), out.y);
}

std::string vec2_text(Vec2 v) { return fmt_g17(v.x) + "," + fmt_g17(v.y); }

// Returns an error message, empty on success.
std::string assign(RunConfig& cfg, const KeyDef& def, const std::string& value) {
  return std::visit(
      [&](auto mp) -> std::string {
        using T = std::remove_reference_t<decltype(cfg.*mp)>;
        if constexpr (std::is_same_v<T, double>) {
          double v;
          if (!parse_double(value, v)) return "expected a number, got '" + value + "'";
          cfg.*mp = v;
        } else if constexpr (std::is_same_v<T, std::size_t>) {
          double v;
          if (!parse_double(value, v) || v < 0 || v != std::floor(v) || v > 1e12) {
            return "expected a nonnegative integer, got '" + value + "'";
          }
          cfg.*mp = static_cast<std::size_t>(v);
        } else if constexpr (std::is_same_v<T, bool>) {
          if (value == "true" || value == "1") {
            cfg.*mp = true;
          } else if (value == "false" || value == "0") {
            cfg.*mp = false;
          } else {
            return "expected true or false, got '" + value + "'";
          }
        } else if constexpr (std::is_same_v<T, std::string>) {
          if (!def.choices.empty() && std::find(def.choices.begin(), def.choices.end(), value) == def.choices.end()) {
            std::string all;
            for (const auto& c : def.choices) all += (all.empty() ? "" : "|") + c;
            return "expected one of " + all + ", got '" + value + "'";
          }
          cfg.*mp = value;
        } else if constexpr (std::is_same_v<T, Vec2>) {
          Vec2 v;
          if (!parse_vec2(value, v)) return "expected 'x,y', got '" + value + "'";
          cfg.*mp = v;
        } else {
          std::vector<Vec2> pts;
          std::stringstream ss(value);
          std::string item;
          while (std::getline(ss, item, ';')) {
            item = trim(item);
            if (item.empty()) continue;
            Vec2 v;
            if (!parse_vec2(item, v)) return "expected 'x,y; x,y; ...', got '" + value + "'";
            pts.push_back(v);
          }
          cfg.*mp = std::move(pts);
        }
        return {};
      },
      def.member);
}

std::string value_text(const RunConfig& cfg, const KeyDef& def) {
  return std::visit(
      [&](auto mp) -> std::string {
        using T = std::remove_cvref_t<decltype(cfg.*mp)>;
        const auto& v = cfg.*mp;
        if constexpr (std::is_same_v<T, double>) {
          return fmt_g17(v);
        } else if constexpr (std::is_same_v<T, std::size_t>) {
          return std::to_string(v);
        } else if constexpr (std::is_same_v<T, bool>) {
          return v ? "true" : "false";
        } else if constexpr (std::is_same_v<T, std::string>) {
          return v;
        } else if constexpr (std::is_same_v<T, Vec2>) {
          return vec2_text(v);
        } else {
          std::string out;
          for (const auto& p : v) out += (out.empty() ? "" : ";") + vec2_text(p);
          return out;
        }
      },
      def.member);
}

std::vector<ConfigIssue> semantic_issues(const RunConfig& c, const std::map<std::string, int>& lines) {
  std::vector<ConfigIssue> out;
  auto add = [&](const std::string& field, const std::string& msg) {
    const auto it = lines.find(field);
    out.push_back({it == lines.end() ? 0 : it->second, field, msg});
  };
  if (!(c.m > 1)) add("solver.m", "m > 1 required");
  if (!(c.hole_radius > 0)) add("hole.radius", "must be positive");
  if (!(c.hole_semi_axes.x > 0 && c.hole_semi_axes.y > 0)) add("hole.semi_axes", "semi-axes must be positive");
  if (c.hole_kind == "curve" && c.hole_points_file.empty()) add("hole.points_file", "required for hole.kind = curve");
  if (c.n < 2) add("solver.n", "at least 2 cells required");
  if (!(c.stretch >= 1)) add("solver.stretch", "stretch >= 1 required");
  if (!(c.r_out > 0)) add("solver.r_out", "must be positive");
  if (!(c.h > 0)) add("solver.h", "must be positive");
  if (!(c.extent >= 0)) add("solver.extent", "must be nonnegative");
  if (!(c.safety > 0 && c.safety <= 1)) add("solver.safety", "must lie in (0, 1]");
  if (!(c.dt_max > 0)) add("solver.dt_max", "must be positive");
  if (!(c.t_start > 0)) add("solver.t_start", "must be positive");
  if (!(c.t_end >= c.t_start)) add("solver.t_end", "t_end >= t_start required");
  if (c.hole_kind != "none" && !(c.t_start > std::exp(1.0))) add("solver.t_start", "t_start > e required with a hole");
  if (!(c.checkpoint_ratio > 1)) add("solver.checkpoint_ratio", "must exceed 1");
  if (!(c.support_threshold > 0 && c.support_threshold < 1)) add("solver.support_threshold", "must lie in (0, 1)");
  if (!(c.split_exponent > 0)) add("solver.split_exponent", "must be positive");
  if (!(c.init_radius > 0)) add("init.radius", "must be positive");
  if (!(c.init_amplitude >= 0)) add("init.amplitude", "must be nonnegative");
  if (!(c.init_mass >= 0)) add("init.mass", "must be nonnegative");
  if (c.init_kind == "file" && c.init_file.empty()) add("init.file", "required for init.kind = file");
  if (!(c.delta >= 0)) add("asymptotics.delta", "must be nonnegative (0 selects half of delta_*)");
  if (!(c.trend_from > 0)) add("asymptotics.trend_from", "must be positive");
  if (!(c.eta_super > 1)) add("comparison.eta_super", "eta_super > 1 required");
  if (!(c.eta_sub > 0 && c.eta_sub < 1)) add("comparison.eta_sub", "eta_sub in (0, 1) required");
  if (!(c.kappa0_super > 0)) add("comparison.kappa0_super", "must be positive");
  if (!(c.kappa0_sub > 0 && c.kappa0_sub < 1)) add("comparison.kappa0_sub", "must lie in (0, 1)");
  if (!(c.mu > 0 && c.mu < 1)) add("comparison.mu", "must lie in (0, 1)");
  if (!(c.k > 0)) add("comparison.k", "must be positive");
  if (!(c.alpha0 >= 0)) add("comparison.alpha0", "must be nonnegative (0 selects the default)");
  if (!(c.T > std::exp(1.0))) add("comparison.T", "T > e required");
  if (c.sample_nt == 0) add("comparison.sample_nt", "must be positive");
  if (c.sample_nr == 0) add("comparison.sample_nr", "must be positive");
  if (!(c.sweep_decades > 0)) add("comparison.sweep_decades", "must be positive");
  if (!(c.stationary_tol > 0)) add("stationary.tol", "must be positive");
  if (!(c.sandwich_inner_radius > 0 && c.sandwich_outer_radius > c.sandwich_inner_radius)) {
    add("sandwich.outer_radius", "0 < inner_radius < outer_radius required");
  }
  return out;
}

}  // namespace

std::vector<std::string> config_keys() {
  std::vector<std::string> out;
  for (const auto& d : table()) out.emplace_back(d.key);
  std::sort(out.begin(), out.end());
  return out;
}

RunConfig parse_config(const std::string& text) {
  RunConfig cfg;
  std::vector<ConfigIssue> issues;
  std::map<std::string, int> seen;
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find('#');
    const std::string s = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (s.empty()) continue;
    const auto eq = s.find('=');
    if (eq == std::string::npos) {
      issues.push_back({line, s, "expected key = value"});
      continue;
    }
    const std::string key = trim(s.substr(0, eq));
    const std::string value = trim(s.substr(eq + 1));
    const auto& t = table();
    const auto it = std::find_if(t.begin(), t.end(), [&](const KeyDef& d) { return key == d.key; });
    if (it == t.end()) {
      issues.push_back({line, key, "unknown key"});
      continue;
    }
    if (seen.count(key)) {
      issues.push_back({line, key, "duplicate key (first on line " + std::to_string(seen[key]) + ")"});
      continue;
    }
    seen[key] = line;
    const std::string err = assign(cfg, *it, value);
    if (!err.empty()) issues.push_back({line, key, err});
  }
  if (!issues.empty()) throw ConfigError(std::move(issues));
  auto sem = semantic_issues(cfg, seen);
  if (!sem.empty()) throw ConfigError(std::move(sem));
  return cfg;
}

void validate_config(const RunConfig& cfg) {
  auto sem = semantic_issues(cfg, {});
  if (!sem.empty()) throw ConfigError(std::move(sem));
}

std::string normalize_config(const RunConfig& cfg) {
  std::vector<std::pair<std::string, std::string>> rows;
  for (const auto& d : table()) rows.emplace_back(d.key, value_text(cfg, d));
  std::sort(rows.begin(), rows.end());
  std::string out;
  for (const auto& [k, v] : rows) out += k + " = " + v + "\n";
  return out;
}

std::uint64_t config_hash(const RunConfig& cfg) {
  return fnv1a(normalize_config(cfg), fnv1a(std::string(kToolVersion) + "\n"));
}

std::string config_hash_hex(const RunConfig& cfg) { return hex64(config_hash(cfg)); }

RunConfig load_config_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open config file " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str());
}

std::vector<std::pair<std::string, std::string>> read_key_values(const std::string& text) {
  std::vector<std::pair<std::string, std::string>> out;
  std::vector<ConfigIssue> issues;
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find('#');
    const std::string s = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (s.empty()) continue;
    const auto eq = s.find('=');
    if (eq == std::string::npos) {
      issues.push_back({line, s, "expected key = value"});
      continue;
    }
    out.emplace_back(trim(s.substr(0, eq)), trim(s.substr(eq + 1)));
  }
  if (!issues.empty()) throw ConfigError(std::move(issues));
  return out;
}

}  // namespace pmelab
