#include "pmelab/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <numbers>
#include <sstream>

#include <fmt/format.h>

#include "pmelab/errors.hpp"
#include "pmelab/field_io.hpp"
#include "pmelab/svg.hpp"
#include "pmelab/util.hpp"

namespace fs = std::filesystem;

namespace pmelab {

std::optional<HoleGeometry> make_hole(const RunConfig& cfg) {
  if (cfg.hole_kind == "disk") return HoleGeometry::disk(cfg.hole_radius);
  if (cfg.hole_kind == "ellipse") return HoleGeometry::ellipse(cfg.hole_semi_axes.x, cfg.hole_semi_axes.y);
  if (cfg.hole_kind == "curve") return HoleGeometry::curve(read_curve_points(cfg.hole_points_file));
  return std::nullopt;
}

bool uses_radial_grid(const RunConfig& cfg) {
  const bool radial_ok = cfg.hole_kind == "disk" || cfg.hole_kind == "none";
  if (cfg.grid_kind == "radial") {
    if (!radial_ok) throw ConfigError({{0, "grid.kind", "radial grids need a disk hole or none"}});
    return true;
  }
  if (cfg.grid_kind == "masked") return false;
  return radial_ok;
}

namespace {

// Largest radius reached by the initial data (0 when unknown).
double initial_support_radius(const RunConfig& cfg) {
  if (cfg.init_kind == "ring" || cfg.init_kind == "bump") return norm(cfg.init_center) + cfg.init_radius;
  if (cfg.init_kind == "barenblatt") {
    const auto spec = make_profile(cfg.m, 2, cfg.init_mass);
    return xi_M(spec) * std::pow(cfg.t_start, spec.beta());
  }
  return 0.0;
}

double auto_extent(const RunConfig& cfg, const std::optional<HoleGeometry>& hole, double support) {
  if (cfg.extent > 0) return 2 * cfg.h * std::ceil(cfg.extent / (2 * cfg.h) - 1e-9);
  double e = hole ? 2.2 * hole->diameter() + 4 * cfg.h : 4.0;
  e = std::max(e, 2.0 * (support / 0.6 + cfg.h));
  return 2 * cfg.h * std::ceil(e / (2 * cfg.h) - 1e-9);
}

std::function<double(Vec2)> initial_function(const RunConfig& cfg) {
  const double a = cfg.init_amplitude, rho = cfg.init_radius;
  const Vec2 c = cfg.init_center;
  if (cfg.init_kind == "ring") {
    const double rc = norm(c);
    return [=](Vec2 x) {
      const double d = (norm(x) - rc) / rho;
      return a * std::max(0.0, 1.0 - d * d);
    };
  }
  if (cfg.init_kind == "bump") {
    return [=](Vec2 x) {
      const Vec2 d = x - c;
      return a * std::max(0.0, 1.0 - dot(d, d) / (rho * rho));
    };
  }
  const auto spec = make_profile(cfg.m, 2, cfg.init_mass);
  const double t0 = cfg.t_start;
  return [=](Vec2 x) { return barenblatt(spec, x, t0); };
}

}  // namespace

std::shared_ptr<const Mesh> make_initial_mesh(const RunConfig& cfg, const std::optional<HoleGeometry>& hole) {
  if (uses_radial_grid(cfg)) {
    if (hole) {
      if (!(cfg.r_out > hole->radius())) throw ConfigError({{0, "solver.r_out", "r_out must exceed the hole radius"}});
      return std::make_shared<const Mesh>(make_mesh(build_radial_grid(hole->radius(), cfg.r_out, cfg.n, cfg.stretch)));
    }
    return std::make_shared<const Mesh>(make_mesh(build_whole_plane_radial_grid(cfg.r_out, cfg.n)));
  }
  const double extent = auto_extent(cfg, hole, initial_support_radius(cfg));
  if (hole) return std::make_shared<const Mesh>(make_mesh(build_masked_grid(*hole, extent, cfg.h), 0.25));
  return std::make_shared<const Mesh>(make_mesh(build_masked_grid_whole_plane(extent, cfg.h), 0.25));
}

Problem build_problem(const RunConfig& cfg) {
  validate_config(cfg);
  Problem p;
  p.cfg = cfg;
  p.hole = make_hole(cfg);
  auto mesh = make_initial_mesh(cfg, p.hole);
  if (mesh->is_radial() && cfg.init_kind == "bump" && norm(cfg.init_center) > 0) {
    throw ConfigError({{0, "init.kind", "off-centre bumps need a masked grid"}});
  }
  if (cfg.init_kind == "file") {
    const FieldFile f = read_field(cfg.init_file);
    if (f.descriptor != mesh->descriptor()) throw IncompatibleGrids("init.file was written on a different mesh");
    p.initial = make_state(mesh, cfg.m, cfg.t_start, f.values);
  } else {
    p.initial = sample_state(mesh, cfg.m, cfg.t_start, initial_function(cfg));
  }
  if (mesh->is_radial()) {
    p.extend = [](const Mesh& m) {
      return std::make_shared<const Mesh>(make_mesh(extend_radial_grid(m.radial(), 2 * m.radial().r_out())));
    };
  } else {
    auto hole = p.hole;
    p.extend = [hole](const Mesh& m) {
      const auto& g = m.masked();
      const double extent = 2.0 * g.h * static_cast<double>(g.nx);
      auto grid = hole ? build_masked_grid(*hole, extent, g.h) : build_masked_grid_whole_plane(extent, g.h);
      return std::make_shared<const Mesh>(make_mesh(grid, 0.25));
    };
  }
  const double tol = cfg.stationary_tol;
  if (p.hole) {
    auto hole = *p.hole;
    p.phi_on = [hole, tol](const std::shared_ptr<const Mesh>& m) { return solve_stationary_on(m, hole, tol).phi; };
    switch (hole.kind()) {
      case HoleGeometry::Kind::Disk:
        p.potential = disk_potential(hole.radius());
        break;
      case HoleGeometry::Kind::Ellipse:
        p.potential = conformal_potential(conformal_ellipse(hole.semi_x(), hole.semi_y()));
        break;
      case HoleGeometry::Kind::Curve:
        p.potential = field_potential(solve_stationary_numeric(hole, tol));
        break;
    }
  } else {
    p.phi_on = [](const std::shared_ptr<const Mesh>& m) { return std::vector<double>(m->size(), 0.0); };
  }
  return p;
}

RunOptions run_options(const Problem& p) {
  RunOptions o;
  o.t_end = p.cfg.t_end;
  o.safety = p.cfg.safety;
  o.dt_max = p.cfg.dt_max;
  o.checkpoint_ratio = p.cfg.checkpoint_ratio;
  o.support_threshold = p.cfg.support_threshold;
  o.auto_extend = p.cfg.auto_extend;
  o.keep_snapshots = true;
  o.extend_mesh = p.extend;
  if (p.hole) o.phi_provider = p.phi_on;
  return o;
}

std::vector<double> trend_times(const std::vector<double>& t, double trend_from) {
  std::vector<double> out;
  if (t.empty()) return out;
  auto present = [&](double v) {
    return std::any_of(t.begin(), t.end(), [&](double s) { return std::abs(s - v) <= 1e-9 * v; });
  };
  for (int k = -20; k <= 40; ++k) {
    const double v = std::pow(10.0, k);
    if (v < trend_from * (1 - 1e-12) || v > t.back() * (1 + 1e-12)) continue;
    if (present(v)) out.push_back(v);
  }
  if (t.back() >= trend_from && (out.empty() || std::abs(out.back() - t.back()) > 1e-9 * t.back())) {
    out.push_back(t.back());
  }
  return out;
}

namespace {

const DiagnosticRow* row_at(const std::vector<DiagnosticRow>& rows, double t) {
  for (const auto& r : rows) {
    if (std::abs(r.t - t) <= 1e-9 * t) return &r;
  }
  return nullptr;
}

bool strictly_decreasing(const std::vector<double>& v) {
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (!(v[i] < v[i - 1])) return false;
  }
  return true;
}

std::string join(const std::vector<double>& v) {
  std::string out;
  for (double x : v) out += (out.empty() ? "" : " ") + fmt::format("{:.4g}", x);
  return out;
}

ErrorStat nan_stat() {
  ErrorStat s;
  s.sup = s.inf = s.abs_max = NAN;
  return s;
}

}  // namespace

Analysis analyze_run(const Problem& p, const RunRecord& rec, const std::vector<std::vector<double>>& phi) {
  Analysis a;
  const auto& cfg = p.cfg;
  if (!p.hole || rec.rows.empty() || !(rec.rows.front().weighted_moment > 0)) {
    a.criteria.push_back({"asymptotics", "skipped", "needs a hole and nonzero data"});
    return a;
  }
  a.has_hole = true;
  const double M0 = rec.rows.front().weighted_moment;
  a.spec = make_critical(cfg.m, M0);
  a.delta = cfg.delta > 0 ? cfg.delta : 0.5 * a.spec.delta_star();
  if (!(a.delta < a.spec.delta_star())) {
    throw ConfigError({{0, "asymptotics.delta", fmt::format("delta must lie in (0, delta_* = {:.6g})", a.spec.delta_star())}});
  }
  for (const auto& r : rec.rows) a.M_phi_drift = std::max(a.M_phi_drift, std::abs(r.weighted_moment - M0) / M0);
  a.criteria.push_back({"conservation", a.M_phi_drift <= 5e-3 ? "pass" : "fail",
                        fmt::format("max relative drift of M_phi {:.3e}", a.M_phi_drift)});
  if (rec.rows.size() < 2) {
    a.criteria.push_back({"trends", "skipped", "degenerate run"});
    return a;
  }
  const double L_ratio = 2.0 * cfg.m * M0;
  for (std::size_t k = 0; k < rec.snapshots.size(); ++k) {
    const auto& s = rec.snapshots[k];
    const auto& cp = rec.rows[k];
    if (!(s.t > std::numbers::e)) continue;
    DiagnosticRow row;
    row.t = s.t;
    row.mass_ratio = std::log(s.t) * cp.mass / L_ratio;
    const double sr = critical_support_radius(a.spec, s.t);
    row.support_minus = cp.zeta_minus / sr;
    row.support_plus = cp.zeta_plus / sr;
    try {
      row.near = weighted_error(s, phi[k], a.spec, a.delta);
    } catch (const EmptyRegion&) {
      row.near = nan_stat();
    }
    try {
      row.far = outer_error(s, a.spec, a.delta);
    } catch (const EmptyRegion&) {
      row.far = nan_stat();
    }
    row.compact = compact_limit(s, p.potential, a.spec, cfg.probes);
    a.rows.push_back(std::move(row));
  }

  std::vector<double> ts;
  for (const auto& r : a.rows) ts.push_back(r.t);
  const auto tt = trend_times(ts, cfg.trend_from);
  std::vector<const DiagnosticRow*> tr;
  for (double t : tt) tr.push_back(row_at(a.rows, t));

  const double xs = a.spec.xi_star();
  std::vector<double> xi;
  for (int i = 0; i <= 48; ++i) xi.push_back(1.2 * xs * i / 48.0);
  for (const auto* r : tr) {
    std::size_t k = 0;
    while (rec.snapshots[k].t != r->t) ++k;
    const auto w = to_scaled_variables(rec.snapshots[k], a.spec, xi);
    for (std::size_t i = 0; i < xi.size(); ++i) a.profile.push_back({r->t, xi[i], w[i], a.spec.F_star(xi[i])});
  }

  if (tr.size() < 2) {
    a.criteria.push_back({"trends", "skipped", "fewer than two trend times at or after asymptotics.trend_from"});
    return a;
  }
  const auto& first = *tr.front();
  const auto& last = *tr.back();
  {
    std::vector<double> dev;
    for (const auto* r : tr) dev.push_back(std::abs(r->mass_ratio - 1));
    const bool ok = last.mass_ratio > 0.6 && last.mass_ratio < 1.4 && strictly_decreasing(dev);
    a.criteria.push_back({"mass_law", ok ? "pass" : "fail", "|ratio-1| at trend times: " + join(dev)});
  }
  {
    const double drop = first.far.abs_max / last.far.abs_max;
    a.criteria.push_back({"far_field", drop >= 2 ? "pass" : "fail",
                          fmt::format("outer error {:.4g} -> {:.4g}, reduction {:.3g}x (need 2x)", first.far.abs_max,
                                      last.far.abs_max, drop)});
  }
  {
    const double drop = first.near.abs_max / last.near.abs_max;
    a.criteria.push_back({"near_field", drop >= 2 ? "pass" : "fail",
                          fmt::format("inner error {:.4g} -> {:.4g}, reduction {:.3g}x (need 2x)", first.near.abs_max,
                                      last.near.abs_max, drop)});
  }
  {
    bool ok = !cfg.probes.empty();
    std::string detail;
    for (std::size_t q = 0; q < cfg.probes.size(); ++q) {
      std::vector<double> dev;
      for (const auto* r : tr) dev.push_back(std::abs(r->compact[q] - 1));
      const double v = last.compact[q];
      ok = ok && v > 1 / 1.5 && v < 1.5 && strictly_decreasing(dev);
      detail += fmt::format("{}probe {} final {:.4g}, |ratio-1| at trend times {}", q ? "; " : "", q, v, join(dev));
    }
    a.criteria.push_back({"compact_limit", ok ? "pass" : "fail", detail});
  }
  {
    const std::size_t n = std::min<std::size_t>(3, tr.size());
    std::vector<double> dm, dp;
    for (std::size_t i = tr.size() - n; i < tr.size(); ++i) {
      dm.push_back(std::abs(tr[i]->support_minus - 1));
      dp.push_back(std::abs(tr[i]->support_plus - 1));
    }
    auto inside = [](double v) { return v > 0.7 && v < 1.3; };
    const bool band = inside(last.support_minus) && inside(last.support_plus);
    const bool mono = strictly_decreasing(dm) && strictly_decreasing(dp);
    a.criteria.push_back({"support_law", band && mono ? "pass" : "fail",
                          fmt::format("final {:.4g} / {:.4g}; |ratio-1| over last trend times: {} / {}",
                                      last.support_minus, last.support_plus, join(dm), join(dp))});
  }
  return a;
}

std::vector<std::string> write_diagnostics(const std::string& dir, const RunRecord& rec, const Analysis& a) {
  std::vector<std::string> files{"run_record.csv", "mass_ratio.csv", "support_ratio.csv",
                                 "errors.csv",     "compact_limit.csv", "scaled_profile.csv"};
  {
    CsvWriter w(dir + "/run_record.csv", {"t", "mass", "weighted_moment", "zeta_minus", "zeta_plus", "sup_u"});
    if (!rec.degenerate || rec.rows.size() > 1) {
      for (const auto& r : rec.rows) w.row({r.t, r.mass, r.weighted_moment, r.zeta_minus, r.zeta_plus, r.sup_u});
    }
  }
  CsvWriter mr(dir + "/mass_ratio.csv", {"t", "log_t", "ratio"});
  CsvWriter sr(dir + "/support_ratio.csv", {"t", "log_t", "zeta_minus_ratio", "zeta_plus_ratio"});
  CsvWriter er(dir + "/errors.csv", {"t", "log_t", "near_sup", "near_inf", "near_abs", "near_count", "far_sup",
                                     "far_inf", "far_abs", "far_count", "delta"});
  std::vector<std::string> ch{"t", "log_t"};
  const std::size_t nprobe = a.rows.empty() ? 0 : a.rows.front().compact.size();
  for (std::size_t q = 0; q < nprobe; ++q) ch.push_back("probe_" + std::to_string(q));
  CsvWriter cl(dir + "/compact_limit.csv", ch);
  for (const auto& r : a.rows) {
    const double lt = std::log(r.t);
    mr.row({r.t, lt, r.mass_ratio});
    sr.row({r.t, lt, r.support_minus, r.support_plus});
    er.row({r.t, lt, r.near.sup, r.near.inf, r.near.abs_max, static_cast<double>(r.near.count), r.far.sup, r.far.inf,
            r.far.abs_max, static_cast<double>(r.far.count), a.delta});
    std::vector<double> row{r.t, lt};
    row.insert(row.end(), r.compact.begin(), r.compact.end());
    cl.row(row);
  }
  CsvWriter sp(dir + "/scaled_profile.csv", {"t", "xi", "w", "F_star"});
  for (const auto& s : a.profile) sp.row({s.t, s.xi, s.w, s.F_star});
  return files;
}

std::vector<std::string> emit_plots(const std::string& dir) {
  const auto mass = read_csv(dir + "/mass_ratio.csv");
  const auto supp = read_csv(dir + "/support_ratio.csv");
  const auto err = read_csv(dir + "/errors.csv");
  const auto prof = read_csv(dir + "/scaled_profile.csv");
  auto col = [](const CsvTable& t, const std::string& name) {
    std::vector<double> v;
    const std::size_t c = t.column(name);
    for (const auto& r : t.rows) v.push_back(r[c]);
    return v;
  };
  {
    PlotSpec s{"mass ratio", "log t", "log t M(t) / (2m M_phi)", {{"ratio", col(mass, "log_t"), col(mass, "ratio")}}, 1.0};
    write_svg(dir + "/mass_ratio.svg", s);
  }
  {
    PlotSpec s{"support ratio", "log t", "zeta / predicted radius",
               {{"zeta_minus", col(supp, "log_t"), col(supp, "zeta_minus_ratio")},
                {"zeta_plus", col(supp, "log_t"), col(supp, "zeta_plus_ratio")}},
               1.0};
    write_svg(dir + "/support_ratio.svg", s);
  }
  {
    PlotSpec s{"scaled errors", "log t", "sup error",
               {{"near (weighted)", col(err, "log_t"), col(err, "near_abs")},
                {"far (outer)", col(err, "log_t"), col(err, "far_abs")}},
               std::nullopt};
    write_svg(dir + "/errors.svg", s);
  }
  {
    PlotSpec s{"scaled profile", "xi", "w", {}, std::nullopt};
    const auto t = col(prof, "t");
    const auto xi = col(prof, "xi");
    const auto w = col(prof, "w");
    const auto F = col(prof, "F_star");
    PlotSeries ref{"F_*", {}, {}};
    for (std::size_t i = 0; i < t.size();) {
      PlotSeries ser{fmt::format("t = {:.3g}", t[i]), {}, {}};
      const double ti = t[i];
      const bool last = t.back() == ti;
      for (; i < t.size() && t[i] == ti; ++i) {
        ser.x.push_back(xi[i]);
        ser.y.push_back(w[i]);
        if (last) {
          ref.x.push_back(xi[i]);
          ref.y.push_back(F[i]);
        }
      }
      s.series.push_back(std::move(ser));
    }
    s.series.insert(s.series.begin(), std::move(ref));
    write_svg(dir + "/scaled_profile.svg", s);
  }
  return {"mass_ratio.svg", "support_ratio.svg", "errors.svg", "scaled_profile.svg"};
}

bool RunSummary::all_pass() const {
  return std::all_of(criteria.begin(), criteria.end(), [](const auto& kv) { return kv.second != "fail"; });
}

std::string RunSummary::to_text() const {
  std::string out;
  out += "config_hash=" + config_hash + "\n";
  out += "tool_version=" + tool_version + "\n";
  out += "wall_time=" + fmt::format("{:.3f}", wall_time) + "\n";
  out += std::string("degenerate=") + (degenerate ? "true" : "false") + "\n";
  out += "series_length=" + std::to_string(series_length) + "\n";
  for (const auto& [k, v] : criteria) out += "criterion." + k + "=" + v + "\n";
  for (const auto& f : files) out += "file=" + f + "\n";
  out += "status=complete\n";
  return out;
}

RunSummary RunSummary::from_text(const std::string& text) {
  RunSummary s;
  bool complete = false;
  for (const auto& [k, v] : read_key_values(text)) {
    if (k == "config_hash") s.config_hash = v;
    else if (k == "tool_version") s.tool_version = v;
    else if (k == "wall_time") s.wall_time = std::stod(v);
    else if (k == "degenerate") s.degenerate = v == "true";
    else if (k == "series_length") s.series_length = std::stoul(v);
    else if (k.rfind("criterion.", 0) == 0) s.criteria[k.substr(10)] = v;
    else if (k == "file") s.files.push_back(v);
    else if (k == "status") complete = v == "complete";
  }
  if (!complete) throw IoError("summary is incomplete");
  return s;
}

namespace {

template <class Fn>
auto stage(const std::string& dir, const std::string& name, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const std::exception& e) {
    write_text_file(dir + "/error.txt", "stage=" + name + "\nerror=" + e.what() + "\n");
    throw;
  }
}

std::string snapshot_name(std::size_t k) { return fmt::format("snapshots/snap_{:04d}.pmef", k); }

void write_snapshots(const std::string& dir, const RunRecord& rec, std::vector<std::string>& files) {
  fs::create_directories(dir + "/snapshots");
  for (std::size_t k = 0; k < rec.snapshots.size(); ++k) {
    const auto& s = rec.snapshots[k];
    write_field(dir + "/" + snapshot_name(k), {"u", s.t, s.mesh->descriptor(), s.u});
    files.push_back(snapshot_name(k));
  }
}

}  // namespace

std::vector<std::vector<double>> phi_per_snapshot(const Problem& p, const RunRecord& rec) {
  std::vector<std::vector<double>> out;
  const Mesh* last = nullptr;
  for (const auto& s : rec.snapshots) {
    if (last && s.mesh.get() == last) {
      out.push_back(out.back());
    } else {
      out.push_back(p.phi_on(s.mesh));
      last = s.mesh.get();
    }
  }
  return out;
}

ComparisonOutcome run_comparison(const Problem& p, const RunRecord& rec, const std::vector<std::vector<double>>& phi,
                                 const Analysis& a, const std::string& dir) {
  ComparisonOutcome out;
  const auto& cfg = p.cfg;
  if (cfg.comparison_side == "none") return out;
  if (!a.has_hole) {
    out.criteria.push_back({"comparison", "skipped", "needs a hole and nonzero data"});
    return out;
  }
  const bool do_super = cfg.comparison_side == "super" || cfg.comparison_side == "both";
  const bool do_sub = cfg.comparison_side == "sub" || cfg.comparison_side == "both";
  const HoleGeometry& hole = *p.hole;
  SuperParams sp{cfg.eta_super, cfg.kappa0_super, cfg.mu, cfg.k, cfg.T};
  SubParams bp{cfg.eta_sub, cfg.kappa0_sub, cfg.mu, cfg.alpha0, cfg.T};
  if (!(bp.alpha0 > 0)) bp.alpha0 = 0.5 * alpha_bar_0(p.potential, hole, p.initial.mesh->spacing());
  const int k0 = static_cast<int>(std::ceil(std::log10(cfg.T) - 1e-12));
  const double r_hole = hole.outer_radius();

  CsvWriter csv(dir + "/comparison.csv", {"side", "t", "x", "y", "A", "B", "A_plus_B"});
  out.files.push_back("comparison.csv");
  auto dump = [&](const std::string& side, double T, double r_lo, auto&& eval) {
    for (int i = 0; i < 10; ++i) {
      const double t = T * std::pow(10.0, 2.0 * i / 9.0);
      const double ri = inner_radius(a.spec, a.delta, t);
      for (int j = 1; j <= 20; ++j) {
        const double r = r_lo * std::pow(ri / r_lo, j / 20.0);
        const Vec2 x{r, 0.0};
        const ABValue v = eval(x, t);
        if (v.inside) csv.row(side, {t, x.x, x.y, v.A, v.B, v.A + v.B});
      }
    }
  };
  auto sweep_result = [&](const std::string& name, const ThresholdResult& r) {
    out.criteria.push_back({name, r.found ? "pass" : "fail",
                            r.found ? fmt::format("threshold T = {:.3g} ({} samples)", r.T, r.report.samples)
                                    : fmt::format("no threshold up to 1e80; min A+B {:.3g}", r.report.min_AB)});
  };
  SampleGrid grid{0, 0, cfg.sample_nt, cfg.sample_nr, r_hole};
  if (do_super) {
    RegionSpec outer{a.delta, cfg.T, RegionSpec::Kind::InnerOuter, Side::Super, cfg.split_exponent};
    RegionSpec inner = outer;
    inner.kind = RegionSpec::Kind::InnerInner;
    const auto ro = find_sign_threshold(sp, p.potential, a.spec, outer, grid, k0, 80, cfg.sweep_decades);
    const auto rin = find_sign_threshold(sp, p.potential, a.spec, inner, grid, k0, 80, cfg.sweep_decades);
    sweep_result("signs_super_outer", ro);
    sweep_result("signs_super_inner", rin);
    SuperParams dp = sp;
    dp.T = std::max({ro.found ? ro.T : cfg.T, rin.found ? rin.T : cfg.T});
    dump("super", dp.T, r_hole, [&](Vec2 x, double t) { return eval_AB(dp, p.potential, a.spec, x, t, cfg.split_exponent); });
  }
  if (do_sub) {
    RegionSpec inner{a.delta, cfg.T, RegionSpec::Kind::Inner, Side::Sub, 1.0};
    SampleGrid g = grid;
    g.r_min = r_hole * std::exp(bp.alpha0);
    const auto r = find_sign_threshold(bp, p.potential, a.spec, inner, g, k0, 80, cfg.sweep_decades);
    sweep_result("signs_sub", r);
    SubParams dp = bp;
    dp.T = r.found ? r.T : cfg.T;
    dump("sub", dp.T, g.r_min, [&](Vec2 x, double t) { return eval_AB(dp, p.potential, a.spec, x, t); });
  }

  if (rec.snapshots.size() > 1) {
    CsvWriter oc(dir + "/ordering.csv", {"side", "kappa0", "T", "checkpoints", "checked", "failures", "worst"});
    out.files.push_back("ordering.csv");
    auto report = [&](const std::string& side, const OrderingReport& r) {
      oc.row(side, {r.kappa0, r.T, static_cast<double>(r.checkpoints), static_cast<double>(r.checked),
                    static_cast<double>(r.failures), r.worst});
      out.criteria.push_back({"ordering_" + side, r.pass ? "pass" : "fail",
                              fmt::format("kappa0 {:.4g}, {} of {} points ordered", r.kappa0, r.checked - r.failures,
                                          r.checked)});
    };
    try {
      if (do_super) report("super", verify_ordering(rec.snapshots, phi, sp, a.spec, a.delta));
    } catch (const CalibrationError& e) {
      out.criteria.push_back({"ordering_super", "fail", e.what()});
    }
    try {
      if (do_sub) report("sub", verify_ordering(rec.snapshots, phi, bp, a.spec, a.delta));
    } catch (const CalibrationError& e) {
      out.criteria.push_back({"ordering_sub", "fail", e.what()});
    }
  }
  return out;
}

RunSummary run_experiment(const RunConfig& cfg, const std::string& out_root) {
  const auto t0 = std::chrono::steady_clock::now();
  RunSummary sum;
  sum.config_hash = config_hash_hex(cfg);
  sum.tool_version = kToolVersion;
  const std::string dir = out_root + "/" + sum.config_hash;
  sum.directory = dir;
  const std::string summary_path = dir + "/summary.txt";
  if (fs::exists(summary_path)) {
    try {
      RunSummary old = RunSummary::from_text(read_text_file(summary_path));
      const bool intact = std::all_of(old.files.begin(), old.files.end(), [&](const std::string& f) {
        return fs::exists(dir + "/" + f) && fs::file_size(dir + "/" + f) > 0;
      });
      if (old.config_hash == sum.config_hash && intact) {
        old.cached = true;
        old.directory = dir;
        return old;
      }
    } catch (const IoError&) {
      // incomplete earlier attempt; recompute
    }
  }
  fs::create_directories(dir);
  fs::remove(dir + "/error.txt");
  write_text_file(dir + "/config.txt", normalize_config(cfg));
  sum.files.push_back("config.txt");

  Problem p = stage(dir, "stationary", [&] {
    Problem q = build_problem(cfg);
    if (q.hole) {
      const auto field = solve_stationary_on(q.initial.mesh, *q.hole, cfg.stationary_tol);
      write_field(dir + "/phi.pmef", {"phi", 0.0, field.mesh->descriptor(), field.phi});
      const auto g = check_gradient_bounds(field);
      write_text_file(dir + "/stationary.txt",
                      fmt::format("C_est={}\nC_phi={}\nresidual={}\nc_low={}\nC_high={}\nR_split={}\nbounds_hold={}\n",
                                  fmt_g17(field.C_est), fmt_g17(field.C_phi), fmt_g17(field.residual), fmt_g17(g.c_low),
                                  fmt_g17(g.C_high), fmt_g17(g.R_split), g.bounds_hold ? "true" : "false"));
      sum.files.push_back("phi.pmef");
      sum.files.push_back("stationary.txt");
    }
    return q;
  });

  RunRecord rec = stage(dir, "simulate", [&] {
    RunRecord r = run(p.initial, run_options(p));
    if (cfg.keep_snapshots) write_snapshots(dir, r, sum.files);
    return r;
  });
  sum.degenerate = rec.degenerate;

  const auto phi = stage(dir, "stationary", [&] { return phi_per_snapshot(p, rec); });
  Analysis a = stage(dir, "verify-asymptotics", [&] { return analyze_run(p, rec, phi); });
  sum.series_length = a.rows.size();
  stage(dir, "verify-asymptotics", [&] {
    for (const auto& f : write_diagnostics(dir, rec, a)) sum.files.push_back(f);
    if (a.rows.size() >= 2) {
      for (const auto& f : emit_plots(dir)) sum.files.push_back(f);
    }
    return 0;
  });
  for (const auto& c : a.criteria) sum.criteria[c.name] = c.status;

  if (!rec.degenerate) {
    const auto cmp = stage(dir, "check-comparison", [&] { return run_comparison(p, rec, phi, a, dir); });
    for (const auto& c : cmp.criteria) sum.criteria[c.name] = c.status;
    for (const auto& f : cmp.files) sum.files.push_back(f);
    std::string report;
    for (const auto& c : a.criteria) report += c.name + "=" + c.status + " # " + c.detail + "\n";
    for (const auto& c : cmp.criteria) report += c.name + "=" + c.status + " # " + c.detail + "\n";
    write_text_file(dir + "/report.txt", report);
    sum.files.push_back("report.txt");
  }
  sum.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  write_text_file(summary_path, sum.to_text());
  return sum;
}

LoadedRun load_run(const std::string& dir) {
  LoadedRun out;
  out.problem = build_problem(load_config_file(dir + "/config.txt"));
  const auto& p = out.problem;
  std::vector<std::string> snaps;
  if (fs::exists(dir + "/snapshots")) {
    for (const auto& e : fs::directory_iterator(dir + "/snapshots")) {
      if (e.path().extension() == ".pmef") snaps.push_back(e.path().string());
    }
  }
  if (snaps.empty()) throw IoError("no snapshots under " + dir + " (solver.keep_snapshots = false?)");
  std::sort(snaps.begin(), snaps.end());
  std::vector<std::shared_ptr<const Mesh>> chain{p.initial.mesh};
  std::vector<std::vector<double>> chain_phi{p.phi_on(p.initial.mesh)};
  for (const auto& path : snaps) {
    const FieldFile f = read_field(path);
    std::size_t k = 0;
    while (chain[k]->descriptor() != f.descriptor) {
      if (++k == chain.size()) {
        if (chain.size() > 24) throw IncompatibleGrids("snapshot mesh not reachable by extension: " + path);
        chain.push_back(p.extend(*chain.back()));
        chain_phi.push_back(p.phi_on(chain.back()));
      }
    }
    SolverState s = make_state(chain[k], p.cfg.m, f.time, f.values);
    Checkpoint cp;
    cp.t = s.t;
    cp.mass = s.mass();
    cp.sup_u = s.sup();
    const auto& v = s.mesh->volume();
    for (std::size_t c = 0; c < s.u.size(); ++c) cp.weighted_moment += v[c] * s.u[c] * chain_phi[k][c];
    if (cp.sup_u > 0) {
      const auto z = support_radii(s, p.cfg.support_threshold * cp.sup_u);
      cp.zeta_minus = z.zeta_minus;
      cp.zeta_plus = z.zeta_plus;
    }
    out.record.rows.push_back(cp);
    out.record.snapshots.push_back(std::move(s));
    out.phi.push_back(chain_phi[k]);
  }
  out.record.degenerate = out.record.rows.size() < 2;
  return out;
}

SandwichOutcome run_sandwich(const RunConfig& cfg, const std::string& csv_path) {
  validate_config(cfg);
  const auto hole = make_hole(cfg);
  if (!hole) throw ConfigError({{0, "hole.kind", "the sandwich needs a hole"}});
  const double r = cfg.sandwich_inner_radius, R = cfg.sandwich_outer_radius;
  if (hole->inner_radius() < r || hole->outer_radius() > R) {
    throw ParameterError("sandwich radii must satisfy B_inner inside the hole inside B_outer");
  }
  const auto small = HoleGeometry::disk(r);
  const auto big = HoleGeometry::disk(R);
  const auto f = initial_function(cfg);
  // Size the box from the small-hole weighted mass, whose profile spreads furthest.
  double extent = cfg.extent;
  if (!(extent > 0)) {
    const double e0 = auto_extent(cfg, big, initial_support_radius(cfg));
    const auto probe = std::make_shared<const Mesh>(make_mesh(build_masked_grid(small, e0, cfg.h), 0.25));
    const auto s0 = sample_state(probe, cfg.m, cfg.t_start, f);
    double Mphi = 0;
    for (std::size_t c = 0; c < probe->size(); ++c) Mphi += probe->volume()[c] * s0.u[c] * std::log(probe->radius(c) / r);
    const auto spec = make_critical(cfg.m, Mphi);
    const double reach = std::max(initial_support_radius(cfg), 1.3 * critical_support_radius(spec, cfg.t_end));
    extent = std::max(e0, 2.0 * (reach / 0.65 + cfg.h));
  }
  extent = 2 * cfg.h * std::ceil(extent / (2 * cfg.h) - 1e-9);
  std::vector<SolverState> states;
  for (const auto& hg : {small, *hole, big}) {
    auto mesh = std::make_shared<const Mesh>(make_mesh(build_masked_grid(hg, extent, cfg.h), 0.25));
    states.push_back(sample_state(mesh, cfg.m, cfg.t_start, f));
  }
  RunOptions o;
  o.t_end = cfg.t_end;
  o.safety = cfg.safety;
  o.dt_max = cfg.dt_max;
  o.checkpoint_ratio = cfg.checkpoint_ratio;
  o.auto_extend = false;
  SandwichOutcome out;
  out.ordered = true;
  CsvWriter csv(csv_path, {"t", "M_plus", "M_minus", "mass", "violations", "max_violation", "spread_log_t"});
  run_lockstep(states, o, [&](const std::vector<SolverState>& s) {
    const auto rep = sandwich_check(s[0], s[1], s[2], r, R);
    out.ordered = out.ordered && rep.ordered;
    out.violations += rep.violations;
    out.t.push_back(s[1].t);
    out.M_plus.push_back(rep.M_plus);
    out.M_minus.push_back(rep.M_minus);
    out.mass.push_back(rep.mass);
    const double lt = s[1].t > 1 ? std::log(s[1].t) : NAN;
    csv.row({s[1].t, rep.M_plus, rep.M_minus, rep.mass, static_cast<double>(rep.violations), rep.max_violation,
             (rep.M_plus - rep.M_minus) * lt});
  });
  std::vector<double> D;
  bool within = true;
  for (std::size_t i = 0; i < out.t.size(); ++i) {
    const double lt = std::log10(out.t[i]);
    if (out.t[i] < 100 * (1 - 1e-12) || std::abs(lt - std::round(lt)) > 1e-9) continue;
    const double gap = out.M_plus[i] - out.M_minus[i];
    D.push_back(gap * std::log(out.t[i]));
    within = within && gap >= 0 && gap <= std::log(R / r) * out.mass[i] * (1 + 1e-12);
  }
  if (D.size() >= 2) {
    const auto [lo, hi] = std::minmax_element(D.begin(), D.end());
    out.bounded_spread = *lo > 0 ? *hi / *lo : INFINITY;
  }
  out.pass = out.ordered && within && D.size() >= 2 && out.bounded_spread <= 2.0;
  return out;
}

}  // namespace pmelab
