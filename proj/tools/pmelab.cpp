// pmelab command line.  Exit codes: 0 pass, 1 criteria failed, 2 usage or
// config error, 3 numerical fault.
#include <chrono>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <numbers>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "pmelab/errors.hpp"
#include "pmelab/experiment.hpp"
#include "pmelab/field_io.hpp"
#include "pmelab/svg.hpp"
#include "pmelab/util.hpp"

namespace fs = std::filesystem;
using namespace pmelab;

namespace {

HoleGeometry parse_hole(const std::string& text) {
  const auto colon = text.find(':');
  const std::string kind = text.substr(0, colon);
  const std::string arg = colon == std::string::npos ? "" : text.substr(colon + 1);
  if (kind == "disk") return HoleGeometry::disk(arg.empty() ? 1.0 : std::stod(arg));
  if (kind == "ellipse") {
    const auto comma = arg.find(',');
    if (comma == std::string::npos) throw ParameterError("ellipse needs 'ellipse:a,b'");
    return HoleGeometry::ellipse(std::stod(arg.substr(0, comma)), std::stod(arg.substr(comma + 1)));
  }
  if (kind == "curve") return HoleGeometry::curve(read_curve_points(arg));
  throw ParameterError("unknown hole '" + text + "' (disk:r, ellipse:a,b or curve:file)");
}

void print_criteria(const std::vector<CriterionResult>& cs) {
  for (const auto& c : cs) fmt::print("{:<20} {:<8} {}\n", c.name, c.status, c.detail);
}

int cmd_stationary(const std::string& hole_text, double tol, const std::string& out, double h, double extent) {
  const HoleGeometry hole = parse_hole(hole_text);
  StationaryOptions opt;
  if (h > 0) opt.h = h;
  opt.extent = extent;
  const auto field = solve_stationary_numeric(hole, tol, opt);
  write_field(out, {"phi", 0.0, field.mesh->descriptor(), field.phi});
  const auto g = check_gradient_bounds(field);
  fmt::print("hole {}\nmesh {}\ncells {}\nC_est {}\nC_phi {}\nresidual {:.3e}\n", hole.describe(),
             field.mesh->descriptor(), field.mesh->size(), fmt_g17(field.C_est), fmt_g17(field.C_phi), field.residual);
  fmt::print("c_low {:.6g} C_high {:.6g} R_split {:.6g} x.grad in [{:.6g}, {:.6g}] bounds {}\n", g.c_low, g.C_high,
             g.R_split, g.min_radial, g.max_radial, g.bounds_hold ? "hold" : "fail");
  return g.bounds_hold ? 0 : 1;
}

int cmd_profile(double m, double mass, const std::string& out_dir) {
  fs::create_directories(out_dir);
  const auto spec = make_profile(m, 2, mass);
  const double xm = xi_M(spec);
  CsvWriter csv(out_dir + "/profile.csv", {"xi", "F_M"});
  PlotSeries F{"F_M", {}, {}};
  for (int i = 0; i <= 200; ++i) {
    const double xi = 1.1 * xm * i / 200.0;
    const double v = profile_F(spec, xi);
    csv.row({xi, v});
    F.x.push_back(xi);
    F.y.push_back(v);
  }
  write_svg(out_dir + "/profile_F.svg", {"Barenblatt profile", "xi", "F_M", {F}, std::nullopt});
  const auto dip = make_dipole(m, mass);
  const double xd = xi_dipole(dip);
  CsvWriter dcsv(out_dir + "/dipole.csv", {"xi", "D_M"});
  PlotSeries D{"D_M", {}, {}};
  for (int i = 0; i <= 200; ++i) {
    const double xi = 1.1 * xd * i / 200.0;
    const double v = dipole_profile(dip, xi);
    dcsv.row({xi, v});
    D.x.push_back(xi);
    D.y.push_back(v);
  }
  write_svg(out_dir + "/profile_D.svg", {"dipole profile", "xi", "D_M", {D}, std::nullopt});
  fmt::print("xi_M {}\nF_M(0) {}\nxi_dipole {}\n", fmt_g17(xm), fmt_g17(profile_F(spec, 0.0)), fmt_g17(xd));
  return 0;
}

int cmd_simulate(const std::string& config, const std::string& out_dir) {
  const auto t0 = std::chrono::steady_clock::now();
  const RunConfig cfg = load_config_file(config);
  const Problem p = build_problem(cfg);
  const RunRecord rec = run(p.initial, run_options(p));
  fs::create_directories(out_dir + "/snapshots");
  write_text_file(out_dir + "/config.txt", normalize_config(cfg));
  for (std::size_t k = 0; k < rec.snapshots.size(); ++k) {
    const auto& s = rec.snapshots[k];
    write_field(out_dir + fmt::format("/snapshots/snap_{:04d}.pmef", k), {"u", s.t, s.mesh->descriptor(), s.u});
  }
  {
    CsvWriter w(out_dir + "/run_record.csv", {"t", "mass", "weighted_moment", "zeta_minus", "zeta_plus", "sup_u"});
    for (const auto& r : rec.rows) w.row({r.t, r.mass, r.weighted_moment, r.zeta_minus, r.zeta_plus, r.sup_u});
  }
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::string s;
  s += "config_hash=" + config_hash_hex(cfg) + "\n";
  s += "tool_version=" + std::string(kToolVersion) + "\n";
  s += "grid_initial=" + p.initial.mesh->descriptor() + "\n";
  s += "grid_final=" + rec.snapshots.back().mesh->descriptor() + "\n";
  s += "extensions=" + std::to_string(rec.extensions) + "\n";
  s += "safety=" + fmt_g17(cfg.safety) + "\n";
  s += "support_threshold=" + fmt_g17(cfg.support_threshold) + "\n";
  s += "stationary_tol=" + fmt_g17(cfg.stationary_tol) + "\n";
  s += "steps=" + std::to_string(rec.rows.back().steps) + "\n";
  s += "degenerate=" + std::string(rec.degenerate ? "true" : "false") + "\n";
  s += fmt::format("wall_time={:.3f}\n", wall);
  write_text_file(out_dir + "/run_summary.txt", s);
  fmt::print("{} checkpoints, {} extensions, final t {}\n", rec.rows.size(), rec.extensions, fmt_g17(rec.rows.back().t));
  return 0;
}

int cmd_verify(const std::string& run_dir) {
  const LoadedRun lr = load_run(run_dir);
  const Analysis a = analyze_run(lr.problem, lr.record, lr.phi);
  std::vector<std::string> header{"t", "log_t", "mass_ratio", "zeta_minus_ratio", "zeta_plus_ratio", "near_abs",
                                  "near_sup", "near_inf", "far_abs", "far_sup", "far_inf"};
  const std::size_t np = lr.problem.cfg.probes.size();
  for (std::size_t q = 0; q < np; ++q) header.push_back("compact_" + std::to_string(q));
  CsvWriter csv(run_dir + "/functionals.csv", header);
  PlotSpec panel{"trend panel", "log t", "value", {}, 1.0};
  PlotSeries mass{"mass ratio", {}, {}}, supp{"support ratio", {}, {}}, near{"near error", {}, {}},
      far{"far error", {}, {}};
  for (const auto& r : a.rows) {
    const double lt = std::log(r.t);
    std::vector<double> row{r.t,           lt,         r.mass_ratio, r.support_minus, r.support_plus, r.near.abs_max,
                            r.near.sup,    r.near.inf, r.far.abs_max, r.far.sup,      r.far.inf};
    row.insert(row.end(), r.compact.begin(), r.compact.end());
    csv.row(row);
    for (auto* s : {&mass, &supp, &near, &far}) s->x.push_back(lt);
    mass.y.push_back(r.mass_ratio);
    supp.y.push_back(r.support_plus);
    near.y.push_back(r.near.abs_max);
    far.y.push_back(r.far.abs_max);
  }
  panel.series = {mass, supp, near, far};
  write_svg(run_dir + "/trends.svg", panel);
  print_criteria(a.criteria);
  for (const auto& c : a.criteria) {
    if (!c.ok()) return 1;
  }
  return 0;
}

int cmd_check_comparison(const std::string& side, const std::string& params_path, const std::string& region,
                         const std::string& config, const std::string& out_dir, bool search) {
  const RunConfig cfg = load_config_file(config);
  fs::create_directories(out_dir);
  std::string report;
  bool pass = false;
  if (side == "sandwich") {
    const auto sw = run_sandwich(cfg, out_dir + "/sandwich.csv");
    pass = sw.pass;
    report = fmt::format("side=sandwich\nordered={}\nviolations={}\nbounded_spread={}\npass={}\n", sw.ordered,
                         sw.violations, fmt_g17(sw.bounded_spread), pass);
  } else {
    const Problem p = build_problem(cfg);
    if (!p.hole) throw ConfigError({{0, "hole.kind", "comparison functions need a hole"}});
    const auto phi = p.phi_on(p.initial.mesh);
    const double Mphi = weighted_moment(*p.initial.mesh, p.initial.u, phi);
    const auto spec = make_critical(cfg.m, Mphi);
    const double delta = cfg.delta > 0 ? cfg.delta : 0.5 * spec.delta_star();
    SuperParams sp{cfg.eta_super, cfg.kappa0_super, cfg.mu, cfg.k, cfg.T};
    SubParams bp{cfg.eta_sub, cfg.kappa0_sub, cfg.mu, cfg.alpha0, cfg.T};
    if (!(bp.alpha0 > 0)) bp.alpha0 = 0.5 * alpha_bar_0(p.potential, *p.hole, p.initial.mesh->spacing());
    if (!params_path.empty()) {
      for (const auto& [k, v] : read_key_values(read_text_file(params_path))) {
        const double x = std::stod(v);
        if (k == "eta") sp.eta = bp.eta = x;
        else if (k == "kappa0") sp.kappa0 = bp.kappa0 = x;
        else if (k == "mu") sp.mu = bp.mu = x;
        else if (k == "k") sp.k = x;
        else if (k == "alpha0") bp.alpha0 = x;
        else if (k == "T") sp.T = bp.T = x;
        else throw ConfigError({{0, k, "unknown parameter (eta, kappa0, mu, k, alpha0, T)"}});
      }
    }
    RegionSpec reg{delta, sp.T, RegionSpec::Kind::Inner, side == "sub" ? Side::Sub : Side::Super, cfg.split_exponent};
    if (region == "inner-inner") reg.kind = RegionSpec::Kind::InnerInner;
    else if (region == "inner-outer") reg.kind = RegionSpec::Kind::InnerOuter;
    const double r_hole = p.hole->outer_radius();
    SampleGrid grid{sp.T, sp.T * std::pow(10.0, cfg.sweep_decades), cfg.sample_nt, cfg.sample_nr, r_hole};
    if (side == "sub") grid.r_min = r_hole * std::exp(bp.alpha0);
    const int k0 = static_cast<int>(std::ceil(std::log10(sp.T) - 1e-12));
    SignReport rep;
    double T_used = sp.T;
    if (search) {
      const auto th = side == "sub" ? find_sign_threshold(bp, p.potential, spec, reg, grid, k0, 80, cfg.sweep_decades)
                                    : find_sign_threshold(sp, p.potential, spec, reg, grid, k0, 80, cfg.sweep_decades);
      rep = th.report;
      T_used = th.T;
      pass = th.found;
    } else {
      rep = side == "sub" ? verify_lemma_signs(bp, p.potential, spec, reg, grid)
                          : verify_lemma_signs(sp, p.potential, spec, reg, grid);
      pass = rep.pass;
    }
    if (std::isfinite(T_used)) {
      sp.T = bp.T = T_used;
    }
    CsvWriter csv(out_dir + "/comparison.csv", {"t", "x", "y", "A", "B", "A_plus_B"});
    const double t_lo = sp.T;
    for (int i = 0; i < 20; ++i) {
      const double t = t_lo * std::pow(10.0, 2.0 * i / 19.0);
      const double ri = inner_radius(spec, delta, t);
      for (int j = 1; j <= 50; ++j) {
        const double r = grid.r_min * std::pow(ri / grid.r_min, j / 50.0);
        const Vec2 x{r, 0.0};
        const ABValue v = side == "sub" ? eval_AB(bp, p.potential, spec, x, t)
                                        : eval_AB(sp, p.potential, spec, x, t, cfg.split_exponent);
        if (v.inside) csv.row({t, x.x, x.y, v.A, v.B, v.A + v.B});
      }
    }
    report = fmt::format(
        "side={}\nregion={}\nM_phi={}\ndelta={}\nT={}\nsamples={}\nfailures={}\nmin_A={}\nmin_B={}\nmin_A_plus_B={}\n"
        "max_A_plus_B={}\npass={}\n",
        side, region, fmt_g17(Mphi), fmt_g17(delta), fmt_g17(T_used), rep.samples, rep.failures, fmt_g17(rep.min_A),
        fmt_g17(rep.min_B), fmt_g17(rep.min_AB), fmt_g17(rep.max_AB), pass);
  }
  write_text_file(out_dir + "/report.txt", report);
  std::cout << report;
  return pass ? 0 : 1;
}

int cmd_experiment(const std::string& config, const std::string& out_root) {
  const RunConfig cfg = load_config_file(config);
  const RunSummary s = run_experiment(cfg, out_root);
  fmt::print("directory {}\n{}{}", s.directory, s.cached ? "cached=true\n" : "", s.to_text());
  if (fs::exists(s.directory + "/report.txt")) std::cout << read_text_file(s.directory + "/report.txt");
  return s.all_pass() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"porous medium equation lab"};
  app.require_subcommand(1);

  std::string hole = "disk:1", out = "phi.pmef", out_dir = ".", config, run_dir, side = "super", params,
              region = "inner", out_root = "runs";
  double tol = 1e-10, h = 0, extent = 0, m = 2, mass = 1;
  bool search = false;

  auto* st = app.add_subcommand("stationary", "solve for phi and write a field file");
  st->add_option("--hole", hole, "disk:r | ellipse:a,b | curve:file")->capture_default_str();
  st->add_option("--tol", tol, "linear solve tolerance")->capture_default_str();
  st->add_option("--out", out, "output field file")->capture_default_str();
  st->add_option("--spacing", h, "masked-grid spacing (0: default)");
  st->add_option("--extent", extent, "masked-grid extent (0: default)");

  auto* pr = app.add_subcommand("profile", "Barenblatt and dipole profiles as CSV and SVG");
  pr->add_option("--m", m)->capture_default_str();
  pr->add_option("--mass", mass)->capture_default_str();
  pr->add_option("--out-dir", out_dir)->capture_default_str();

  auto* si = app.add_subcommand("simulate", "run the evolution and write snapshots");
  si->add_option("--config", config)->required();
  si->add_option("--out-dir", out_dir)->required();

  auto* va = app.add_subcommand("verify-asymptotics", "trend functionals of a run directory");
  va->add_option("run_dir", run_dir)->required();

  auto* cc = app.add_subcommand("check-comparison", "sign sweeps of the comparison functions, or the sandwich");
  cc->add_option("--side", side)->check(CLI::IsMember({"super", "sub", "sandwich"}))->capture_default_str();
  cc->add_option("--params", params, "key=value file: eta, kappa0, mu, k or alpha0, T");
  cc->add_option("--region", region)->check(CLI::IsMember({"inner", "inner-inner", "inner-outer"}))->capture_default_str();
  cc->add_option("--config", config)->required();
  cc->add_option("--out-dir", out_dir)->capture_default_str();
  cc->add_flag("--search", search, "search T = 10^k upward until the signs hold");

  auto* ex = app.add_subcommand("experiment", "full pipeline under <out-root>/<config hash>");
  ex->add_option("--config", config)->required();
  ex->add_option("--out-root", out_root)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*st) return cmd_stationary(hole, tol, out, h, extent);
    if (*pr) return cmd_profile(m, mass, out_dir);
    if (*si) return cmd_simulate(config, out_dir);
    if (*va) return cmd_verify(run_dir);
    if (*cc) return cmd_check_comparison(side, params, region, config, out_dir, search);
    if (*ex) return cmd_experiment(config, out_root);
  } catch (const ConfigError& e) {
    for (const auto& i : e.issues()) {
      std::cerr << (i.line > 0 ? fmt::format("line {}: ", i.line) : "") << i.field << ": " << i.message << "\n";
    }
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.error_class() == ErrorClass::Usage ? 2 : 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: bad number: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 2;
}
