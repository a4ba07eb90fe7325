// Acceptance run: one PASS/FAIL line per criterion.  With arguments, only the
// listed criterion numbers run (criteria 3-7, 9 and 10 share one long run).
#include <fmt/core.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <memory>
#include <numbers>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "pmelab/asymptotics.hpp"
#include "pmelab/comparison.hpp"
#include "pmelab/errors.hpp"
#include "pmelab/experiment.hpp"
#include "pmelab/pde_solver.hpp"
#include "pmelab/special_solutions.hpp"
#include "pmelab/stationary.hpp"

using namespace pmelab;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

// ---------------------------------------------------------------- 1

double quadrature_mass(const ProfileSpec& spec, double t) {
  // midpoint rule in s = r^2, where dA = pi ds
  const double R = xi_M(spec) * std::pow(t, spec.beta());
  const std::size_t n = 200000;
  const double ds = R * R / static_cast<double>(n);
  double sum = 0;
  for (std::size_t i = 0; i < n; ++i) sum += barenblatt(spec, std::sqrt((static_cast<double>(i) + 0.5) * ds), t);
  return std::numbers::pi * sum * ds;
}

Outcome barenblatt_self_consistency() {
  double worst_mass = 0;
  for (double m : {1.5, 2.0, 3.0}) {
    for (double M : {1.0, 16.0}) {
      for (double t : {1.0, 10.0}) {
        worst_mass = std::max(worst_mass, std::abs(quadrature_mass(make_profile(m, 2, M), t) - M) / M);
      }
    }
  }
  bool ok = worst_mass <= 1e-6;
  std::string ratios;
  for (double m : {1.5, 2.0, 3.0}) {
    const auto spec = make_profile(m, 2, 1);
    const double t = 2.0;
    const double R = xi_M(spec) * std::pow(t, spec.beta());
    auto residual = [&](Vec2 x, double h) {
      auto um = [&](Vec2 y) { return std::pow(barenblatt(spec, y, t), m); };
      const double dt = h * h;
      const double ut = (barenblatt(spec, x, t + dt) - barenblatt(spec, x, t - dt)) / (2 * dt);
      const double lap =
          (um(x + Vec2{h, 0}) + um(x - Vec2{h, 0}) + um(x + Vec2{0, h}) + um(x - Vec2{0, h}) - 4 * um(x)) / (h * h);
      return ut - lap;
    };
    std::mt19937 rng(17);
    std::uniform_real_distribution<double> U(0, 1);
    double e1 = 0, e2 = 0;
    const double h = 0.01 * R;
    for (int k = 0; k < 50; ++k) {
      const double r = R * (0.1 + 0.6 * U(rng));
      const double th = 2 * std::numbers::pi * U(rng);
      const Vec2 x{r * std::cos(th), r * std::sin(th)};
      e1 += std::abs(residual(x, h));
      e2 += std::abs(residual(x, h / 2));
    }
    const double ratio = e1 / e2;
    ok = ok && ratio >= 3.5 && ratio <= 4.5;
    ratios += fmt::format(" m={}:{:.3f}", m, ratio);
  }
  return {ok, fmt::format("worst mass error {:.2e} (need 1e-6); residual ratios{}", worst_mass, ratios)};
}

// ---------------------------------------------------------------- 2

// Area average of the exact solution over radial cell c; the finite-volume
// unknowns are cell averages, and point values differ by O(h) at the front.
double cell_average(const ProfileSpec& spec, const RadialGrid& g, std::size_t c, double t) {
  const double a = g.edges[c], b = g.edges[c + 1];
  const int K = 64;
  double s = 0, w = 0;
  for (int k = 0; k < K; ++k) {
    const double r = a + (b - a) * (k + 0.5) / K;
    s += r * barenblatt(spec, r, t);
    w += r;
  }
  return s / w;
}

double cauchy_error(double h) {
  const double m = 2, r_out = 5.0;
  const auto spec = make_profile(m, 2, 1.0);
  const auto g = build_whole_plane_radial_grid(r_out, static_cast<std::size_t>(std::lround(r_out / h)));
  auto mesh = std::make_shared<const Mesh>(make_mesh(g));
  RunOptions opt;
  opt.t_end = 10;
  opt.safety = 0.9;
  opt.auto_extend = false;
  opt.checkpoint_ratio = 10;
  SolverState last;
  opt.on_checkpoint = [&](const SolverState& s, Checkpoint&) { last = s; };
  std::vector<double> u0(mesh->size());
  for (std::size_t c = 0; c < u0.size(); ++c) u0[c] = cell_average(spec, g, c, 1.0);
  run(make_state(mesh, m, 1.0, u0), opt);
  double err = 0;
  for (std::size_t c = 0; c < mesh->size(); ++c) err = std::max(err, std::abs(last.u[c] - cell_average(spec, g, c, last.t)));
  return err;
}

Outcome cauchy_validation() {
  const double e1 = cauchy_error(1.0 / 256), e2 = cauchy_error(1.0 / 512);
  return {e1 <= 1e-2 && e1 / e2 >= 1.8,
          fmt::format("sup error {:.3e} at h=1/256, {:.3e} at h=1/512, reduction {:.3f}x (need <= 1e-2, 1.8x)", e1, e2,
                      e1 / e2)};
}

// ---------------------------------------------------------------- 3-7, 9, 10

RunConfig disk_config(double t_end) {
  RunConfig cfg;
  cfg.hole_kind = "disk";
  cfg.t_end = t_end;
  cfg.trend_from = 1e3;
  cfg.T = 100;
  return cfg;
}

struct LongRun {
  Problem p;
  RunRecord rec;
  std::vector<std::vector<double>> phi;
  Analysis a;
};

LongRun long_run() {
  LongRun L;
  L.p = build_problem(disk_config(1e5));
  L.rec = run(L.p.initial, run_options(L.p));
  L.phi = phi_per_snapshot(L.p, L.rec);
  L.a = analyze_run(L.p, L.rec, L.phi);
  return L;
}

double drift_until(const RunRecord& rec, double t_max) {
  const double M0 = rec.rows.front().weighted_moment;
  double d = 0;
  for (const auto& r : rec.rows) {
    if (r.t <= t_max * (1 + 1e-12)) d = std::max(d, std::abs(r.weighted_moment - M0) / M0);
  }
  return d;
}

Outcome conservation(const LongRun& L) {
  const double base = drift_until(L.rec, 1e4);
  RunConfig cfg = disk_config(1e4);
  cfg.n = 400;
  cfg.stretch = std::sqrt(1.01);
  cfg.comparison_side = "none";
  const Problem p = build_problem(cfg);
  const double fine = drift_until(run(p.initial, run_options(p)), 1e4);
  return {base <= 5e-3 && fine <= 2.5e-3,
          fmt::format("M_phi = {:.6g}; drift {:.2e} at baseline, {:.2e} doubled (need 5e-3, 2.5e-3)",
                      L.rec.rows.front().weighted_moment, base, fine)};
}

const CriterionResult& criterion(const Analysis& a, const std::string& name) {
  for (const auto& c : a.criteria) {
    if (c.name == name) return c;
  }
  throw std::runtime_error("analysis did not produce " + name);
}

Outcome from_analysis(const LongRun& L, const std::vector<std::string>& names) {
  Outcome o{true, ""};
  for (const auto& n : names) {
    const auto& c = criterion(L.a, n);
    o.pass = o.pass && c.status == "pass";
    if (!o.detail.empty()) o.detail += " | ";
    o.detail += n + ": " + c.detail;
  }
  return o;
}

Outcome sign_sweeps(const LongRun& L) {
  const RunConfig& cfg = L.p.cfg;
  const double Mphi = L.rec.rows.front().weighted_moment;
  const auto hole = HoleGeometry::disk(1);
  const auto pot = disk_potential(1);
  const double alpha0 = 0.5 * alpha_bar_0(pot, hole, L.p.initial.mesh->spacing());
  const int k0 = static_cast<int>(std::ceil(std::log10(cfg.T) - 1e-12));
  Outcome o{true, fmt::format("window {} decades, alpha0 {:.3g};", cfg.sweep_decades, alpha0)};
  for (double m : {1.5, 2.0, 3.0}) {
    const auto spec = make_critical(m, Mphi);
    const double delta = 0.5 * spec.delta_star();
    SuperParams sp{cfg.eta_super, cfg.kappa0_super, cfg.mu, cfg.k, cfg.T};
    SubParams bp{cfg.eta_sub, cfg.kappa0_sub, cfg.mu, alpha0, cfg.T};
    SampleGrid grid{0, 0, 100, 100, 1.0};
    RegionSpec outer{delta, cfg.T, RegionSpec::Kind::InnerOuter, Side::Super, cfg.split_exponent};
    RegionSpec inner = outer;
    inner.kind = RegionSpec::Kind::InnerInner;
    RegionSpec sub{delta, cfg.T, RegionSpec::Kind::Inner, Side::Sub, 1.0};
    SampleGrid g = grid;
    g.r_min = std::exp(alpha0);
    const auto ro = find_sign_threshold(sp, pot, spec, outer, grid, k0, 80, cfg.sweep_decades);
    const auto ri = find_sign_threshold(sp, pot, spec, inner, grid, k0, 80, cfg.sweep_decades);
    const auto rs = find_sign_threshold(bp, pot, spec, sub, g, k0, 80, cfg.sweep_decades);
    o.pass = o.pass && ro.found && ri.found && rs.found;
    auto show = [](const ThresholdResult& r) { return r.found ? fmt::format("{:.0e}", r.T) : std::string("none"); };
    o.detail += fmt::format(" m={}: T(I^o)={} T(I^i)={} T(sub)={};", m, show(ro), show(ri), show(rs));
  }
  return o;
}

Outcome ordering(const LongRun& L) {
  const RunConfig& cfg = L.p.cfg;
  std::vector<SolverState> snaps;
  std::vector<std::vector<double>> phi;
  for (std::size_t k = 0; k < L.rec.snapshots.size(); ++k) {
    if (L.rec.snapshots[k].t > 1e4 * (1 + 1e-12)) break;
    snaps.push_back(L.rec.snapshots[k]);
    phi.push_back(L.phi[k]);
  }
  SuperParams sp{cfg.eta_super, cfg.kappa0_super, cfg.mu, cfg.k, cfg.T};
  const double alpha0 = 0.5 * alpha_bar_0(L.p.potential, *L.p.hole, L.p.initial.mesh->spacing());
  SubParams bp{cfg.eta_sub, cfg.kappa0_sub, cfg.mu, alpha0, cfg.T};
  const auto up = verify_ordering(snaps, phi, sp, L.a.spec, L.a.delta);
  const auto lo = verify_ordering(snaps, phi, bp, L.a.spec, L.a.delta);
  return {up.pass && lo.pass && !lo.degenerate && up.checked > 0 && lo.checked > 0,
          fmt::format("super kappa0 {:.3g}: {}/{} over {} checkpoints; sub kappa0 {:.3g}: {}/{} over {} checkpoints",
                      up.kappa0, up.checked - up.failures, up.checked, up.checkpoints, lo.kappa0,
                      lo.checked - lo.failures, lo.checked, lo.checkpoints)};
}

// ---------------------------------------------------------------- 8

Outcome derivative_formulas() {
  std::mt19937 rng(8);
  std::uniform_real_distribution<double> U(0, 1);
  const auto pot = disk_potential(1);
  bool ok = true;
  std::string detail;
  for (double m : {1.5, 2.0, 3.0}) {
    const auto spec = make_critical(m, 1.0);
    SuperParams p{1.5, 0.7, 0.2, 0.5, 100};
    SubParams q{0.5, 0.3, 0.2, 0.1, 100};
    auto fd = [&](auto&& f, Vec2 x, double t, double h) {
      const double dt = 1e-4 * t;
      const double ft = (f(x, t + dt) - f(x, t - dt)) / (2 * dt);
      auto fm = [&](Vec2 y) { return std::pow(f(y, t), m); };
      return ft - (fm(x + Vec2{h, 0}) + fm(x - Vec2{h, 0}) + fm(x + Vec2{0, h}) + fm(x - Vec2{0, h}) - 4 * fm(x)) / (h * h);
    };
    double e1 = 0, e2 = 0, f1 = 0, f2 = 0, scale = 0;
    std::size_t picked = 0;
    while (picked < 100) {
      const double t = std::pow(10.0, 3 + 5 * U(rng));
      const double rs = critical_support_radius(spec, t);
      const double r = rs * 0.8 * U(rng);
      if (r < 1.5) continue;
      const double th = 2 * std::numbers::pi * U(rng);
      const Vec2 x{r * std::cos(th), r * std::sin(th)};
      ++picked;
      const double h = 2e-3 * rs;
      auto V = [&](Vec2 y, double s) { return eval_V(p, pot, spec, y, s); };
      auto v = [&](Vec2 y, double s) { return eval_v(q, pot, spec, y, s); };
      const auto ab = eval_AB(p, pot, spec, x, t);
      const auto ab2 = eval_AB(q, pot, spec, x, t);
      e1 += std::abs(fd(V, x, t, h) - (ab.A + ab.B));
      e2 += std::abs(fd(V, x, t, h / 2) - (ab.A + ab.B));
      f1 += std::abs(fd(v, x, t, h) - (ab2.A + ab2.B));
      f2 += std::abs(fd(v, x, t, h / 2) - (ab2.A + ab2.B));
      scale += std::abs(ab.A) + std::abs(ab.B);
    }
    ok = ok && e1 / e2 >= 3.5 && e1 / e2 <= 4.5 && f1 / f2 >= 3.5 && f1 / f2 <= 4.5;
    detail += fmt::format(" m={}: V {:.3f}, v {:.3f} (rel. mismatch {:.1e});", m, e1 / e2, f1 / f2, e2 / scale);
  }
  return {ok, "refinement ratios" + detail};
}

// ---------------------------------------------------------------- 11

Outcome sandwich() {
  RunConfig cfg;
  cfg.hole_kind = "ellipse";
  cfg.hole_semi_axes = {1.0, 0.75};
  cfg.grid_kind = "masked";
  cfg.t_end = 1e4;
  // small data keeps the box (sized from the support at t_end) near 48 wide
  cfg.init_amplitude = 0.01;
  cfg.sandwich_inner_radius = 0.5;
  cfg.sandwich_outer_radius = 1.0;
  const fs::path csv = fs::temp_directory_path() / "pmelab_acceptance_sandwich.csv";
  const auto s = run_sandwich(cfg, csv.string());
  std::string D;
  for (std::size_t i = 0; i < s.t.size(); ++i) {
    const double lt = std::log10(s.t[i]);
    if (s.t[i] >= 99.999 && std::abs(lt - std::round(lt)) < 1e-9) {
      D += fmt::format(" T=1e{:.0f}: {:.4g}", lt, (s.M_plus[i] - s.M_minus[i]) * std::log(s.t[i]));
    }
  }
  return {s.pass, fmt::format("{} over {} checkpoints, {} violations; (M+ - M-) log T:{}; spread {:.3f}",
                              s.ordered ? "ordered" : "not ordered", s.t.size(), s.violations, D, s.bounded_spread)};
}

// ---------------------------------------------------------------- 12

Outcome stationary() {
  std::mt19937 rng(12);
  std::uniform_real_distribution<double> U(0, 1);
  double analytic = 0, kelvin = 0;
  for (double R : {0.5, 1.0, 2.0}) {
    const auto map = conformal_disk(R);
    for (int k = 0; k < 1000; ++k) {
      const double rho = R * (1 + 50 * U(rng));
      const double th = 2 * std::numbers::pi * U(rng);
      const Vec2 x{rho * std::cos(th), rho * std::sin(th)};
      analytic = std::max(analytic, std::abs(phi_disk(R, x) - std::log(rho / R)));
      kelvin = std::max(kelvin, std::abs(phi_conformal(map, x) - phi_disk(R, x)));
    }
  }
  const auto disk = solve_stationary_numeric(HoleGeometry::disk(1), 1e-10);
  double numeric = 0;
  for (std::size_t c = 0; c < disk.mesh->size(); ++c) {
    numeric = std::max(numeric, std::abs(disk.phi[c] - std::log(disk.mesh->radius(c))));
  }
  StationaryOptions opt;
  opt.h = 0.05;
  const auto ell = solve_stationary_numeric(HoleGeometry::ellipse(2, 1), 1e-10, opt);
  const auto gd = check_gradient_bounds(disk);
  const auto ge = check_gradient_bounds(ell);
  auto within = [](const GradientReport& g) { return g.bounds_hold && g.min_radial >= 0.5 && g.max_radial <= 2.0; };
  const bool ok = analytic <= 1e-10 && numeric <= 1e-4 && kelvin <= 1e-12 && within(gd) && within(ge);
  return {ok, fmt::format("analytic {:.1e}, numeric {:.1e}, conformal {:.1e}; x.grad phi in [{:.4f}, {:.4f}] beyond "
                          "R={:.3g} (disk), [{:.4f}, {:.4f}] beyond R={:.3g} (ellipse 2x1)",
                          analytic, numeric, kelvin, gd.min_radial, gd.max_radial, gd.R_split, ge.min_radial,
                          ge.max_radial, ge.R_split)};
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));
  auto want = [&](int n) { return only.empty() || only.count(n) > 0; };

  std::optional<LongRun> L;
  auto long_run_once = [&]() -> const LongRun& {
    if (!L) L = long_run();
    return *L;
  };

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"barenblatt self-consistency", barenblatt_self_consistency},
      {"cauchy validation", cauchy_validation},
      {"conservation law", [&] { return conservation(long_run_once()); }},
      {"mass law", [&] { return from_analysis(long_run_once(), {"mass_law"}); }},
      {"far-field trend", [&] { return from_analysis(long_run_once(), {"far_field"}); }},
      {"near-field trend", [&] { return from_analysis(long_run_once(), {"near_field", "compact_limit"}); }},
      {"support law", [&] { return from_analysis(long_run_once(), {"support_law"}); }},
      {"derivative formulas", derivative_formulas},
      {"sign sweeps", [&] { return sign_sweeps(long_run_once()); }},
      {"ordering", [&] { return ordering(long_run_once()); }},
      {"sandwich", sandwich},
      {"stationary certification", stationary},
  };

  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int n = static_cast<int>(i) + 1;
    if (!want(n)) continue;
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    if (!o.pass) ++failed;
    fmt::print("{} criterion {:2d} {}: {}\n", o.pass ? "PASS" : "FAIL", n, criteria[i].first, o.detail);
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
