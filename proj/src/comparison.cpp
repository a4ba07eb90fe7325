#include "pmelab/comparison.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "pmelab/errors.hpp"

namespace pmelab {

double SuperParams::c(double t) const { return 1.0 + kappa0 * std::pow(T / t, mu); }
double SuperParams::dc(double t) const { return -mu * kappa0 * std::pow(T / t, mu) / t; }
double SuperParams::nu(double t) const { return 1.0 - 1.0 / std::log(t); }

void SuperParams::validate() const {
  if (!(eta > 1)) throw ParameterError("super side needs eta > 1");
  if (!(kappa0 > 0)) throw ParameterError("super side needs kappa0 > 0");
  if (!(mu > 0 && mu < 1)) throw ParameterError("mu must lie in (0, 1)");
  if (!(k > 0)) throw ParameterError("super side needs k > 0");
  if (!(T > std::numbers::e)) throw ParameterError("T > e required");
}

double SubParams::c(double t) const { return 1.0 - kappa0 * std::pow(T / t, mu); }
double SubParams::dc(double t) const { return mu * kappa0 * std::pow(T / t, mu) / t; }
double SubParams::nu(double t) const { return 1.0 + 1.0 / std::log(t); }

void SubParams::validate() const {
  if (!(eta > 0 && eta < 1)) throw ParameterError("sub side needs eta in (0, 1)");
  if (!(kappa0 > 0 && kappa0 < 1)) throw ParameterError("sub side needs kappa0 in (0, 1)");
  if (!(mu > 0 && mu < 1)) throw ParameterError("mu must lie in (0, 1)");
  if (!(alpha0 > 0)) throw ParameterError("sub side needs alpha0 > 0");
  if (!(T > std::numbers::e)) throw ParameterError("T > e required");
}

namespace {

struct WTerms {
  double W = 0;       // w^m
  double dtlogW = 0;  // d/dt log w^m
  Vec2 gradW{0, 0};
  double lapW = 0;
};

double check_time(double t, double T) {
  if (!(t > std::numbers::e)) throw TimeDomainError("t > e required");
  (void)T;
  return std::log(t);
}

WTerms super_terms(const SuperParams& p, double phi, Vec2 gphi, double m, double t) {
  const double L = check_time(t, p.T);
  const double nu = p.nu(t);
  const double dnu = 1.0 / (t * L * L);
  const double Lh = L / (2.0 * m);
  const double scale = std::pow(Lh, nu);
  const double pn = phi > 0 ? std::pow(phi, nu) : 0.0;
  WTerms w;
  w.W = (pn + p.k) / scale;
  const double plog = phi > 0 ? pn * std::log(phi) : 0.0;
  w.dtlogW = dnu * (plog / (pn + p.k) - std::log(Lh)) - nu / (t * L);
  if (phi > 0) {
    w.gradW = gphi * (nu * std::pow(phi, nu - 1.0) / scale);
    w.lapW = nu * (nu - 1.0) * std::pow(phi, nu - 2.0) * dot(gphi, gphi) / scale;
  }
  return w;
}

WTerms sub_terms(const SubParams& p, double phi, Vec2 gphi, double m, double t) {
  const double L = check_time(t, p.T);
  const double nu = p.nu(t);
  const double dnu = -1.0 / (t * L * L);
  const double Lh = L / (2.0 * m);
  const double scale = std::pow(Lh, nu);
  const double pn = std::pow(phi, nu);
  const double an = std::pow(p.alpha0, nu);
  WTerms w;
  w.W = (pn - an) / scale;
  if (pn > an) {
    w.dtlogW = dnu * ((pn * std::log(phi) - an * std::log(p.alpha0)) / (pn - an) - std::log(Lh)) - nu / (t * L);
  }
  w.gradW = gphi * (nu * std::pow(phi, nu - 1.0) / scale);
  w.lapW = nu * (nu - 1.0) * std::pow(phi, nu - 2.0) * dot(gphi, gphi) / scale;
  return w;
}

template <class P>
ABValue assemble_AB(const P& p, const WTerms& wt, const CriticalOuterSpec& spec, Vec2 x, double t) {
  ABValue v;
  const auto gd = critical_G_derivatives(spec, x, t);
  if (!gd.inside) return v;
  const double m = spec.m;
  v.inside = true;
  v.G = gd.G;
  v.c = p.c(t);
  v.w = wt.W > 0 ? std::pow(wt.W, 1.0 / m) : 0.0;
  v.dtG = gd.dtG;
  v.lapGm = gd.lapGm;
  v.dtw = v.w / m * wt.dtlogW;
  v.gradWm_dot_gradGm = dot(wt.gradW, gd.gradGm);
  v.lapWm = wt.lapW;
  const double eta = p.eta;
  const double ecm = std::pow(eta * v.c, m);
  v.A = eta * p.dc(t) * gd.G * v.w + eta * v.c * v.w * gd.dtG - ecm * wt.W * gd.lapGm + eta * v.c * gd.G * v.dtw;
  v.B = -ecm * gd.Gm * wt.lapW - 2.0 * ecm * v.gradWm_dot_gradGm;
  return v;
}

}  // namespace

double w_super_m(const SuperParams& p, double phi, double m, double t) {
  return super_terms(p, phi, {0, 0}, m, t).W;
}

double w_sub_m(const SubParams& p, double phi, double m, double t) {
  if (phi < p.alpha0) throw OutsideDomain("phi below alpha0: outside the subsolution domain");
  return sub_terms(p, phi, {0, 0}, m, t).W;
}

double eval_V(const SuperParams& p, double phi, const CriticalOuterSpec& spec, Vec2 x, double t) {
  const double W = w_super_m(p, phi, spec.m, t);
  return p.eta * p.c(t) * critical_G(spec, x, t) * std::pow(W, 1.0 / spec.m);
}

double eval_V(const SuperParams& p, const Potential& phi, const CriticalOuterSpec& spec, Vec2 x, double t) {
  return eval_V(p, phi.phi(x), spec, x, t);
}

double eval_v(const SubParams& p, double phi, const CriticalOuterSpec& spec, Vec2 x, double t) {
  const double W = w_sub_m(p, phi, spec.m, t);
  return p.eta * p.c(t) * critical_G(spec, x, t) * std::pow(std::max(W, 0.0), 1.0 / spec.m);
}

double eval_v(const SubParams& p, const Potential& phi, const CriticalOuterSpec& spec, Vec2 x, double t) {
  return eval_v(p, phi.phi(x), spec, x, t);
}

ABValue eval_AB(const SuperParams& p, const Potential& phi, const CriticalOuterSpec& spec, Vec2 x, double t,
                double split_exponent) {
  const auto wt = super_terms(p, phi.phi(x), phi.grad(x), spec.m, t);
  ABValue v = assemble_AB(p, wt, spec, x, t);
  RegionSpec reg{0, t, RegionSpec::Kind::Inner, Side::Super, split_exponent};
  v.region = norm(x) < split_radius(spec, reg) ? RegionSpec::Kind::InnerInner : RegionSpec::Kind::InnerOuter;
  return v;
}

ABValue eval_AB(const SubParams& p, const Potential& phi, const CriticalOuterSpec& spec, Vec2 x, double t) {
  const double ph = phi.phi(x);
  if (ph < p.alpha0) throw OutsideDomain("phi below alpha0: outside the subsolution domain");
  const auto wt = sub_terms(p, ph, phi.grad(x), spec.m, t);
  ABValue v = assemble_AB(p, wt, spec, x, t);
  RegionSpec reg{0, t, RegionSpec::Kind::Inner, Side::Sub, 1.0};
  v.region = norm(x) < split_radius(spec, reg) ? RegionSpec::Kind::InnerInner : RegionSpec::Kind::InnerOuter;
  return v;
}

namespace {

bool claim_holds(Side side, RegionSpec::Kind kind, const ABValue& v) {
  if (side == Side::Sub) return v.A + v.B <= 0;
  switch (kind) {
    case RegionSpec::Kind::InnerOuter:
      return v.A >= 0 && v.B >= 0;
    case RegionSpec::Kind::InnerInner:
      return v.A + v.B > 0;
    default:
      return v.A + v.B >= 0;
  }
}

template <class P, class Eval>
SignReport sweep(const P& p, const CriticalOuterSpec& spec, const RegionSpec& region, const SampleGrid& grid,
                 Side side, Eval&& eval) {
  if (!(grid.t_hi >= grid.t_lo && grid.t_lo > std::numbers::e)) throw ParameterError("sample times must exceed e");
  if (grid.nt == 0 || grid.nr == 0) throw ParameterError("empty sample grid");
  SignReport rep;
  std::vector<double> ts(grid.nt);
  std::vector<char> ok_at(grid.nt, 1);
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  std::size_t idx = 0;
  for (std::size_t i = 0; i < grid.nt; ++i) {
    const double f = grid.nt == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(grid.nt - 1);
    const double t = std::exp(std::log(grid.t_lo) + f * (std::log(grid.t_hi) - std::log(grid.t_lo)));
    ts[i] = t;
    RegionSpec reg = region;
    reg.t = t;
    double r_lo = grid.r_min;
    double r_hi = inner_radius(spec, region.delta, t);
    const double split = split_radius(spec, reg);
    if (region.kind == RegionSpec::Kind::InnerInner) r_hi = std::min(r_hi, split);
    if (region.kind == RegionSpec::Kind::InnerOuter) r_lo = std::max(r_lo, split);
    if (region.kind == RegionSpec::Kind::Outer) throw ParameterError("sign sweeps cover inner regions only");
    if (!(r_hi > r_lo)) continue;
    for (std::size_t j = 0; j < grid.nr; ++j) {
      // Open at the inner edge, closed at the outer one.
      const double g = (static_cast<double>(j) + 1.0) / static_cast<double>(grid.nr);
      double r = r_lo * std::pow(r_hi / r_lo, g);
      if (region.kind == RegionSpec::Kind::InnerInner && j + 1 == grid.nr) r = r_lo * std::pow(r_hi / r_lo, 1 - 1e-9);
      const double th = golden * static_cast<double>(idx++);
      const Vec2 x{r * std::cos(th), r * std::sin(th)};
      const ABValue v = eval(x, t);
      if (!v.inside) continue;
      ++rep.samples;
      rep.min_A = std::min(rep.min_A, v.A);
      rep.max_A = std::max(rep.max_A, v.A);
      rep.min_B = std::min(rep.min_B, v.B);
      rep.max_B = std::max(rep.max_B, v.B);
      rep.min_AB = std::min(rep.min_AB, v.A + v.B);
      rep.max_AB = std::max(rep.max_AB, v.A + v.B);
      if (!claim_holds(side, region.kind, v)) {
        ++rep.failures;
        ok_at[i] = 0;
      }
    }
  }
  if (rep.samples == 0) throw EmptyRegion("sign sweep region has no samples");
  rep.pass = rep.failures == 0;
  for (std::size_t i = grid.nt; i-- > 0;) {
    if (!ok_at[i]) break;
    rep.first_ok_time = ts[i];
  }
  (void)p;
  return rep;
}

}  // namespace

SignReport verify_lemma_signs(const SuperParams& p, const Potential& phi, const CriticalOuterSpec& spec,
                              const RegionSpec& region, const SampleGrid& grid) {
  p.validate();
  return sweep(p, spec, region, grid, Side::Super,
               [&](Vec2 x, double t) { return eval_AB(p, phi, spec, x, t, region.split_exponent); });
}

SignReport verify_lemma_signs(const SubParams& p, const Potential& phi, const CriticalOuterSpec& spec,
                              const RegionSpec& region, const SampleGrid& grid) {
  p.validate();
  RegionSpec reg = region;
  reg.side = Side::Sub;
  return sweep(p, spec, reg, grid, Side::Sub, [&](Vec2 x, double t) { return eval_AB(p, phi, spec, x, t); });
}

namespace {

template <class P>
ThresholdResult threshold_search(P p, const Potential& phi, const CriticalOuterSpec& spec, RegionSpec region,
                                 SampleGrid grid, int k_lo, int k_hi, double decades) {
  ThresholdResult res;
  for (int k = k_lo; k <= k_hi; ++k) {
    p.T = std::pow(10.0, k);
    grid.t_lo = p.T;
    grid.t_hi = p.T * std::pow(10.0, decades);
    SignReport rep;
    try {
      rep = verify_lemma_signs(p, phi, spec, region, grid);
    } catch (const EmptyRegion&) {
      continue;
    }
    res.report = rep;
    if (rep.pass) {
      res.found = true;
      res.T = p.T;
      return res;
    }
  }
  return res;
}

}  // namespace

ThresholdResult find_sign_threshold(const SuperParams& p, const Potential& phi, const CriticalOuterSpec& spec,
                                    RegionSpec region, SampleGrid grid, int k_lo, int k_hi, double decades) {
  return threshold_search(p, phi, spec, region, grid, k_lo, k_hi, decades);
}

ThresholdResult find_sign_threshold(const SubParams& p, const Potential& phi, const CriticalOuterSpec& spec,
                                    RegionSpec region, SampleGrid grid, int k_lo, int k_hi, double decades) {
  return threshold_search(p, phi, spec, region, grid, k_lo, k_hi, decades);
}

namespace {

std::size_t first_at_or_after(const std::vector<SolverState>& snaps, double T) {
  for (std::size_t k = 0; k < snaps.size(); ++k) {
    if (snaps[k].t >= T * (1 - 1e-12)) return k;
  }
  throw CalibrationError("no snapshot at or after T");
}

void check_phi(const std::vector<SolverState>& snaps, const std::vector<std::vector<double>>& phi) {
  if (phi.size() != snaps.size()) throw IncompatibleGrids("need phi for every snapshot");
  for (std::size_t k = 0; k < snaps.size(); ++k) {
    if (phi[k].size() != snaps[k].u.size()) throw IncompatibleGrids("snapshot and phi sizes differ");
  }
}

}  // namespace

OrderingReport verify_ordering(const std::vector<SolverState>& snapshots, const std::vector<std::vector<double>>& phi,
                               SuperParams p, const CriticalOuterSpec& spec, double delta, double fb_tol) {
  check_phi(snapshots, phi);
  const std::size_t k0 = first_at_or_after(snapshots, p.T);
  const SolverState* s0 = &snapshots[k0];
  const std::vector<double>& phi0 = phi[k0];
  p.T = s0->t;
  OrderingReport rep;
  rep.T = p.T;
  const double m = spec.m;
  auto w_at = [&](const SolverState& s, double ph) { return std::pow(w_super_m(p, ph, m, s.t), 1.0 / m); };
  double max_ratio = 0;
  {
    const double ri = inner_radius(spec, delta, s0->t);
    for (std::size_t c = 0; c < s0->u.size(); ++c) {
      const Vec2 x = s0->mesh->center()[c];
      if (norm(x) > ri) continue;
      const double base = p.eta * critical_G(spec, x, s0->t) * w_at(*s0, phi0[c]);
      if (!(base > 0)) {
        if (s0->u[c] > 0) throw CalibrationError("G vanishes where u is positive inside the inner region");
        continue;
      }
      max_ratio = std::max(max_ratio, s0->u[c] / base);
    }
  }
  p.kappa0 = std::max(max_ratio * (1.0 + 1e-9) - 1.0, 1e-6);
  rep.kappa0 = p.kappa0;
  p.validate();
  rep.worst = 0;
  for (std::size_t k = k0; k < snapshots.size(); ++k) {
    const SolverState& s = snapshots[k];
    const std::vector<double>& ph = phi[k];
    ++rep.checkpoints;
    const double ri = inner_radius(spec, delta, s.t);
    const double tol = fb_tol * s.sup();
    for (std::size_t c = 0; c < s.u.size(); ++c) {
      const Vec2 x = s.mesh->center()[c];
      if (norm(x) > ri) continue;
      const double V = eval_V(p, ph[c], spec, x, s.t);
      if (s.u[c] < tol && V < tol) continue;
      ++rep.checked;
      if (V > 0) rep.worst = std::max(rep.worst, s.u[c] / V);
      if (s.u[c] > V) ++rep.failures;
    }
  }
  rep.pass = rep.failures == 0;
  return rep;
}

OrderingReport verify_ordering(const std::vector<SolverState>& snapshots, const std::vector<std::vector<double>>& phi,
                               SubParams p, const CriticalOuterSpec& spec, double delta, double fb_tol) {
  check_phi(snapshots, phi);
  const std::size_t k0 = first_at_or_after(snapshots, p.T);
  const SolverState* s0 = &snapshots[k0];
  const std::vector<double>& phi0 = phi[k0];
  p.T = s0->t;
  OrderingReport rep;
  rep.T = p.T;
  const double m = spec.m;
  double min_ratio = INFINITY;
  std::size_t in_domain = 0;
  {
    const double ri = inner_radius(spec, delta, s0->t);
    for (std::size_t c = 0; c < s0->u.size(); ++c) {
      const Vec2 x = s0->mesh->center()[c];
      if (norm(x) > ri || phi0[c] <= p.alpha0) continue;
      ++in_domain;
      const double base = p.eta * critical_G(spec, x, s0->t) * std::pow(w_sub_m(p, phi0[c], m, s0->t), 1.0 / m);
      if (!(base > 0)) continue;
      min_ratio = std::min(min_ratio, s0->u[c] / base);
    }
  }
  if (in_domain == 0) {
    rep.degenerate = true;
    rep.pass = true;
    rep.kappa0 = p.kappa0;
    return rep;
  }
  if (!(min_ratio > 0)) {
    throw CalibrationError("u vanishes inside the subsolution domain at T = " + std::to_string(p.T) +
                           "; no kappa0 in (0, 1) orders the data");
  }
  p.kappa0 = std::min(1.0 - 1e-12, std::max(1.0 - min_ratio * (1.0 - 1e-9), 1e-6));
  rep.kappa0 = p.kappa0;
  p.validate();
  rep.worst = INFINITY;
  for (std::size_t k = k0; k < snapshots.size(); ++k) {
    const SolverState& s = snapshots[k];
    const std::vector<double>& ph = phi[k];
    ++rep.checkpoints;
    const double ri = inner_radius(spec, delta, s.t);
    const double tol = fb_tol * s.sup();
    for (std::size_t c = 0; c < s.u.size(); ++c) {
      const Vec2 x = s.mesh->center()[c];
      if (norm(x) > ri || ph[c] <= p.alpha0) continue;
      const double v = eval_v(p, ph[c], spec, x, s.t);
      if (s.u[c] < tol && v < tol) continue;
      ++rep.checked;
      if (v > 0) rep.worst = std::min(rep.worst, s.u[c] / v);
      if (s.u[c] < v) ++rep.failures;
    }
  }
  rep.pass = rep.failures == 0;
  return rep;
}

namespace {

template <class Fn>
double band_time(const std::vector<double>& times, Fn&& ok_at) {
  double first = INFINITY;
  for (std::size_t i = times.size(); i-- > 0;) {
    if (!ok_at(times[i])) break;
    first = times[i];
  }
  return first;
}

}  // namespace

double matching_band_time(const SuperParams& p, const Potential& phi, const CriticalOuterSpec& spec, double delta,
                          const std::vector<double>& times, std::size_t angles) {
  return band_time(times, [&](double t) {
    const double r = inner_radius(spec, delta, t);
    for (std::size_t a = 0; a < angles; ++a) {
      const double th = 2.0 * std::numbers::pi * static_cast<double>(a) / static_cast<double>(angles);
      const double w = std::pow(w_super_m(p, phi.phi({r * std::cos(th), r * std::sin(th)}), spec.m, t), 1.0 / spec.m);
      if (p.eta * w < 1.0 + (p.eta - 1.0) / 2.0) return false;
    }
    return true;
  });
}

double matching_band_time(const SubParams& p, const Potential& phi, const CriticalOuterSpec& spec, double delta,
                          const std::vector<double>& times, std::size_t angles) {
  return band_time(times, [&](double t) {
    const double r = inner_radius(spec, delta, t);
    for (std::size_t a = 0; a < angles; ++a) {
      const double th = 2.0 * std::numbers::pi * static_cast<double>(a) / static_cast<double>(angles);
      const double ph = phi.phi({r * std::cos(th), r * std::sin(th)});
      if (ph < p.alpha0) return false;
      const double w = std::pow(w_sub_m(p, ph, spec.m, t), 1.0 / spec.m);
      if (p.eta * w > 1.0 - (1.0 - p.eta) / 2.0) return false;
    }
    return true;
  });
}

SandwichReport sandwich_check(const SolverState& us, const SolverState& u, const SolverState& ub, double r, double R,
                              double fb_tol) {
  const Mesh& ms = *us.mesh;
  const Mesh& mu = *u.mesh;
  const Mesh& mb = *ub.mesh;
  SandwichReport rep;
  const double tol = fb_tol * std::max({us.sup(), u.sup(), ub.sup()});
  auto compare = [&](double hi, double lo) {
    if (hi < tol && lo < tol) return;
    ++rep.checked;
    const double v = lo - hi;
    if (v > 0) {
      ++rep.violations;
      rep.max_violation = std::max(rep.max_violation, v);
    }
  };
  const bool same = ms.same_as(mu) && mu.same_as(mb);
  if (same) {
    for (std::size_t c = 0; c < mu.size(); ++c) {
      compare(us.u[c], u.u[c]);
      compare(u.u[c], ub.u[c]);
    }
  } else {
    if (ms.is_radial() || mu.is_radial() || mb.is_radial()) {
      throw IncompatibleGrids("sandwich needs aligned masked grids or identical meshes");
    }
    const auto& gs = ms.masked();
    const auto& gu = mu.masked();
    const auto& gb = mb.masked();
    if (gs.nx != gu.nx || gb.nx != gu.nx || gs.h != gu.h || gb.h != gu.h || gs.origin != gu.origin ||
        gb.origin != gu.origin) {
      throw IncompatibleGrids("sandwich grids are not aligned");
    }
    for (std::size_t k = 0; k < gu.size(); ++k) {
      const std::int64_t cs = ms.cell_of_grid()[k];
      const std::int64_t cu = mu.cell_of_grid()[k];
      const std::int64_t cb = mb.cell_of_grid()[k];
      const double vs = cs >= 0 ? us.u[static_cast<std::size_t>(cs)] : 0.0;
      const double vu = cu >= 0 ? u.u[static_cast<std::size_t>(cu)] : 0.0;
      const double vb = cb >= 0 ? ub.u[static_cast<std::size_t>(cb)] : 0.0;
      if (cu >= 0) {
        compare(vs, vu);
        compare(vu, vb);
      } else if (cs >= 0) {
        compare(vs, vb);
      }
    }
  }
  rep.ordered = rep.violations == 0;
  for (std::size_t c = 0; c < mu.size(); ++c) {
    const double rad = mu.radius(c);
    const double q = mu.volume()[c] * u.u[c];
    rep.mass += q;
    if (rad > r) rep.M_plus += q * std::log(rad / r);
    if (rad > R) rep.M_minus += q * std::log(rad / R);
  }
  return rep;
}

}  // namespace pmelab
