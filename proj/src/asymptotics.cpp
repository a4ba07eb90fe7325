#include "pmelab/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "pmelab/errors.hpp"

namespace pmelab {

double split_radius(const CriticalOuterSpec& spec, const RegionSpec& region) {
  const double t = region.t;
  if (!(t > std::numbers::e)) throw TimeDomainError("t > e required");
  const double L = std::log(t);
  const double ex = region.side == Side::Super ? region.split_exponent : 1.0;
  return std::pow(t, 1.0 / (2.0 * spec.m)) / std::pow(L, ex);
}

bool in_region(const CriticalOuterSpec& spec, const RegionSpec& region, double r) {
  const double ri = inner_radius(spec, region.delta, region.t);
  switch (region.kind) {
    case RegionSpec::Kind::Inner:
      return r <= ri;
    case RegionSpec::Kind::Outer:
      return r >= ri;
    case RegionSpec::Kind::InnerInner:
      return r <= ri && r < split_radius(spec, region);
    case RegionSpec::Kind::InnerOuter:
      return r <= ri && r >= split_radius(spec, region);
  }
  return false;
}

double split_crossover_time(const CriticalOuterSpec& spec, double delta, Side side, double split_exponent) {
  auto inside = [&](double logt) {
    RegionSpec reg{delta, std::exp(logt), RegionSpec::Kind::Inner, side, split_exponent};
    return split_radius(spec, reg) < inner_radius(spec, delta, reg.t);
  };
  double lo = 1.0 + 1e-9, hi = 2.0;
  while (!inside(hi)) {
    hi *= 2;
    if (hi > 700) throw ParameterError("split radius never enters the inner region");
  }
  if (inside(lo)) return std::exp(lo);
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (inside(mid) ? hi : lo) = mid;
  }
  return std::exp(hi);
}

double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = std::min(x.size(), y.size());
  if (n < 2) return NAN;
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxx > 0 ? sxy / sxx : NAN;
}

TrendSeries make_trend(std::vector<double> t, std::vector<double> value) {
  for (std::size_t i = 1; i < t.size(); ++i) {
    if (!(t[i] > t[i - 1])) throw SeriesError("trend times must be strictly increasing");
  }
  TrendSeries s{std::move(t), std::move(value), NAN};
  if (s.t.size() >= 4) {
    std::vector<double> x(s.t.size());
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::log(std::log(s.t[i]));
    s.slope = fit_slope(x, s.value);
  }
  return s;
}

bool TrendSeries::abs_deviation_decreasing(double target) const {
  for (std::size_t i = 1; i < value.size(); ++i) {
    if (!(std::abs(value[i] - target) < std::abs(value[i - 1] - target))) return false;
  }
  return true;
}

double inner_prediction(double phi, const CriticalOuterSpec& spec, Vec2 x, double t) {
  const double L = std::log(t);
  if (phi <= 0) return 0.0;
  return std::pow(2.0 * spec.m * phi / L, 1.0 / spec.m) * critical_G(spec, x, t);
}

ErrorStat region_functional(const SolverState& u, const std::function<bool(double)>& region, double prefactor,
                            const std::function<double(std::size_t)>& prediction,
                            const std::function<double(Vec2)>& weight) {
  const Mesh& mesh = *u.mesh;
  ErrorStat st;
  st.sup = -INFINITY;
  st.inf = INFINITY;
  for (std::size_t c = 0; c < mesh.size(); ++c) {
    const Vec2 x = mesh.center()[c];
    if (!region(norm(x))) continue;
    const double v = prefactor * (u.u[c] - prediction(c)) / weight(x);
    ++st.count;
    st.sup = std::max(st.sup, v);
    st.inf = std::min(st.inf, v);
    if (st.count == 1 || std::abs(v) > st.abs_max) {
      st.argmax = c;
      st.abs_max = std::abs(v);
    }
  }
  if (st.count == 0) throw EmptyRegion("no grid points in the requested region");
  return st;
}

ErrorStat weighted_error(const SolverState& u, const std::vector<double>& phi, const CriticalOuterSpec& spec,
                         double delta) {
  if (phi.size() != u.u.size()) throw IncompatibleGrids("phi and state sizes differ");
  if (!(delta > 0 && delta < spec.delta_star())) throw ParameterError("delta must lie in (0, delta_*)");
  const double t = u.t;
  const double m = spec.m;
  const double L = std::log(t);
  const double ri = inner_radius(spec, delta, t);
  const Mesh& mesh = *u.mesh;
  return region_functional(
      u, [ri](double r) { return r <= ri; }, std::pow(t, 1.0 / m) * std::pow(L, 2.0 / m),
      [&](std::size_t c) { return inner_prediction(phi[c], spec, mesh.center()[c], t); },
      [m](Vec2 x) { return std::pow(std::log(norm(x) + std::numbers::e), 1.0 / m); });
}

ErrorStat outer_error(const SolverState& u, const CriticalOuterSpec& spec, double delta) {
  if (!(delta > 0)) throw ParameterError("delta must be positive");
  const double t = u.t;
  const double m = spec.m;
  const double ri = inner_radius(spec, delta, t);
  const Mesh& mesh = *u.mesh;
  return region_functional(
      u, [ri](double r) { return r >= ri; }, std::pow(t * std::log(t), 1.0 / m),
      [&](std::size_t c) { return critical_G(spec, mesh.center()[c], t); }, [](Vec2) { return 1.0; });
}

TrendSeries mass_ratio(const RunRecord& record, const CriticalOuterSpec& spec) {
  if (!(spec.M_phi > 0)) throw ParameterError("weighted mass must be positive");
  std::vector<double> t, v;
  for (const auto& r : record.rows) {
    if (r.t <= std::numbers::e) continue;
    t.push_back(r.t);
    v.push_back(std::log(r.t) * r.mass / spec.mass());
  }
  if (t.size() < 2 || t.back() < 1e3 * t.front()) throw SeriesError("mass ratio needs at least three decades of t");
  return make_trend(std::move(t), std::move(v));
}

SupportTrend support_ratio(const RunRecord& record, const CriticalOuterSpec& spec) {
  std::vector<double> t, vm, vp;
  for (const auto& r : record.rows) {
    if (r.t <= std::numbers::e) continue;
    if (!(r.zeta_plus > 0)) throw EmptySupport("empty support at t = " + std::to_string(r.t));
    const double s = critical_support_radius(spec, r.t);
    t.push_back(r.t);
    vm.push_back(r.zeta_minus / s);
    vp.push_back(r.zeta_plus / s);
  }
  return {make_trend(t, std::move(vm)), make_trend(t, std::move(vp))};
}

double compact_limit_constant(const CriticalOuterSpec& spec) {
  const double m = spec.m;
  const double a = std::pow(m * spec.M_phi / std::numbers::pi, 1.0 / m);
  const double b = std::pow(2.0 * m, 1.0 / m) * spec.F_star0();
  if (std::abs(a - b) > 1e-10 * a) {
    throw ParameterError("limit constant mismatch: " + std::to_string(a) + " vs " + std::to_string(b));
  }
  return a;
}

double sample_density(const SolverState& u, Vec2 x) {
  const Mesh& mesh = *u.mesh;
  const double r = norm(x);
  if (mesh.is_radial()) {
    const auto& c = mesh.center();
    const std::size_t n = mesh.size();
    if (r >= c[n - 1].x) return 0.0;
    if (r <= c[0].x) {
      if (mesh.radial().whole_plane()) return u.u[0];
      const double rin = mesh.inner_radius();
      if (r <= rin) return 0.0;
      return u.u[0] * (r - rin) / (c[0].x - rin);
    }
    const auto it = std::upper_bound(c.begin(), c.end(), r, [](double v, const Vec2& p) { return v < p.x; });
    const std::size_t i = static_cast<std::size_t>(it - c.begin()) - 1;
    const double s = (r - c[i].x) / (c[i + 1].x - c[i].x);
    return (1.0 - s) * u.u[i] + s * u.u[i + 1];
  }
  const auto& g = mesh.masked();
  const double fx = (x.x - g.origin) / g.h - 0.5;
  const double fy = (x.y - g.origin) / g.h - 0.5;
  const auto i0 = static_cast<std::int64_t>(std::floor(fx));
  const auto j0 = static_cast<std::int64_t>(std::floor(fy));
  const auto nx = static_cast<std::int64_t>(g.nx);
  auto val = [&](std::int64_t i, std::int64_t j) {
    if (i < 0 || j < 0 || i >= nx || j >= nx) return 0.0;
    const std::int64_t c = mesh.cell_of_grid()[static_cast<std::size_t>(j * nx + i)];
    return c < 0 ? 0.0 : u.u[static_cast<std::size_t>(c)];
  };
  const double sx = fx - static_cast<double>(i0), sy = fy - static_cast<double>(j0);
  return (1 - sx) * (1 - sy) * val(i0, j0) + sx * (1 - sy) * val(i0 + 1, j0) + (1 - sx) * sy * val(i0, j0 + 1) +
         sx * sy * val(i0 + 1, j0 + 1);
}

std::vector<double> compact_limit(const SolverState& u, const Potential& phi, const CriticalOuterSpec& spec,
                                  const std::vector<Vec2>& probes) {
  const double t = u.t;
  const double m = spec.m;
  if (!(t > std::numbers::e)) throw TimeDomainError("t > e required");
  const double L = std::log(t);
  const double K = compact_limit_constant(spec);
  std::vector<double> out;
  for (const auto& x : probes) {
    const double p = phi.phi(x);
    if (p <= 0) {
      out.push_back(NAN);
      continue;
    }
    out.push_back(std::pow(t * L * L, 1.0 / m) * sample_density(u, x) / (K * std::pow(p, 1.0 / m)));
  }
  return out;
}

std::vector<double> to_scaled_variables(const SolverState& u, const CriticalOuterSpec& spec,
                                        const std::vector<double>& xi, double angle) {
  const double t = u.t;
  const double m = spec.m;
  if (!(t > std::numbers::e)) throw TimeDomainError("t > e required");
  const double L = std::log(t);
  const double scale = std::pow(t, 1.0 / (2.0 * m)) * std::pow(L, -(m - 1.0) / (2.0 * m));
  const double pre = std::pow(t * L, 1.0 / m);
  const Vec2 dir{std::cos(angle), std::sin(angle)};
  std::vector<double> w(xi.size());
  for (std::size_t k = 0; k < xi.size(); ++k) w[k] = pre * sample_density(u, dir * (xi[k] * scale));
  return w;
}

}  // namespace pmelab
