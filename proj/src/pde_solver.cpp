#include "pmelab/pde_solver.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "pmelab/errors.hpp"

namespace pmelab {

double SolverState::mass() const {
  double s = 0;
  const auto& v = mesh->volume();
  for (std::size_t c = 0; c < u.size(); ++c) s += v[c] * u[c];
  return s;
}

double SolverState::sup() const { return u.empty() ? 0.0 : *std::max_element(u.begin(), u.end()); }

SolverState make_state(std::shared_ptr<const Mesh> mesh, double m, double t, std::vector<double> u) {
  if (!(m > 1.0)) throw ParameterError("m > 1 required");
  if (u.size() != mesh->size()) throw IncompatibleGrids("initial data size does not match mesh");
  for (double v : u) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw ParameterError("initial data must be finite and nonnegative");
  }
  return {std::move(mesh), std::move(u), t, m, 0.0};
}

SolverState sample_state(std::shared_ptr<const Mesh> mesh, double m, double t, const std::function<double(Vec2)>& f) {
  std::vector<double> u(mesh->size());
  for (std::size_t c = 0; c < u.size(); ++c) u[c] = f(mesh->center()[c]);
  return make_state(std::move(mesh), m, t, std::move(u));
}

namespace {

double dt_from_sup(const Mesh& mesh, double m, double sup, double safety, double dt_max) {
  if (!(safety > 0.0 && safety <= 1.0)) throw ParameterError("safety must lie in (0, 1]");
  const double coef = m * std::pow(sup, m - 1.0);
  if (!(coef > 0.0)) return dt_max;
  return std::min(dt_max, safety * mesh.min_diffusive_scale() / coef);
}

}  // namespace

double stable_dt(const SolverState& state, double safety, double dt_max) {
  return dt_from_sup(*state.mesh, state.m, state.sup(), safety, dt_max);
}

Stepper::Stepper(std::shared_ptr<const Mesh> mesh) : mesh_(std::move(mesh)) {
  const Mesh& m = *mesh_;
  const auto& faces = m.faces();
  cell_r_.resize(m.size());
  for (std::size_t c = 0; c < m.size(); ++c) cell_r_[c] = m.radius(c);
  face_order_.resize(faces.size());
  std::iota(face_order_.begin(), face_order_.end(), 0u);
  auto rmin = [&](std::uint32_t f) { return std::min(cell_r_[faces[f].i], cell_r_[faces[f].j]); };
  std::stable_sort(face_order_.begin(), face_order_.end(),
                   [&](std::uint32_t a, std::uint32_t b) { return rmin(a) < rmin(b); });
  face_rmin_.resize(faces.size());
  face_rmax_.resize(faces.size());
  for (std::size_t k = 0; k < faces.size(); ++k) {
    const auto& f = faces[face_order_[k]];
    face_rmin_[k] = std::min(cell_r_[f.i], cell_r_[f.j]);
    face_rmax_[k] = std::max(cell_r_[f.i], cell_r_[f.j]);
  }
  cell_order_.resize(m.size());
  std::iota(cell_order_.begin(), cell_order_.end(), 0u);
  std::stable_sort(cell_order_.begin(), cell_order_.end(),
                   [&](std::uint32_t a, std::uint32_t b) { return cell_r_[a] < cell_r_[b]; });
  p_.assign(m.size(), 0.0);
  d_.assign(m.size(), 0.0);
}

void Stepper::reset_active(const SolverState& s) {
  primed_ = true;
  active_r_ = -1;
  for (std::size_t c = 0; c < s.u.size(); ++c) {
    if (s.u[c] > 0) active_r_ = std::max(active_r_, cell_r_[c]);
  }
}

void Stepper::advance(SolverState& s, double dt) {
  const Mesh& mesh = *mesh_;
  if (s.mesh.get() != mesh_.get() && !s.mesh->same_as(mesh)) throw IncompatibleGrids("stepper mesh mismatch");
  if (!primed_) reset_active(s);
  if (active_r_ < 0) {
    s.t += dt;
    return;
  }
  const auto& faces = mesh.faces();
  const auto& vol = mesh.volume();
  const double m = s.m;
  double sup_old = 0;
  // Pressure-like powers only where they can matter.
  std::size_t nc = 0;
  double reach = active_r_;
  std::size_t nf = 0;
  while (nf < face_order_.size() && face_rmin_[nf] <= active_r_) {
    reach = std::max(reach, face_rmax_[nf]);
    ++nf;
  }
  while (nc < cell_order_.size() && cell_r_[cell_order_[nc]] <= reach) {
    const std::uint32_t c = cell_order_[nc];
    const double uc = s.u[c];
    sup_old = std::max(sup_old, uc);
    p_[c] = uc > 0 ? (m == 2.0 ? uc * uc : std::pow(uc, m)) : 0.0;
    ++nc;
  }
  for (std::size_t k = 0; k < nf; ++k) {
    const auto& f = faces[face_order_[k]];
    const double flux = f.T * (p_[f.j] - p_[f.i]);
    d_[f.i] += flux;
    d_[f.j] -= flux;
  }
  double out = 0;
  for (const auto& l : mesh.hole_links()) {
    const double q = l.T * p_[l.cell];
    d_[l.cell] -= q;
    out += q;
  }
  double new_active = -1;
  const double neg_tol = 1e-12 * sup_old;
  for (std::size_t k = 0; k < nc; ++k) {
    const std::uint32_t c = cell_order_[k];
    double v = s.u[c] + dt * d_[c] / vol[c];
    if (v < 0) {
      if (v < -neg_tol) {
        throw StabilityFault("negative density " + std::to_string(v) + " at cell " + std::to_string(c) +
                             ", t = " + std::to_string(s.t));
      }
      v = 0;
    }
    s.u[c] = v;
    d_[c] = 0;
    p_[c] = 0;
    if (v > 0) new_active = std::max(new_active, cell_r_[c]);
  }
  s.outflow += dt * out;
  s.t += dt;
  active_r_ = new_active;
}

SolverState step(const SolverState& state, double dt) {
  SolverState s = state;
  Stepper st(s.mesh);
  st.reset_active(s);
  st.advance(s, dt);
  return s;
}

std::vector<double> remap_zero_extend(const Mesh& from, const std::vector<double>& u, const Mesh& to) {
  std::vector<double> out(to.size(), 0.0);
  if (from.is_radial() != to.is_radial()) throw IncompatibleGrids("cannot remap between grid kinds");
  if (from.is_radial()) {
    const auto& a = from.radial().edges;
    const auto& b = to.radial().edges;
    if (b.size() < a.size()) throw IncompatibleGrids("target grid is smaller");
    for (std::size_t k = 0; k < a.size(); ++k) {
      if (std::abs(a[k] - b[k]) > 1e-12 * std::max(1.0, std::abs(a[k]))) {
        throw IncompatibleGrids("radial grids do not share edges");
      }
    }
    std::copy(u.begin(), u.end(), out.begin());
    return out;
  }
  const auto& gf = from.masked();
  const auto& gt = to.masked();
  if (std::abs(gf.h - gt.h) > 1e-12 * gf.h) throw IncompatibleGrids("masked grids have different spacing");
  const double shift = (gf.origin - gt.origin) / gt.h;
  const auto off = static_cast<std::int64_t>(std::llround(shift));
  if (std::abs(shift - static_cast<double>(off)) > 1e-6) throw IncompatibleGrids("masked grids are not aligned");
  for (std::size_t c = 0; c < from.size(); ++c) {
    if (u[c] == 0) continue;
    const std::size_t k = from.grid_of_cell()[c];
    const auto i = static_cast<std::int64_t>(k % gf.nx) + off;
    const auto j = static_cast<std::int64_t>(k / gf.nx) + off;
    const std::int64_t tc = to.cell_of_grid()[static_cast<std::size_t>(j) * gt.nx + static_cast<std::size_t>(i)];
    if (tc < 0) throw IncompatibleGrids("positive cell has no fluid counterpart");
    out[static_cast<std::size_t>(tc)] = u[c];
  }
  return out;
}

SupportRadii support_radii(const SolverState& state, double threshold) {
  if (!(threshold > 0)) throw ParameterError("support threshold must be positive");
  const Mesh& mesh = *state.mesh;
  const auto& u = state.u;
  const double m = state.m;
  SupportRadii out;
  if (mesh.is_radial()) {
    const std::size_t n = u.size();
    std::size_t last = n;
    for (std::size_t i = n; i-- > 0;) {
      if (u[i] > threshold) {
        last = i;
        break;
      }
    }
    if (last == n) throw EmptySupport("no cell exceeds the support threshold");
    auto front = [&](std::size_t i) {
      // Crossing of the pressure u^(m-1), extrapolated linearly from cells i-1, i.
      const double ci = mesh.center()[i].x;
      const double hi = i + 1 < n ? mesh.center()[i + 1].x : mesh.outer_radius();
      if (i == 0) return ci;
      const double ci1 = mesh.center()[i - 1].x;
      const double pi = std::pow(u[i], m - 1.0);
      const double pm = std::pow(u[i - 1], m - 1.0);
      if (!(pm > pi)) return ci;
      return std::clamp(ci + pi * (ci - ci1) / (pm - pi), ci, hi);
    };
    out.zeta_plus = front(last);
    std::size_t first_zero = n;
    for (std::size_t i = 0; i < n; ++i) {
      if (u[i] <= threshold) {
        first_zero = i;
        break;
      }
    }
    out.zeta_minus = (first_zero == last + 1 || first_zero == n) ? out.zeta_plus
                     : first_zero == 0                          ? mesh.center()[0].x
                                                                : front(first_zero - 1);
    return out;
  }
  double rplus = -1, rminus = INFINITY;
  for (std::size_t c = 0; c < u.size(); ++c) {
    const double r = mesh.radius(c);
    if (u[c] > threshold) rplus = std::max(rplus, r);
    else rminus = std::min(rminus, r);
  }
  if (rplus < 0) throw EmptySupport("no cell exceeds the support threshold");
  out.zeta_plus = rplus;
  out.zeta_minus = std::min(rminus, rplus);
  return out;
}

std::vector<double> checkpoint_times(double t_start, double t_end, double ratio) {
  if (!(ratio > 1.0)) throw ParameterError("checkpoint ratio must exceed 1");
  if (!(t_end >= t_start)) throw ParameterError("t_end >= t_start required");
  std::vector<double> out{t_start};
  if (t_end == t_start) return out;
  const double lr = std::log10(ratio);
  auto k = static_cast<long>(std::floor(std::log10(t_start) / lr)) - 1;
  for (;; ++k) {
    const double t = std::pow(10.0, static_cast<double>(k) * lr);
    if (t <= t_start * (1 + 1e-12)) continue;
    if (t >= t_end * (1 - 1e-12)) break;
    out.push_back(t);
  }
  out.push_back(t_end);
  return out;
}

namespace {

Checkpoint make_checkpoint(const SolverState& s, const RunOptions& opt, const std::vector<double>& phi,
                           std::size_t steps) {
  Checkpoint cp;
  cp.t = s.t;
  cp.mass = s.mass();
  cp.sup_u = s.sup();
  cp.outflow = s.outflow;
  cp.steps = steps;
  if (!phi.empty()) {
    double w = 0;
    const auto& v = s.mesh->volume();
    for (std::size_t c = 0; c < phi.size(); ++c) w += v[c] * s.u[c] * phi[c];
    cp.weighted_moment = w;
  }
  if (cp.sup_u > 0) {
    const auto z = support_radii(s, opt.support_threshold * cp.sup_u);
    cp.zeta_minus = z.zeta_minus;
    cp.zeta_plus = z.zeta_plus;
  }
  return cp;
}

}  // namespace

RunRecord run(SolverState s, const RunOptions& opt) {
  RunRecord rec;
  if (!(opt.t_end >= s.t)) throw ParameterError("t_end must not precede the initial time");
  const auto times = checkpoint_times(s.t, opt.t_end, opt.checkpoint_ratio);
  std::vector<double> phi = opt.phi_provider ? opt.phi_provider(s.mesh) : std::vector<double>{};
  auto stepper = std::make_unique<Stepper>(s.mesh);
  stepper->reset_active(s);
  std::size_t steps = 0;
  auto record = [&]() {
    Checkpoint cp = make_checkpoint(s, opt, phi, steps);
    if (opt.on_checkpoint) opt.on_checkpoint(s, cp);
    rec.rows.push_back(cp);
    if (opt.keep_snapshots) rec.snapshots.push_back(s);
  };
  record();
  rec.degenerate = times.size() == 1 || s.sup() == 0;
  double sup = s.sup();
  for (std::size_t k = 1; k < times.size(); ++k) {
    const double target = times[k];
    while (s.t < target) {
      double dt = dt_from_sup(*s.mesh, s.m, sup, opt.safety, opt.dt_max);
      if (s.t + dt >= target || target - (s.t + dt) < 1e-9 * dt) dt = target - s.t;
      stepper->advance(s, dt);
      ++steps;
      if (s.t > target || target - s.t < 1e-12 * target) s.t = target;
      sup = 0;
      for (double v : s.u) sup = std::max(sup, v);
      const double buffer = opt.extend_fraction * s.mesh->outer_radius();
      if (stepper->active_radius() > buffer) {
        if (!opt.auto_extend || !opt.extend_mesh) {
          throw BufferReached("support reached " + std::to_string(stepper->active_radius()) +
                              " beyond the truncation buffer at t = " + std::to_string(s.t));
        }
        auto bigger = opt.extend_mesh(*s.mesh);
        s.u = remap_zero_extend(*s.mesh, s.u, *bigger);
        s.mesh = bigger;
        if (opt.phi_provider) phi = opt.phi_provider(s.mesh);
        stepper = std::make_unique<Stepper>(s.mesh);
        stepper->reset_active(s);
        ++rec.extensions;
      }
    }
    record();
  }
  return rec;
}

void run_lockstep(std::vector<SolverState>& states, const RunOptions& opt,
                  const std::function<void(const std::vector<SolverState>&)>& on_checkpoint) {
  if (states.empty()) return;
  const double t0 = states.front().t;
  for (const auto& s : states) {
    if (s.t != t0) throw ParameterError("lockstep states must share the initial time");
  }
  const auto times = checkpoint_times(t0, opt.t_end, opt.checkpoint_ratio);
  std::vector<std::unique_ptr<Stepper>> steppers;
  for (auto& s : states) {
    steppers.push_back(std::make_unique<Stepper>(s.mesh));
    steppers.back()->reset_active(s);
  }
  on_checkpoint(states);
  double t = t0;
  for (std::size_t k = 1; k < times.size(); ++k) {
    const double target = times[k];
    while (t < target) {
      double dt = opt.dt_max;
      for (const auto& s : states) dt = std::min(dt, stable_dt(s, opt.safety, opt.dt_max));
      if (t + dt >= target || target - (t + dt) < 1e-9 * dt) dt = target - t;
      for (std::size_t i = 0; i < states.size(); ++i) {
        steppers[i]->advance(states[i], dt);
        states[i].t = t + dt;
        if (steppers[i]->active_radius() > opt.extend_fraction * states[i].mesh->outer_radius()) {
          throw BufferReached("lockstep run: support reached the truncation buffer at t = " +
                              std::to_string(states[i].t));
        }
      }
      t += dt;
      if (target - t < 1e-12 * target) t = target;
      for (auto& s : states) s.t = t;
    }
    on_checkpoint(states);
  }
}

}  // namespace pmelab
