#include "pmelab/stationary.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>
#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "pmelab/errors.hpp"
#include "pmelab/pde_solver.hpp"

namespace pmelab {

namespace {

using cplx = std::complex<double>;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

cplx to_c(Vec2 x) { return {x.x, x.y}; }

}  // namespace

double phi_disk(double r, Vec2 x) {
  const double rho = norm(x);
  if (!(r > 0)) throw ParameterError("disk radius must be positive");
  if (rho < r * (1.0 - 1e-14)) throw OutsideDomain("point lies inside the disk hole");
  return std::max(0.0, std::log(rho / r));
}

cplx ConformalMapSpec::f(cplx z) const {
  if (family == Family::Disk) return r * z;
  const double A = 0.5 * (a + b), B = 0.5 * (a - b);
  return r * r * z / (A + B * z * z);
}

cplx ConformalMapSpec::df(cplx z) const {
  if (family == Family::Disk) return {r, 0.0};
  const double A = 0.5 * (a + b), B = 0.5 * (a - b);
  const cplx den = A + B * z * z;
  return r * r * (A - B * z * z) / (den * den);
}

ConformalMapSpec conformal_disk(double r) {
  if (!(r > 0)) throw InvalidGeometry("disk radius must be positive");
  return {ConformalMapSpec::Family::Disk, r, r, r};
}

ConformalMapSpec conformal_ellipse(double semi_x, double semi_y, double inversion_radius) {
  if (!(semi_x > 0) || !(semi_y > 0) || !(inversion_radius > 0)) {
    throw InvalidGeometry("ellipse map needs positive semi-axes and inversion radius");
  }
  ConformalMapSpec m{ConformalMapSpec::Family::Joukowski, inversion_radius, semi_x, semi_y};
  validate_map(m);
  return m;
}

void validate_map(const ConformalMapSpec& map) {
  constexpr int nr = 32, nt = 128;
  double min_df = INFINITY;
  for (int i = 0; i <= nr; ++i) {
    for (int j = 0; j < nt; ++j) {
      const cplx z = std::polar(static_cast<double>(i) / nr, kTwoPi * j / nt);
      min_df = std::min(min_df, std::abs(map.df(z)));
    }
  }
  if (!(min_df > 0)) throw InvalidGeometry("conformal map derivative vanishes in the unit disk");
  // The boundary image must wind once around the origin with increasing argument.
  double prev = std::arg(map.f(1.0));
  double total = 0;
  for (int j = 1; j <= 4 * nt; ++j) {
    const double cur = std::arg(map.f(std::polar(1.0, kTwoPi * j / (4 * nt))));
    double d = cur - prev;
    if (d > std::numbers::pi) d -= kTwoPi;
    if (d < -std::numbers::pi) d += kTwoPi;
    if (d <= 0) throw InvalidGeometry("conformal boundary image is not star-shaped and simple");
    total += d;
    prev = cur;
  }
  if (std::abs(total - kTwoPi) > 1e-9) throw InvalidGeometry("conformal boundary image does not wind once");
}

cplx invert_map(const ConformalMapSpec& map, cplx w) {
  if (map.family == ConformalMapSpec::Family::Disk) return w / map.r;
  const double scale = std::max(1.0, std::abs(w));
  for (int K = 8; K <= 4096; K *= 2) {
    cplx z = 0.0;
    bool ok = true;
    double res = 0;
    for (int k = 1; k <= K && ok; ++k) {
      const cplx target = w * (static_cast<double>(k) / K);
      int it = 0;
      for (; it < 30; ++it) {
        const cplx F = map.f(z) - target;
        res = std::abs(F);
        if (res <= 1e-15 * scale) break;
        z -= F / map.df(z);
        if (!std::isfinite(z.real()) || std::abs(z) > 1.5) {
          ok = false;
          break;
        }
      }
      if (it == 30) {
        res = std::abs(map.f(z) - target);
        if (res > 1e-13 * scale) ok = false;
      }
    }
    if (ok && std::abs(z) <= 1.0 + 1e-12) return z;
    if (K == 4096) throw MapInversionError("inverse conformal map did not converge", res);
  }
  throw MapInversionError("inverse conformal map did not converge", INFINITY);
}

double phi_conformal(const ConformalMapSpec& map, Vec2 x) {
  const double r2 = dot(x, x);
  if (!(r2 > 0)) throw OutsideDomain("phi undefined at the origin");
  const cplx w = map.r * map.r * to_c(x) / r2;
  const cplx z = invert_map(map, w);
  if (std::abs(z) > 1.0 + 1e-12) throw OutsideDomain("point lies inside the hole");
  return std::max(0.0, -std::log(std::abs(z)));
}

Vec2 grad_phi_conformal(const ConformalMapSpec& map, Vec2 x) {
  const double r2 = dot(x, x);
  if (!(r2 > 0)) throw OutsideDomain("phi undefined at the origin");
  const cplx xc = to_c(x);
  const cplx z = invert_map(map, map.r * map.r * xc / r2);
  const cplx K = -map.r * map.r / (xc * xc * std::conj(map.df(z) * z));
  return {-K.real(), K.imag()};
}

namespace {

using SpMat = Eigen::SparseMatrix<double>;

SpMat assemble(const Mesh& mesh) {
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(mesh.size() + 2 * mesh.faces().size());
  std::vector<double> diag(mesh.size(), 0.0);
  for (const auto& f : mesh.faces()) {
    trip.emplace_back(f.i, f.j, -f.T);
    trip.emplace_back(f.j, f.i, -f.T);
    diag[f.i] += f.T;
    diag[f.j] += f.T;
  }
  for (const auto& l : mesh.hole_links()) diag[l.cell] += l.T;
  for (const auto& l : mesh.outer_links()) diag[l.cell] += l.T;
  for (std::size_t c = 0; c < mesh.size(); ++c) trip.emplace_back(c, c, diag[c]);
  SpMat A(static_cast<Eigen::Index>(mesh.size()), static_cast<Eigen::Index>(mesh.size()));
  A.setFromTriplets(trip.begin(), trip.end());
  return A;
}

// Direct factorisation followed by iterative refinement; the residual
// history of the refinement sweeps is reported on failure.
struct LinearSolve {
  explicit LinearSolve(const SpMat& A) : A_(A) {
    ldlt_.compute(A);
    if (ldlt_.info() != Eigen::Success) throw NoConvergence("sparse factorisation failed", {});
  }

  Eigen::VectorXd solve(const Eigen::VectorXd& b, double tol) {
    std::vector<double> history;
    const double scale = std::max(1.0, b.cwiseAbs().maxCoeff());
    Eigen::VectorXd x = ldlt_.solve(b);
    for (int sweep = 0; sweep < 5; ++sweep) {
      const Eigen::VectorXd r = b - A_ * x;
      history.push_back(r.cwiseAbs().maxCoeff() / scale);
      if (history.back() <= 1e-3 * tol) return x;
      x += ldlt_.solve(r);
    }
    if (history.back() <= tol) return x;
    throw NoConvergence("stationary solve stagnated", history);
  }

  const SpMat& A_;
  Eigen::SimplicialLDLT<SpMat> ldlt_;
};

double hole_flux(const Mesh& mesh, const Eigen::VectorXd& v) {
  double s = 0;
  for (const auto& l : mesh.hole_links()) s += l.T * v[l.cell];
  return s;
}

void finish_field(StationaryField& f, const SpMat& A, const Eigen::VectorXd& b) {
  const Mesh& mesh = *f.mesh;
  Eigen::VectorXd x = Eigen::Map<const Eigen::VectorXd>(f.phi.data(), static_cast<Eigen::Index>(f.phi.size()));
  const Eigen::VectorXd r = A * x - b;
  f.residual = 0;
  for (Eigen::Index c = 0; c < r.size(); ++c) f.residual = std::max(f.residual, std::abs(r[c]) / A.coeff(c, c));
  if (f.residual > f.tol) throw NoConvergence("stationary residual above tolerance", {f.residual});
  f.grad = cell_gradient(mesh, f.phi);
  f.C_phi = 0;
  for (std::size_t c = 0; c < mesh.size(); ++c) {
    f.C_phi = std::max(f.C_phi, std::abs(f.phi[c] - std::log(mesh.radius(c))));
  }
}

struct TwoSolves {
  Eigen::VectorXd phi0;
  Eigen::VectorXd unit;
  double C = 0;
};

TwoSolves flux_matched(const Mesh& mesh, const SpMat& A, double tol) {
  LinearSolve ls(A);
  Eigen::VectorXd b0 = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(mesh.size()));
  Eigen::VectorXd b1 = b0;
  for (const auto& l : mesh.outer_links()) {
    b0[l.cell] += l.T * std::log(norm(l.point));
    b1[l.cell] += l.T;
  }
  TwoSolves out;
  out.phi0 = ls.solve(b0, tol);
  out.unit = ls.solve(b1, tol);
  out.C = (kTwoPi - hole_flux(mesh, out.phi0)) / hole_flux(mesh, out.unit);
  return out;
}

StationaryField field_from(std::shared_ptr<const Mesh> mesh, std::optional<HoleGeometry> hole, const SpMat& A,
                           const TwoSolves& s, double C, double tol) {
  StationaryField f;
  f.mesh = std::move(mesh);
  f.hole = std::move(hole);
  f.tol = tol;
  f.C_est = C;
  const Eigen::VectorXd phi = s.phi0 + C * s.unit;
  f.phi.assign(phi.data(), phi.data() + phi.size());
  Eigen::VectorXd b = Eigen::VectorXd::Zero(phi.size());
  for (const auto& l : f.mesh->outer_links()) b[l.cell] += l.T * (std::log(norm(l.point)) + C);
  finish_field(f, A, b);
  return f;
}

}  // namespace

StationaryField solve_stationary_on(std::shared_ptr<const Mesh> mesh, std::optional<HoleGeometry> hole, double tol) {
  if (!(tol > 0)) throw ParameterError("tol > 0 required");
  if (mesh->hole_links().empty()) throw InvalidGeometry("stationary solve needs a hole");
  const SpMat A = assemble(*mesh);
  const TwoSolves s = flux_matched(*mesh, A, tol);
  return field_from(std::move(mesh), std::move(hole), A, s, s.C, tol);
}

StationaryField solve_stationary_with_outer(std::shared_ptr<const Mesh> mesh, std::optional<HoleGeometry> hole,
                                            const std::function<double(Vec2)>& outer_value, double tol) {
  if (!(tol > 0)) throw ParameterError("tol > 0 required");
  const SpMat A = assemble(*mesh);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(mesh->size()));
  for (const auto& l : mesh->outer_links()) b[l.cell] += l.T * outer_value(l.point);
  LinearSolve ls(A);
  const Eigen::VectorXd phi = ls.solve(b, tol);
  StationaryField f;
  f.mesh = std::move(mesh);
  f.hole = std::move(hole);
  f.tol = tol;
  f.phi.assign(phi.data(), phi.data() + phi.size());
  finish_field(f, A, b);
  f.C_est = NAN;
  return f;
}

StationaryField solve_stationary_numeric(const HoleGeometry& hole, double tol, const StationaryOptions& opt) {
  if (!(tol > 0)) throw ParameterError("tol > 0 required");
  std::shared_ptr<const Mesh> near, far;
  if (hole.kind() == HoleGeometry::Kind::Disk) {
    const double r = hole.radius();
    const double R = opt.r_out > 0 ? opt.r_out : 16.0 * r;
    const RadialGrid g = build_radial_grid(r, R, opt.radial_cells, opt.stretch);
    near = std::make_shared<Mesh>(make_mesh(g));
    far = std::make_shared<Mesh>(make_mesh(extend_radial_grid(g, 2.0 * R)));
  } else {
    const double E = opt.extent > 0 ? opt.extent : 4.0 * hole.diameter() + 4.0 * opt.h;
    near = std::make_shared<Mesh>(make_mesh(build_masked_grid(hole, E, opt.h), opt.theta_min));
    far = std::make_shared<Mesh>(make_mesh(build_masked_grid(hole, 2.0 * E, opt.h), opt.theta_min));
  }
  const SpMat A_far = assemble(*far);
  const TwoSolves s_far = flux_matched(*far, A_far, tol);
  const SpMat A = assemble(*near);
  const double C_near = flux_matched(*near, A, tol).C;
  // Truncation error in C decays like R^-2.
  const double C_est = s_far.C + (s_far.C - C_near) / 3.0;
  // log|x| + C drops the dipole and quadrupole terms, which are O(R^-2) at the
  // truncation circle; the far solve carries them to the near boundary.
  const Potential far_phi = field_potential(field_from(far, hole, A_far, s_far, C_est, tol));
  StationaryField f = solve_stationary_with_outer(near, hole, far_phi.phi, tol);
  f.C_est = C_est;
  return f;
}

GradientReport check_gradient_bounds(const StationaryField& field) {
  const Mesh& mesh = *field.mesh;
  GradientReport rep;
  rep.c_low = INFINITY;
  rep.C_high = 0;
  const double r_cut = mesh.outer_radius() - 2.0 * mesh.spacing();
  double worst_r = 0;
  double r_min = INFINITY;
  for (std::size_t c = 0; c < mesh.size(); ++c) {
    const Vec2 x = mesh.center()[c];
    const double r = norm(x);
    if (r > r_cut) continue;
    const double q = norm(field.grad[c]) * r;
    rep.c_low = std::min(rep.c_low, q);
    rep.C_high = std::max(rep.C_high, q);
    r_min = std::min(r_min, r);
    const double radial = dot(x, field.grad[c]);
    if (radial < 0.5 || q > 2.0) worst_r = std::max(worst_r, r);
  }
  if (!(rep.c_low > 0)) throw DegenerateGradient("min |x||grad phi| is not positive");
  rep.R_split = worst_r > 0 ? worst_r : r_min;
  rep.min_radial = INFINITY;
  rep.max_radial = -INFINITY;
  for (std::size_t c = 0; c < mesh.size(); ++c) {
    const Vec2 x = mesh.center()[c];
    const double r = norm(x);
    if (r > r_cut || (worst_r > 0 && r <= worst_r)) continue;
    const double radial = dot(x, field.grad[c]);
    rep.min_radial = std::min(rep.min_radial, radial);
    rep.max_radial = std::max(rep.max_radial, radial);
  }
  rep.bounds_hold = rep.min_radial >= 0.5 && rep.max_radial <= 2.0;
  return rep;
}

double weighted_moment(const Mesh& mesh, const std::vector<double>& u, const std::vector<double>& phi) {
  if (u.size() != mesh.size() || phi.size() != mesh.size()) throw IncompatibleGrids("weighted moment: size mismatch");
  double s = 0;
  for (std::size_t c = 0; c < mesh.size(); ++c) s += mesh.volume()[c] * u[c] * phi[c];
  return s;
}

double weighted_moment(const SolverState& u, const StationaryField& field) {
  if (!u.mesh || !field.mesh || !u.mesh->same_as(*field.mesh)) {
    throw IncompatibleGrids("state and stationary field live on different grids");
  }
  return weighted_moment(*u.mesh, u.u, field.phi);
}

Potential disk_potential(double r) {
  return {[r](Vec2 x) { return phi_disk(r, x); }, [](Vec2 x) { return x / dot(x, x); }};
}

Potential conformal_potential(const ConformalMapSpec& map) {
  return {[map](Vec2 x) { return phi_conformal(map, x); }, [map](Vec2 x) { return grad_phi_conformal(map, x); }};
}

Potential field_potential(const StationaryField& field) {
  auto f = std::make_shared<StationaryField>(field);
  const Mesh& mesh = *f->mesh;
  if (mesh.is_radial()) {
    auto value = [f](Vec2 x) {
      const Mesh& m = *f->mesh;
      const double r = norm(x);
      const auto& c = m.center();
      const std::size_t n = m.size();
      if (r >= c[n - 1].x) return std::log(r) + f->C_est;
      if (r <= c[0].x) {
        const double rin = m.inner_radius();
        if (r <= rin) return 0.0;
        return f->phi[0] * std::log(r / rin) / std::log(c[0].x / rin);
      }
      const auto it = std::upper_bound(c.begin(), c.end(), r, [](double v, const Vec2& p) { return v < p.x; });
      const std::size_t i = static_cast<std::size_t>(it - c.begin()) - 1;
      const double s = std::log(r / c[i].x) / std::log(c[i + 1].x / c[i].x);
      return (1.0 - s) * f->phi[i] + s * f->phi[i + 1];
    };
    auto grad = [f, value](Vec2 x) {
      const double r = norm(x);
      const double d = 1e-6 * r;
      const double dr = (value(x * ((r + d) / r)) - value(x * ((r - d) / r))) / (2.0 * d);
      return x * (dr / r);
    };
    return {value, grad};
  }
  // Masked: bilinear over fluid neighbours where available, nearest fluid cell otherwise.
  auto locate = [f](Vec2 x, auto&& combine) {
    const Mesh& m = *f->mesh;
    const auto& g = m.masked();
    const double fx = (x.x - g.origin) / g.h - 0.5;
    const double fy = (x.y - g.origin) / g.h - 0.5;
    const auto i0 = static_cast<std::int64_t>(std::floor(fx));
    const auto j0 = static_cast<std::int64_t>(std::floor(fy));
    const auto nx = static_cast<std::int64_t>(g.nx);
    auto cell = [&](std::int64_t i, std::int64_t j) -> std::int64_t {
      if (i < 0 || j < 0 || i >= nx || j >= nx) return -1;
      return m.cell_of_grid()[static_cast<std::size_t>(j * nx + i)];
    };
    const std::int64_t c00 = cell(i0, j0), c10 = cell(i0 + 1, j0), c01 = cell(i0, j0 + 1), c11 = cell(i0 + 1, j0 + 1);
    const double sx = fx - static_cast<double>(i0), sy = fy - static_cast<double>(j0);
    if (c00 >= 0 && c10 >= 0 && c01 >= 0 && c11 >= 0) {
      return combine(std::array<std::int64_t, 4>{c00, c10, c01, c11},
                     std::array<double, 4>{(1 - sx) * (1 - sy), sx * (1 - sy), (1 - sx) * sy, sx * sy});
    }
    std::int64_t best = -1;
    double bd = INFINITY;
    for (std::int64_t dj = -1; dj <= 2; ++dj) {
      for (std::int64_t di = -1; di <= 2; ++di) {
        const std::int64_t c = cell(i0 + di, j0 + dj);
        if (c < 0) continue;
        const double d = norm(m.center()[static_cast<std::size_t>(c)] - x);
        if (d < bd) {
          bd = d;
          best = c;
        }
      }
    }
    return combine(std::array<std::int64_t, 4>{best, best, best, best}, std::array<double, 4>{1, 0, 0, 0});
  };
  auto value = [f, locate](Vec2 x) {
    const Mesh& m = *f->mesh;
    if (f->hole && f->hole->contains(x)) throw OutsideDomain("point lies inside the hole");
    if (norm(x) >= m.outer_radius()) return std::log(norm(x)) + f->C_est;
    return locate(x, [&](const std::array<std::int64_t, 4>& c, const std::array<double, 4>& w) {
      if (c[0] < 0) throw OutsideDomain("no fluid cell near point");
      double s = 0;
      for (int k = 0; k < 4; ++k) s += w[k] * f->phi[static_cast<std::size_t>(c[k])];
      return s;
    });
  };
  auto grad = [f, locate](Vec2 x) {
    const Mesh& m = *f->mesh;
    if (norm(x) >= m.outer_radius()) return x / dot(x, x);
    return locate(x, [&](const std::array<std::int64_t, 4>& c, const std::array<double, 4>& w) {
      if (c[0] < 0) throw OutsideDomain("no fluid cell near point");
      Vec2 s{0, 0};
      for (int k = 0; k < 4; ++k) s = s + f->grad[static_cast<std::size_t>(c[k])] * w[k];
      return s;
    });
  };
  return {value, grad};
}

double alpha_bar_0(const Potential& pot, const HoleGeometry& hole, double r0, std::size_t samples) {
  if (!(r0 > 0)) throw ParameterError("offset distance must be positive");
  const auto pts = hole.boundary_samples(samples);
  double best = INFINITY;
  const std::size_t n = pts.size();
  for (std::size_t k = 0; k < n; ++k) {
    const Vec2 t = pts[(k + 1) % n] - pts[(k + n - 1) % n];
    const Vec2 nrm = Vec2{t.y, -t.x} / norm(t);
    best = std::min(best, pot.phi(pts[k] + nrm * r0));
  }
  return best;
}

}  // namespace pmelab
