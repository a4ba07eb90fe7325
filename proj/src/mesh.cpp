#include "pmelab/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "pmelab/errors.hpp"
#include "pmelab/util.hpp"

namespace pmelab {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

void Mesh::finalize() {
  const std::size_t n = volume_.size();
  std::vector<double> diag(n, 0.0);
  cell_faces_.assign(n, {});
  for (std::uint32_t f = 0; f < faces_.size(); ++f) {
    const auto& face = faces_[f];
    diag[face.i] += face.T;
    diag[face.j] += face.T;
    cell_faces_[face.i].push_back(f);
    cell_faces_[face.j].push_back(f);
  }
  for (const auto& l : hole_links_) diag[l.cell] += l.T;
  for (const auto& l : outer_links_) diag[l.cell] += l.T;
  min_scale_ = INFINITY;
  for (std::size_t c = 0; c < n; ++c) {
    if (diag[c] > 0) min_scale_ = std::min(min_scale_, volume_[c] / diag[c]);
  }
}

Mesh make_mesh(const RadialGrid& grid) {
  Mesh m;
  m.kind_ = Mesh::Kind::Radial;
  m.grid_ = grid;
  const std::size_t n = grid.size();
  const auto& e = grid.edges;
  m.volume_.resize(n);
  m.center_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    m.volume_[i] = std::numbers::pi * (e[i + 1] * e[i + 1] - e[i] * e[i]);
    m.center_[i] = {grid.center(i), 0.0};
  }
  const bool whole = grid.whole_plane();
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double ra = m.center_[i].x;
    const double rb = m.center_[i + 1].x;
    // Whole-plane grids use the plain cylindrical flux so the centre cell is regular.
    const double T = whole ? kTwoPi * e[i + 1] / (rb - ra) : kTwoPi / std::log(rb / ra);
    m.faces_.push_back({static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(i + 1), T});
  }
  if (!whole) {
    m.hole_links_.push_back({0, kTwoPi / std::log(m.center_[0].x / e[0]), {e[0], 0.0}});
  }
  const double rl = m.center_[n - 1].x;
  const double To = whole ? kTwoPi * e[n] / (e[n] - rl) : kTwoPi / std::log(e[n] / rl);
  m.outer_links_.push_back({static_cast<std::uint32_t>(n - 1), To, {e[n], 0.0}});
  m.outer_radius_ = e[n];
  m.inner_radius_ = e[0];
  m.spacing_ = grid.width(0);
  m.descriptor_ = "radial n=" + std::to_string(n) + " r_in=" + fmt_g17(e[0]) + " r_out=" + fmt_g17(e[n]) +
                  " edges=" + hex64(fnv1a_bytes(e.data(), e.size()));
  m.finalize();
  return m;
}

Mesh make_mesh(const MaskedGrid2D& grid, double theta_min) {
  Mesh m;
  m.kind_ = Mesh::Kind::Masked;
  m.grid_ = grid;
  const std::size_t nx = grid.nx;
  const double h = grid.h;
  m.cell_of_grid_.assign(grid.size(), -1);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (grid.mask[k] != CellMask::Fluid) continue;
    m.cell_of_grid_[k] = static_cast<std::int64_t>(m.grid_of_cell_.size());
    m.grid_of_cell_.push_back(k);
    m.center_.push_back(grid.center(k));
    m.volume_.push_back(h * h);
  }
  for (std::size_t c = 0; c < m.grid_of_cell_.size(); ++c) {
    const std::size_t k = m.grid_of_cell_[c];
    const std::size_t i = k % nx, j = k / nx;
    const Vec2 xc = grid.center(k);
    auto visit = [&](std::size_t nk, bool forward) {
      const auto nm = grid.mask[nk];
      if (nm == CellMask::Fluid) {
        if (forward) {
          m.faces_.push_back({static_cast<std::uint32_t>(c), static_cast<std::uint32_t>(m.cell_of_grid_[nk]), 1.0});
        }
      } else if (nm == CellMask::Hole) {
        const Vec2 xn = grid.center(nk);
        const double theta = grid.hole->crossing_fraction(xc, xn);
        const Vec2 p = xc + (xn - xc) * theta;
        m.hole_links_.push_back({static_cast<std::uint32_t>(c), 1.0 / std::max(theta, theta_min), p});
      } else {
        m.outer_links_.push_back({static_cast<std::uint32_t>(c), 1.0, grid.center(nk)});
      }
    };
    // Truncation keeps fluid cells away from the square's edge, so neighbours exist.
    visit(k - 1, false);
    visit(k + 1, true);
    visit(k - nx, false);
    visit(k + nx, true);
    (void)i;
    (void)j;
  }
  m.outer_radius_ = grid.truncation_radius;
  m.inner_radius_ = grid.hole ? grid.hole->inner_radius() : 0.0;
  m.spacing_ = h;
  const auto mask_hash = fnv1a_bytes(grid.mask.data(), grid.mask.size());
  m.descriptor_ = "masked nx=" + std::to_string(nx) + " h=" + fmt_g17(h) +
                  " hole=" + (grid.hole ? grid.hole->describe() : std::string("none")) + " mask=" + hex64(mask_hash);
  m.finalize();
  return m;
}

std::vector<double> apply_operator(const Mesh& mesh, const std::vector<double>& v) {
  std::vector<double> out(mesh.size(), 0.0);
  for (const auto& f : mesh.faces()) {
    const double flux = f.T * (v[f.j] - v[f.i]);
    out[f.i] += flux;
    out[f.j] -= flux;
  }
  for (const auto& l : mesh.hole_links()) out[l.cell] -= l.T * v[l.cell];
  return out;
}

namespace {

// Derivative at 0 from samples at -a (fa) and +b (fb).
double three_point(double a, double fa, double f0, double b, double fb) {
  return (a * a * (fb - f0) + b * b * (f0 - fa)) / (a * b * (a + b));
}

std::vector<Vec2> radial_gradient(const Mesh& mesh, const std::vector<double>& v) {
  const auto& g = mesh.radial();
  const std::size_t n = mesh.size();
  std::vector<Vec2> out(n, {0, 0});
  if (n < 2) return out;
  auto lr = [&](std::size_t i) { return std::log(mesh.center()[i].x); };
  for (std::size_t i = 0; i < n; ++i) {
    const double r = mesh.center()[i].x;
    double d = 0;
    if (g.whole_plane()) {
      // d/dr in plain r; symmetric extension at the centre.
      if (i == 0) d = 0.5 * (v[1] - v[0]) / (mesh.center()[1].x - r);
      else if (i + 1 == n) d = (v[i] - v[i - 1]) / (r - mesh.center()[i - 1].x);
      else d = (v[i + 1] - v[i - 1]) / (mesh.center()[i + 1].x - mesh.center()[i - 1].x);
      out[i] = {d, 0};
      continue;
    }
    // Differences in log r: exact for a + b log r.
    if (i == 0) {
      const double a = lr(0) - std::log(g.r_in());
      const double b = lr(1) - lr(0);
      d = three_point(a, 0.0, v[0], b, v[1]);
    } else if (i + 1 == n) {
      d = (v[i] - v[i - 1]) / (lr(i) - lr(i - 1));
    } else {
      d = three_point(lr(i) - lr(i - 1), v[i - 1], v[i], lr(i + 1) - lr(i), v[i + 1]);
    }
    out[i] = {d / r, 0};
  }
  return out;
}

std::vector<Vec2> masked_gradient(const Mesh& mesh, const std::vector<double>& v) {
  const auto& g = mesh.masked();
  const std::size_t nx = g.nx;
  const double h = g.h;
  std::vector<Vec2> out(mesh.size(), {0, 0});
  for (std::size_t c = 0; c < mesh.size(); ++c) {
    const std::size_t k = mesh.grid_of_cell()[c];
    const Vec2 xc = g.center(k);
    // Returns false if no usable sample exists on that side.
    auto sample = [&](std::size_t nk, double& dist, double& val) {
      const auto nm = g.mask[nk];
      if (nm == CellMask::Fluid) {
        dist = h;
        val = v[static_cast<std::size_t>(mesh.cell_of_grid()[nk])];
        return true;
      }
      if (nm == CellMask::Hole) {
        dist = std::max(g.hole->crossing_fraction(xc, g.center(nk)), 1e-3) * h;
        val = 0.0;
        return true;
      }
      return false;
    };
    double comp[2] = {0, 0};
    const std::size_t lo[2] = {k - 1, k - nx};
    const std::size_t hi[2] = {k + 1, k + nx};
    for (int ax = 0; ax < 2; ++ax) {
      double da = 0, fa = 0, db = 0, fb = 0;
      const bool ha = sample(lo[ax], da, fa);
      const bool hb = sample(hi[ax], db, fb);
      if (ha && hb) comp[ax] = three_point(da, fa, v[c], db, fb);
      else if (ha) comp[ax] = (v[c] - fa) / da;
      else if (hb) comp[ax] = (fb - v[c]) / db;
    }
    out[c] = {comp[0], comp[1]};
  }
  return out;
}

}  // namespace

std::vector<Vec2> cell_gradient(const Mesh& mesh, const std::vector<double>& values) {
  if (values.size() != mesh.size()) throw IncompatibleGrids("gradient: value count does not match mesh");
  return mesh.is_radial() ? radial_gradient(mesh, values) : masked_gradient(mesh, values);
}

}  // namespace pmelab
