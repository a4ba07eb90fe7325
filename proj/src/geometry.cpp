#include "pmelab/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <queue>
#include <sstream>

#include "pmelab/errors.hpp"

namespace pmelab {

namespace {

bool segments_intersect(Vec2 p1, Vec2 p2, Vec2 q1, Vec2 q2) {
  const double d1 = cross(q2 - q1, p1 - q1);
  const double d2 = cross(q2 - q1, p2 - q1);
  const double d3 = cross(p2 - p1, q1 - p1);
  const double d4 = cross(p2 - p1, q2 - p1);
  return ((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0));
}

int winding_number(const std::vector<Vec2>& poly, Vec2 x) {
  int wn = 0;
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 a = poly[i];
    const Vec2 b = poly[(i + 1) % n];
    if (a.y <= x.y) {
      if (b.y > x.y && cross(b - a, x - a) > 0) ++wn;
    } else if (b.y <= x.y && cross(b - a, x - a) < 0) {
      --wn;
    }
  }
  return wn;
}

double distance_to_segment(Vec2 p, Vec2 a, Vec2 b) {
  const Vec2 ab = b - a;
  const double len2 = dot(ab, ab);
  double s = len2 > 0 ? dot(p - a, ab) / len2 : 0.0;
  s = std::clamp(s, 0.0, 1.0);
  return norm(p - (a + ab * s));
}

}  // namespace

HoleGeometry HoleGeometry::disk(double radius) {
  if (!(radius > 0) || !std::isfinite(radius)) {
    throw InvalidGeometry("disk radius must be positive, got " + std::to_string(radius));
  }
  HoleGeometry g;
  g.kind_ = Kind::Disk;
  g.a_ = g.b_ = radius;
  return g;
}

HoleGeometry HoleGeometry::ellipse(double semi_x, double semi_y) {
  if (!(semi_x > 0) || !(semi_y > 0) || !std::isfinite(semi_x) || !std::isfinite(semi_y)) {
    throw InvalidGeometry("ellipse semi-axes must be positive");
  }
  HoleGeometry g;
  g.kind_ = Kind::Ellipse;
  g.a_ = semi_x;
  g.b_ = semi_y;
  return g;
}

HoleGeometry HoleGeometry::curve(std::vector<Vec2> points) {
  const std::size_t n = points.size();
  if (n < 3) throw InvalidGeometry("curve needs at least 3 points");
  for (std::size_t i = 0; i < n; ++i) {
    if (points[i] == points[(i + 1) % n]) {
      throw InvalidGeometry("curve has repeated consecutive point at index " + std::to_string(i));
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (j == i + 1 || (i == 0 && j == n - 1)) continue;
      if (segments_intersect(points[i], points[(i + 1) % n], points[j], points[(j + 1) % n])) {
        throw InvalidGeometry("curve is self-intersecting (segments " + std::to_string(i) + ", " +
                              std::to_string(j) + ")");
      }
    }
  }
  // Orient counter-clockwise.
  double area2 = 0;
  for (std::size_t i = 0; i < n; ++i) area2 += cross(points[i], points[(i + 1) % n]);
  if (area2 < 0) std::reverse(points.begin(), points.end());
  if (winding_number(points, {0, 0}) == 0) throw InvalidGeometry("origin is not inside the curve");
  HoleGeometry g;
  g.kind_ = Kind::Curve;
  g.points_ = std::move(points);
  if (g.inner_radius() <= 0) throw InvalidGeometry("origin lies on the curve");
  return g;
}

bool HoleGeometry::contains(Vec2 x) const {
  switch (kind_) {
    case Kind::Disk:
      return dot(x, x) < a_ * a_;
    case Kind::Ellipse: {
      const double u = x.x / a_;
      const double v = x.y / b_;
      return u * u + v * v < 1.0;
    }
    case Kind::Curve:
      return winding_number(points_, x) != 0;
  }
  return false;
}

double HoleGeometry::inner_radius() const {
  switch (kind_) {
    case Kind::Disk:
      return a_;
    case Kind::Ellipse:
      return std::min(a_, b_);
    case Kind::Curve: {
      double d = INFINITY;
      for (std::size_t i = 0; i < points_.size(); ++i) {
        d = std::min(d, distance_to_segment({0, 0}, points_[i], points_[(i + 1) % points_.size()]));
      }
      return d;
    }
  }
  return 0;
}

double HoleGeometry::outer_radius() const {
  switch (kind_) {
    case Kind::Disk:
      return a_;
    case Kind::Ellipse:
      return std::max(a_, b_);
    case Kind::Curve: {
      double d = 0;
      for (const auto& p : points_) d = std::max(d, norm(p));
      return d;
    }
  }
  return 0;
}

double HoleGeometry::diameter() const {
  if (kind_ != Kind::Curve) return 2.0 * std::max(a_, b_);
  double d = 0;
  for (const auto& p : points_)
    for (const auto& q : points_) d = std::max(d, norm(p - q));
  return d;
}

double HoleGeometry::area() const {
  if (kind_ != Kind::Curve) return std::numbers::pi * a_ * b_;
  double area2 = 0;
  for (std::size_t i = 0; i < points_.size(); ++i) area2 += cross(points_[i], points_[(i + 1) % points_.size()]);
  return 0.5 * std::abs(area2);
}

std::vector<Vec2> HoleGeometry::boundary_samples(std::size_t n) const {
  std::vector<Vec2> out;
  out.reserve(n);
  if (kind_ != Kind::Curve) {
    for (std::size_t k = 0; k < n; ++k) {
      const double th = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
      out.push_back({a_ * std::cos(th), b_ * std::sin(th)});
    }
    return out;
  }
  // Arc-length sampling of the polyline.
  std::vector<double> cum{0.0};
  const std::size_t np = points_.size();
  for (std::size_t i = 0; i < np; ++i) cum.push_back(cum.back() + norm(points_[(i + 1) % np] - points_[i]));
  const double total = cum.back();
  std::size_t seg = 0;
  for (std::size_t k = 0; k < n; ++k) {
    const double s = total * static_cast<double>(k) / static_cast<double>(n);
    while (seg + 1 < np && cum[seg + 1] <= s) ++seg;
    const double f = (s - cum[seg]) / (cum[seg + 1] - cum[seg]);
    out.push_back(points_[seg] + (points_[(seg + 1) % np] - points_[seg]) * f);
  }
  return out;
}

double HoleGeometry::crossing_fraction(Vec2 outside, Vec2 inside) const {
  if (kind_ == Kind::Disk || kind_ == Kind::Ellipse) {
    // Solve |P(s)|_ellipse = 1 on the segment P(s) = outside + s (inside - outside).
    const Vec2 d = inside - outside;
    const double ax = a_, by = b_;
    const double qa = (d.x * d.x) / (ax * ax) + (d.y * d.y) / (by * by);
    const double qb = 2 * ((outside.x * d.x) / (ax * ax) + (outside.y * d.y) / (by * by));
    const double qc = (outside.x * outside.x) / (ax * ax) + (outside.y * outside.y) / (by * by) - 1.0;
    const double disc = std::max(0.0, qb * qb - 4 * qa * qc);
    const double sq = std::sqrt(disc);
    // Smallest root in [0,1]; numerically stable form.
    const double q = -0.5 * (qb + std::copysign(sq, qb));
    double r1 = q / qa;
    double r2 = q != 0 ? qc / q : r1;
    if (r1 > r2) std::swap(r1, r2);
    const double s = (r1 >= 0 && r1 <= 1) ? r1 : r2;
    return std::clamp(s, 0.0, 1.0);
  }
  double lo = 0.0, hi = 1.0;
  for (int it = 0; it < 64; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (contains(outside + (inside - outside) * mid)) hi = mid;
    else lo = mid;
  }
  return 0.5 * (lo + hi);
}

std::string HoleGeometry::describe() const {
  std::ostringstream os;
  os.precision(17);
  switch (kind_) {
    case Kind::Disk:
      os << "disk(" << a_ << ")";
      break;
    case Kind::Ellipse:
      os << "ellipse(" << a_ << "," << b_ << ")";
      break;
    case Kind::Curve:
      os << "curve(" << points_.size() << " points)";
      break;
  }
  return os.str();
}

bool point_in_hole(const HoleGeometry& hole, Vec2 x) { return hole.contains(x); }

std::vector<Vec2> read_curve_points(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open curve points file '" + path + "'");
  std::vector<Vec2> pts;
  double x = 0, y = 0;
  while (in >> x >> y) pts.push_back({x, y});
  if (!in.eof()) throw IoError("malformed number in curve points file '" + path + "'");
  return pts;
}

RadialGrid build_radial_grid(double r_in, double r_out, std::size_t n, double stretch) {
  if (!(r_in > 0) || !(r_out > r_in) || !std::isfinite(r_out)) {
    throw InvalidGeometry("radial grid needs r_out > r_in > 0");
  }
  if (n < 2) throw ParameterError("radial grid needs at least 2 cells");
  if (!(stretch >= 1.0)) throw ParameterError("radial stretch must be >= 1");
  RadialGrid g;
  g.stretch = stretch;
  g.edges.resize(n + 1);
  const double span = r_out - r_in;
  const auto dn = static_cast<double>(n);
  if (stretch == 1.0) {
    for (std::size_t k = 0; k <= n; ++k) g.edges[k] = r_in + span * static_cast<double>(k) / dn;
  } else {
    const double denom = std::expm1(dn * std::log(stretch));
    for (std::size_t k = 0; k <= n; ++k) {
      g.edges[k] = r_in + span * std::expm1(static_cast<double>(k) * std::log(stretch)) / denom;
    }
  }
  g.edges.front() = r_in;
  g.edges.back() = r_out;
  return g;
}

RadialGrid build_whole_plane_radial_grid(double r_out, std::size_t n) {
  if (!(r_out > 0)) throw InvalidGeometry("whole-plane radial grid needs r_out > 0");
  if (n < 2) throw ParameterError("radial grid needs at least 2 cells");
  RadialGrid g;
  g.edges.resize(n + 1);
  for (std::size_t k = 0; k <= n; ++k) g.edges[k] = r_out * static_cast<double>(k) / static_cast<double>(n);
  g.edges.back() = r_out;
  return g;
}

RadialGrid extend_radial_grid(const RadialGrid& grid, double target_r_out) {
  RadialGrid g = grid;
  double w = grid.width(grid.size() - 1);
  while (g.edges.back() < target_r_out) {
    w *= g.stretch;
    g.edges.push_back(g.edges.back() + w);
  }
  return g;
}

std::size_t MaskedGrid2D::count(CellMask m) const {
  return static_cast<std::size_t>(std::count(mask.begin(), mask.end(), m));
}

namespace {

MaskedGrid2D make_masked(std::optional<HoleGeometry> hole, double extent, double h) {
  if (!(h > 0) || !(extent > 4 * h)) throw ResolutionError("masked grid needs extent > 4 h > 0");
  MaskedGrid2D g;
  g.nx = static_cast<std::size_t>(std::ceil(extent / h - 1e-9));
  g.h = h;
  g.origin = -0.5 * h * static_cast<double>(g.nx);
  g.truncation_radius = 0.5 * g.extent() - h;
  g.hole = std::move(hole);
  g.mask.assign(g.size(), CellMask::Fluid);
  const double rt2 = g.truncation_radius * g.truncation_radius;
  for (std::size_t j = 0; j < g.nx; ++j) {
    for (std::size_t i = 0; i < g.nx; ++i) {
      const Vec2 c = g.center(i, j);
      auto& m = g.mask[g.index(i, j)];
      if (g.hole && g.hole->contains(c)) m = CellMask::Hole;
      else if (dot(c, c) >= rt2) m = CellMask::Exterior;
    }
  }
  // Fluid connectivity (4-neighbour flood fill).
  std::vector<char> seen(g.size(), 0);
  std::size_t start = g.size();
  std::size_t fluid = 0;
  for (std::size_t k = 0; k < g.size(); ++k) {
    if (g.mask[k] == CellMask::Fluid) {
      ++fluid;
      if (start == g.size()) start = k;
    }
  }
  if (fluid == 0) throw ResolutionError("masked grid has no fluid cells");
  std::queue<std::size_t> q;
  q.push(start);
  seen[start] = 1;
  std::size_t reached = 0;
  while (!q.empty()) {
    const std::size_t k = q.front();
    q.pop();
    ++reached;
    const std::size_t i = k % g.nx, j = k / g.nx;
    const std::size_t nb[4] = {i > 0 ? k - 1 : k, i + 1 < g.nx ? k + 1 : k, j > 0 ? k - g.nx : k,
                               j + 1 < g.nx ? k + g.nx : k};
    for (std::size_t n : nb) {
      if (!seen[n] && g.mask[n] == CellMask::Fluid) {
        seen[n] = 1;
        q.push(n);
      }
    }
  }
  if (reached != fluid) throw ResolutionError("fluid cells are not connected; refine h");
  return g;
}

}  // namespace

MaskedGrid2D build_masked_grid(const HoleGeometry& hole, double extent, double h) {
  if (!hole.contains({0, 0})) throw InvalidGeometry("origin must lie inside the hole");
  if (!(extent > 2 * hole.diameter())) {
    throw InvalidGeometry("extent must exceed twice the hole diameter");
  }
  if (!(h < hole.inner_radius() / 4)) {
    throw ResolutionError("h must be below a quarter of the hole inner radius");
  }
  return make_masked(hole, extent, h);
}

MaskedGrid2D build_masked_grid_whole_plane(double extent, double h) { return make_masked(std::nullopt, extent, h); }

}  // namespace pmelab
