#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pmelab/vec2.hpp"

namespace pmelab {

/// The excluded set.  Always positioned so that the origin is strictly inside.
class HoleGeometry {
 public:
  enum class Kind { Disk, Ellipse, Curve };

  static HoleGeometry disk(double radius);
  static HoleGeometry ellipse(double semi_x, double semi_y);
  /// Closed polyline; the closing segment back to the first point is implicit.
  static HoleGeometry curve(std::vector<Vec2> points);

  Kind kind() const noexcept { return kind_; }
  double radius() const noexcept { return a_; }
  double semi_x() const noexcept { return a_; }
  double semi_y() const noexcept { return b_; }
  const std::vector<Vec2>& points() const noexcept { return points_; }

  bool contains(Vec2 x) const;

  /// Radius of the largest origin-centred disk inside the hole.
  double inner_radius() const;
  /// Radius of the smallest origin-centred disk containing the hole.
  double outer_radius() const;
  double diameter() const;
  /// Approximate area (exact for disk and ellipse).
  double area() const;

  /// Boundary samples, counter-clockwise.
  std::vector<Vec2> boundary_samples(std::size_t n) const;

  /// Point where the segment from `outside` to `inside` first crosses the
  /// boundary, as a fraction of the segment length measured from `outside`.
  double crossing_fraction(Vec2 outside, Vec2 inside) const;

  std::string describe() const;

  bool operator==(const HoleGeometry&) const = default;

 private:
  HoleGeometry() = default;

  Kind kind_ = Kind::Disk;
  double a_ = 0.0;
  double b_ = 0.0;
  std::vector<Vec2> points_;
};

bool point_in_hole(const HoleGeometry& hole, Vec2 x);

/// Reads whitespace-separated "x y" pairs.
std::vector<Vec2> read_curve_points(const std::string& path);

/// Radial partition of [r_in, r_out].  r_in == 0 denotes a whole-plane grid
/// (no hole, zero-flux centre).
struct RadialGrid {
  std::vector<double> edges;
  double stretch = 1.0;

  std::size_t size() const noexcept { return edges.size() - 1; }
  double r_in() const noexcept { return edges.front(); }
  double r_out() const noexcept { return edges.back(); }
  bool whole_plane() const noexcept { return edges.front() == 0.0; }
  double center(std::size_t i) const { return 0.5 * (edges[i] + edges[i + 1]); }
  double width(std::size_t i) const { return edges[i + 1] - edges[i]; }
};

RadialGrid build_radial_grid(double r_in, double r_out, std::size_t n, double stretch);
/// Whole-plane radial grid over [0, r_out] with uniform spacing.
RadialGrid build_whole_plane_radial_grid(double r_out, std::size_t n);
/// Continues the geometric progression of widths until r_out >= target.
RadialGrid extend_radial_grid(const RadialGrid& grid, double target_r_out);

enum class CellMask : std::uint8_t { Fluid = 0, Hole = 1, Exterior = 2 };

/// Uniform Cartesian cells over the square [-extent/2, extent/2]^2.  Cells
/// whose centre lies beyond the truncation radius are marked Exterior.
struct MaskedGrid2D {
  std::size_t nx = 0;
  double h = 0.0;
  double origin = 0.0;  ///< coordinate of the lower-left corner (both axes)
  double truncation_radius = 0.0;
  std::optional<HoleGeometry> hole;
  std::vector<CellMask> mask;

  std::size_t ny() const noexcept { return nx; }
  std::size_t size() const noexcept { return nx * nx; }
  double extent() const noexcept { return h * static_cast<double>(nx); }
  std::size_t index(std::size_t i, std::size_t j) const noexcept { return j * nx + i; }
  Vec2 center(std::size_t i, std::size_t j) const {
    return {origin + (static_cast<double>(i) + 0.5) * h, origin + (static_cast<double>(j) + 0.5) * h};
  }
  Vec2 center(std::size_t k) const { return center(k % nx, k / nx); }
  std::size_t count(CellMask m) const;
};

MaskedGrid2D build_masked_grid(const HoleGeometry& hole, double extent, double h);
/// Masked grid without a hole (whole-plane runs).
MaskedGrid2D build_masked_grid_whole_plane(double extent, double h);

}  // namespace pmelab
