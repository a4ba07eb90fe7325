#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "pmelab/geometry.hpp"

namespace pmelab {

/// Finite-volume connectivity shared by the stationary solver and the
/// time stepper.  Fluxes are T * (value_j - value_i).
struct Face {
  std::uint32_t i = 0;
  std::uint32_t j = 0;
  double T = 0;
};

/// Dirichlet link from a cell to a boundary point.
struct BoundaryLink {
  std::uint32_t cell = 0;
  double T = 0;
  Vec2 point{0, 0};
};

class Mesh {
 public:
  enum class Kind { Radial, Masked };

  Kind kind() const noexcept { return kind_; }
  std::size_t size() const noexcept { return volume_.size(); }

  const std::vector<double>& volume() const noexcept { return volume_; }
  /// Radial meshes place cell centres on the positive x axis.
  const std::vector<Vec2>& center() const noexcept { return center_; }
  const std::vector<Face>& faces() const noexcept { return faces_; }
  /// Links to the hole boundary, where the value is zero.
  const std::vector<BoundaryLink>& hole_links() const noexcept { return hole_links_; }
  /// Links to the truncation boundary (used only by stationary solves).
  const std::vector<BoundaryLink>& outer_links() const noexcept { return outer_links_; }

  double radius(std::size_t c) const { return norm(center_[c]); }
  /// Largest radius on which the mesh is complete (truncation radius).
  double outer_radius() const noexcept { return outer_radius_; }
  double inner_radius() const noexcept { return inner_radius_; }
  /// Smallest V_i / sum_j T_ij over cells; the explicit-step length scale squared.
  double min_diffusive_scale() const noexcept { return min_scale_; }
  /// Representative spacing near the hole.
  double spacing() const noexcept { return spacing_; }

  bool is_radial() const noexcept { return kind_ == Kind::Radial; }
  const RadialGrid& radial() const { return std::get<RadialGrid>(grid_); }
  const MaskedGrid2D& masked() const { return std::get<MaskedGrid2D>(grid_); }

  /// Masked meshes: grid index to mesh cell (-1 if not fluid).
  const std::vector<std::int64_t>& cell_of_grid() const noexcept { return cell_of_grid_; }
  const std::vector<std::size_t>& grid_of_cell() const noexcept { return grid_of_cell_; }

  /// Compact text identifying the discretisation; equal strings mean equal meshes.
  const std::string& descriptor() const noexcept { return descriptor_; }
  bool same_as(const Mesh& other) const { return descriptor_ == other.descriptor_; }

  /// Per-cell indices of the faces touching each cell.
  const std::vector<std::vector<std::uint32_t>>& cell_faces() const noexcept { return cell_faces_; }

  friend Mesh make_mesh(const RadialGrid& grid);
  friend Mesh make_mesh(const MaskedGrid2D& grid, double theta_min);

 private:
  void finalize();

  Kind kind_ = Kind::Radial;
  std::variant<RadialGrid, MaskedGrid2D> grid_;
  std::vector<double> volume_;
  std::vector<Vec2> center_;
  std::vector<Face> faces_;
  std::vector<BoundaryLink> hole_links_;
  std::vector<BoundaryLink> outer_links_;
  std::vector<std::int64_t> cell_of_grid_;
  std::vector<std::size_t> grid_of_cell_;
  std::vector<std::vector<std::uint32_t>> cell_faces_;
  double outer_radius_ = 0;
  double inner_radius_ = 0;
  double min_scale_ = 0;
  double spacing_ = 0;
  std::string descriptor_;
};

Mesh make_mesh(const RadialGrid& grid);
/// theta_min bounds the cut-cell distance fraction from below.
Mesh make_mesh(const MaskedGrid2D& grid, double theta_min = 0.25);

/// Cell gradient of a field that vanishes on the hole boundary.
std::vector<Vec2> cell_gradient(const Mesh& mesh, const std::vector<double>& values);

/// Discrete operator sum_j T_ij (v_j - v_i) - sum_hole T v_i, without outer links.
std::vector<double> apply_operator(const Mesh& mesh, const std::vector<double>& values);

}  // namespace pmelab
