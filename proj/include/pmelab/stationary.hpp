#pragma once

#include <complex>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "pmelab/geometry.hpp"
#include "pmelab/mesh.hpp"

namespace pmelab {

struct SolverState;

/// Exact solution for a disk hole of radius r.
double phi_disk(double r, Vec2 x);

/// Map from the unit disk onto the Kelvin image of the exterior domain.
struct ConformalMapSpec {
  enum class Family { Disk, Joukowski };
  Family family = Family::Disk;
  double r = 1.0;  ///< inversion radius
  double a = 1.0;  ///< semi-axis along x (Joukowski)
  double b = 1.0;  ///< semi-axis along y (Joukowski)

  std::complex<double> f(std::complex<double> zeta) const;
  std::complex<double> df(std::complex<double> zeta) const;
};

ConformalMapSpec conformal_disk(double r);
ConformalMapSpec conformal_ellipse(double semi_x, double semi_y, double inversion_radius = 1.0);
/// Samples the unit disk and throws InvalidGeometry if f' vanishes or the
/// boundary image is not a simple curve.
void validate_map(const ConformalMapSpec& map);

/// zeta with f(zeta) = w, |zeta| <= 1, by continuation along s w, s in [0, 1].
std::complex<double> invert_map(const ConformalMapSpec& map, std::complex<double> w);
double phi_conformal(const ConformalMapSpec& map, Vec2 x);
Vec2 grad_phi_conformal(const ConformalMapSpec& map, Vec2 x);

/// Discrete solution on a mesh.
struct StationaryField {
  std::shared_ptr<const Mesh> mesh;
  std::optional<HoleGeometry> hole;
  std::vector<double> phi;
  std::vector<Vec2> grad;
  double C_est = 0;      ///< phi - log|x| tends to this constant
  double C_phi = 0;      ///< max |phi - log|x|| over cells
  double residual = 0;   ///< max interior residual of the discrete Laplacian
  double tol = 0;
};

struct StationaryOptions {
  double h = 0.05;          ///< masked grids
  double extent = 0;        ///< masked grids; 0 picks 4 x hole diameter
  double theta_min = 0.01;  ///< masked grids; cut-cell clamp (evolution meshes use 0.25)
  double r_out = 0;         ///< radial grids; 0 picks 16 x hole radius
  std::size_t radial_cells = 256;
  double stretch = 1.01;
};

/// Solves on the given mesh.  The truncation value is log|x| + C, with C set
/// so that the total discrete flux into the hole equals 2 pi.
StationaryField solve_stationary_on(std::shared_ptr<const Mesh> mesh, std::optional<HoleGeometry> hole, double tol);

/// Solves with explicit Dirichlet data on the truncation boundary.
StationaryField solve_stationary_with_outer(std::shared_ptr<const Mesh> mesh, std::optional<HoleGeometry> hole,
                                            const std::function<double(Vec2)>& outer_value, double tol);

/// Disk holes use a log-polar radial grid, others a masked Cartesian grid.
/// The truncation constant is Richardson-extrapolated from meshes with outer
/// radius R and 2R; the returned field lives on the R mesh.
StationaryField solve_stationary_numeric(const HoleGeometry& hole, double tol, const StationaryOptions& opt = {});

struct GradientReport {
  double c_low = 0;
  double C_high = 0;
  double R_split = 0;
  double min_radial = 0;  ///< min x.grad phi for |x| >= R_split
  double max_radial = 0;  ///< max x.grad phi for |x| >= R_split
  bool bounds_hold = false;
};

/// R_split is the smallest cell radius beyond which 1/2 <= x.grad phi and
/// |x||grad phi| <= 2 hold on every cell.  Cells within two spacings of the
/// truncation boundary are excluded.
GradientReport check_gradient_bounds(const StationaryField& field);

/// Midpoint quadrature of u phi over the cells.
double weighted_moment(const SolverState& u, const StationaryField& field);
double weighted_moment(const Mesh& mesh, const std::vector<double>& u, const std::vector<double>& phi);

/// phi and its gradient at arbitrary points of the exterior domain.
struct Potential {
  std::function<double(Vec2)> phi;
  std::function<Vec2(Vec2)> grad;
};

Potential disk_potential(double r);
Potential conformal_potential(const ConformalMapSpec& map);
/// Interpolates a discrete field; beyond the mesh, log|x| + C_est.
Potential field_potential(const StationaryField& field);

/// Minimum of phi over the curve at distance r0 outside the hole.
double alpha_bar_0(const Potential& pot, const HoleGeometry& hole, double r0, std::size_t samples = 720);

}  // namespace pmelab
