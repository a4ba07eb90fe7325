#pragma once

#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "pmelab/mesh.hpp"

namespace pmelab {

struct SolverState {
  std::shared_ptr<const Mesh> mesh;
  std::vector<double> u;
  double t = 0;
  double m = 2;
  double outflow = 0;  ///< accumulated mass that left through the hole boundary

  double mass() const;
  double sup() const;
};

SolverState make_state(std::shared_ptr<const Mesh> mesh, double m, double t, std::vector<double> u);
/// Cell-centre sampling of a function.
SolverState sample_state(std::shared_ptr<const Mesh> mesh, double m, double t, const std::function<double(Vec2)>& f);

double stable_dt(const SolverState& state, double safety, double dt_max = 1.0);

/// Reusable workspace for explicit steps on one mesh; restricts work to the
/// region reached by the support.
class Stepper {
 public:
  explicit Stepper(std::shared_ptr<const Mesh> mesh);

  /// Advances in place.  Throws StabilityFault on a genuinely negative value.
  /// The active region is taken from s on the first call; call reset_active
  /// after changing the state by other means.
  void advance(SolverState& s, double dt);
  /// Largest centre radius of a cell with u > 0 after the last call.
  double active_radius() const noexcept { return active_r_; }
  void reset_active(const SolverState& s);
  const std::shared_ptr<const Mesh>& mesh() const noexcept { return mesh_; }

 private:
  std::shared_ptr<const Mesh> mesh_;
  std::vector<std::uint32_t> face_order_;
  std::vector<double> face_rmin_;
  std::vector<double> face_rmax_;
  std::vector<std::uint32_t> cell_order_;
  std::vector<double> cell_r_;
  std::vector<double> p_;
  std::vector<double> d_;
  double active_r_ = 0;
  bool primed_ = false;
};

/// Single explicit Euler step (convenience wrapper around Stepper).
SolverState step(const SolverState& state, double dt);

/// Zero-extends u onto a mesh that contains the old one.
std::vector<double> remap_zero_extend(const Mesh& from, const std::vector<double>& u, const Mesh& to);

struct SupportRadii {
  double zeta_minus = 0;
  double zeta_plus = 0;
};

/// threshold is absolute.  Throws EmptySupport if no cell exceeds it.
SupportRadii support_radii(const SolverState& state, double threshold);

struct Checkpoint {
  double t = 0;
  double mass = 0;
  double weighted_moment = 0;
  double zeta_minus = 0;
  double zeta_plus = 0;
  double sup_u = 0;
  double outflow = 0;
  std::size_t steps = 0;
  std::string snapshot;
};

struct RunRecord {
  std::vector<Checkpoint> rows;
  std::vector<SolverState> snapshots;  ///< filled when RunOptions::keep_snapshots
  std::size_t extensions = 0;
  bool degenerate = false;  ///< empty time interval or zero data
};

struct RunOptions {
  double t_end = 10;
  double safety = 0.5;
  double dt_max = 1.0;
  double checkpoint_ratio = 1.333521432163324;  ///< 10^(1/8)
  double support_threshold = 1e-12;             ///< relative to sup u
  bool auto_extend = true;
  double extend_fraction = 0.7;
  bool keep_snapshots = false;
  /// Builds a larger mesh containing the old one (required for auto_extend).
  std::function<std::shared_ptr<const Mesh>(const Mesh&)> extend_mesh;
  /// phi on a mesh, for the weighted moment; may be empty.
  std::function<std::vector<double>(const std::shared_ptr<const Mesh>&)> phi_provider;
  /// Called at each checkpoint; may set Checkpoint::snapshot.
  std::function<void(const SolverState&, Checkpoint&)> on_checkpoint;
};

/// Checkpoint times: the start, every power of `ratio` strictly inside, and the end.
std::vector<double> checkpoint_times(double t_start, double t_end, double ratio);

RunRecord run(SolverState initial, const RunOptions& opt);

/// Advances several states on a common time step (the minimum stable step)
/// so that discrete comparison applies exactly.  Auto-extension is not
/// supported; BufferReached is thrown instead.
void run_lockstep(std::vector<SolverState>& states, const RunOptions& opt,
                  const std::function<void(const std::vector<SolverState>&)>& on_checkpoint);

}  // namespace pmelab
