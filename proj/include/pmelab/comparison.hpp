#pragma once

#include <vector>

#include "pmelab/asymptotics.hpp"

namespace pmelab {

struct SuperParams {
  double eta = 1.5;
  double kappa0 = 1.0;
  double mu = 0.1;
  double k = 1.0;
  double T = 100.0;

  double c(double t) const;
  double dc(double t) const;
  double nu(double t) const;
  void validate() const;
};

struct SubParams {
  double eta = 0.5;
  double kappa0 = 0.5;
  double mu = 0.1;
  double alpha0 = 0.05;
  double T = 100.0;

  double c(double t) const;
  double dc(double t) const;
  double nu(double t) const;
  void validate() const;
};

/// w^m for the supersolution: (phi^nu + k) / ((log t)/2m)^nu.
double w_super_m(const SuperParams& p, double phi, double m, double t);
/// w^m for the subsolution: (phi^nu - alpha0^nu) / ((log t)/2m)^nu.
double w_sub_m(const SubParams& p, double phi, double m, double t);

double eval_V(const SuperParams& p, double phi, const CriticalOuterSpec& spec, Vec2 x, double t);
double eval_V(const SuperParams& p, const Potential& phi, const CriticalOuterSpec& spec, Vec2 x, double t);
/// Throws OutsideDomain when phi < alpha0.
double eval_v(const SubParams& p, double phi, const CriticalOuterSpec& spec, Vec2 x, double t);
double eval_v(const SubParams& p, const Potential& phi, const CriticalOuterSpec& spec, Vec2 x, double t);

struct ABValue {
  double A = 0;
  double B = 0;
  RegionSpec::Kind region = RegionSpec::Kind::InnerInner;
  bool inside = false;  ///< false outside the support of G (everything zero)
  double G = 0;
  double w = 0;
  double c = 0;
  double dtG = 0;
  double lapGm = 0;
  double dtw = 0;
  double gradWm_dot_gradGm = 0;
  double lapWm = 0;
};

/// Closed-form A and B; region tag uses the super split exponent given.
ABValue eval_AB(const SuperParams& p, const Potential& phi, const CriticalOuterSpec& spec, Vec2 x, double t,
                double split_exponent = 2.0);
ABValue eval_AB(const SubParams& p, const Potential& phi, const CriticalOuterSpec& spec, Vec2 x, double t);

struct SampleGrid {
  double t_lo = 0;
  double t_hi = 0;
  std::size_t nt = 100;
  std::size_t nr = 100;
  double r_min = 1.0;  ///< inner edge of the sampled radii (hole boundary or phi = alpha0 level)
};

struct SignReport {
  double min_A = INFINITY, max_A = -INFINITY;
  double min_B = INFINITY, max_B = -INFINITY;
  double min_AB = INFINITY, max_AB = -INFINITY;
  std::size_t samples = 0;
  std::size_t failures = 0;
  bool pass = false;
  /// Smallest sampled time after which every sample satisfies the claim (INFINITY if none).
  double first_ok_time = INFINITY;
};

/// Super side: InnerOuter needs A >= 0 and B >= 0, InnerInner needs A + B > 0,
/// Inner needs A + B >= 0.  Sub side: A + B <= 0 in every region kind.
SignReport verify_lemma_signs(const SuperParams& p, const Potential& phi, const CriticalOuterSpec& spec,
                              const RegionSpec& region, const SampleGrid& grid);
SignReport verify_lemma_signs(const SubParams& p, const Potential& phi, const CriticalOuterSpec& spec,
                              const RegionSpec& region, const SampleGrid& grid);

struct ThresholdResult {
  bool found = false;
  double T = INFINITY;
  SignReport report;
};

/// Tries T = 10^k for k in [k_lo, k_hi] and samples t in [T, T 10^decades].
ThresholdResult find_sign_threshold(const SuperParams& p, const Potential& phi, const CriticalOuterSpec& spec,
                                    RegionSpec region, SampleGrid grid, int k_lo, int k_hi, double decades);
ThresholdResult find_sign_threshold(const SubParams& p, const Potential& phi, const CriticalOuterSpec& spec,
                                    RegionSpec region, SampleGrid grid, int k_lo, int k_hi, double decades);

struct OrderingReport {
  double kappa0 = 0;
  double T = 0;
  std::size_t checkpoints = 0;
  std::size_t checked = 0;
  std::size_t failures = 0;
  double worst = 0;  ///< largest u/V (super) or smallest u/v (sub) over checked points
  bool degenerate = false;  ///< empty subdomain, vacuous pass
  bool pass = false;

  double fraction() const { return checked ? 1.0 - static_cast<double>(failures) / static_cast<double>(checked) : 1.0; }
};

/// Calibrates kappa0 at the first snapshot with t >= p.T (which becomes T),
/// then checks every later snapshot on I_delta(t).  phi[k] holds the cell
/// values of phi on snapshots[k]'s mesh.
OrderingReport verify_ordering(const std::vector<SolverState>& snapshots,
                               const std::vector<std::vector<double>>& phi, SuperParams p,
                               const CriticalOuterSpec& spec, double delta, double fb_tol = 1e-14);
OrderingReport verify_ordering(const std::vector<SolverState>& snapshots,
                               const std::vector<std::vector<double>>& phi, SubParams p,
                               const CriticalOuterSpec& spec, double delta, double fb_tol = 1e-14);

/// First sampled time from which eta w at the matching circle stays beyond the
/// band (>= 1 + (eta-1)/2 super, <= 1 - (1-eta)/2 sub).  INFINITY if never.
double matching_band_time(const SuperParams& p, const Potential& phi, const CriticalOuterSpec& spec, double delta,
                          const std::vector<double>& times, std::size_t angles = 16);
double matching_band_time(const SubParams& p, const Potential& phi, const CriticalOuterSpec& spec, double delta,
                          const std::vector<double>& times, std::size_t angles = 16);

struct SandwichReport {
  bool ordered = false;
  std::size_t checked = 0;
  std::size_t violations = 0;
  double max_violation = 0;
  double M_plus = 0;
  double M_minus = 0;
  double mass = 0;
};

/// States on aligned masked grids (same nx, h, origin) or on one identical
/// mesh.  Checks u_small_hole >= u >= u_big_hole and the M+/- pair built
/// from u with phi+ = log(|x|/r), phi- = log(|x|/R).
SandwichReport sandwich_check(const SolverState& u_small_hole, const SolverState& u, const SolverState& u_big_hole,
                              double r, double R, double fb_tol = 1e-14);

}  // namespace pmelab
