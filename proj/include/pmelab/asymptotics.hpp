#pragma once

#include <functional>
#include <vector>

#include "pmelab/pde_solver.hpp"
#include "pmelab/special_solutions.hpp"
#include "pmelab/stationary.hpp"

namespace pmelab {

enum class Side { Super, Sub };

struct RegionSpec {
  enum class Kind { Inner, Outer, InnerInner, InnerOuter };
  double delta = 0.5;
  double t = 100;
  Kind kind = Kind::Inner;
  Side side = Side::Super;
  double split_exponent = 2.0;  ///< super side split at t^{1/2m} / (log t)^split_exponent
};

/// Radius separating the inner-of-inner and outer-of-inner parts.
double split_radius(const CriticalOuterSpec& spec, const RegionSpec& region);
bool in_region(const CriticalOuterSpec& spec, const RegionSpec& region, double r);

/// Smallest t (bisection over log t) after which the split radius lies inside
/// the inner radius.
double split_crossover_time(const CriticalOuterSpec& spec, double delta, Side side, double split_exponent = 2.0);

struct TrendSeries {
  std::vector<double> t;
  std::vector<double> value;
  double slope = 0;  ///< least-squares slope of value against log log t; NaN below 4 points

  bool abs_deviation_decreasing(double target) const;
};

/// Least-squares slope of y against x.
double fit_slope(const std::vector<double>& x, const std::vector<double>& y);
TrendSeries make_trend(std::vector<double> t, std::vector<double> value);

/// (2 m phi / log t)^{1/m} G(x, t).
double inner_prediction(double phi, const CriticalOuterSpec& spec, Vec2 x, double t);

struct ErrorStat {
  double sup = 0;  ///< signed maximum
  double inf = 0;  ///< signed minimum
  double abs_max = 0;
  std::size_t count = 0;
  std::size_t argmax = 0;  ///< cell of |.| maximum, first index on ties
};

/// sup/inf of prefactor * (u - prediction) / weight over cells in the region.
ErrorStat region_functional(const SolverState& u, const std::function<bool(double r)>& region, double prefactor,
                            const std::function<double(std::size_t cell)>& prediction,
                            const std::function<double(Vec2)>& weight);

/// t^{1/m} (log t)^{2/m} (u - inner prediction) / log(|x| + e)^{1/m} over I_delta(t).
ErrorStat weighted_error(const SolverState& u, const std::vector<double>& phi, const CriticalOuterSpec& spec,
                         double delta);
/// (t log t)^{1/m} (u - G) over O_delta(t).
ErrorStat outer_error(const SolverState& u, const CriticalOuterSpec& spec, double delta);

/// log t * M(t) / (2 m M_phi*); rows with t <= e are skipped.
TrendSeries mass_ratio(const RunRecord& record, const CriticalOuterSpec& spec);

struct SupportTrend {
  TrendSeries minus;
  TrendSeries plus;
};
SupportTrend support_ratio(const RunRecord& record, const CriticalOuterSpec& spec);

/// (m M_phi*/pi)^{1/m}, cross-checked against (2m)^{1/m} F_*(0).
double compact_limit_constant(const CriticalOuterSpec& spec);
/// Density at an arbitrary point (linear in r for radial grids, bilinear for masked).
double sample_density(const SolverState& u, Vec2 x);
/// Per-probe ratio of (t log^2 t)^{1/m} u(x, t) to the limit value; NaN where phi = 0.
std::vector<double> compact_limit(const SolverState& u, const Potential& phi, const CriticalOuterSpec& spec,
                                  const std::vector<Vec2>& probes);

/// w(xi, tau) = (t log t)^{1/m} u(xi t^{1/2m} (log t)^{-(m-1)/2m}, t), sampled along direction angle.
std::vector<double> to_scaled_variables(const SolverState& u, const CriticalOuterSpec& spec,
                                        const std::vector<double>& xi, double angle = 0.0);

}  // namespace pmelab
