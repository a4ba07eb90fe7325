#pragma once

#include <utility>

#include "pmelab/vec2.hpp"

namespace pmelab {

/// Source-type (point-source) solution parameters.
struct ProfileSpec {
  double m = 2.0;
  int N = 2;
  double M = 1.0;

  double alpha() const;
  double beta() const;
};

ProfileSpec make_profile(double m, int N, double M);

/// (alpha, beta) with beta = 1/(N(m-1)+2), alpha = N beta.
std::pair<double, double> exponents(double m, int N);

/// Support radius of the profile in self-similar variables.
double xi_M(const ProfileSpec& spec);
/// Self-similar profile F_M at |xi|.
double profile_F(const ProfileSpec& spec, double xi_abs);
/// Point-source solution at |x| = r (radial) and time t.
double barenblatt(const ProfileSpec& spec, double r, double t);
double barenblatt(const ProfileSpec& spec, Vec2 x, double t);

/// Outer profile of the critical (two-dimensional, exterior) problem.
struct CriticalOuterSpec {
  double m = 2.0;
  double M_phi = 1.0;

  double mass() const { return 2.0 * m * M_phi; }
  ProfileSpec profile() const { return {m, 2, mass()}; }
  double xi_star() const;
  double delta_star() const;
  double F_star(double xi_abs) const;
  double F_star0() const { return F_star(0.0); }
};

CriticalOuterSpec make_critical(double m, double M_phi);

/// Scaled variable xi~ = x (log t)^{(m-1)/2m} t^{-1/2m}.
double scaled_radius(const CriticalOuterSpec& spec, double r, double t);
/// Physical support radius xi_* t^{1/2m} (log t)^{-(m-1)/2m}.
double critical_support_radius(const CriticalOuterSpec& spec, double t);
/// Radius of the inner set boundary for a given delta.
double inner_radius(const CriticalOuterSpec& spec, double delta, double t);

double critical_G(const CriticalOuterSpec& spec, double r, double t);
double critical_G(const CriticalOuterSpec& spec, Vec2 x, double t);

/// G and its closed-form derivatives at one point.
struct GDerivatives {
  double G = 0;
  double Gm = 0;
  double dtG = 0;
  double lapGm = 0;
  Vec2 gradGm{0, 0};
  bool inside = false;
};

GDerivatives critical_G_derivatives(const CriticalOuterSpec& spec, Vec2 x, double t);

/// One-dimensional dipole (constant first moment) solution.
struct DipoleSpec {
  double m = 2.0;
  double M = 1.0;

  double alpha_d() const { return 1.0 / m; }
  double beta_d() const { return 1.0 / (2.0 * m); }
};

DipoleSpec make_dipole(double m, double M);
double xi_dipole(const DipoleSpec& spec);
double dipole_profile(const DipoleSpec& spec, double xi);
double dipole(const DipoleSpec& spec, double x, double t);

}  // namespace pmelab
