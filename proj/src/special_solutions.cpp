#include "pmelab/special_solutions.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "pmelab/errors.hpp"

namespace pmelab {

namespace {

void check_m(double m) {
  if (!(m > 1.0) || !std::isfinite(m)) throw ParameterError("m > 1 required, got " + std::to_string(m));
}

// Dipole normalisation integral: int_0^1 s^q (1 - s^q)^{1/(m-1)} ds, q = (m+1)/m.
double dipole_integral(double m) {
  const double q = (m + 1.0) / m;
  const double a = 1.0 / q + 1.0;
  const double b = 1.0 / (m - 1.0) + 1.0;
  return std::exp(std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b)) / q;
}

}  // namespace

std::pair<double, double> exponents(double m, int N) {
  check_m(m);
  if (N != 1 && N != 2) throw ParameterError("N must be 1 or 2");
  const double beta = 1.0 / (N * (m - 1.0) + 2.0);
  return {N * beta, beta};
}

double ProfileSpec::alpha() const { return exponents(m, N).first; }
double ProfileSpec::beta() const { return exponents(m, N).second; }

ProfileSpec make_profile(double m, int N, double M) {
  exponents(m, N);
  if (!(M >= 0.0) || !std::isfinite(M)) throw ParameterError("mass must be >= 0");
  return {m, N, M};
}

double xi_M(const ProfileSpec& spec) {
  const auto [alpha, beta] = exponents(spec.m, spec.N);
  (void)alpha;
  if (spec.M == 0.0) return 0.0;
  const double m = spec.m;
  const double g = std::tgamma(1.0 / (2.0 * (m - 1.0) * beta)) /
                   (4.0 * m * std::pow(std::numbers::pi, spec.N / 2.0) * std::tgamma(m / (m - 1.0)));
  return std::pow(g, (m - 1.0) * beta) * std::pow(2.0 * m / ((m - 1.0) * beta), m * beta) *
         std::pow(spec.M, (m - 1.0) * beta);
}

double profile_F(const ProfileSpec& spec, double xi_abs) {
  const double beta = spec.beta();
  const double m = spec.m;
  const double xm = xi_M(spec);
  const double d = xm * xm - xi_abs * xi_abs;
  if (d <= 0.0) return 0.0;
  return std::pow((m - 1.0) * beta / (2.0 * m), 1.0 / (m - 1.0)) * std::pow(d, 1.0 / (m - 1.0));
}

double barenblatt(const ProfileSpec& spec, double r, double t) {
  if (!(t > 0.0)) throw ParameterError("t > 0 required");
  const auto [alpha, beta] = exponents(spec.m, spec.N);
  return std::pow(t, -alpha) * profile_F(spec, std::abs(r) * std::pow(t, -beta));
}

double barenblatt(const ProfileSpec& spec, Vec2 x, double t) { return barenblatt(spec, norm(x), t); }

CriticalOuterSpec make_critical(double m, double M_phi) {
  check_m(m);
  if (!(M_phi > 0.0) || !std::isfinite(M_phi)) throw ParameterError("weighted mass must be > 0");
  return {m, M_phi};
}

double CriticalOuterSpec::xi_star() const { return xi_M(profile()); }

double CriticalOuterSpec::delta_star() const { return xi_star() * std::sqrt((m - 1.0) / (2.0 * m)); }

double CriticalOuterSpec::F_star(double xi_abs) const { return profile_F(profile(), xi_abs); }

double scaled_radius(const CriticalOuterSpec& spec, double r, double t) {
  if (!(t > std::numbers::e)) throw TimeDomainError("t > e required, got " + std::to_string(t));
  const double m = spec.m;
  return r * std::pow(std::log(t), (m - 1.0) / (2.0 * m)) * std::pow(t, -1.0 / (2.0 * m));
}

double inner_radius(const CriticalOuterSpec& spec, double delta, double t) {
  if (!(t > std::numbers::e)) throw TimeDomainError("t > e required, got " + std::to_string(t));
  const double m = spec.m;
  return delta * std::pow(t, 1.0 / (2.0 * m)) * std::pow(std::log(t), -(m - 1.0) / (2.0 * m));
}

double critical_support_radius(const CriticalOuterSpec& spec, double t) {
  return inner_radius(spec, spec.xi_star(), t);
}

double critical_G(const CriticalOuterSpec& spec, double r, double t) {
  const double xi = scaled_radius(spec, r, t);
  return std::pow(t * std::log(t), -1.0 / spec.m) * spec.F_star(xi);
}

double critical_G(const CriticalOuterSpec& spec, Vec2 x, double t) { return critical_G(spec, norm(x), t); }

GDerivatives critical_G_derivatives(const CriticalOuterSpec& spec, Vec2 x, double t) {
  GDerivatives d;
  const double m = spec.m;
  const double L = std::log(t);
  const double xi = scaled_radius(spec, norm(x), t);
  const double xs = spec.xi_star();
  const double s = xi * xi / (xs * xs);
  if (s >= 1.0) return d;
  d.inside = true;
  const double A = spec.F_star0();
  const double p = m / (m - 1.0);
  const double one_s = 1.0 - s;
  d.G = std::pow(t * L, -1.0 / m) * A * std::pow(one_s, 1.0 / (m - 1.0));
  d.Gm = std::pow(d.G, m);
  const double base = A / (m * std::pow(t, 1.0 + 1.0 / m) * std::pow(L, 1.0 / m));
  d.lapGm = -base * std::pow(one_s, p - 2.0) * (1.0 - p * s);
  d.dtG = d.lapGm - (A / m) * std::pow(t * L, -1.0 - 1.0 / m) * std::pow(one_s, p - 2.0);
  const double gcoef = -A / (2.0 * m * std::pow(t, 1.0 + 1.0 / m) * std::pow(L, 1.0 / m)) *
                       std::pow(one_s, 1.0 / (m - 1.0));
  d.gradGm = x * gcoef;
  return d;
}

DipoleSpec make_dipole(double m, double M) {
  check_m(m);
  if (!(M >= 0.0) || !std::isfinite(M)) throw ParameterError("first moment must be >= 0");
  return {m, M};
}

double xi_dipole(const DipoleSpec& spec) {
  const double m = spec.m;
  const double I = dipole_integral(m);
  return std::pow(2.0 * m * (m + 1.0) / ((m - 1.0) * std::pow(I, m - 1.0)), 1.0 / (2.0 * m)) *
         std::pow(spec.M, (m - 1.0) / (2.0 * m));
}

double dipole_profile(const DipoleSpec& spec, double xi) {
  if (xi < 0.0) throw OutsideDomain("dipole needs x >= 0");
  const double m = spec.m;
  const double q = (m + 1.0) / m;
  const double d = std::pow(xi_dipole(spec), q) - std::pow(xi, q);
  if (d <= 0.0) return 0.0;
  return std::pow((m - 1.0) / (2.0 * m * (m + 1.0)), 1.0 / (m - 1.0)) * std::pow(xi, 1.0 / m) *
         std::pow(d, 1.0 / (m - 1.0));
}

double dipole(const DipoleSpec& spec, double x, double t) {
  if (!(t > 0.0)) throw ParameterError("t > 0 required");
  if (x < 0.0) throw OutsideDomain("dipole needs x >= 0");
  return std::pow(t, -spec.alpha_d()) * dipole_profile(spec, x * std::pow(t, -spec.beta_d()));
}

}  // namespace pmelab
