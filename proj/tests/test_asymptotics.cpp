#include <cmath>
#include <memory>
#include <numbers>

#include "doctest.h"
#include "pmelab/asymptotics.hpp"
#include "pmelab/errors.hpp"

using namespace pmelab;

namespace {

std::shared_ptr<const Mesh> disk_mesh(double r_out, std::size_t n) {
  return std::make_shared<const Mesh>(make_mesh(build_radial_grid(1, r_out, n, 1)));
}

std::vector<double> log_phi(const Mesh& mesh) {
  std::vector<double> phi(mesh.size());
  for (std::size_t c = 0; c < mesh.size(); ++c) phi[c] = std::log(mesh.radius(c));
  return phi;
}

RunRecord synthetic(const std::vector<double>& t, const std::function<double(double)>& mass,
                    const std::function<double(double)>& zeta) {
  RunRecord rec;
  for (double ti : t) {
    Checkpoint cp;
    cp.t = ti;
    cp.mass = mass(ti);
    cp.zeta_minus = cp.zeta_plus = zeta(ti);
    rec.rows.push_back(cp);
  }
  return rec;
}

}  // namespace

TEST_CASE("inner prediction") {
  const auto spec = make_critical(2, 1);
  const double t = std::exp(4.0);
  CHECK(inner_prediction(0.0, spec, {1, 0}, t) == 0.0);
  const Vec2 x{std::numbers::e, 0};
  CHECK(inner_prediction(std::log(t) / 4, spec, x, t) == doctest::Approx(critical_G(spec, x, t)).epsilon(1e-14));
  // phi = 1 at |x| = e for the unit disk, and 2 m phi = log t here
  CHECK(inner_prediction(1.0, spec, x, t) == doctest::Approx(critical_G(spec, x, t)).epsilon(1e-14));
}

TEST_CASE("weighted error: zero and unit") {
  const auto spec = make_critical(2, 1);
  const double t = 1e4, m = 2, L = std::log(t);
  auto mesh = disk_mesh(40, 800);
  const auto phi = log_phi(*mesh);
  const double delta = spec.delta_star() / 2;
  std::vector<double> u(mesh->size()), v(mesh->size());
  for (std::size_t c = 0; c < mesh->size(); ++c) {
    const Vec2 x = mesh->center()[c];
    u[c] = inner_prediction(phi[c], spec, x, t);
    v[c] = u[c] + std::pow(std::log(norm(x) + std::numbers::e), 1 / m) * std::pow(t, -1 / m) * std::pow(L, -2 / m);
  }
  const auto e0 = weighted_error(make_state(mesh, m, t, u), phi, spec, delta);
  CHECK(e0.count > 0);
  CHECK(e0.abs_max == 0.0);
  const auto e1 = weighted_error(make_state(mesh, m, t, v), phi, spec, delta);
  CHECK(e1.sup == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(e1.inf == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("weighted error: empty region") {
  const auto spec = make_critical(2, 1);
  auto mesh = std::make_shared<const Mesh>(make_mesh(build_radial_grid(30, 40, 20, 1)));
  const auto phi = log_phi(*mesh);
  const auto s = make_state(mesh, 2, 1e4, std::vector<double>(mesh->size(), 0.0));
  CHECK_THROWS_AS(weighted_error(s, phi, spec, spec.delta_star() / 2), EmptyRegion);
}

TEST_CASE("outer error: zero, unit and prefactor coherence") {
  const auto spec = make_critical(2, 1);
  const double t = 1e4, m = 2, L = std::log(t);
  auto mesh = disk_mesh(60, 600);
  const double delta = spec.delta_star() / 2;
  std::vector<double> g(mesh->size()), h(mesh->size());
  for (std::size_t c = 0; c < mesh->size(); ++c) {
    g[c] = critical_G(spec, mesh->center()[c], t);
    h[c] = g[c] + std::pow(t * L, -1 / m);
  }
  CHECK(outer_error(make_state(mesh, m, t, g), spec, delta).abs_max == 0.0);
  const auto e1 = outer_error(make_state(mesh, m, t, h), spec, delta);
  CHECK(e1.sup == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(e1.inf == doctest::Approx(1.0).epsilon(1e-12));

  // region_functional with unit weight over the outer set reproduces outer_error
  std::vector<double> bumpy = g;
  for (std::size_t c = 0; c < bumpy.size(); ++c) bumpy[c] += 1e-3 * std::abs(std::sin(static_cast<double>(c)));
  const auto s = make_state(mesh, m, t, bumpy);
  const double r_in = inner_radius(spec, delta, t);
  const auto direct = outer_error(s, spec, delta);
  const auto generic = region_functional(
      s, [&](double r) { return r > r_in; }, std::pow(t * L, 1 / m),
      [&](std::size_t c) { return critical_G(spec, mesh->center()[c], t); }, [](Vec2) { return 1.0; });
  CHECK(direct.sup == generic.sup);
  CHECK(direct.inf == generic.inf);
  CHECK(direct.argmax == generic.argmax);
}

TEST_CASE("mass ratio: synthetic laws") {
  const auto spec = make_critical(2, 1.3);
  const double K = 2 * spec.m * spec.M_phi;
  const std::vector<double> t{1e2, 1e3, 1e4, 1e5};
  const auto exact = mass_ratio(synthetic(t, [&](double s) { return K / std::log(s); }, [](double) { return 1.0; }), spec);
  for (double v : exact.value) CHECK(v == doctest::Approx(1.0).epsilon(1e-14));
  const auto slow = mass_ratio(
      synthetic(t, [&](double s) { return K / std::log(s) * (1 + 1 / std::log(s)); }, [](double) { return 1.0; }), spec);
  for (std::size_t i = 0; i < t.size(); ++i) CHECK(slow.value[i] == doctest::Approx(1 + 1 / std::log(t[i])));
  CHECK(slow.abs_deviation_decreasing(1.0));
  CHECK(slow.slope < 0);

  // rows at t <= e are skipped
  const auto early =
      mass_ratio(synthetic({2.0, 1e2, 1e3, 1e4, 1e5}, [](double) { return 1.0; }, [](double) { return 1.0; }), spec);
  CHECK(early.t.size() == 4);
  CHECK_THROWS_AS(mass_ratio(synthetic(t, [](double) { return 1.0; }, [](double) { return 1.0; }), make_critical(2, 0)),
                  ParameterError);
}

TEST_CASE("support ratio: synthetic law") {
  const auto spec = make_critical(3, 0.7);
  const std::vector<double> t{1e2, 1e3, 1e4};
  const auto sr = support_ratio(
      synthetic(t, [](double) { return 1.0; }, [&](double s) { return critical_support_radius(spec, s); }), spec);
  for (double v : sr.plus.value) CHECK(v == doctest::Approx(1.0).epsilon(1e-14));
  for (double v : sr.minus.value) CHECK(v == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("compact limit constant") {
  for (double m : {1.5, 2.0, 3.0}) {
    for (double M : {0.3, 1.0, 4.0}) {
      const auto spec = make_critical(m, M);
      const double K = compact_limit_constant(spec);
      CHECK(K == doctest::Approx(std::pow(m * M / std::numbers::pi, 1 / m)).epsilon(1e-12));
      CHECK(K == doctest::Approx(std::pow(2 * m, 1 / m) * spec.F_star0()).epsilon(1e-12));
    }
  }
}

TEST_CASE("compact limit: exact ratio for the frozen profile") {
  const auto spec = make_critical(2, 1);
  const double m = 2, t = 1e5, L = std::log(t);
  auto mesh = disk_mesh(10, 2000);
  std::vector<double> u(mesh->size());
  for (std::size_t c = 0; c < mesh->size(); ++c) {
    const double phi = std::log(mesh->radius(c));
    u[c] = std::pow(2 * m * phi / L, 1 / m) * std::pow(t * L, -1 / m) * spec.F_star0();
  }
  const auto ratio = compact_limit(make_state(mesh, m, t, u), disk_potential(1), spec, {{std::numbers::e, 0}, {0, 3}});
  REQUIRE(ratio.size() == 2);
  CHECK(std::abs(ratio[0] - 1) < 1e-4);
  CHECK(std::abs(ratio[1] - 1) < 1e-4);
  const auto edge = compact_limit(make_state(mesh, m, t, u), disk_potential(1), spec, {{1, 0}});
  CHECK(std::isnan(edge[0]));
}

TEST_CASE("scaled variables") {
  const auto spec = make_critical(2, 1);
  const double t = 1e4;
  auto mesh = disk_mesh(60, 3000);
  const auto G = sample_state(mesh, 2, t, [&](Vec2 x) { return critical_G(spec, x, t); });
  std::vector<double> xi;
  const double r_in = scaled_radius(spec, 1.5, t);
  for (int k = 0; k <= 40; ++k) xi.push_back(r_in + (1.2 * spec.xi_star() - r_in) * k / 40.0);
  const auto w = to_scaled_variables(G, spec, xi);
  double err = 0;
  for (std::size_t k = 0; k < xi.size(); ++k) err = std::max(err, std::abs(w[k] - spec.F_star(xi[k])));
  CHECK(err < 1e-3 * spec.F_star0());
  const auto zero = make_state(mesh, 2, t, std::vector<double>(mesh->size(), 0.0));
  for (double v : to_scaled_variables(zero, spec, xi)) CHECK(v == 0.0);
}

TEST_CASE("split radius crosses inside the inner set") {
  const auto spec = make_critical(2, 1);
  const double delta = spec.delta_star() / 2;
  for (Side side : {Side::Super, Side::Sub}) {
    const double tc = split_crossover_time(spec, delta, side);
    CHECK(std::isfinite(tc));
    RegionSpec reg;
    reg.delta = delta;
    reg.side = side;
    for (double f : {1.01, 10.0, 1e3}) {
      reg.t = tc * f;
      CHECK(split_radius(spec, reg) < inner_radius(spec, delta, reg.t));
    }
  }
}

TEST_CASE("region functional: ties go to the first cell") {
  auto mesh = disk_mesh(10, 50);
  const auto s = make_state(mesh, 2, 100, std::vector<double>(mesh->size(), 0.5));
  const auto st = region_functional(
      s, [](double r) { return r > 3; }, 2.0, [](std::size_t) { return 0.0; }, [](Vec2) { return 1.0; });
  CHECK(st.sup == 1.0);
  CHECK(st.inf == 1.0);
  std::size_t first = 0;
  while (mesh->radius(first) <= 3) ++first;
  CHECK(st.argmax == first);
}

TEST_CASE("trend helpers") {
  CHECK(fit_slope({1, 2, 3, 4}, {2, 4, 6, 8}) == doctest::Approx(2.0));
  CHECK(std::isnan(make_trend({10, 100, 1000}, {1, 1, 1}).slope));
  CHECK(std::isfinite(make_trend({10, 100, 1000, 1e4}, {1, 1, 1, 1}).slope));
  auto tr = make_trend({10, 100, 1000}, {1.5, 1.2, 1.3});
  CHECK_FALSE(tr.abs_deviation_decreasing(1.0));
  tr = make_trend({10, 100, 1000}, {1.5, 0.8, 1.1});
  CHECK(tr.abs_deviation_decreasing(1.0));
}
