#include <cmath>
#include <memory>
#include <numbers>
#include <random>

#include "doctest.h"
#include "pmelab/errors.hpp"
#include "pmelab/pde_solver.hpp"
#include "pmelab/stationary.hpp"

using namespace pmelab;

TEST_CASE("phi_disk examples") {
  CHECK(phi_disk(1, {1, 0}) == 0.0);
  CHECK(phi_disk(1, {std::numbers::e, 0}) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(phi_disk(2, {0, 4}) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  CHECK_THROWS_AS(phi_disk(1, {0.5, 0}), OutsideDomain);
}

TEST_CASE("conformal disk map reproduces the logarithm") {
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> U(0, 1);
  for (double r : {0.5, 1.0, 2.0}) {
    const auto map = conformal_disk(r);
    for (int k = 0; k < 200; ++k) {
      const double rho = r * (1 + 20 * U(rng));
      const double th = 2 * std::numbers::pi * U(rng);
      const Vec2 x{rho * std::cos(th), rho * std::sin(th)};
      CHECK(std::abs(phi_conformal(map, x) - phi_disk(r, x)) <= 1e-12);
      const Vec2 g = grad_phi_conformal(map, x);
      CHECK(norm(g - x / dot(x, x)) <= 1e-10 / rho);
    }
  }
}

TEST_CASE("ellipse map: zero on the boundary, validation") {
  const auto map = conformal_ellipse(2, 1);
  validate_map(map);
  for (int k = 0; k < 64; ++k) {
    const double th = 2 * std::numbers::pi * k / 64;
    CHECK(std::abs(phi_conformal(map, {2 * std::cos(th), std::sin(th)})) < 1e-10);
  }
  CHECK(phi_conformal(map, {4, 0}) > 0);
  CHECK(phi_conformal(map, {0, 4}) > phi_conformal(map, {4, 0}));
}

TEST_CASE("numeric solve: disk(1)") {
  const auto f = solve_stationary_numeric(HoleGeometry::disk(1), 1e-10);
  REQUIRE(f.mesh->is_radial());
  double err = 0;
  for (std::size_t c = 0; c < f.mesh->size(); ++c) err = std::max(err, std::abs(f.phi[c] - std::log(f.mesh->radius(c))));
  CHECK(err <= 1e-4);
  CHECK(std::abs(f.C_est) < 1e-4);
  CHECK(f.residual <= 1e-10);
}

TEST_CASE("numeric solve: disk(2) at radius 4") {
  const auto f = solve_stationary_numeric(HoleGeometry::disk(2), 1e-10);
  const auto pot = field_potential(f);
  CHECK(std::abs(pot.phi({4, 0}) - std::log(2.0)) <= 1e-4);
}

TEST_CASE("gradient bounds on the disk") {
  const auto f = solve_stationary_numeric(HoleGeometry::disk(1), 1e-10);
  const auto rep = check_gradient_bounds(f);
  CHECK(rep.bounds_hold);
  CHECK(std::abs(rep.c_low - 1) <= 1e-6);
  CHECK(std::abs(rep.C_high - 1) <= 1e-6);
  CHECK(std::abs(rep.min_radial - 1) <= 1e-6);
  CHECK(std::abs(rep.max_radial - 1) <= 1e-6);
}

TEST_CASE("numeric solve: ellipse(2,1)") {
  StationaryOptions opt;
  opt.h = 0.05;
  const auto f = solve_stationary_numeric(HoleGeometry::ellipse(2, 1), 1e-10, opt);
  for (double v : f.phi) CHECK(v >= 0);

  // monotone along outward rays from boundary samples
  const auto pot = field_potential(f);
  for (int k = 0; k < 16; ++k) {
    const double th = 2 * std::numbers::pi * k / 16;
    const Vec2 b{2 * std::cos(th), std::sin(th)};
    double prev = 0;
    for (int j = 1; j <= 20; ++j) {
      const double v = pot.phi(b * (1 + 0.2 * j));
      CHECK(v > prev);
      prev = v;
    }
  }

  const auto rep = check_gradient_bounds(f);
  CHECK(rep.bounds_hold);
  CHECK(rep.c_low > 0);
  CHECK(rep.R_split <= 20);
  CHECK(rep.min_radial >= 0.5);
  CHECK(rep.max_radial <= 2);

  // cross-method: Joukowski map against the grid solve
  const double exact = phi_conformal(conformal_ellipse(2, 1), {4, 0});
  CHECK(std::abs(pot.phi({4, 0}) - exact) < 5e-4);
}

TEST_CASE("weighted moment: annulus") {
  const auto g = build_radial_grid(1, std::numbers::e, 400, 1);
  const Mesh mesh = make_mesh(g);
  std::vector<double> u(mesh.size(), 1.0), phi(mesh.size());
  for (std::size_t c = 0; c < mesh.size(); ++c) phi[c] = std::log(mesh.radius(c));
  const double R = std::numbers::e;
  const double want = 2 * std::numbers::pi * (R * R / 2 * std::log(R) - (R * R - 1) / 4);
  CHECK(want == doctest::Approx(2 * std::numbers::pi * (R * R / 4 + 0.25)));
  CHECK(std::abs(weighted_moment(mesh, u, phi) - want) / want < 1e-5);
  std::fill(u.begin(), u.end(), 0.0);
  CHECK(weighted_moment(mesh, u, phi) == 0.0);
}

TEST_CASE("weighted moment: grid mismatch") {
  auto a = std::make_shared<const Mesh>(make_mesh(build_radial_grid(1, 3, 20, 1)));
  auto f = solve_stationary_on(std::make_shared<const Mesh>(make_mesh(build_radial_grid(1, 3, 30, 1))),
                               HoleGeometry::disk(1), 1e-10);
  const auto s = make_state(a, 2, 3, std::vector<double>(a->size(), 1.0));
  CHECK_THROWS_AS(weighted_moment(s, f), IncompatibleGrids);
}

TEST_CASE("zero outer data: solutions increase with the box") {
  // zero data on the truncation boundary: the solution grows with the box
  const auto hole = HoleGeometry::ellipse(1, 0.75);
  std::vector<double> prev;
  std::shared_ptr<const Mesh> base;
  for (double ext : {6.0, 12.0}) {
    auto g = build_masked_grid(hole, ext, 0.1);
    auto mesh = std::make_shared<const Mesh>(make_mesh(g));
    const auto f = solve_stationary_with_outer(mesh, hole, [](Vec2) { return 0.0; }, 1e-11);
    if (!prev.empty()) {
      // both grids share the node lattice near the hole
      const auto& big = mesh->masked();
      std::size_t compared = 0;
      for (std::size_t c = 0; c < base->size(); ++c) {
        const Vec2 x = base->center()[c];
        const auto i = static_cast<std::size_t>(std::floor((x.x - big.origin) / big.h));
        const auto j = static_cast<std::size_t>(std::floor((x.y - big.origin) / big.h));
        const auto cell = mesh->cell_of_grid()[big.index(i, j)];
        REQUIRE(cell >= 0);
        CHECK(f.phi[static_cast<std::size_t>(cell)] >= prev[c] - 1e-9);
        ++compared;
      }
      CHECK(compared == base->size());
    }
    prev = f.phi;
    base = mesh;
  }
}

TEST_CASE("alpha_bar_0 on the disk") {
  CHECK(alpha_bar_0(disk_potential(1), HoleGeometry::disk(1), 0.1) == doctest::Approx(std::log(1.1)).epsilon(1e-9));
}
