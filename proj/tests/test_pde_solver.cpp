#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>
#include <random>

#include "doctest.h"
#include "pmelab/errors.hpp"
#include "pmelab/pde_solver.hpp"
#include "pmelab/special_solutions.hpp"
#include "pmelab/stationary.hpp"

using namespace pmelab;

namespace {

std::shared_ptr<const Mesh> plane(double extent, double h) {
  return std::make_shared<const Mesh>(make_mesh(build_masked_grid_whole_plane(extent, h)));
}

std::shared_ptr<const Mesh> exterior(double extent, double h) {
  return std::make_shared<const Mesh>(make_mesh(build_masked_grid(HoleGeometry::disk(1), extent, h)));
}

double bump(Vec2 x) {
  const double r2 = dot(x - Vec2{2.5, 0}, x - Vec2{2.5, 0});
  return std::max(0.0, 1 - r2);
}

}  // namespace

TEST_CASE("stable_dt") {
  auto mesh = plane(4, 0.05);
  const auto zero = make_state(mesh, 2, 1, std::vector<double>(mesh->size(), 0.0));
  CHECK(stable_dt(zero, 0.5, 0.3) == 0.3);

  auto a = sample_state(mesh, 2, 1, [](Vec2 x) { return 0.1 * bump(x); });
  auto b = sample_state(mesh, 2, 1, [](Vec2 x) { return 0.2 * bump(x); });
  CHECK(stable_dt(b, 0.5, 1e9) == doctest::Approx(stable_dt(a, 0.5, 1e9) / 2).epsilon(1e-12));

  const auto spec = make_profile(2, 2, 1);
  auto fine = plane(4, 0.01);
  const auto u = sample_state(fine, 2, 1, [&](Vec2 x) { return barenblatt(spec, x, 1.0); });
  const double h = 0.01;
  CHECK(stable_dt(u, 0.5, 1e9) == doctest::Approx(0.5 * h * h / (4 * 2 * u.sup())).epsilon(1e-12));
}

TEST_CASE("step: zero data stays zero") {
  auto mesh = exterior(8, 0.1);
  auto s = make_state(mesh, 2, 3, std::vector<double>(mesh->size(), 0.0));
  const auto next = step(s, 0.1);
  for (double v : next.u) CHECK(v == 0.0);
  CHECK(next.t == doctest::Approx(3.1));
}

TEST_CASE("step: mass plus outflow is conserved") {
  auto mesh = exterior(8, 0.1);
  auto s = sample_state(mesh, 2, 3, [](Vec2 x) { return std::max(0.0, 1 - dot(x - Vec2{1.5, 0}, x - Vec2{1.5, 0})); });
  const double m0 = s.mass();
  Stepper st(mesh);
  for (int k = 0; k < 300; ++k) st.advance(s, stable_dt(s, 0.5));
  CHECK(s.outflow > 0);
  CHECK(std::abs(s.mass() + s.outflow - m0) / m0 < 1e-10);
  for (double v : s.u) CHECK(v >= 0);
}

TEST_CASE("step: whole plane conserves mass exactly") {
  auto mesh = plane(6, 0.05);
  auto s = sample_state(mesh, 3, 1, [](Vec2 x) { return std::max(0.0, 1 - dot(x, x)); });
  const double m0 = s.mass();
  Stepper st(mesh);
  for (int k = 0; k < 200; ++k) {
    const double before = s.mass();
    st.advance(s, stable_dt(s, 0.9));
    CHECK(std::abs(s.mass() - before) / m0 < 1e-12);
  }
}

TEST_CASE("step: order preservation") {
  auto mesh = exterior(8, 0.1);
  std::mt19937 rng(21);
  std::uniform_real_distribution<double> U(0, 1);
  std::vector<double> lo(mesh->size()), hi(mesh->size());
  for (std::size_t c = 0; c < mesh->size(); ++c) {
    lo[c] = bump(mesh->center()[c]) * U(rng);
    hi[c] = lo[c] + bump(mesh->center()[c]) * U(rng);
  }
  auto a = make_state(mesh, 2, 3, lo), b = make_state(mesh, 2, 3, hi);
  for (int k = 0; k < 200; ++k) {
    const double dt = std::min(stable_dt(a, 0.5), stable_dt(b, 0.5));
    a = step(a, dt);
    b = step(b, dt);
  }
  for (std::size_t c = 0; c < mesh->size(); ++c) CHECK(a.u[c] <= b.u[c]);
}

TEST_CASE("support radii") {
  auto mesh = plane(6, 0.02);
  const auto zero = make_state(mesh, 2, 1, std::vector<double>(mesh->size(), 0.0));
  CHECK_THROWS_AS(support_radii(zero, 1e-12), EmptySupport);

  const auto spec = make_profile(2, 2, 1);
  for (double t : {1.0, 2.0}) {
    const auto u = sample_state(mesh, 2, t, [&](Vec2 x) { return barenblatt(spec, x, t); });
    const auto z = support_radii(u, 1e-12 * u.sup());
    CHECK(std::abs(z.zeta_plus - xi_M(spec) * std::pow(t, spec.beta())) <= 0.02 * std::numbers::sqrt2);
  }

  auto rmesh = std::make_shared<const Mesh>(make_mesh(build_radial_grid(1, 10, 200, 1)));
  const auto r = sample_state(rmesh, 2, 3, [](Vec2 x) { return std::max(0.0, 5 - norm(x)); });
  const auto z = support_radii(r, 1e-12);
  CHECK(z.zeta_minus == doctest::Approx(z.zeta_plus));
  CHECK(std::abs(z.zeta_plus - 5) < 0.05);
}

TEST_CASE("remap_zero_extend keeps values and mass") {
  auto g = build_radial_grid(1, 5, 80, 1.02);
  auto small = std::make_shared<const Mesh>(make_mesh(g));
  auto big = std::make_shared<const Mesh>(make_mesh(extend_radial_grid(g, 10)));
  const auto s = sample_state(small, 2, 3, bump);
  const auto v = remap_zero_extend(*small, s.u, *big);
  CHECK(make_state(big, 2, 3, v).mass() == doctest::Approx(s.mass()).epsilon(1e-14));
  for (std::size_t c = small->size(); c < big->size(); ++c) CHECK(v[c] == 0.0);

  auto ms = std::make_shared<const Mesh>(make_mesh(build_masked_grid(HoleGeometry::disk(1), 6, 0.1)));
  auto mb = std::make_shared<const Mesh>(make_mesh(build_masked_grid(HoleGeometry::disk(1), 12, 0.1)));
  const auto q = sample_state(ms, 2, 3, bump);
  CHECK(make_state(mb, 2, 3, remap_zero_extend(*ms, q.u, *mb)).mass() == doctest::Approx(q.mass()).epsilon(1e-14));
}

TEST_CASE("checkpoint times") {
  const auto ts = checkpoint_times(3, 1000, 10);
  const std::vector<double> want{3, 10, 100, 1000};
  REQUIRE(ts.size() == want.size());
  for (std::size_t i = 0; i < ts.size(); ++i) CHECK(ts[i] == doctest::Approx(want[i]));
  CHECK(checkpoint_times(5, 5, 10).size() == 1);
}

TEST_CASE("run: zero data") {
  auto mesh = exterior(8, 0.1);
  RunOptions opt;
  opt.t_end = 100;
  const auto rec = run(make_state(mesh, 2, 3, std::vector<double>(mesh->size(), 0.0)), opt);
  CHECK(rec.degenerate);
  for (const auto& row : rec.rows) {
    CHECK(row.mass == 0.0);
    CHECK(row.weighted_moment == 0.0);
    CHECK(row.sup_u == 0.0);
  }
}

TEST_CASE("run: weighted moment conserved, mass decreasing, auto extension") {
  auto g = build_radial_grid(1, 5, 120, 1.02);
  auto mesh = std::make_shared<const Mesh>(make_mesh(g));
  RunOptions opt;
  opt.t_end = 300;
  opt.safety = 0.9;
  opt.checkpoint_ratio = std::pow(10.0, 0.25);
  opt.extend_mesh = [](const Mesh& m) {
    return std::make_shared<const Mesh>(make_mesh(extend_radial_grid(m.radial(), 2 * m.radial().r_out())));
  };
  opt.phi_provider = [](const std::shared_ptr<const Mesh>& m) {
    std::vector<double> phi(m->size());
    for (std::size_t c = 0; c < m->size(); ++c) phi[c] = std::log(m->radius(c));
    return phi;
  };
  const auto rec = run(sample_state(mesh, 2, 3, [](Vec2 x) { return std::max(0.0, 1 - std::pow(norm(x) - 1.8, 2)); }),
                       opt);
  REQUIRE(rec.rows.size() >= 4);
  CHECK(rec.extensions >= 1);
  const double M0 = rec.rows.front().weighted_moment;
  for (std::size_t i = 1; i < rec.rows.size(); ++i) {
    CHECK(rec.rows[i].mass < rec.rows[i - 1].mass);
    CHECK(rec.rows[i].t > rec.rows[i - 1].t);
    CHECK(std::abs(rec.rows[i].weighted_moment - M0) / M0 < 1e-11);
  }
}

TEST_CASE("run: buffer reached without auto extension") {
  auto mesh = std::make_shared<const Mesh>(make_mesh(build_radial_grid(1, 4, 60, 1)));
  RunOptions opt;
  opt.t_end = 1000;
  opt.auto_extend = false;
  CHECK_THROWS_AS(run(sample_state(mesh, 2, 3, [](Vec2 x) { return std::max(0.0, 1 - std::pow(norm(x) - 2, 2)); }), opt),
                  BufferReached);
}

TEST_CASE("lockstep runs stay ordered across holes") {
  const auto small = std::make_shared<const Mesh>(make_mesh(build_masked_grid(HoleGeometry::disk(0.5), 16, 0.1)));
  const auto mid = std::make_shared<const Mesh>(make_mesh(build_masked_grid(HoleGeometry::ellipse(1, 0.75), 16, 0.1)));
  const auto big = std::make_shared<const Mesh>(make_mesh(build_masked_grid(HoleGeometry::disk(1), 16, 0.1)));
  auto low = [](Vec2 x) { return 0.1 * bump(x); };
  std::vector<SolverState> s{sample_state(small, 2, 3, low), sample_state(mid, 2, 3, low), sample_state(big, 2, 3, low)};
  RunOptions opt;
  opt.t_end = 10;
  std::size_t calls = 0;
  run_lockstep(s, opt, [&](const std::vector<SolverState>& st) {
    ++calls;
    CHECK(st[0].t == st[2].t);
  });
  CHECK(calls >= 2);
  CHECK(s[0].mass() >= s[1].mass());
  CHECK(s[1].mass() >= s[2].mass());
}
