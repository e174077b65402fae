#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "hz/fd.hpp"
#include "hz/wave1d.hpp"

using namespace hz;

namespace {

double sup_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

// Classical RK4 with a fixed small step; R = 0 absorbs.
double rk4_radius(double r, double nu, int d, double t, int steps) {
  const auto f = [&](double x) { return nu - (d - 1) / x; };
  const double dt = t / steps;
  for (int i = 0; i < steps && r > 0; ++i) {
    const double k1 = f(r), k2 = f(r + 0.5 * dt * k1), k3 = f(r + 0.5 * dt * k2), k4 = f(r + dt * k3);
    r += dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
  }
  return std::max(r, 0.0);
}

}  // namespace

TEST_CASE("grid construction") {
  const auto om = Domain::opening(1.0, 3.0);
  const auto g = make_grid(om, 0.05, Point{-1.0, -1.5}, Point{1.0, 1.5});
  CHECK(g.dim == 2);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) CHECK(static_cast<bool>(g.mask[g.index(i, j)]) == contains(om, g.centre(i, j)));
  CHECK(g.active_cells() < g.size());
  CHECK_THROWS(make_grid(om, 0.0, Point{-1.0, -1.0}, Point{1.0, 1.0}));
  CHECK_THROWS(make_grid(om, 0.05, Point{5.0, 5.0}, Point{6.0, 6.0}));
}

TEST_CASE("interpolation") {
  const Point lo{-1.0, -1.0}, hi{1.0, 1.0};
  const auto g = make_grid(Domain::box(lo, hi), 0.1, lo, hi);
  std::vector<double> u(g.size());
  const auto affine = [](double x, double y) { return 0.3 + 0.7 * x - 0.2 * y; };
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) u[g.index(i, j)] = affine(g.xc(i), g.yc(j));
  for (const Point& p : {Point{0.0, 0.0}, Point{-0.53, 0.41}, Point{0.77, -0.12}, Point{0.05, 0.95}})
    CHECK(g.interpolate(u, p) == doctest::Approx(affine(p[0], p[1])).epsilon(1e-12));
  CHECK(g.interpolate(u, g.centre(3, 4)) == doctest::Approx(u[g.index(3, 4)]));

  // Next to the narrow arm's wall only in-domain cells contribute.
  const auto om = Domain::opening(1.0, 3.0);
  const auto go = make_grid(om, 0.1, Point{-1.0, -2.0}, Point{1.0, 2.0});
  std::vector<double> v(go.size(), 0.0);
  for (std::size_t k = 0; k < v.size(); ++k)
    if (go.mask[k]) v[k] = 0.5;
  CHECK(go.interpolate(v, Point{0.5, 0.98}) == doctest::Approx(0.5));
  CHECK_THROWS(go.interpolate(std::vector<double>(3), Point{0.0, 0.0}));
}

TEST_CASE("equilibria") {
  const auto om = Domain::opening(1.0, 3.0);
  const auto g = make_grid(om, 0.025, Point{-0.5, -1.2}, Point{0.5, 1.2});
  for (double c : {0.0, 1.0}) {
    const auto r = solve_ac(g, 0.1, 1.0, constant_condition(c), 0.05, {0.01, 0.05});
    REQUIRE(r.snapshots.size() == 2);
    for (const auto& s : r.snapshots)
      for (std::size_t k = 0; k < g.size(); ++k)
        if (g.mask[k]) CHECK(s.u[k] == c);
  }
}

TEST_CASE("travelling wave in one dimension") {
  const double eps = 0.1, nu = 1.0, h = eps / 8;
  const auto dom = Domain::box(Point{-3.0}, Point{3.0});
  const auto g = make_grid(dom, h, Point{-3.0}, Point{3.0});
  const auto r = solve_ac(g, eps, nu, wave_condition(eps, nu), 0.5, {0.5});
  REQUIRE(r.snapshots.size() == 1);
  double err = 0;
  for (int i = 0; i < g.nx; ++i)
    err = std::max(err, std::abs(r.snapshots[0].u[i] - wave_profile(g.xc(i), 0.5, eps, nu)));
  CHECK(err <= 0.01);
}

TEST_CASE("comparison principle") {
  const auto om = Domain::opening(1.0, 3.0);
  const double eps = 0.1;
  const auto g = make_grid(om, eps / 4, Point{-1.0, -1.5}, Point{1.0, 1.5});
  const auto low = heaviside_condition();
  const auto high = shell_profile(om, ShellSpec{1.5, 0.0}, 0.3, 0.1);
  const InitialCondition lower{"half", [](const Point& x) { return x[0] >= 0.3 ? 0.5 : 0.0; }};
  const std::vector<double> times{0.01, 0.03, 0.06};
  const auto a = solve_ac(g, eps, 1.0, lower, 0.06, times);
  const auto b = solve_ac(g, eps, 1.0, low, 0.06, times);
  const auto c = solve_ac(g, eps, 1.0, high, 0.06, times);
  for (std::size_t s = 0; s < times.size(); ++s)
    for (std::size_t k = 0; k < g.size(); ++k) {
      CHECK(a.snapshots[s].u[k] <= b.snapshots[s].u[k] + 1e-8);
      CHECK(b.snapshots[s].u[k] <= c.snapshots[s].u[k] + 1e-8);
    }
}

TEST_CASE("mass is conserved without reaction") {
  const auto om = Domain::opening(1.0, 3.0);
  const auto g = make_grid(om, 0.05, Point{-1.0, -2.0}, Point{1.0, 2.0});
  FdOptions opt;
  opt.reaction = false;
  const InitialCondition p{"bump", [](const Point& x) { return std::exp(-4 * (x[0] * x[0] + x[1] * x[1])); }};
  const auto r = solve_ac(g, 0.2, 1.0, p, 0.5, {0.0, 0.5}, opt);
  REQUIRE(r.snapshots.size() == 2);
  const double m0 = total_mass(g, r.snapshots[0].u), m1 = total_mass(g, r.snapshots[1].u);
  CHECK(std::abs(m1 - m0) <= 1e-8 * 0.5 * std::max(1.0, m0));
}

TEST_CASE("parallel step matches the reference") {
  const auto om = Domain::opening(1.0, 3.0);
  const auto g = make_grid(om, 0.02, Point{-1.0, -1.6}, Point{1.0, 1.6});
  Rng rng(13);
  std::vector<double> u(g.size(), 0.0), a, b;
  for (std::size_t k = 0; k < g.size(); ++k)
    if (g.mask[k]) u[k] = rng.uniform();
  const double dt = stable_dt(g, 0.1, 1.0);
  for (bool reaction : {true, false}) {
    fd_step_reference(g, u, a, dt, 0.1, 1.0, reaction);
    fd_step_parallel(g, u, b, dt, 0.1, 1.0, reaction);
    CHECK(sup_diff(a, b) <= 1e-14);
  }
  FdOptions serial;
  serial.parallel = false;
  const auto r1 = solve_ac(g, 0.1, 1.0, heaviside_condition(), 0.02, {0.02}, serial);
  const auto r2 = solve_ac(g, 0.1, 1.0, heaviside_condition(), 0.02, {0.02});
  CHECK(sup_diff(r1.snapshots[0].u, r2.snapshots[0].u) <= 1e-12);
}

TEST_CASE("step size and spacing checks") {
  const auto g = make_grid(Domain::box(Point{-1.0}, Point{1.0}), 0.025, Point{-1.0}, Point{1.0});
  FdOptions opt;
  opt.dt = 2 * stable_dt(g, 0.1, 1.0, 1.0);
  CHECK_THROWS(solve_ac(g, 0.1, 1.0, heaviside_condition(), 0.1, {}, opt));
  const auto coarse = make_grid(Domain::box(Point{-1.0}, Point{1.0}), 0.1, Point{-1.0}, Point{1.0});
  CHECK_THROWS(solve_ac(coarse, 0.1, 1.0, heaviside_condition(), 0.1, {}));
}

TEST_CASE("interface radius") {
  const RadialGrid rg{400, 0.01, 2};
  FieldSnapshot s;
  s.u.resize(rg.n);
  for (int i = 0; i < rg.n; ++i) {
    const double r = rg.centre(i);
    s.u[i] = r < 1 - rg.h ? 1.0 : (r > 1 + rg.h ? 0.0 : 0.5 * (1 - (r - 1) / rg.h));
  }
  CHECK(std::abs(interface_radius(rg, s, 0.5) - 1.0) <= rg.h);
  std::fill(s.u.begin(), s.u.end(), 0.7);
  CHECK_THROWS(interface_radius(rg, s, 0.45));
}

TEST_CASE("flow ODE") {
  const auto fixed = flow_ode_radius(1.0, 1.0, 2, 3.0);
  CHECK(fixed.radius == doctest::Approx(1.0).epsilon(1e-10));
  CHECK_FALSE(fixed.extinct);

  const auto grow = flow_ode_radius(2.0, 1.0, 2, 1.0);
  CHECK(grow.radius == doctest::Approx(rk4_radius(2.0, 1.0, 2, 1.0, 200000)).epsilon(1e-7));
  CHECK(grow.radius > 2.0);

  const auto shrink = flow_ode_radius(0.5, 1.0, 2, 5.0);
  CHECK(shrink.extinct);
  CHECK(shrink.radius == 0.0);
  // t_ext solves t = R0 - R + log((1-R)/(1-R0)) with R = 0 for nu = 1, d = 2.
  CHECK(shrink.extinction_time == doctest::Approx(-0.5 + std::log(2.0)).epsilon(1e-5));
  CHECK(flow_ode_radius(0.5, 1.0, 2, 0.1).radius < 0.5);
  CHECK_THROWS(flow_ode_radius(0.0, 1.0, 2, 1.0));
}

TEST_CASE("radial interface shrinks below the critical radius") {
  const double eps = 0.05, nu = 1.0;
  const RadialGrid rg{static_cast<int>(3.0 / (eps / 4)), eps / 4, 2};
  const double r0 = 0.7;
  const auto p0 = [r0](double r) { return r <= r0 ? 1.0 : 0.0; };
  const std::vector<double> times{0.05, 0.1, 0.15, 0.2};
  const auto res = solve_ac_radial(rg, eps, nu, p0, 0.2, times);
  const double level = (1 - nu * eps) / 2;
  double prev = r0;
  for (const auto& s : res.snapshots) {
    const double r = interface_radius(rg, s, level);
    CHECK(r < prev);
    prev = r;
  }
}
