#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "hz/dual.hpp"
#include "hz/stats.hpp"

using namespace hz;

namespace {

SlfvParams torus_params(double u, double gamma, double s, double R, double intensity) {
  SlfvParams p;
  p.u = u;
  p.gamma = gamma;
  p.s = s;
  p.mu = RadiusMeasure::point_mass(R);
  p.intensity = intensity;
  return p;
}

DualOptions unit_torus(DualMode mode) {
  DualOptions o;
  o.mode = mode;
  o.torus = true;
  o.torus_lo = Point{0.0, 0.0};
  o.torus_hi = Point{1.0, 1.0};
  return o;
}

PairPath path_of(std::vector<double> t, std::vector<double> sep, bool coalesced) {
  PairPath p;
  p.times = std::move(t);
  p.separation = std::move(sep);
  p.coalesced = coalesced;
  if (coalesced) p.coalescence_time = p.times.back();
  return p;
}

}  // namespace

TEST_CASE("lineage jump rate") {
  const auto w = ScalingRegime::weak(1e4, 0.2, 0.3, 1.0, 1.0, 2);
  const auto mu = RadiusMeasure::point_mass(1.0);
  CHECK(lineage_jump_rate(w, mu) == doctest::Approx(std::pow(10.0, 1.6) * std::numbers::pi));
  CHECK(lineage_jump_rate(w, mu) == doctest::Approx(125.07).epsilon(1e-4));
  CHECK(lineage_jump_rate(w, RadiusMeasure::point_mass(1.0, 0.0)) == 0.0);
  const auto w2 = ScalingRegime::weak(1e4, 0.2, 0.3, 0.5, 1.0, 2);
  CHECK(lineage_jump_rate(w, mu) == doctest::Approx(2 * lineage_jump_rate(w2, mu)));
}

TEST_CASE("lens volume and second moment") {
  CHECK(lens_volume(2, 1.0, 0.0) == doctest::Approx(std::numbers::pi));
  CHECK(lens_volume(2, 1.0, 2.0) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(lens_volume(2, 1.0, 1.0) == doctest::Approx(2 * std::acos(0.5) - 0.5 * std::sqrt(3.0)));
  // z = (c - x) + (y - c) with both uniform in a disk: E|z|^2 = 2 E|U|^2 = r^2, so the integral is pi r^4.
  for (double r : {0.5, 1.0, 2.0}) CHECK(lens_second_moment(2, r) == doctest::Approx(std::numbers::pi * std::pow(r, 4)).epsilon(1e-6));
  // In d = 3, E|U|^2 = 3 r^2 / 5.
  CHECK(lens_second_moment(3, 1.0) == doctest::Approx(1.2 * 4.0 / 3.0 * std::numbers::pi).epsilon(1e-6));
}

TEST_CASE("diffusion constant against Monte Carlo lens integration") {
  const auto w = ScalingRegime::weak(1e4, 0.2, 0.3, 1.0, 1.0, 2);
  const auto mu = RadiusMeasure::point_mass(1.0);
  // int int |z|^2 1{|x|<1, |x-z|<1} dx dz / pi with x uniform on the unit disk and z uniform on B(0,2).
  Rng rng(41);
  const long N = 4'000'000;
  double acc = 0;
  for (long i = 0; i < N; ++i) {
    const Point x = uniform_in_ball(Point{0.0, 0.0}, 1.0, rng);
    const Point z = uniform_in_ball(Point{0.0, 0.0}, 2.0, rng);
    if (norm(x - z) < 1.0) acc += z[0] * z[0] + z[1] * z[1];
  }
  const double integral = 4 * std::numbers::pi * acc / N;
  const double prefactor = w.u_n() * w.n * w.chi_n() / (std::pow(w.n, 2 * w.beta) * 4);
  CHECK(diffusion_constant(w, mu) == doctest::Approx(prefactor * integral).epsilon(0.005));
  CHECK(diffusion_constant(w, mu) == doctest::Approx(std::numbers::pi / 4).epsilon(1e-6));
  const auto w2 = ScalingRegime::weak(1e4, 0.2, 0.3, 0.5, 1.0, 2);
  CHECK(diffusion_constant(w2, mu) == doctest::Approx(0.5 * diffusion_constant(w, mu)));
}

TEST_CASE("jump law") {
  const double R = 0.3;
  const auto mu = RadiusMeasure::point_mass(R);
  Rng rng(7);
  const Point o{0.0, 0.0};
  std::vector<double> sq, xs, ys;
  for (int i = 0; i < 1'000'000; ++i) {
    const Point z = sample_jump(o, mu, rng);
    const double r2 = z[0] * z[0] + z[1] * z[1];
    if (r2 > 4 * R * R * (1 + 1e-12)) FAIL("jump longer than 2R");
    sq.push_back(r2);
    if (i < 100000) {
      xs.push_back(z[0]);
      ys.push_back(z[1]);
    }
  }
  const double expected = lens_second_moment(2, R) / (std::numbers::pi * R * R);
  CHECK(moments(sq).mean == doctest::Approx(expected).epsilon(0.02));
  const auto mx = moments(xs), my = moments(ys);
  CHECK(std::abs(mx.mean) <= 3 * mx.stderr_);
  CHECK(std::abs(my.mean) <= 3 * my.stderr_);
  CHECK(mx.variance == doctest::Approx(my.variance).epsilon(0.03));

  // Two radii: the radius is size-biased by r^2.
  RadiusMeasure two;
  two.radii = {0.1, 0.3};
  two.weights = {1.0, 1.0};
  std::vector<double> sq2;
  for (int i = 0; i < 400000; ++i) {
    const Point z = sample_jump(o, two, rng);
    sq2.push_back(z[0] * z[0] + z[1] * z[1]);
  }
  const double mix = (0.01 * 0.01 + 0.09 * 0.09) / (0.01 + 0.09);
  CHECK(moments(sq2).mean == doctest::Approx(mix).epsilon(0.02));
}

TEST_CASE("dual with no impact or no selection") {
  auto p = torus_params(0.5, 0.5, 0.0, 0.1, 600);
  for (int i = 0; i < 50; ++i) {
    const auto h = simulate_dual(Point{0.5, 0.5}, 0.5, p, derive_key(3, i), unit_torus(DualMode::Thinned));
    CHECK(h.final_count() == 1);
    CHECK(h.max_count() == 1);
    CHECK(h.selective_events == 0);
  }
  p.u = 0;
  p.s = 0.2;
  for (int i = 0; i < 50; ++i) {
    const auto h = simulate_dual(Point{0.5, 0.5}, 0.5, p, derive_key(4, i), unit_torus(DualMode::Thinned));
    CHECK(h.final_count() == 1);
    CHECK(h.jumps == 0);
    CHECK(h.events.empty());
    CHECK(h.alive[0].pos == Point{0.5, 0.5});
  }
}

TEST_CASE("history invariants") {
  const auto p = torus_params(0.5, 0.5, 0.3, 0.1, 600);
  for (int i = 0; i < 200; ++i) {
    const auto h = simulate_dual(Point{0.5, 0.5}, 0.5, p, derive_key(5, i), unit_torus(DualMode::Thinned));
    REQUIRE(!h.count_path.empty());
    CHECK(h.count_path.front().second == 1);
    int n = 1;
    std::size_t k = 1;
    for (const auto& ev : h.events) {
      if (ev.kind == DualEventKind::Selective) {
        CHECK(ev.offspring.size() == 3);
        CHECK(ev.offspring_pos.size() == 3);
        n += 3 - static_cast<int>(ev.marked.size());
      } else {
        CHECK(ev.marked.size() >= 2);
        CHECK(ev.offspring.size() == 1);
        CHECK(ev.offspring[0] == ev.marked[0]);
        n -= static_cast<int>(ev.marked.size()) - 1;
      }
      CHECK(n >= 1);
      for (std::size_t j = 1; j < ev.marked.size(); ++j) CHECK(ev.marked[j] > ev.marked[j - 1]);
      REQUIRE(k < h.count_path.size());
      CHECK(h.count_path[k].second == n);
      ++k;
    }
    CHECK(h.final_count() == n);
  }
}

TEST_CASE("first branching time in the weak regime") {
  const auto w = ScalingRegime::weak(1e4, 0.2, 0.5, 1.0, 1.0, 2);
  const auto mu = RadiusMeasure::point_mass(1.0);
  const auto params = w.params(mu);
  const double eta = w.u * std::numbers::pi;
  const double rate = eta * (1 + w.gamma_n()) / (w.eps_n * w.eps_n);
  CHECK(rate == doctest::Approx((1 + w.gamma_n()) * w.s_n() * lineage_jump_rate(w, mu)));
  const double t = 0.15;
  const int reps = 2000;
  std::vector<double> first;
  for (int i = 0; i < reps; ++i) {
    const auto h = simulate_dual(Point{0.0, 0.0}, t, params, derive_key(6, i));
    for (const auto& ev : h.events)
      if (ev.kind == DualEventKind::Selective) {
        first.push_back(ev.time);
        break;
      }
  }
  // Censored at t: compare with the exponential law conditioned on branching before t.
  const double Ft = 1 - std::exp(-rate * t);
  CHECK(static_cast<double>(first.size()) / reps == doctest::Approx(Ft).epsilon(0.02));
  const double ks = ks_statistic(first, [&](double s) { return (1 - std::exp(-rate * s)) / Ft; });
  CHECK(ks <= 1.63 / std::sqrt(static_cast<double>(first.size())));
}

TEST_CASE("votes on dual histories") {
  const auto p = torus_params(0.5, 0.5, 0.3, 0.1, 600);
  Rng rng(9);
  for (int i = 0; i < 100; ++i) {
    const auto h = simulate_dual(Point{0.5, 0.5}, 0.3, p, derive_key(10, i), unit_torus(DualMode::Thinned));
    CHECK(vote_on_dual(h, constant_condition(1), 0.5, rng) == 1);
    CHECK(vote_on_dual(h, constant_condition(0), 0.5, rng) == 0);
  }
  auto still = p;
  still.u = 0;
  const auto h = simulate_dual(Point{0.5, 0.5}, 0.3, still, 1, unit_torus(DualMode::Thinned));
  long ones = 0;
  const int N = 20000;
  for (int i = 0; i < N; ++i) ones += vote_on_dual(h, constant_condition(0.3), 0.5, rng);
  CHECK(static_cast<double>(ones) / N == doctest::Approx(0.3).epsilon(0.05));
}

TEST_CASE("excursions") {
  const double R = 0.001, n = 10;
  const auto now = excursion_stats(path_of({0.0}, {0.0}, true), R, n);
  CHECK(now.outcome == ExcursionOutcome::Coalesced);
  CHECK(now.inner_completed == 0);
  CHECK(now.outer_completed == 0);

  const auto trip = excursion_stats(path_of({0.0, 0.01, 0.02, 0.03}, {0.0, 6 * R, 3 * R, 0.0}, true), R, n);
  CHECK(trip.outcome == ExcursionOutcome::Coalesced);
  CHECK(trip.inner_completed == 1);
  CHECK(trip.outer_completed == 1);
  CHECK(trip.tau == doctest::Approx(0.03));
  REQUIRE(trip.intervals.size() >= 2);
  CHECK(trip.intervals[0].inner);
  CHECK_FALSE(trip.intervals[1].inner);
  CHECK(trip.intervals[0].start == 0.0);
  for (std::size_t i = 1; i < trip.intervals.size(); ++i) {
    CHECK(trip.intervals[i].start == trip.intervals[i - 1].end);
    CHECK(trip.intervals[i].inner != trip.intervals[i - 1].inner);
  }

  const double Ln = horizon_length(n, 3.0);
  CHECK(Ln == doctest::Approx(std::pow(std::log(10.0), -3.0)));
  const auto far = excursion_stats(path_of({0.0, 0.01, 0.02}, {0.0, 6 * R, 2 * Ln}, false), R, n);
  CHECK(far.outcome == ExcursionOutcome::Diverged);
  const auto late = excursion_stats(path_of({0.0, 0.01, 2 * Ln}, {0.0, 6 * R, 6 * R}, false), R, n);
  CHECK(late.outcome == ExcursionOutcome::Overshoot);
}

TEST_CASE("sibling pairs") {
  auto p = torus_params(0.5, 0.5, 0.0, 0.01, 1.0);
  p.intensity = 1e5;
  int coalesced = 0;
  for (int i = 0; i < 200; ++i) {
    const auto path = simulate_pair(p, 0.05, derive_key(12, i));
    REQUIRE(!path.times.empty());
    CHECK(path.separation.front() <= 2 * 0.01);
    for (std::size_t k = 1; k < path.times.size(); ++k) CHECK(path.times[k] >= path.times[k - 1]);
    coalesced += path.coalesced;
  }
  CHECK(coalesced > 0);
}

TEST_CASE("thinned and homogeneous event generation agree") {
  const auto p = torus_params(0.5, 0.5, 0.2, 0.1, 600);
  std::vector<double> na, nb, xa, xb;
  const int reps = 10000;
  for (int i = 0; i < reps; ++i) {
    const auto a = simulate_dual(Point{0.5, 0.5}, 0.5, p, derive_key(13, i), unit_torus(DualMode::Thinned));
    const auto b = simulate_dual(Point{0.5, 0.5}, 0.5, p, derive_key(14, i), unit_torus(DualMode::Homogeneous));
    na.push_back(a.final_count());
    nb.push_back(b.final_count());
    xa.push_back(a.alive.front().pos[0]);
    xb.push_back(b.alive.front().pos[0]);
  }
  CHECK(ks_two_sample(na, nb) <= 0.05);
  CHECK(ks_two_sample(xa, xb) <= 0.05);
  CHECK(moments(na).mean == doctest::Approx(moments(nb).mean).epsilon(0.05));
}
