// Acceptance suite: one line per criterion. Pass criterion numbers as arguments to run a subset.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "hz/experiments.hpp"
#include "hz/stats.hpp"
#include "hz/voting.hpp"
#include "hz/wave1d.hpp"

using namespace hz;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

template <class... A>
std::string fmt(const char* f, A... a) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, a...);
  return buf;
}

ScalarFn linear(double k) {
  return [k](double z) { return k * z; };
}
ScalarFn constant(double c) {
  return [c](double) { return c; };
}

Outcome ac1() {
  Rng rng(1);
  double worst = 0;
  for (int i = 0; i < 1000; ++i) {
    const double p = rng.uniform(), gamma = rng.uniform();
    worst = std::max(worst, std::abs(g(p, gamma) - p - p * (1 - p) * (2 * p - (1 - gamma)) / (1 + gamma)));
  }
  return {worst <= 1e-12, fmt("max residual %.2e", worst)};
}

Outcome ac2() {
  const auto r = mc_vs_wave(0.25, 1.0, 0.5, {-0.5, 0.0, 0.5}, 10000, 2);
  return {r.pass, fmt("max |z| %.2f, max err %.4f", r.max_abs_z, r.max_abs_err)};
}

Outcome ac3() {
  const std::vector<Point> probes{{-0.5, 0.0}, {-0.3, 0.2}, {-0.2, -0.4}, {0.0, 0.7}, {0.2, -0.9}};
  const auto r = mc_vs_fd_2d(0.2, 1.0, 0.3, Point{-1.0, -1.0}, Point{1.0, 1.0}, probes, 10000, 3, 0.0125);
  std::string s = fmt("max stderr %.4f, z:", r.max_stderr);
  for (const auto& row : r.rows) s += fmt(" %.2f", row.z);
  return {r.pass, s};
}

Outcome ac4() {
  bool ok = true;
  for (int k : {1, 2, 3})
    for (double eps : {0.05, 0.1})
      for (double t : {0.0, 0.5}) ok = ok && check_decay(k, eps, 1.0, t).pass;
  Rng rng(4);
  int checked = 0, held = 0;
  while (checked < 1000) {
    const double eps = 0.01 + 0.19 * rng.uniform(), t = rng.uniform();
    const double z = -t + eps * 6 * (rng.uniform() - 0.5);
    const double w = z + eps * (2 * rng.uniform() - 1);
    const auto s = check_slope(z, w, t, eps, 1.0);
    if (!s.admissible) continue;
    ++checked;
    held += s.holds;
  }
  return {ok && held == checked, fmt("decay %s, slope %d/%d", ok ? "ok" : "failed", held, checked)};
}

Outcome ac5() {
  bool ok = true;
  std::string detail;
  const double nu = 1.0;
  for (int k : {1, 2, 3}) {
    std::vector<double> x, y;
    for (int e = 1; e <= 6; ++e) {
      const double eps = std::pow(10.0, -e), gamma = nu * eps;
      x.push_back(std::abs(std::log(eps)));
      y.push_back(static_cast<double>(
          iterations_to_threshold((1 + gamma) / 2 + eps, gamma, 1 - std::pow(eps, k), Direction::Up)));
    }
    const auto fit = linear_fit(x, y);
    ok = ok && fit.r2 >= 0.99;
    detail += fmt("k=%d R2 %.4f slope %.2f; ", k, fit.r2, fit.slope);
  }
  double worst = 1e9;
  for (double gamma : {1e-3, 0.05, 0.1, 0.3}) {
    const double lim = phase_one_limit(gamma);
    for (int i = 1; i <= 200; ++i)
      worst = std::min(worst, phase_one_ratio(gamma, lim * i / 200.0) - (5 - gamma) / 4);
  }
  ok = ok && worst >= -1e-12;
  detail += fmt("phase-one margin %.3e", worst);
  return {ok, detail};
}

Outcome ac6() {
  const auto b = run_blocking(opening_setup(0.5, 3.0, 0.02, 1.0, 5.0));
  const auto i = run_blocking(opening_setup(2.0, 3.0, 0.02, 1.0, 20.0));
  const bool ok = b.observed == "blocking" && i.observed == "invasion";
  return {ok, fmt("r0=0.5: %s (max probe %.2e); r0=2: %s at t=%.3f", b.observed.c_str(), b.max_probe,
                  i.observed.c_str(), i.invasion_time)};
}

Outcome ac7() {
  const auto r = radial_flow_check(0.02, 1.0, 2, {0.7, 1.0, 1.3}, {0.25, 0.5, 0.75, 1.0});
  return {r.pass, fmt("worst |fd - ode| / rho* = %.4f", r.worst)};
}

Outcome ac8() {
  const auto z = default_zgrid();
  Rng rng(8);
  int signs = 0, agree = 0;
  while (signs < 20) {
    const double alpha = 0.05 + 1.45 * rng.uniform(), H = 0.05 + 1.5 * rng.uniform(), nu = 0.2 + 2 * rng.uniform();
    const double margin = H * nu - std::sin(alpha);
    if (std::abs(margin) < 1e-3) continue;
    const double f = blocking_functional(H, linear(std::tan(alpha)), constant(std::tan(alpha)), nu, 2, z);
    agree += (f < 0) == (margin < 0);
    ++signs;
  }
  int sets = 0, negative = 0;
  while (sets < 20) {
    const double H = 0.05 + 0.5 * rng.uniform(), k = 0.5 + 3 * rng.uniform(), nu = 0.2 + 0.8 * rng.uniform();
    const double zz = 0.05 + rng.uniform();
    if (H + k * zz - (1 / nu) * k / std::sqrt(1 + k * k) >= 0) continue;
    const double r = profile_shell_radius(H, linear(k), constant(k), zz, nu, 2);
    negative += boundary_angle_product(H, linear(k), constant(k), zz, r, -zz) < 0;
    ++sets;
  }
  return {agree == 20 && negative == 20, fmt("sign rule %d/20, angle product %d/20", agree, negative)};
}

Outcome ac9() {
  const auto om = Domain::opening(1.0, 3.0);
  const auto side = reflect_sample_test(om, Point{-1.0, 2.8}, 0.5, 100000, 9);
  const auto corner = reflect_sample_test(om, Point{-0.2, 1.2}, 0.5, 100000, 10);
  return {side.pass && corner.pass && side.kind == "side" && corner.kind == "corner",
          fmt("%s p=%.3f, %s p=%.3f, round trip %.1e", side.kind.c_str(), side.pvalue, corner.kind.c_str(),
              corner.pvalue, std::max(side.max_roundtrip, corner.max_roundtrip))};
}

Outcome ac10() {
  const auto reg = ScalingRegime::weak_default(1e4, 0.2, 1.0, 1.0, 2);
  const auto r = lineage_law_check(reg, RadiusMeasure::point_mass(1.0), 1.0, 10000, 11);
  return {r.pass, fmt("rate rel. err %.4f, KS %.4f, sigma2 %.4f", r.rate_relerr, r.ks, r.sigma2)};
}

Outcome ac11() {
  const auto r = regime_dichotomy(DichotomySetup{}, 12);
  std::string s = "strong P[N>1]:";
  for (const auto& row : r.strong) s += fmt(" %.4f(%.4f)", row.value, row.stderr_);
  s += fmt("; weak slope %.3f vs %.3f", r.weak_slope, r.weak_target);
  return {r.pass, s};
}

Outcome ac12() {
  DualitySetup setup;
  setup.params.u = 0.5;
  setup.params.gamma = 0.5;
  setup.params.s = 0.2;
  setup.params.mu = RadiusMeasure::point_mass(0.1);
  setup.params.intensity = 600;
  setup.t = 0.5;
  setup.h = 0.02;
  const auto r = duality_check(setup, 13);
  std::string s;
  for (const auto& row : r.rows) s += fmt("%s z=%.2f; ", row.name.c_str(), row.z);
  return {r.pass, s};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> all{
      {"AC1 voting identity", ac1},         {"AC2 MC vs exact wave", ac2},
      {"AC3 MC vs FD in 2-d", ac3},         {"AC4 decay and slope", ac4},
      {"AC5 iteration amplification", ac5}, {"AC6 blocking/invasion on the opening", ac6},
      {"AC7 critical-radius flow", ac7},    {"AC8 sawtooth and cone conditions", ac8},
      {"AC9 reflected sampling", ac9},      {"AC10 dual lineage law", ac10},
      {"AC11 regime dichotomy", ac11},      {"AC12 forward/backward duality", ac12},
  };
  // Criterion numbers select a subset. --known-fail N keeps N's FAIL line but
  // leaves it out of the exit status.
  std::set<int> only, known;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--known-fail" && i + 1 < argc)
      known.insert(std::stoi(argv[++i]));
    else
      only.insert(std::stoi(a));
  }
  int passed = 0, failed = 0, tolerated = 0;
  for (std::size_t i = 0; i < all.size(); ++i) {
    const int id = static_cast<int>(i + 1);
    if (!only.empty() && !only.count(id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = all[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool excused = !o.pass && known.count(id);
    std::printf("%-40s %s  [%.1fs] %s%s\n", all[i].first, o.pass ? "PASS" : "FAIL", secs, o.detail.c_str(),
                excused ? "  (known failure)" : "");
    std::fflush(stdout);
    if (o.pass)
      ++passed;
    else if (excused)
      ++tolerated;
    else
      ++failed;
  }
  std::printf("%d passed, %d failed, %d known failures\n", passed, failed + tolerated, tolerated);
  return failed == 0 ? 0 : 1;
}
