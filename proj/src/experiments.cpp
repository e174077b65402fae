#include "hz/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <boost/math/distributions/non_central_chi_squared.hpp>

#include "hz/stats.hpp"
#include "hz/wave1d.hpp"

namespace hz {

namespace {

double zscore(double a, double b, double se) {
  if (se > 0) return (a - b) / se;
  return a == b ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), a - b);
}

Moments bernoulli_moments(long hits, long n) {
  Moments m;
  m.n = n;
  m.mean = n > 0 ? static_cast<double>(hits) / static_cast<double>(n) : 0.0;
  m.variance = m.mean * (1.0 - m.mean);
  m.stderr_ = n > 0 ? std::sqrt(m.variance / static_cast<double>(n)) : 0.0;
  return m;
}

}  // namespace

WaveReport mc_vs_wave(double epsilon, double nu, double t, const std::vector<double>& xs, long replicates,
                      std::uint64_t seed, bool zero_initial) {
  const VoteParams vp{epsilon, nu};
  const Domain line = Domain::full_space(1);
  const InitialCondition p = zero_initial ? constant_condition(0.0) : wave_condition(epsilon, nu);
  TreeOptions opt;
  opt.step = default_step(vp, line);
  WaveReport rep;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const Estimate e = estimate_solution(Point{xs[i]}, t, vp, line, p, replicates, derive_key(seed, i), opt);
    WaveRow row;
    row.x = xs[i];
    row.t = t;
    row.mean = e.mean;
    row.stderr_ = e.stderr_;
    row.exact = zero_initial ? 0.0 : wave_profile(xs[i], t, epsilon, nu);
    row.z = zscore(row.mean, row.exact, row.stderr_);
    rep.max_abs_z = std::max(rep.max_abs_z, std::abs(row.z));
    rep.max_abs_err = std::max(rep.max_abs_err, std::abs(row.mean - row.exact));
    rep.rows.push_back(row);
  }
  rep.pass = rep.max_abs_z <= 3.0 && rep.max_abs_err <= 0.02;
  return rep;
}

McFdReport mc_vs_fd_2d(double epsilon, double nu, double t, const Point& lo, const Point& hi,
                       const std::vector<Point>& probes, long replicates, std::uint64_t seed, double h) {
  const Domain box = Domain::box(lo, hi);
  const InitialCondition p0 = heaviside_condition();
  const Grid grid = make_grid(box, h, lo, hi);
  const FdResult fd = solve_ac(grid, epsilon, nu, p0, t, {t});
  const auto& u = fd.snapshots.front().u;

  const VoteParams vp{epsilon, nu};
  TreeOptions opt;
  opt.step = default_step(vp, box);
  McFdReport rep;
  for (std::size_t i = 0; i < probes.size(); ++i) {
    const Estimate e = estimate_solution(probes[i], t, vp, box, p0, replicates, derive_key(seed, i), opt);
    ProbeRow row;
    row.x = probes[i];
    row.mc = e.mean;
    row.stderr_ = e.stderr_;
    row.fd = grid.interpolate(u, probes[i]);
    row.z = zscore(row.mc, row.fd, row.stderr_);
    rep.max_abs_z = std::max(rep.max_abs_z, std::abs(row.z));
    rep.max_stderr = std::max(rep.max_stderr, row.stderr_);
    rep.rows.push_back(row);
  }
  rep.pass = rep.max_abs_z <= 3.0 && rep.max_stderr <= 0.01;
  return rep;
}

BlockingSetup opening_setup(double r0, double R0, double epsilon, double nu, double T) {
  BlockingSetup s;
  s.domain = Domain::opening(r0, R0);
  s.predicted = opening_verdict(r0, R0, nu, 2);
  s.analytic_value = r0 - critical_radius(nu, 2);
  s.epsilon = epsilon;
  s.nu = nu;
  s.T = T;
  s.h = epsilon / 4;
  // Upper half only: the domain and the initial condition are symmetric in x2.
  const double probe_x = s.predicted == Verdict::Invasion ? -R0 : -0.5 * R0;
  s.lo = Point{probe_x - 0.25, 0.0};
  if (s.predicted != Verdict::Invasion) s.lo = Point{probe_x - R0 / 6, 0.0};
  s.hi = Point{0.5, R0};
  for (double y : {0.0, R0 / 3, 2 * R0 / 3}) s.probes.push_back(Point{probe_x, y + s.h / 2});
  s.observe_every = 2000;
  return s;
}

BlockingReport run_blocking(const BlockingSetup& setup) {
  if (setup.probes.empty()) throw std::invalid_argument("run_blocking: no probes");
  const double h = setup.h > 0 ? setup.h : setup.epsilon / 4;
  BlockingReport rep;
  rep.predicted = setup.predicted;
  rep.analytic_value = setup.analytic_value;
  rep.grid = make_grid(setup.domain, h, setup.lo, setup.hi);
  std::vector<std::size_t> cells;
  for (const auto& p : setup.probes) {
    if (!contains(setup.domain, p)) throw std::invalid_argument("run_blocking: probe outside the domain");
    cells.push_back(rep.grid.locate(p));
  }
  const InitialCondition p0{"heaviside", [](const Point& x) { return x[0] >= 0 ? 1.0 : 0.0; }};

  double lowest = 0;
  FdOptions opt;
  opt.observe_every = setup.observe_every;
  opt.observer = [&](double t, const std::vector<double>& u) {
    double mn = 1, mx = 0;
    for (auto k : cells) {
      mn = std::min(mn, u[k]);
      mx = std::max(mx, u[k]);
    }
    rep.max_probe = std::max(rep.max_probe, mx);
    lowest = mn;
    if (mn > setup.invade_level) {
      rep.invasion_time = t;
      return false;
    }
    return true;
  };
  const FdResult fd = solve_ac(rep.grid, setup.epsilon, setup.nu, p0, setup.T, {}, opt);
  rep.last = fd.snapshots.back();
  rep.final_time = fd.final_time;
  rep.steps = fd.steps;
  // The observer may not have seen the final state.
  double mn = 1;
  for (auto k : cells) {
    mn = std::min(mn, rep.last.u[k]);
    rep.max_probe = std::max(rep.max_probe, rep.last.u[k]);
  }
  lowest = mn;
  if (rep.invasion_time < 0 && mn > setup.invade_level) rep.invasion_time = rep.final_time;
  rep.min_probe_final = lowest;

  if (rep.invasion_time >= 0)
    rep.observed = "invasion";
  else if (rep.max_probe < setup.block_level)
    rep.observed = "blocking";
  else
    rep.observed = "undetermined";
  rep.consistent = (setup.predicted == Verdict::Blocking && rep.observed == "blocking") ||
                   (setup.predicted == Verdict::Invasion && rep.observed == "invasion");
  return rep;
}

FlowReport radial_flow_check(double epsilon, double nu, int d, const std::vector<double>& rho_factors,
                             const std::vector<double>& times, double tolerance) {
  FlowReport rep;
  rep.rho_star = critical_radius(nu, d);
  const double h = epsilon / 4;
  RadialGrid grid;
  grid.h = h;
  grid.d = d;
  grid.n = static_cast<int>(std::ceil(5.0 * rep.rho_star / h));
  const double level = 0.5 * (1.0 - nu * epsilon);
  const double T = times.empty() ? 0.0 : *std::max_element(times.begin(), times.end());
  for (double f : rho_factors) {
    const double rho0 = f * rep.rho_star;
    const RadialResult fd = solve_ac_radial(grid, epsilon, nu, [rho0](double r) { return r < rho0 ? 1.0 : 0.0; }, T,
                                            times);
    for (std::size_t i = 0; i < times.size(); ++i) {
      FlowRow row;
      row.rho0 = rho0;
      row.t = times[i];
      const FlowResult ode = flow_ode_radius(rho0, nu, d, times[i]);
      row.ode = ode.extinct ? 0.0 : ode.radius;
      row.extinct = ode.extinct;
      try {
        row.fd = interface_radius(grid, fd.snapshots[i], level);
      } catch (const std::runtime_error&) {
        row.fd = 0.0;  // the ball has vanished
      }
      row.err = std::abs(row.fd - row.ode) / rep.rho_star;
      rep.worst = std::max(rep.worst, row.err);
      rep.rows.push_back(row);
    }
  }
  rep.pass = rep.worst <= tolerance;
  return rep;
}

std::vector<double> fold_bin_probabilities(const Domain& domain, const Point& center, double radius,
                                           const Point& origin, double bin, int nbx, int nby, int sub) {
  std::vector<double> prob(static_cast<std::size_t>(nbx) * nby, 0.0);
  const double dq = bin / sub;
  const int m = static_cast<int>(std::ceil(2 * radius / dq));
  const double w = dq * dq / ball_volume(2, radius);
  const auto deposit = [&](const Point& z, double mass) {
    const int i = static_cast<int>(std::floor((z[0] - origin[0]) / bin));
    const int j = static_cast<int>(std::floor((z[1] - origin[1]) / bin));
    if (i < 0 || j < 0 || i >= nbx || j >= nby) throw std::runtime_error("fold_bin_probabilities: lattice too small");
    prob[static_cast<std::size_t>(j) * nbx + i] += mass;
  };
  for (int b = 0; b < m; ++b)
    for (int a = 0; a < m; ++a) {
      const Point z{center[0] - radius + (a + 0.5) * dq, center[1] - radius + (b + 0.5) * dq};
      if (distance(z, center) > radius) continue;
      const auto pre = reflected_preimages(domain, z, center, radius);
      for (const auto& y : pre) deposit(y, w / static_cast<double>(pre.size()));
    }
  return prob;
}

ReflectReport reflect_sample_test(const Domain& domain, const Point& center, double radius, long samples,
                                  std::uint64_t seed, double alpha) {
  ReflectReport rep;
  rep.kind = ball_kind_name(classify_ball(domain, center, radius).kind);
  rep.samples = samples;
  const double bin = radius / 10;
  const Point origin{center[0] - 2 * radius, center[1] - 2 * radius};
  const int nb = 40;
  const auto prob = fold_bin_probabilities(domain, center, radius, origin, bin, nb, nb, 48);

  std::vector<long> counts(prob.size(), 0);
  Rng rng(derive_key(seed, 0x52454653));
  for (long k = 0; k < samples; ++k) {
    const Point z = reflected_sample(domain, center, radius, rng);
    const int i = static_cast<int>(std::floor((z[0] - origin[0]) / bin));
    const int j = static_cast<int>(std::floor((z[1] - origin[1]) / bin));
    if (i < 0 || j < 0 || i >= nb || j >= nb || !contains(domain, z)) {
      rep.chi2 = std::numeric_limits<double>::infinity();
      return rep;
    }
    ++counts[static_cast<std::size_t>(j) * nb + i];
  }
  // Bins with small expectation are pooled.
  double pooled_e = 0, pooled_o = 0;
  int bins = 0;
  double total_p = 0;
  for (std::size_t k = 0; k < prob.size(); ++k) {
    total_p += prob[k];
    const double e = prob[k] * samples;
    if (e < 5) {
      pooled_e += e;
      pooled_o += counts[k];
      continue;
    }
    rep.chi2 += (counts[k] - e) * (counts[k] - e) / e;
    ++bins;
  }
  if (pooled_e > 0) {
    rep.chi2 += (pooled_o - pooled_e) * (pooled_o - pooled_e) / std::max(pooled_e, 1.0);
    ++bins;
  }
  rep.dof = bins - 1;
  rep.pvalue = chi2_pvalue(rep.chi2, rep.dof);

  // Every preimage must map back onto its ball point by one or two mirrors.
  const auto& lines = domain.lines();
  Rng rt(derive_key(seed, 0x52545250));
  for (int k = 0; k < 20000; ++k) {
    const Point z = uniform_in_ball(center, radius, rt);
    if (contains(domain, z)) continue;
    for (const auto& y : reflected_preimages(domain, z, center, radius)) {
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t a = 0; a < lines.size(); ++a) {
        const Point ya = lines[a].mirror(y);
        best = std::min(best, distance(ya, z));
        for (std::size_t b = 0; b < lines.size(); ++b) best = std::min(best, distance(lines[b].mirror(ya), z));
      }
      rep.max_roundtrip = std::max(rep.max_roundtrip, best);
    }
  }
  rep.pass = rep.pvalue > alpha && rep.max_roundtrip < 1e-9 && std::abs(total_p - 1.0) < 1e-3;
  return rep;
}

LineageReport lineage_law_check(const ScalingRegime& regime, const RadiusMeasure& mu, double t, long replicates,
                                std::uint64_t seed) {
  LineageReport rep;
  SlfvParams p = regime.params(mu);
  p.s = 0;
  rep.rate_theory = lineage_jump_rate(regime, mu);
  rep.sigma2 = diffusion_constant(regime, mu);
  const int d = regime.d;
  std::vector<long> jumps(replicates);
  std::vector<double> xs(static_cast<std::size_t>(replicates) * d);
#pragma omp parallel for schedule(dynamic, 64)
  for (long i = 0; i < replicates; ++i) {
    const DualHistory h = simulate_dual(Point(d), t, p, derive_key(seed, i));
    jumps[i] = h.jumps;
    for (int k = 0; k < d; ++k) xs[i * d + k] = h.alive.front().pos[k] / std::sqrt(2 * rep.sigma2 * t);
  }
  double total = 0;
  for (long j : jumps) total += static_cast<double>(j);
  rep.rate_empirical = total / (static_cast<double>(replicates) * t);
  rep.rate_relerr = std::abs(rep.rate_empirical - rep.rate_theory) / rep.rate_theory;
  rep.ks = ks_statistic(xs, normal_cdf);
  rep.pass = rep.rate_relerr <= 0.01 && rep.ks <= 0.05;
  return rep;
}

ScalingRegime strong_ladder_regime(double n, double beta, double gamma) {
  const double L = std::log(n);
  return ScalingRegime::strong(n, beta, std::pow(L, -0.5), std::pow(n, -2 * beta) * std::pow(L, 1.0 / 3), gamma, 2);
}

namespace {

template <class Pred>
double dual_probability(const SlfvParams& params, double t, long replicates, std::uint64_t seed, Pred pred,
                        double* stderr_out, double* mean_particles) {
  std::vector<std::uint8_t> hit(replicates, 0);
  std::vector<int> count(replicates, 0);
  const int d = 2;
#pragma omp parallel for schedule(dynamic, 64)
  for (long i = 0; i < replicates; ++i) {
    const DualHistory h = simulate_dual(Point(d), t, params, derive_key(seed, i));
    hit[i] = pred(h) ? 1 : 0;
    count[i] = h.final_count();
  }
  long hits = 0;
  double particles = 0;
  for (long i = 0; i < replicates; ++i) {
    hits += hit[i];
    particles += count[i];
  }
  const Moments m = bernoulli_moments(hits, replicates);
  if (stderr_out) *stderr_out = m.stderr_;
  if (mean_particles) *mean_particles = particles / static_cast<double>(replicates);
  return m.mean;
}

}  // namespace

double probability_many(const SlfvParams& params, double t, long replicates, std::uint64_t seed, double* stderr_out,
                        double* mean_particles) {
  return dual_probability(
      params, t, replicates, seed, [](const DualHistory& h) { return h.final_count() > 1; }, stderr_out,
      mean_particles);
}

double probability_coalescence(const SlfvParams& params, double t, long replicates, std::uint64_t seed,
                               double* stderr_out, double* mean_particles) {
  return dual_probability(
      params, t, replicates, seed, [](const DualHistory& h) { return h.any_coalescence(); }, stderr_out,
      mean_particles);
}

DichotomyReport regime_dichotomy(const DichotomySetup& setup, std::uint64_t seed) {
  DichotomyReport rep;
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < setup.ladder.size(); ++i) {
    const double n = setup.ladder[i];
    LadderRow s;
    s.n = n;
    s.replicates = setup.strong_replicates;
    const SlfvParams sp = strong_ladder_regime(n, setup.strong_beta, setup.strong_gamma).params(setup.mu);
    s.value = probability_many(sp, setup.strong_t, s.replicates, derive_key(seed, 2 * i), &s.stderr_,
                               &s.mean_particles);
    rep.strong.push_back(s);

    LadderRow w;
    w.n = n;
    w.replicates = setup.weak_replicates;
    const SlfvParams wp =
        ScalingRegime::weak_default(n, setup.weak_beta, setup.weak_u, setup.weak_nu, 2).params(setup.mu);
    w.value = probability_coalescence(wp, setup.weak_t, w.replicates, derive_key(seed, 2 * i + 1), &w.stderr_,
                                      &w.mean_particles);
    rep.weak.push_back(w);
    if (w.value > 0) {
      lx.push_back(std::log(n));
      ly.push_back(std::log(w.value));
    }
  }
  rep.strong_decreasing = rep.strong.size() >= 2;
  for (std::size_t i = 1; i < rep.strong.size(); ++i)
    rep.strong_decreasing = rep.strong_decreasing && rep.strong[i].value < rep.strong[i - 1].value;
  rep.weak_target = 4 * setup.weak_beta - 1;
  if (lx.size() >= 2 && lx.size() == rep.weak.size()) {
    rep.weak_slope = linear_fit(lx, ly).slope;
    rep.weak_slope_ok = std::abs(rep.weak_slope - rep.weak_target) <= setup.slope_tolerance;
  }
  rep.pass = rep.strong_decreasing && rep.weak_slope_ok;
  return rep;
}

PairRow pair_outcomes(const ScalingRegime& regime, const RadiusMeasure& mu, double c, long replicates,
                      std::uint64_t seed) {
  PairRow row;
  row.n = regime.n;
  row.replicates = replicates;
  row.Rn = mu.max_radius() * regime.radius_scale();
  row.Ln = horizon_length(regime.n, c);
  SlfvParams p = regime.params(mu);
  p.s = 0;
  std::vector<int> outcome(replicates);
  std::vector<int> inner(replicates);
#pragma omp parallel for schedule(dynamic, 64)
  for (long i = 0; i < replicates; ++i) {
    const PairPath path = simulate_pair(p, row.Ln, derive_key(seed, i), regime.d);
    const ExcursionRecord rec = excursion_stats(path, row.Rn, regime.n, c);
    outcome[i] = static_cast<int>(rec.outcome);
    inner[i] = rec.inner_completed;
  }
  double sum_inner = 0;
  for (long i = 0; i < replicates; ++i) {
    switch (static_cast<ExcursionOutcome>(outcome[i])) {
      case ExcursionOutcome::Coalesced: ++row.coalesced; break;
      case ExcursionOutcome::Diverged: ++row.diverged; break;
      case ExcursionOutcome::Overshoot: ++row.overshoot; break;
    }
    sum_inner += inner[i];
  }
  row.mean_inner = sum_inner / static_cast<double>(replicates);
  return row;
}

DualityReport duality_check(const DualitySetup& setup, std::uint64_t seed) {
  const SlfvParams& p = setup.params;
  const Point lo{0.0, 0.0}, hi{setup.side, setup.side};
  const double mid = 0.5 * setup.side;
  const InitialCondition w0{"left-half", [mid](const Point& x) { return x[0] < mid ? 1.0 : 0.0; }};
  const double rad = 0.3 * setup.side;
  const auto psi2 = [mid, rad](const Point& x) {
    return (x[0] - mid) * (x[0] - mid) + (x[1] - mid) * (x[1] - mid) < rad * rad ? 1.0 : 0.0;
  };
  const double area = setup.side * setup.side;

  std::vector<double> f1(setup.forward_runs), f2(setup.forward_runs);
#pragma omp parallel for schedule(dynamic, 8)
  for (long r = 0; r < setup.forward_runs; ++r) {
    FrequencyField f = make_torus_field(setup.h, lo, hi, w0);
    run_slfvs(f, setup.t, {}, p, derive_key(seed, r));
    f1[r] = f.mean();
    f2[r] = f.integrate(psi2);
  }

  const FrequencyField f0 = make_torus_field(setup.h, lo, hi, w0);
  std::vector<Point> support;
  for (int j = 0; j < f0.grid.ny; ++j)
    for (int i = 0; i < f0.grid.nx; ++i)
      if (psi2(f0.grid.centre(i, j)) > 0) support.push_back(f0.grid.centre(i, j));
  const double support_area = static_cast<double>(support.size()) * setup.h * setup.h;
  DualOptions opt;
  opt.torus = true;
  opt.torus_lo = lo;
  opt.torus_hi = hi;
  opt.snap = setup.h;
  const std::uint64_t dual_seed = derive_key(seed, 0x4455414c);
  std::vector<double> d1(setup.dual_replicates), d2(setup.dual_replicates);
#pragma omp parallel for schedule(dynamic, 64)
  for (long r = 0; r < setup.dual_replicates; ++r) {
    Rng rng(derive_key(dual_seed, 3 * r));
    const int ci = std::min(f0.grid.nx - 1, static_cast<int>(rng.uniform() * f0.grid.nx));
    const int cj = std::min(f0.grid.ny - 1, static_cast<int>(rng.uniform() * f0.grid.ny));
    const DualHistory h1 = simulate_dual(f0.grid.centre(ci, cj), setup.t, p, derive_key(dual_seed, 3 * r + 1), opt);
    d1[r] = vote_on_dual(h1, w0, p.gamma, rng) * area;
    const std::size_t k = std::min(support.size() - 1, static_cast<std::size_t>(rng.uniform() * support.size()));
    const DualHistory h2 = simulate_dual(support[k], setup.t, p, derive_key(dual_seed, 3 * r + 2), opt);
    d2[r] = vote_on_dual(h2, w0, p.gamma, rng) * support_area;
  }

  DualityReport rep;
  const auto add = [&](const std::string& name, const std::vector<double>& fw, const std::vector<double>& bw) {
    const Moments a = moments(fw), b = moments(bw);
    DualityRow row;
    row.name = name;
    row.forward = a.mean;
    row.forward_se = a.stderr_;
    row.dual = b.mean;
    row.dual_se = b.stderr_;
    row.z = zscore(a.mean, b.mean, std::hypot(a.stderr_, b.stderr_));
    rep.rows.push_back(row);
  };
  // mean() is the average over the torus; report it as the integral against psi = 1.
  for (auto& v : f1) v *= area;
  add("constant", f1, d1);
  add("disk", f2, d2);
  rep.pass = true;
  for (const auto& row : rep.rows) rep.pass = rep.pass && std::abs(row.z) <= 3.0;
  return rep;
}

double heat_ball_probability(double x_norm, double rho, double sigma2, double t, int d) {
  if (t <= 0 || sigma2 <= 0) return x_norm <= rho ? 1.0 : 0.0;
  const double v = 2 * sigma2 * t;
  const boost::math::non_central_chi_squared law(d, x_norm * x_norm / v);
  return boost::math::cdf(law, rho * rho / v);
}

CircleReport noisy_circles(const ScalingRegime& regime, const RadiusMeasure& mu, double t,
                           const std::vector<double>& radii, long replicates, std::uint64_t seed) {
  CircleReport rep;
  const int d = regime.d;
  rep.rho_star = critical_radius(regime.nu, d);
  rep.sigma2 = diffusion_constant(regime, mu);
  const SlfvParams p = regime.params(mu);
  const InitialCondition ind = ball_indicator(rep.rho_star);
  rep.pass = true;
  for (std::size_t i = 0; i < radii.size(); ++i) {
    Point x(d);
    x[0] = radii[i];
    std::vector<int> vote(replicates);
    const std::uint64_t key = derive_key(seed, i);
#pragma omp parallel for schedule(dynamic, 16)
    for (long r = 0; r < replicates; ++r) {
      Rng rng(derive_key(key, 2 * r));
      const DualHistory h = simulate_dual(x, t, p, derive_key(key, 2 * r + 1));
      vote[r] = vote_on_dual(h, ind, p.gamma, rng);
    }
    long hits = 0;
    for (int v : vote) hits += v;
    const Moments m = bernoulli_moments(hits, replicates);
    CircleRow row;
    row.radius = radii[i];
    row.estimate = m.mean;
    row.stderr_ = m.stderr_;
    if (regime.kind == RegimeKind::Strong) {
      row.prediction = heat_ball_probability(radii[i], rep.rho_star, rep.sigma2, t, d);
      rep.pass = rep.pass && std::abs(row.estimate - row.prediction) <= 0.05;
    } else {
      row.prediction = radii[i] < rep.rho_star ? 1.0 : 0.0;
      if (radii[i] <= 0.8 * rep.rho_star) rep.pass = rep.pass && row.estimate >= 0.9;
      if (radii[i] >= 1.2 * rep.rho_star) rep.pass = rep.pass && row.estimate <= 0.1;
    }
    rep.rows.push_back(row);
  }
  return rep;
}

}  // namespace hz
