// Experiment runner. Each subcommand reads an INI config, writes CSV files to --out
// and a summary.json, and exits 0 iff every configured assertion holds.

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "hz/config.hpp"
#include "hz/experiments.hpp"
#include "hz/stats.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace hz;

namespace {

struct Run {
  Config cfg;
  std::uint64_t seed = 1;
  fs::path out;
  bool heatmaps = false;
  json summary;
  bool pass = true;

  void check(const std::string& name, bool ok) {
    summary["assertions"][name] = ok;
    pass = pass && ok;
    std::printf("%-40s %s\n", name.c_str(), ok ? "pass" : "FAIL");
  }
  std::ofstream csv(const std::string& name, const std::string& header) const {
    std::ofstream f(out / name);
    if (!f) throw std::runtime_error("cannot write " + (out / name).string());
    f.precision(10);
    f << header << '\n';
    return f;
  }
};

struct ProfileShape {
  ScalarFn h, hp;
};

// Linear widening h(z) = slope z or narrowing h(z) = A / (1 + z), both flat for z <= 0.
ProfileShape profile_shape(const Config& c) {
  const std::string shape = c.text("domain.shape");
  if (shape == "linear") {
    const double k = c.number("domain.slope");
    return {[k](double z) { return z > 0 ? k * z : 0.0; }, [k](double z) { return z > 0 ? k : 0.0; }};
  }
  if (shape == "narrowing") {
    const double A = c.number("domain.amplitude");
    return {[A](double z) { return z > 0 ? A / (1 + z) : A; },
            [A](double z) { return z > 0 ? -A / ((1 + z) * (1 + z)) : 0.0; }};
  }
  throw std::invalid_argument("domain.shape must be linear or narrowing");
}

Domain make_domain(const Config& c) {
  const std::string kind = c.text("domain.kind");
  if (kind == "opening") return Domain::opening(c.number("domain.r0"), c.number("domain.R0"));
  if (kind == "cone") return Domain::cone(c.number("domain.r0"), c.number("domain.alpha"));
  if (kind == "profile") {
    auto s = profile_shape(c);
    return Domain::profile_cylinder(c.number("domain.H"), s.h, s.hp);
  }
  throw std::invalid_argument("domain.kind must be opening, cone or profile");
}

// Half-width of the channel at abscissa x1.
double half_width(const Domain& dom, double x1) {
  if (const auto* o = std::get_if<Opening>(&dom.shape())) return x1 >= 0 ? o->r0 : o->R0;
  if (const auto* k = std::get_if<Cone>(&dom.shape())) return x1 >= 0 ? k->r0 : k->r0 - x1 * std::tan(k->alpha);
  if (const auto* p = std::get_if<ProfileCylinder>(&dom.shape())) return p->H + p->h(-x1);
  throw std::invalid_argument("half_width: unsupported domain");
}

int cmd_check_blocking(Run& run) {
  const Config& c = run.cfg;
  const Domain dom = make_domain(c);
  const double eps = c.number("model.epsilon"), nu = c.number("model.nu");
  const std::string kind = c.text("domain.kind");

  BlockingSetup s;
  if (kind == "opening") {
    s = opening_setup(c.number("domain.r0"), c.number("domain.R0"), eps, nu, c.number("run.T"));
  } else {
    s.domain = dom;
    s.epsilon = eps;
    s.nu = nu;
    s.T = c.number("run.T");
    s.h = eps / 4;
    if (kind == "cone") {
      const double r0 = c.number("domain.r0"), alpha = c.number("domain.alpha");
      s.predicted = cone_verdict(r0, alpha, nu, 2);
      s.analytic_value = r0 - critical_radius(nu, 2) * std::sin(alpha);
    } else {
      const auto shape = profile_shape(c);
      const double H = c.number("domain.H");
      const auto zgrid = default_zgrid();
      s.predicted = profile_verdict(H, shape.h, shape.hp, nu, 2, zgrid);
      s.analytic_value = blocking_functional(H, shape.h, shape.hp, nu, 2, zgrid);
    }
  }
  if (c.has("run.h")) s.h = c.number("run.h");
  if (c.has("run.probe_x") || kind != "opening") {
    const double px = c.number("run.probe_x");
    const double xlo = c.number("run.window_left", px - 0.25);
    double ymax = 0;
    for (int i = 0; i <= 200; ++i) ymax = std::max(ymax, half_width(s.domain, xlo + (0.5 - xlo) * i / 200.0));
    s.lo = Point{xlo, 0.0};
    s.hi = Point{0.5, ymax};
    const double w = half_width(s.domain, px);
    s.probes.clear();
    for (double f : {0.0, 1.0 / 3, 2.0 / 3}) s.probes.push_back(Point{px, f * w + s.h / 2});
  }
  s.observe_every = static_cast<int>(c.integer("run.observe_every", 2000));

  std::printf("analytic prediction: %s (value %.6g)\n", verdict_name(s.predicted), s.analytic_value);
  run.summary["predicted"] = verdict_name(s.predicted);
  run.summary["analytic_value"] = s.analytic_value;
  if (!c.flag("run.fd", true)) {
    auto f = run.csv("blocking.csv", "kind,predicted,analytic_value");
    f << kind << ',' << verdict_name(s.predicted) << ',' << s.analytic_value << '\n';
    if (c.has("expect.verdict")) run.check("analytic verdict", c.text("expect.verdict") == verdict_name(s.predicted));
    run.check("prediction not ambiguous", s.predicted != Verdict::Ambiguous);
    return run.pass ? 0 : 1;
  }

  const BlockingReport r = run_blocking(s);
  auto f = run.csv("blocking.csv",
                   "kind,predicted,analytic_value,observed,max_probe,min_probe_final,invasion_time,final_time,steps");
  f << kind << ',' << verdict_name(r.predicted) << ',' << r.analytic_value << ',' << r.observed << ',' << r.max_probe
    << ',' << r.min_probe_final << ',' << r.invasion_time << ',' << r.final_time << ',' << r.steps << '\n';
  std::printf("FD: %s (max probe %.3g, invasion time %.4g, %ld steps)\n", r.observed.c_str(), r.max_probe,
              r.invasion_time, r.steps);
  run.summary["observed"] = r.observed;
  run.summary["max_probe"] = r.max_probe;
  run.summary["invasion_time"] = r.invasion_time;
  if (run.heatmaps) {
    write_heatmap_pgm((run.out / "final.pgm").string(), r.grid, r.last);
    write_snapshot_csv((run.out / "final.csv").string(), r.grid, r.last);
  }
  if (s.predicted == Verdict::Ambiguous) {
    std::printf("prediction is ambiguous; FD outcome reported without a verdict\n");
    run.summary["ambiguous"] = true;
    return run.pass ? 0 : 1;
  }
  run.check("FD agrees with analytic verdict", r.consistent);
  return run.pass ? 0 : 1;
}

ScalingRegime make_regime(const Config& c) {
  const std::string kind = c.text("regime.kind");
  const double n = c.number("regime.n"), beta = c.number("regime.beta");
  const int d = static_cast<int>(c.integer("regime.d"));
  ScalingRegime r;
  if (kind == "weak") {
    const double eps = c.number("regime.eps_n", std::pow(std::log(n), -0.25));
    r = ScalingRegime::weak(n, beta, eps, c.number("regime.u"), c.number("regime.nu"), d);
  } else if (kind == "strong") {
    const double L = std::log(n);
    const double un = c.number("regime.u_n", std::pow(L, -0.5));
    const double sn = c.number("regime.s_n", std::pow(n, -2 * beta) * std::pow(L, 1.0 / 3));
    r = ScalingRegime::strong(n, beta, un, sn, c.number("regime.gamma"), d);
    r.nu = c.number("regime.nu");
  } else {
    throw std::invalid_argument("regime.kind must be weak or strong");
  }
  return r;
}

RadiusMeasure make_mu(const Config& c) { return RadiusMeasure::point_mass(c.number("regime.R", 1.0)); }

void write_regime_report(const Run& run, const ScalingRegime& r) {
  std::ofstream f(run.out / "regime.txt");
  f << validate_regime(r).text() << '\n';
}

int cmd_noisy_circles(Run& run) {
  const Config& c = run.cfg;
  const ScalingRegime regime = make_regime(c);
  write_regime_report(run, regime);
  const auto mu = make_mu(c);
  const double t = c.number("run.t");
  const auto rep = noisy_circles(regime, mu, t, c.numbers("run.radii"), c.integer("run.replicates"), run.seed);
  auto f = run.csv("circles.csv", "radius,estimate,stderr,prediction");
  for (const auto& r : rep.rows) {
    f << r.radius << ',' << r.estimate << ',' << r.stderr_ << ',' << r.prediction << '\n';
    std::printf("|x| = %-8.4g estimate %.4f +- %.4f  prediction %.4f\n", r.radius, r.estimate, r.stderr_,
                r.prediction);
  }
  run.summary["sigma2"] = rep.sigma2;
  run.summary["rho_star"] = rep.rho_star;
  run.check(regime.kind == RegimeKind::Strong ? "within 0.05 of heat-flow prediction" : "interface sharp at 0.8/1.2",
            rep.pass);
  return run.pass ? 0 : 1;
}

int cmd_mc_vs_wave(Run& run) {
  const Config& c = run.cfg;
  const long reps = c.integer("run.replicates");
  const auto rep = mc_vs_wave(c.number("model.epsilon"), c.number("model.nu"), c.number("run.t"), c.numbers("run.x"),
                              reps, run.seed, c.flag("run.zero_initial", false));
  auto f = run.csv("wave.csv", "x,t,mean,stderr,exact,z");
  for (const auto& r : rep.rows) {
    f << r.x << ',' << r.t << ',' << r.mean << ',' << r.stderr_ << ',' << r.exact << ',' << r.z << '\n';
    std::printf("x = %-6g mean %.4f +- %.4f exact %.4f z %+.2f\n", r.x, r.mean, r.stderr_, r.exact, r.z);
  }
  run.summary["max_abs_z"] = rep.max_abs_z;
  run.check("all |z| <= 3", rep.max_abs_z <= 3.0);
  return run.pass ? 0 : 1;
}

int cmd_slfvs_run(Run& run) {
  const Config& c = run.cfg;
  const ScalingRegime regime = make_regime(c);
  write_regime_report(run, regime);
  const auto mu = make_mu(c);
  const SlfvParams params = regime.params(mu);
  const Point lo{c.number("window.xlo"), c.number("window.ylo")};
  const Point hi{c.number("window.xhi"), c.number("window.yhi")};
  const double h = c.number("window.h");
  const Domain box = Domain::box(lo, hi);
  const std::string init = c.text("run.initial");
  InitialCondition w0;
  if (init == "heaviside")
    w0 = heaviside_condition();
  else if (init == "ball")
    w0 = ball_indicator(critical_radius(regime.nu, 2));
  else
    throw std::invalid_argument("run.initial must be heaviside or ball");
  const auto times = c.numbers("run.times");
  const double T = *std::max_element(times.begin(), times.end());
  const long reps = c.integer("run.replicates", 1);

  SlfvRunOptions opt;
  opt.event_budget = static_cast<std::size_t>(c.number("run.event_budget", 5e7));
  std::vector<std::vector<double>> mean(times.size());
  FrequencyField proto = make_field(box, h, lo, hi, w0);
  for (auto& m : mean) m.assign(proto.w.size(), 0.0);
  long events = 0;
  for (long r = 0; r < reps; ++r) {
    FrequencyField f = proto;
    const SlfvRun res = run_slfvs(f, T, times, params, derive_key(run.seed, r), opt);
    events += res.events;
    for (std::size_t k = 0; k < times.size(); ++k) {
      for (std::size_t i = 0; i < f.w.size(); ++i) mean[k][i] += res.snapshots[k].w[i] / static_cast<double>(reps);
      if (r == 0) {
        FieldSnapshot snap{res.snapshots[k].time, res.snapshots[k].w};
        write_snapshot_csv((run.out / ("snapshot_" + std::to_string(k) + ".csv")).string(), f.grid, snap);
        if (run.heatmaps)
          write_heatmap_pgm((run.out / ("snapshot_" + std::to_string(k) + ".pgm")).string(), f.grid, snap);
      }
    }
  }
  std::printf("%ld runs, %ld events\n", reps, events);
  run.summary["events"] = events;

  if (c.flag("compare.heat", false)) {
    if (init != "heaviside") throw std::invalid_argument("compare.heat needs the heaviside initial condition");
    const double s2 = diffusion_constant(regime, mu);
    const auto xs = c.numbers("compare.x");
    auto f = run.csv("profile.csv", "t,x,mean_w,heat");
    double worst = 0;
    const Grid& g = proto.grid;
    for (std::size_t k = 0; k < times.size(); ++k) {
      for (double x : xs) {
        // Average over cells in the column containing x.
        const int i = static_cast<int>(std::floor((x - g.x0) / g.h));
        double acc = 0;
        int cnt = 0;
        for (int j = 0; j < g.ny; ++j)
          if (g.mask[g.index(i, j)]) {
            acc += mean[k][g.index(i, j)];
            ++cnt;
          }
        const double w = acc / std::max(cnt, 1);
        const double heat = times[k] > 0 ? normal_cdf(g.xc(i) / std::sqrt(2 * s2 * times[k])) : (x >= 0 ? 1.0 : 0.0);
        worst = std::max(worst, std::abs(w - heat));
        f << times[k] << ',' << g.xc(i) << ',' << w << ',' << heat << '\n';
      }
    }
    std::printf("sup |mean w - heat flow| = %.4f (sigma^2 = %.5g)\n", worst, s2);
    run.summary["heat_sup_error"] = worst;
    run.check("profile within tolerance of heat flow", worst <= c.number("compare.tolerance", 0.05));
  }
  return run.pass ? 0 : 1;
}

int cmd_dual_stats(Run& run) {
  const Config& c = run.cfg;
  const auto ladder = c.numbers("run.ladder");
  const double beta = c.number("regime.beta"), gamma = c.number("regime.gamma");
  const double cexp = c.number("run.c");
  const double t = c.number("run.t");
  const long reps = c.integer("run.replicates");
  const auto mu = make_mu(c);
  auto f = run.csv("dual_stats.csv",
                   "n,u_n,s_n,R_n,L_n,coalesced,diverged,overshoot,replicates,not_coalesced,mean_inner,p_many");
  auto hist = run.csv("n_hist.csv", "n,N,count");
  std::vector<double> notc;
  for (std::size_t i = 0; i < ladder.size(); ++i) {
    const ScalingRegime reg = strong_ladder_regime(ladder[i], beta, gamma);
    const PairRow row = pair_outcomes(reg, mu, cexp, reps, derive_key(run.seed, 2 * i));
    const SlfvParams p = reg.params(mu);
    std::map<int, long> counts;
    std::vector<int> nt(reps);
    const std::uint64_t key = derive_key(run.seed, 2 * i + 1);
#pragma omp parallel for schedule(dynamic, 64)
    for (long r = 0; r < reps; ++r) nt[r] = simulate_dual(Point(2), t, p, derive_key(key, r)).final_count();
    long many = 0;
    for (int v : nt) {
      ++counts[v];
      many += v > 1;
    }
    const double pm = static_cast<double>(many) / static_cast<double>(reps);
    f << row.n << ',' << reg.u_n() << ',' << reg.s_n() << ',' << row.Rn << ',' << row.Ln << ',' << row.coalesced << ','
      << row.diverged << ',' << row.overshoot << ',' << row.replicates << ',' << row.not_coalesced() << ','
      << row.mean_inner << ',' << pm << '\n';
    for (const auto& [k, v] : counts) hist << row.n << ',' << k << ',' << v << '\n';
    std::printf("n = %-8g coalesced %ld diverged %ld overshoot %ld  not coalesced %.4f  P[N(t)>1] %.4f\n", row.n,
                row.coalesced, row.diverged, row.overshoot, row.not_coalesced(), pm);
    notc.push_back(row.not_coalesced());
  }
  if (c.flag("expect.not_coalesced_decreasing", false)) {
    bool dec = true;
    for (std::size_t i = 1; i < notc.size(); ++i) dec = dec && notc[i] < notc[i - 1];
    run.check("non-coalesced fraction decreasing in n", dec);
  }
  return run.pass ? 0 : 1;
}

int cmd_reflect_sample_test(Run& run) {
  const Config& c = run.cfg;
  const Domain dom = make_domain(c);
  const auto cx = c.numbers("ball.x"), cy = c.numbers("ball.y"), rad = c.numbers("ball.radius");
  if (cx.size() != cy.size() || cx.size() != rad.size()) throw std::invalid_argument("ball lists differ in length");
  const long samples = c.integer("run.samples");
  const double alpha = c.number("run.alpha", 0.01);
  auto f = run.csv("reflect.csv", "x,y,radius,kind,samples,chi2,dof,pvalue,max_roundtrip");
  for (std::size_t i = 0; i < cx.size(); ++i) {
    const auto r = reflect_sample_test(dom, Point{cx[i], cy[i]}, rad[i], samples, derive_key(run.seed, i), alpha);
    f << cx[i] << ',' << cy[i] << ',' << rad[i] << ',' << r.kind << ',' << r.samples << ',' << r.chi2 << ',' << r.dof
      << ',' << r.pvalue << ',' << r.max_roundtrip << '\n';
    std::printf("ball (%g,%g) r=%g [%s]: chi2 %.1f on %.0f dof, p = %.3f, round trip %.1e\n", cx[i], cy[i], rad[i],
                r.kind.c_str(), r.chi2, r.dof, r.pvalue, r.max_roundtrip);
    run.check("ball " + std::to_string(i) + " fold density", r.pass);
  }
  return run.pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hybrid-zone experiment runner"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string config_path, out_dir = ".";
  std::uint64_t seed = 1;
  int threads = 0;
  bool heatmaps = false;
  app.add_option("--config", config_path, "INI configuration file")->required()->check(CLI::ExistingFile);
  app.add_option("--seed", seed, "root seed");
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--threads", threads, "OpenMP threads (0 keeps the default)");
  app.add_flag("--heatmaps", heatmaps, "write PGM heatmaps");

  const std::map<std::string, int (*)(Run&)> commands{
      {"check-blocking", cmd_check_blocking}, {"noisy-circles", cmd_noisy_circles},
      {"mc-vs-wave", cmd_mc_vs_wave},         {"slfvs-run", cmd_slfvs_run},
      {"dual-stats", cmd_dual_stats},         {"reflect-sample-test", cmd_reflect_sample_test}};
  const std::map<std::string, std::string> help{
      {"check-blocking", "FD run on an opening, cone or profile domain against the analytic verdict"},
      {"noisy-circles", "dual vote estimate of a ball initial condition in the weak or strong regime"},
      {"mc-vs-wave", "ternary voting estimate against the exact 1-d travelling wave"},
      {"slfvs-run", "forward SLFVS on a window, with frequency snapshots and an optional heat-flow profile"},
      {"dual-stats", "particle counts, lineage jump rate and displacement law of the dual"},
      {"reflect-sample-test", "chi-square test of reflected ball sampling against the fold density"}};
  for (const auto& [name, fn] : commands) app.add_subcommand(name, help.at(name));
  CLI11_PARSE(app, argc, argv);

  if (threads > 0) omp_set_num_threads(threads);
  const std::string name = app.get_subcommands().front()->get_name();
  try {
    Run run;
    run.cfg = Config::load(config_path);
    run.seed = seed;
    run.out = out_dir;
    run.heatmaps = heatmaps;
    fs::create_directories(run.out);
    run.summary["command"] = name;
    run.summary["seed"] = seed;
    run.summary["config"] = config_path;
    const int code = commands.at(name)(run);
    run.summary["pass"] = code == 0;
    std::ofstream(run.out / "summary.json") << run.summary.dump(2) << '\n';
    return code;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "%s: %s\n", name.c_str(), e.what());
    return 2;
  }
}
