#include "hz/slfvs.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "hz/bbm.hpp"

namespace hz {

namespace {

double pick_weighted(const std::vector<double>& weights, double total, Rng& rng) {
  double target = rng.uniform() * total;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    target -= weights[i];
    if (target < 0) return static_cast<double>(i);
  }
  return static_cast<double>(weights.size() - 1);
}

Point make_point(int dim, double x, double y) { return dim == 1 ? Point{x} : Point{x, y}; }

}  // namespace

RadiusMeasure RadiusMeasure::point_mass(double R, double mass) {
  if (!(R > 0) || !(mass >= 0)) throw std::invalid_argument("point mass needs R > 0 and mass >= 0");
  return {{R}, {mass}};
}

RadiusMeasure RadiusMeasure::density(const std::function<double(double)>& f, double R, int bins) {
  if (!(R > 0) || bins < 1) throw std::invalid_argument("density needs R > 0 and bins >= 1");
  RadiusMeasure m;
  const double dr = R / bins;
  for (int i = 0; i < bins; ++i) {
    const double r = (i + 0.5) * dr;
    const double w = f(r);
    if (w < 0) throw std::invalid_argument("radius density must be nonnegative");
    m.radii.push_back(r);
    m.weights.push_back(w * dr);
  }
  return m;
}

double RadiusMeasure::total() const {
  double s = 0;
  for (double w : weights) s += w;
  return s;
}

double RadiusMeasure::max_radius() const {
  double m = 0;
  for (std::size_t i = 0; i < radii.size(); ++i)
    if (weights[i] > 0) m = std::max(m, radii[i]);
  return m;
}

double RadiusMeasure::moment(double k) const {
  double s = 0;
  for (std::size_t i = 0; i < radii.size(); ++i) s += weights[i] * std::pow(radii[i], k);
  return s;
}

RadiusMeasure RadiusMeasure::scaled(double factor) const {
  RadiusMeasure m = *this;
  for (double& r : m.radii) r *= factor;
  return m;
}

double RadiusMeasure::sample(Rng& rng) const {
  if (radii.size() == 1) return radii[0];
  return radii[static_cast<std::size_t>(pick_weighted(weights, total(), rng))];
}

double RadiusMeasure::sample_size_biased(Rng& rng, int d) const {
  if (radii.size() == 1) return radii[0];
  std::vector<double> w(radii.size());
  for (std::size_t i = 0; i < radii.size(); ++i) w[i] = weights[i] * std::pow(radii[i], d);
  double tot = 0;
  for (double x : w) tot += x;
  return radii[static_cast<std::size_t>(pick_weighted(w, tot, rng))];
}

void SlfvParams::validate() const {
  if (!(u > 0 && u <= 1)) throw std::invalid_argument("impact u must lie in (0,1]");
  if (!(gamma > 0 && gamma <= 1)) throw std::invalid_argument("gamma must lie in (0,1]");
  if (!(s >= 0) || !((1.0 + gamma) * s < 1.0)) throw std::invalid_argument("need 0 <= s and (1+gamma) s < 1");
  if (mu.radii.empty() || mu.radii.size() != mu.weights.size()) throw std::invalid_argument("empty radius measure");
  for (std::size_t i = 0; i < mu.radii.size(); ++i)
    if (!(mu.radii[i] > 0) || !(mu.weights[i] >= 0)) throw std::invalid_argument("bad radius measure atom");
  if (!(intensity >= 0)) throw std::invalid_argument("intensity must be nonnegative");
}

ScalingRegime ScalingRegime::weak(double n, double beta, double eps_n, double u, double nu, int d) {
  ScalingRegime r;
  r.kind = RegimeKind::Weak;
  r.n = n;
  r.beta = beta;
  r.eps_n = eps_n;
  r.u = u;
  r.nu = nu;
  r.d = d;
  return r;
}

ScalingRegime ScalingRegime::strong(double n, double beta, double u_n, double s_n, double gamma_n, int d) {
  ScalingRegime r;
  r.kind = RegimeKind::Strong;
  r.n = n;
  r.beta = beta;
  r.un = u_n;
  r.sn = s_n;
  r.gamman = gamma_n;
  r.d = d;
  return r;
}

ScalingRegime ScalingRegime::weak_default(double n, double beta, double u, double nu, int d) {
  return weak(n, beta, std::pow(std::log(n), -0.25), u, nu, d);
}

double ScalingRegime::u_n() const {
  return kind == RegimeKind::Weak ? u / std::pow(n, 1.0 - 2.0 * beta) : un;
}

double ScalingRegime::s_n() const {
  return kind == RegimeKind::Weak ? 1.0 / (eps_n * eps_n * std::pow(n, 2.0 * beta)) : sn;
}

double ScalingRegime::gamma_n() const { return kind == RegimeKind::Weak ? nu * eps_n : gamman; }

SlfvParams ScalingRegime::params(const RadiusMeasure& mu) const {
  SlfvParams p;
  p.u = u_n();
  p.gamma = gamma_n();
  p.s = s_n();
  p.mu = mu.scaled(radius_scale());
  p.intensity = event_intensity();
  return p;
}

std::string RegimeReport::text() const {
  std::ostringstream os;
  os << "status: " << (ok ? "ok" : "invalid") << "\n";
  if (!clause.empty()) os << "clause: " << clause << "\n";
  os << "s_n n^(2beta): " << ratio_plain << "\n";
  os << "s_n n^(2beta) / (u_n log n): " << ratio_log << "\n";
  os << "window: event centres are drawn in the observation window grown by one maximal radius\n";
  for (const auto& w : warnings) os << "warning: " << w << "\n";
  return os.str();
}

RegimeReport validate_regime(const ScalingRegime& r) {
  RegimeReport rep;
  const auto fail = [&](const std::string& m) {
    rep.ok = false;
    rep.warnings.push_back(m);
  };
  if (!(r.n > 1)) fail("n must exceed 1");
  if (r.d < 1 || r.d > 3) fail("dimension must be 1, 2 or 3");
  const double logn = std::log(std::max(r.n, 1.0 + 1e-12));
  const double un = r.u_n(), sn = r.s_n(), gn = r.gamma_n();
  rep.ratio_plain = sn * std::pow(r.n, 2.0 * r.beta);
  rep.ratio_log = rep.ratio_plain / (un * logn);
  if (r.kind == RegimeKind::Weak) {
    rep.clause = "weak";
    if (!(r.beta > 0 && r.beta < 0.25)) fail("weak regime needs beta in (0,1/4)");
    if (!(r.eps_n > 0 && r.eps_n < 1)) fail("weak regime needs eps_n in (0,1)");
    if (!(r.u > 0 && r.u <= 1)) fail("weak regime needs u in (0,1]");
    if (!(r.nu > 0)) fail("weak regime needs nu > 0");
    if (std::sqrt(logn) * r.eps_n < 1.0)
      rep.warnings.push_back("(log n)^(1/2) eps_n < 1: branching is not slow against lineage motion");
  } else {
    if (!(r.beta > 0 && r.beta < 0.5)) fail("strong regime needs beta in (0,1/2)");
    if (!(un > 0 && un < 1)) fail("strong regime needs u_n in (0,1)");
    if (!(sn > 0 && sn < 1)) fail("strong regime needs s_n in (0,1)");
    if (r.d == 2 && un * logn > 1.0) {
      rep.clause = "d=2 with u_n log n large: s_n n^(2beta) / (u_n log n) small";
      if (rep.ratio_log >= 1.0) rep.warnings.push_back("s_n n^(2beta) / (u_n log n) >= 1");
    } else {
      rep.clause = "s_n n^(2beta) small";
      if (rep.ratio_plain >= 1.0) rep.warnings.push_back("s_n n^(2beta) >= 1");
    }
  }
  if (!(gn > 0 && gn <= 1)) fail("gamma_n must lie in (0,1]");
  if (!((1.0 + gn) * sn < 1.0)) fail("(1+gamma_n) s_n must be below 1");
  if (!(un > 0 && un <= 1)) fail("u_n must lie in (0,1]");
  return rep;
}

RegimeReport validate_ladder(const std::vector<ScalingRegime>& ladder) {
  RegimeReport rep;
  if (ladder.empty()) {
    rep.ok = false;
    rep.warnings.push_back("empty ladder");
    return rep;
  }
  for (const auto& r : ladder) {
    const RegimeReport one = validate_regime(r);
    rep.ok = rep.ok && one.ok;
    for (const auto& w : one.warnings) rep.warnings.push_back("n=" + std::to_string(r.n) + ": " + w);
    rep.clause = one.clause;
    rep.ratio_plain = one.ratio_plain;
    rep.ratio_log = one.ratio_log;
  }
  std::vector<ScalingRegime> sorted = ladder;
  std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.n < b.n; });
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    const auto& a = sorted[i - 1];
    const auto& b = sorted[i];
    if (a.kind != RegimeKind::Weak || b.kind != RegimeKind::Weak) continue;
    if (!(b.eps_n < a.eps_n)) rep.warnings.push_back("eps_n does not decrease along the ladder");
    if (!(std::sqrt(std::log(b.n)) * b.eps_n > std::sqrt(std::log(a.n)) * a.eps_n))
      rep.warnings.push_back("(log n)^(1/2) eps_n does not increase along the ladder");
  }
  return rep;
}

Point FrequencyField::lo() const { return make_point(grid.dim, grid.x0, grid.y0); }

Point FrequencyField::hi() const {
  return make_point(grid.dim, grid.x0 + grid.nx * grid.h, grid.y0 + grid.ny * grid.h);
}

Point FrequencyField::wrap(const Point& z) const {
  if (!torus) return z;
  Point out = z;
  const Point a = lo(), b = hi();
  for (int i = 0; i < z.dim; ++i) {
    const double L = b[i] - a[i];
    double y = std::fmod(z[i] - a[i], L);
    if (y < 0) y += L;
    out[i] = a[i] + y;
  }
  return out;
}

Point FrequencyField::delta(const Point& a, const Point& b) const {
  Point d = a - b;
  if (!torus) return d;
  const Point l = lo(), h = hi();
  for (int i = 0; i < d.dim; ++i) {
    const double L = h[i] - l[i];
    d[i] -= L * std::round(d[i] / L);
  }
  return d;
}

std::size_t FrequencyField::cell_of(const Point& z) const { return grid.locate(wrap(z)); }

double FrequencyField::mean() const {
  double s = 0;
  std::size_t n = 0;
  for (std::size_t k = 0; k < w.size(); ++k)
    if (grid.mask[k]) {
      s += w[k];
      ++n;
    }
  return n ? s / static_cast<double>(n) : 0.0;
}

double FrequencyField::integrate(const std::function<double(const Point&)>& psi) const {
  double s = 0;
  for (int j = 0; j < grid.ny; ++j)
    for (int i = 0; i < grid.nx; ++i) {
      const std::size_t k = grid.index(i, j);
      if (grid.mask[k]) s += psi(grid.centre(i, j)) * w[k];
    }
  return s * std::pow(grid.h, grid.dim);
}

FrequencyField make_field(const Domain& domain, double h, const Point& lo, const Point& hi, const InitialCondition& w0) {
  FrequencyField f;
  f.grid = make_grid(domain, h, lo, hi);
  f.domain = domain;
  f.w.assign(f.grid.size(), 0.0);
  for (int j = 0; j < f.grid.ny; ++j)
    for (int i = 0; i < f.grid.nx; ++i) {
      const std::size_t k = f.grid.index(i, j);
      if (f.grid.mask[k]) f.w[k] = std::clamp(w0(f.grid.centre(i, j)), 0.0, 1.0);
    }
  return f;
}

FrequencyField make_torus_field(double h, const Point& lo, const Point& hi, const InitialCondition& w0) {
  FrequencyField f = make_field(Domain::box(lo, hi), h, lo, hi, w0);
  f.torus = true;
  return f;
}

Point sample_parent(const FrequencyField& field, const Event& ev, Rng& rng) {
  if (field.torus) return field.wrap(uniform_in_ball(ev.center, ev.radius, rng));
  const auto& shape = field.domain.shape();
  if (std::holds_alternative<FullSpace>(shape)) return uniform_in_ball(ev.center, ev.radius, rng);
  if (const auto* b = std::get_if<Box>(&shape)) return fold_into_box(*b, uniform_in_ball(ev.center, ev.radius, rng));
  return reflected_sample(field.domain, ev.center, ev.radius, rng);
}

double expected_event_value(double p, double u, double gamma, double s) {
  const double sel = (1.0 + gamma) * s;
  return (1.0 - u) * p + u * ((1.0 - sel) * p + sel * g(p, gamma));
}

EventOutcome step_event(FrequencyField& field, const Event& ev, const SlfvParams& params, Rng& rng) {
  EventOutcome out;
  const Grid& g = field.grid;
  if (!(ev.radius > 0)) throw std::invalid_argument("event radius must be positive");
  if (!field.torus) {
    const auto& shape = field.domain.shape();
    if (const auto* b = std::get_if<Box>(&shape)) {
      double d2 = 0;
      for (int i = 0; i < ev.center.dim; ++i) {
        const double e = std::max({b->lo[i] - ev.center[i], 0.0, ev.center[i] - b->hi[i]});
        d2 += e * e;
      }
      if (d2 > ev.radius * ev.radius) return out;
    } else if (!std::holds_alternative<FullSpace>(shape)) {
      const BallClass cls = classify_ball(field.domain, ev.center, ev.radius);
      if (cls.kind == BallKind::Outside) return out;
      if (cls.kind == BallKind::Hallway) throw GeometryError("step_event: event ball intersects a hallway");
    }
  } else {
    const Point span = field.hi() - field.lo();
    for (int i = 0; i < span.dim; ++i)
      if (2.0 * ev.radius >= span[i]) throw std::invalid_argument("step_event: event ball wraps the torus");
  }

  out.applied = true;
  out.selective = rng.uniform() < params.selective_probability();
  if (!out.selective) {
    out.offspring_type = rng.uniform() < field.value_at(sample_parent(field, ev, rng)) ? 1 : 0;
  } else {
    int ones = 0;
    for (int k = 0; k < 3; ++k) ones += rng.uniform() < field.value_at(sample_parent(field, ev, rng)) ? 1 : 0;
    const double tie = tie_probability(params.gamma);
    out.offspring_type = ones >= 2 ? 1 : (ones == 1 && rng.uniform() < tie ? 1 : 0);
  }

  const double r2 = ev.radius * ev.radius;
  const double a = (1.0 - params.u), b = params.u * out.offspring_type;
  const int i0 = static_cast<int>(std::floor((ev.center[0] - ev.radius - g.x0) / g.h));
  const int i1 = static_cast<int>(std::floor((ev.center[0] + ev.radius - g.x0) / g.h));
  int j0 = 0, j1 = 0;
  if (g.dim == 2) {
    j0 = static_cast<int>(std::floor((ev.center[1] - ev.radius - g.y0) / g.h));
    j1 = static_cast<int>(std::floor((ev.center[1] + ev.radius - g.y0) / g.h));
  }
  for (int jj = j0; jj <= j1; ++jj) {
    int j = jj;
    if (field.torus) j = ((jj % g.ny) + g.ny) % g.ny;
    else if (jj < 0 || jj >= g.ny) continue;
    for (int ii = i0; ii <= i1; ++ii) {
      int i = ii;
      if (field.torus) i = ((ii % g.nx) + g.nx) % g.nx;
      else if (ii < 0 || ii >= g.nx) continue;
      const std::size_t k = g.index(i, j);
      if (!g.mask[k]) continue;
      const Point d = field.delta(g.centre(i, j), ev.center);
      if (norm2(d) > r2) continue;
      field.w[k] = a * field.w[k] + b;
      ++out.cells;
    }
  }
  return out;
}

SlfvRun run_slfvs(FrequencyField& field, double T, const std::vector<double>& snapshot_times,
                  const SlfvParams& params, std::uint64_t seed, const SlfvRunOptions& opt) {
  params.validate();
  if (!(T >= 0)) throw std::invalid_argument("T must be nonnegative");
  const double margin = field.torus ? 0.0 : (opt.margin < 0 ? params.mu.max_radius() : opt.margin);
  Point lo = field.lo(), hi = field.hi();
  double volume = 1;
  for (int i = 0; i < lo.dim; ++i) {
    lo[i] -= margin;
    hi[i] += margin;
    volume *= hi[i] - lo[i];
  }
  const double rate = params.intensity * volume * params.mu.total();
  if (rate * T > static_cast<double>(opt.event_budget))
    throw BudgetExceeded("run_slfvs: expected " + std::to_string(rate * T) + " events exceeds the budget");

  std::vector<double> targets = snapshot_times;
  std::sort(targets.begin(), targets.end());
  SlfvRun run;
  std::size_t next = 0;
  const auto take_until = [&](double t) {
    while (next < targets.size() && targets[next] <= t) run.snapshots.push_back({targets[next++], field.w});
  };
  Rng rng(derive_key(seed, 0x534c4656ULL));
  double t = 0;
  if (rate > 0) {
    for (;;) {
      t += rng.exponential(rate);
      if (t > T) break;
      take_until(t);
      Event ev{Point(lo.dim), params.mu.sample(rng)};
      for (int i = 0; i < lo.dim; ++i) ev.center[i] = lo[i] + (hi[i] - lo[i]) * rng.uniform();
      ++run.events;
      if (step_event(field, ev, params, rng).applied) ++run.applied;
    }
  }
  take_until(T);
  return run;
}

}  // namespace hz
