#include "hz/dual.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "hz/bbm.hpp"

namespace hz {

namespace {

double sphere_area(int d) { return d * unit_ball_volume(d); }

struct Space {
  const DualOptions& opt;

  Point wrap(Point z) const {
    if (!opt.torus) return z;
    for (int i = 0; i < z.dim; ++i) {
      const double L = opt.torus_hi[i] - opt.torus_lo[i];
      double y = std::fmod(z[i] - opt.torus_lo[i], L);
      if (y < 0) y += L;
      z[i] = opt.torus_lo[i] + y;
    }
    return z;
  }

  Point snap(Point z) const {
    if (!(opt.snap > 0)) return z;
    const double h = opt.snap;
    for (int i = 0; i < z.dim; ++i) {
      const double o = opt.torus ? opt.torus_lo[i] : 0.0;
      z[i] = o + (std::floor((z[i] - o) / h) + 0.5) * h;
    }
    return z;
  }

  double dist2(const Point& a, const Point& b) const {
    Point d = a - b;
    if (opt.torus)
      for (int i = 0; i < d.dim; ++i) {
        const double L = opt.torus_hi[i] - opt.torus_lo[i];
        d[i] -= L * std::round(d[i] / L);
      }
    return norm2(d);
  }

  Point place(const Point& center, double r, Rng& rng) const {
    if (opt.domain && !opt.torus) return snap(reflected_sample(*opt.domain, center, r, rng));
    return snap(wrap(uniform_in_ball(center, r, rng)));
  }
};

}  // namespace

double lineage_jump_rate(const ScalingRegime& regime, const RadiusMeasure& mu) {
  return regime.n * regime.u_n() * regime.chi_n() * unit_ball_volume(regime.d) * mu.moment(regime.d);
}

double lens_volume(int d, double r, double dist) {
  if (d < 1) throw std::invalid_argument("dimension must be positive");
  dist = std::abs(dist);
  if (dist >= 2.0 * r) return 0.0;
  if (d == 1) return 2.0 * r - dist;
  if (d == 2) return 2.0 * r * r * std::acos(dist / (2.0 * r)) - 0.5 * dist * std::sqrt(4.0 * r * r - dist * dist);
  if (d == 3) return M_PI * (4.0 * r + dist) * (2.0 * r - dist) * (2.0 * r - dist) / 12.0;
  // Two caps of height r - dist/2, each a stack of (d-1)-balls.
  const double vd1 = unit_ball_volume(d - 1);
  const auto slice = [&](double x) { return vd1 * std::pow(std::max(r * r - x * x, 0.0), 0.5 * (d - 1)); };
  double err = 0;
  const double cap = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(slice, 0.5 * dist, r, 15, 1e-12, &err);
  return 2.0 * cap;
}

double lens_second_moment(int d, double r) {
  if (!(r > 0)) throw std::invalid_argument("radius must be positive");
  const double vr = ball_volume(d, r);
  const double area = d == 1 ? 2.0 : sphere_area(d);
  const auto f = [&](double rho) { return area * std::pow(rho, d + 1) * lens_volume(d, r, rho) / vr; };
  double err = 0;
  const double val = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, 0.0, 2.0 * r, 20, 1e-12, &err);
  if (!(err <= 1e-8 * std::abs(val) + 1e-300)) throw std::runtime_error("lens_second_moment: quadrature did not converge");
  return val;
}

double diffusion_constant(const ScalingRegime& regime, const RadiusMeasure& mu) {
  double integral = 0;
  for (std::size_t i = 0; i < mu.radii.size(); ++i)
    if (mu.weights[i] > 0) integral += mu.weights[i] * lens_second_moment(regime.d, mu.radii[i]);
  const double pre = regime.u_n() * regime.n * regime.chi_n() / (std::pow(regime.n, 2.0 * regime.beta) * 2.0 * regime.d);
  return pre * integral;
}

Point sample_jump(const Point& from, const RadiusMeasure& mu, Rng& rng) {
  const double r = mu.sample_size_biased(rng, from.dim);
  const Point c = uniform_in_ball(from, r, rng);
  return uniform_in_ball(c, r, rng);
}

int DualHistory::max_count() const {
  int m = 1;
  for (const auto& [t, n] : count_path) m = std::max(m, n);
  return m;
}

bool DualHistory::any_coalescence() const {
  for (const auto& e : events)
    if (e.kind == DualEventKind::Merge) return true;
  return false;
}

DualHistory simulate_dual(const Point& x, double t, const SlfvParams& params, std::uint64_t key,
                          const DualOptions& opt) {
  // u = 0 is a legal (frozen) dual even though the forward process needs u > 0.
  if (params.u == 0) {
    SlfvParams check = params;
    check.u = 1;
    check.validate();
  } else {
    params.validate();
  }
  if (!(t >= 0)) throw std::invalid_argument("simulate_dual: t must be nonnegative");
  if (opt.mode == DualMode::Homogeneous && !opt.torus)
    throw std::invalid_argument("simulate_dual: homogeneous generation needs a torus");
  const int d = x.dim;
  const Space space{opt};
  Rng rng(key);

  DualHistory h;
  h.start = x;
  h.horizon = t;
  h.alive.push_back({0, space.snap(space.wrap(x)), {}});
  h.count_path.emplace_back(0.0, 1);

  double cover_mass = 0;  // sum of mu(r) V_r
  for (std::size_t i = 0; i < params.mu.radii.size(); ++i)
    cover_mass += params.mu.weights[i] * ball_volume(d, params.mu.radii[i]);
  const double per_particle = params.u * params.intensity * cover_mass;
  double torus_volume = 1;
  if (opt.torus)
    for (int i = 0; i < d; ++i) torus_volume *= opt.torus_hi[i] - opt.torus_lo[i];
  const double homogeneous_rate = params.intensity * torus_volume * params.mu.total();
  const double sel = params.selective_probability();

  std::vector<int> marked_idx;
  long proposals = 0;
  double now = 0;
  for (;;) {
    const double rate = opt.mode == DualMode::Thinned ? per_particle * static_cast<double>(h.alive.size())
                                                      : homogeneous_rate;
    if (!(rate > 0)) break;
    now += rng.exponential(rate);
    if (now > t) break;
    if (++proposals > opt.event_budget) throw BudgetExceeded("simulate_dual: event budget exceeded");

    marked_idx.clear();
    double r = 0;
    Point center;
    if (opt.mode == DualMode::Thinned) {
      const std::size_t owner = std::min(static_cast<std::size_t>(rng.uniform() * static_cast<double>(h.alive.size())),
                                         h.alive.size() - 1);
      r = params.mu.sample_size_biased(rng, d);
      center = space.wrap(uniform_in_ball(h.alive[owner].pos, r, rng));
      const int owner_id = h.alive[owner].id;
      bool rejected = false;
      for (std::size_t j = 0; j < h.alive.size(); ++j) {
        if (j == owner) continue;
        if (space.dist2(h.alive[j].pos, center) > r * r) continue;
        if (rng.uniform() >= params.u) continue;
        if (h.alive[j].id < owner_id) {
          rejected = true;
          break;
        }
        marked_idx.push_back(static_cast<int>(j));
      }
      if (rejected) continue;
      marked_idx.push_back(static_cast<int>(owner));
    } else {
      r = params.mu.sample(rng);
      center = Point(d);
      for (int i = 0; i < d; ++i)
        center[i] = opt.torus_lo[i] + (opt.torus_hi[i] - opt.torus_lo[i]) * rng.uniform();
      for (std::size_t j = 0; j < h.alive.size(); ++j) {
        if (space.dist2(h.alive[j].pos, center) > r * r) continue;
        if (rng.uniform() < params.u) marked_idx.push_back(static_cast<int>(j));
      }
      if (marked_idx.empty()) continue;
    }

    std::sort(marked_idx.begin(), marked_idx.end(),
              [&](int a, int b) { return h.alive[a].id < h.alive[b].id; });
    const int keep = marked_idx.front();
    const bool selective = rng.uniform() < sel;
    if (!selective && marked_idx.size() == 1) {
      h.alive[keep].pos = space.place(center, r, rng);
      ++h.jumps;
      ++h.neutral_events;
      continue;
    }

    DualEvent ev;
    ev.time = now;
    for (int j : marked_idx) ev.marked.push_back(h.alive[j].id);
    if (!selective) {
      ++h.neutral_events;
      ev.kind = DualEventKind::Merge;
      const Point pos = space.place(center, r, rng);
      h.alive[keep].pos = pos;
      ev.offspring = {h.alive[keep].id};
      ev.offspring_pos = {pos};
      std::vector<int> drop(marked_idx.begin() + 1, marked_idx.end());
      std::sort(drop.rbegin(), drop.rend());
      for (int j : drop) {
        h.alive[j] = std::move(h.alive.back());
        h.alive.pop_back();
      }
    } else {
      ++h.selective_events;
      ev.kind = DualEventKind::Selective;
      const std::vector<std::uint8_t> base = h.alive[keep].label;
      std::vector<int> drop(marked_idx.begin(), marked_idx.end());
      std::sort(drop.rbegin(), drop.rend());
      for (int j : drop) {
        h.alive[j] = std::move(h.alive.back());
        h.alive.pop_back();
      }
      for (std::uint8_t c = 1; c <= 3; ++c) {
        DualParticle p{h.next_id++, space.place(center, r, rng), base};
        p.label.push_back(c);
        ev.offspring.push_back(p.id);
        ev.offspring_pos.push_back(p.pos);
        h.alive.push_back(std::move(p));
      }
      if (h.alive.size() > opt.particle_budget) throw BudgetExceeded("simulate_dual: particle budget exceeded");
    }
    h.events.push_back(std::move(ev));
    h.count_path.emplace_back(now, static_cast<int>(h.alive.size()));
  }
  return h;
}

int vote_on_dual(const DualHistory& history, const InitialCondition& p, double gamma, Rng& rng) {
  std::vector<signed char> vote(static_cast<std::size_t>(history.next_id), -1);
  for (const auto& a : history.alive) vote[a.id] = rng.uniform() < p(a.pos) ? 1 : 0;
  const double q = tie_probability(gamma);
  for (auto it = history.events.rbegin(); it != history.events.rend(); ++it) {
    int v = 0;
    if (it->kind == DualEventKind::Merge) {
      v = vote[it->offspring[0]];
    } else {
      const int ones = vote[it->offspring[0]] + vote[it->offspring[1]] + vote[it->offspring[2]];
      v = ones >= 2 ? 1 : (ones == 1 && rng.uniform() < q ? 1 : 0);
    }
    for (int m : it->marked) vote[m] = static_cast<signed char>(v);
  }
  if (vote[0] < 0) throw std::logic_error("vote_on_dual: root vote undefined");
  return vote[0];
}

const char* outcome_name(ExcursionOutcome o) {
  switch (o) {
    case ExcursionOutcome::Coalesced: return "coalesced";
    case ExcursionOutcome::Diverged: return "diverged";
    default: return "overshoot";
  }
}

ExcursionRecord excursion_stats(const PairPath& path, double Rn, double n, double c) {
  if (path.times.size() != path.separation.size()) throw std::invalid_argument("excursion_stats: ragged path");
  const double L = horizon_length(n, c);
  ExcursionRecord rec;
  double tau_div = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < path.times.size(); ++i)
    if (path.separation[i] >= L) {
      tau_div = path.times[i];
      break;
    }
  const double tau_coal = path.coalesced ? path.coalescence_time : std::numeric_limits<double>::infinity();
  rec.tau = std::min({tau_coal, tau_div, L});
  if (rec.tau == tau_coal) rec.outcome = ExcursionOutcome::Coalesced;
  else if (rec.tau == tau_div) rec.outcome = ExcursionOutcome::Diverged;
  else rec.outcome = ExcursionOutcome::Overshoot;

  bool inner = true;
  double start = 0;
  for (std::size_t i = 0; i < path.times.size() && path.times[i] <= rec.tau; ++i) {
    const double s = path.separation[i];
    if (inner ? s >= 5.0 * Rn : s <= 4.0 * Rn) {
      rec.intervals.push_back({inner, start, path.times[i], true});
      (inner ? rec.inner_completed : rec.outer_completed) += 1;
      inner = !inner;
      start = path.times[i];
    }
  }
  rec.intervals.push_back({inner, start, rec.tau, false});
  return rec;
}

PairPath simulate_pair(const SlfvParams& params, double horizon, std::uint64_t key, int d) {
  params.validate();
  Rng rng(key);
  const Point origin(d);
  const double r0 = params.mu.sample_size_biased(rng, d);
  Point pos[2] = {uniform_in_ball(origin, r0, rng), uniform_in_ball(origin, r0, rng)};
  double cover_mass = 0;
  for (std::size_t i = 0; i < params.mu.radii.size(); ++i)
    cover_mass += params.mu.weights[i] * ball_volume(d, params.mu.radii[i]);
  const double rate = 2.0 * params.u * params.intensity * cover_mass;

  PairPath path;
  path.times.push_back(0.0);
  path.separation.push_back(distance(pos[0], pos[1]));
  double now = 0;
  while (rate > 0) {
    now += rng.exponential(rate);
    if (now > horizon) break;
    const int owner = rng.uniform() < 0.5 ? 0 : 1;
    const int other = 1 - owner;
    const double r = params.mu.sample_size_biased(rng, d);
    const Point center = uniform_in_ball(pos[owner], r, rng);
    const bool other_marked = norm2(pos[other] - center) <= r * r && rng.uniform() < params.u;
    if (other_marked) {
      // Both marked: proposals from lineage 1 are discarded so each event counts once.
      if (owner == 1) continue;
      path.coalesced = true;
      path.coalescence_time = now;
      path.times.push_back(now);
      path.separation.push_back(0.0);
      break;
    }
    pos[owner] = uniform_in_ball(center, r, rng);
    const double sep = distance(pos[0], pos[1]);
    path.times.push_back(now);
    path.separation.push_back(sep);
    if (sep >= horizon) break;
  }
  return path;
}

}  // namespace hz
