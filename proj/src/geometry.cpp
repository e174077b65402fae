#include "hz/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace hz {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kTol = 1e-12;

BoundaryLine make_line(Point origin, Point dir, double s0, double s1, Point normal, std::string label) {
  BoundaryLine l;
  l.origin = origin;
  l.dir = dir * (1.0 / norm(dir));
  l.normal = normal * (1.0 / norm(normal));
  l.s0 = s0;
  l.s1 = s1;
  l.label = std::move(label);
  return l;
}

void require_dim(const Domain& domain, const Point& x) {
  if (x.dim != domain.dim()) throw std::invalid_argument("point dimension does not match domain");
}

double fold_into(double x, double lo, double hi) {
  const double L = hi - lo;
  double y = std::fmod(x - lo, 2.0 * L);
  if (y < 0) y += 2.0 * L;
  if (y > L) y = 2.0 * L - y;
  return lo + y;
}

// Inward unit normal of a curved boundary near the crossing point c.
Point curved_inward_normal(const Domain& domain, const Point& c) {
  if (const auto* pc = std::get_if<ProfileCylinder>(&domain.shape())) {
    const double hp = pc->hprime(-c[0]);
    const double n = std::sqrt(1.0 + hp * hp);
    return c[1] >= 0 ? Point{-hp / n, -1.0 / n} : Point{-hp / n, 1.0 / n};
  }
  const auto& b = std::get<BallDomain>(domain.shape());
  Point v = b.center - c;
  return v * (1.0 / norm(v));
}

Point fold_lines(const Domain& domain, const Point& from, const Point& proposed) {
  Point p = from, q = proposed;
  const auto& lines = domain.lines();
  for (int fold = 0; fold < 2; ++fold) {
    const Point d = q - p;
    double best_t = kInf;
    int best = -1;
    for (int i = 0; i < static_cast<int>(lines.size()); ++i) {
      const double dn = dot(d, lines[i].normal);
      if (dn >= 0) continue;
      const double t = lines[i].offset(p) / (-dn);
      if (t < kTol || t > 1.0 + kTol) continue;
      if (!lines[i].projection_in_segment(p + d * t, 1e-12)) continue;
      if (t < best_t) {
        best_t = t;
        best = i;
      }
    }
    if (best < 0) throw GeometryError("reflect_step: no boundary crossing found");
    p = p + d * best_t;
    q = lines[best].mirror(q);
    if (contains(domain, q)) return q;
  }
  throw GeometryError("reflect_step: endpoint not restored within two folds");
}

Point fold_curved(const Domain& domain, const Point& from, const Point& proposed) {
  Point p = from, q = proposed;
  for (int fold = 0; fold < 2; ++fold) {
    const Point d = q - p;
    double lo = 0, hi = 1;
    for (int it = 0; it < 80; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (contains(domain, p + d * mid)) lo = mid;
      else hi = mid;
    }
    const Point c = p + d * (0.5 * (lo + hi));
    const Point n = curved_inward_normal(domain, c);
    q = q - n * (2.0 * dot(q - c, n));
    p = p + d * lo;
    if (contains(domain, q)) return q;
  }
  throw GeometryError("reflect_step: endpoint not restored within two folds");
}

// Whether some point of the chord of B(center, r) on the hyperplane of `l`
// is joined to `l` through the complement of the domain.
bool hyperplane_extension_hit(const Domain& domain, const BoundaryLine& l, const Point& center, double r) {
  const double off = l.offset(center);
  if (std::abs(off) >= r) return false;
  const double sc = l.param(center);
  const double hl = std::sqrt(r * r - off * off);
  double from, to;
  if (sc + hl < l.s0) {
    from = l.s0;
    to = sc + hl;
  } else if (sc - hl > l.s1) {
    from = l.s1;
    to = sc - hl;
  } else {
    return true;
  }
  const Point base = l.project(center);
  const Point foot = base + l.dir * (-sc);
  constexpr int kSamples = 64;
  for (int k = 0; k <= kSamples; ++k) {
    const double s = from + (to - from) * k / kSamples;
    if (contains(domain, foot + l.dir * s)) return false;
  }
  return true;
}

}  // namespace

double BoundaryLine::distance_to(const Point& x) const {
  const double s = std::clamp(param(x), s0, s1);
  return distance(x, at(s));
}

Domain Domain::full_space(int d) {
  if (d < 1 || d > kMaxDim) throw std::invalid_argument("dimension must be 1..3");
  Domain dom(FullSpace{d}, d);
  dom.finish_lines();
  return dom;
}

Domain Domain::box(const Point& lo, const Point& hi) {
  if (lo.dim != hi.dim || lo.dim < 1) throw std::invalid_argument("box corners must share a dimension");
  double minside = kInf;
  for (int i = 0; i < lo.dim; ++i) {
    if (!(lo[i] < hi[i])) throw std::invalid_argument("box requires lo < hi");
    minside = std::min(minside, hi[i] - lo[i]);
  }
  Domain dom(Box{lo, hi}, lo.dim);
  if (lo.dim == 2) {
    const double w = hi[0] - lo[0], h = hi[1] - lo[1];
    dom.lines_ = {
        make_line(lo, {1, 0}, 0, w, {0, 1}, "bottom"),
        make_line({lo[0], hi[1]}, {1, 0}, 0, w, {0, -1}, "top"),
        make_line(lo, {0, 1}, 0, h, {1, 0}, "left"),
        make_line({hi[0], lo[1]}, {0, 1}, 0, h, {-1, 0}, "right"),
    };
  }
  dom.feature_ = minside;
  dom.max_ball_ = 0.99 * minside / 2.0;
  dom.finish_lines();
  return dom;
}

Domain Domain::opening(double r0, double R0) {
  if (!(r0 > 0 && r0 < R0)) throw std::invalid_argument("opening requires 0 < r0 < R0");
  Domain dom(Opening{r0, R0}, 2);
  dom.lines_ = {
      make_line({0, R0}, {1, 0}, -kInf, 0, {0, -1}, "wide top y=R0"),
      make_line({0, -R0}, {1, 0}, -kInf, 0, {0, 1}, "wide bottom y=-R0"),
      make_line({0, 0}, {0, 1}, r0, R0, {-1, 0}, "upper wall x1=0"),
      make_line({0, 0}, {0, 1}, -R0, -r0, {-1, 0}, "lower wall x1=0"),
      make_line({0, r0}, {1, 0}, 0, kInf, {0, -1}, "narrow top y=r0"),
      make_line({0, -r0}, {1, 0}, 0, kInf, {0, 1}, "narrow bottom y=-r0"),
  };
  dom.feature_ = std::min(r0, R0 - r0);
  dom.max_ball_ = 0.99 * std::min(r0, R0 - r0);
  dom.finish_lines();
  return dom;
}

Domain Domain::cone(double r0, double alpha) {
  if (!(r0 > 0)) throw std::invalid_argument("cone requires r0 > 0");
  if (!(alpha > 0 && alpha <= std::numbers::pi / 2 + 1e-15)) throw std::invalid_argument("cone requires alpha in (0, pi/2]");
  Domain dom(Cone{r0, alpha}, 2);
  const double ca = std::cos(alpha), sa = std::sin(alpha);
  const double c = alpha >= std::numbers::pi / 2 ? 0.0 : ca;
  dom.lines_ = {
      make_line({0, r0}, {1, 0}, 0, kInf, {0, -1}, "narrow top"),
      make_line({0, -r0}, {1, 0}, 0, kInf, {0, 1}, "narrow bottom"),
      make_line({0, r0}, {-c, sa}, 0, kInf, {-sa, -c}, "slanted top"),
      make_line({0, -r0}, {-c, -sa}, 0, kInf, {-sa, c}, "slanted bottom"),
  };
  dom.feature_ = r0;
  dom.max_ball_ = 0.99 * r0;
  dom.finish_lines();
  return dom;
}

Domain Domain::profile_cylinder(double H, ScalarFn h, ScalarFn hprime) {
  if (!(H > 0)) throw std::invalid_argument("profile cylinder requires H > 0");
  if (!h || !hprime) throw std::invalid_argument("profile cylinder requires h and h'");
  Domain dom(ProfileCylinder{H, std::move(h), std::move(hprime)}, 2);
  dom.feature_ = H;
  dom.finish_lines();
  return dom;
}

Domain Domain::ball(const Point& center, double radius) {
  if (!(radius > 0)) throw std::invalid_argument("ball requires radius > 0");
  Domain dom(BallDomain{center, radius}, center.dim);
  dom.feature_ = radius;
  dom.finish_lines();
  return dom;
}

void Domain::finish_lines() {
  const std::size_t n = lines_.size();
  meet_.assign(n, std::vector<char>(n, 0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      for (double s : {lines_[i].s0, lines_[i].s1}) {
        if (std::isfinite(s) && lines_[j].distance_to(lines_[i].at(s)) < 1e-12) meet_[i][j] = meet_[j][i] = 1;
      }
    }
  }
}

bool Domain::lines_meet(int i, int j) const { return meet_.at(i).at(j) != 0; }

bool contains(const Domain& domain, const Point& x) {
  require_dim(domain, x);
  for (int i = 0; i < x.dim; ++i)
    if (!std::isfinite(x[i])) return false;
  return std::visit(
      [&](const auto& s) -> bool {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, FullSpace>) {
          return true;
        } else if constexpr (std::is_same_v<T, Box>) {
          for (int i = 0; i < x.dim; ++i)
            if (!(x[i] > s.lo[i] && x[i] < s.hi[i])) return false;
          return true;
        } else if constexpr (std::is_same_v<T, Opening>) {
          return std::abs(x[1]) < (x[0] >= 0 ? s.r0 : s.R0);
        } else if constexpr (std::is_same_v<T, Cone>) {
          if (x[0] >= 0) return std::abs(x[1]) < s.r0;
          if (s.alpha >= std::numbers::pi / 2) return true;
          return std::abs(x[1]) < s.r0 - x[0] * std::tan(s.alpha);
        } else if constexpr (std::is_same_v<T, ProfileCylinder>) {
          return std::abs(x[1]) < s.H + s.h(-x[0]);
        } else {
          return distance(x, s.center) < s.radius;
        }
      },
      domain.shape());
}

double signed_distance_shell(const Domain& domain, const ShellSpec& shell, const Point& x) {
  const auto* op = std::get_if<Opening>(&domain.shape());
  if (!op) throw std::invalid_argument("signed_distance_shell requires an Opening domain");
  if (!(shell.r > op->r0 && shell.r < op->R0)) throw std::invalid_argument("shell radius must lie in (r0, R0)");
  if (!contains(domain, x)) throw GeometryError("signed_distance_shell: point outside domain");

  const Point cc{shell.center_offset, 0.0};
  const Point v = x - cc;
  const double dist = norm(v);
  const double r = shell.r;
  const auto on_arc = [&](const Point& y) { return y[0] < 0 && std::abs(y[1]) < op->R0; };

  if (dist > 0) {
    const Point proj = cc + v * (r / dist);
    if (on_arc(proj)) return r - dist;
  }
  // Nearest point is an end of the arc: where the circle meets x1 = 0 or |x2| = R0.
  double best = kInf;
  const double a = shell.center_offset;
  if (r > std::abs(a)) {
    const double y = std::sqrt(r * r - a * a);
    if (y <= op->R0) best = std::min({best, distance(x, {0, y}), distance(x, {0, -y})});
  }
  if (r > op->R0) {
    const double dx = std::sqrt(r * r - op->R0 * op->R0);
    for (double x1 : {a - dx, a + dx}) {
      if (x1 < 0) best = std::min({best, distance(x, {x1, op->R0}), distance(x, {x1, -op->R0})});
    }
  }
  if (!std::isfinite(best)) throw GeometryError("signed_distance_shell: empty shell");
  const bool positive = x[0] >= 0 || dist < r;
  return positive ? best : -best;
}

Point fold_into_box(const Box& box, const Point& x) {
  Point out = x;
  for (int i = 0; i < out.dim; ++i) out[i] = fold_into(out[i], box.lo[i], box.hi[i]);
  return out;
}

Point reflect_step(const Domain& domain, const Point& from, const Point& proposed) {
  require_dim(domain, from);
  require_dim(domain, proposed);
  if (!contains(domain, from)) throw GeometryError("reflect_step: start point outside domain");
  const auto& shape = domain.shape();
  if (std::holds_alternative<FullSpace>(shape)) return proposed;
  if (const auto* b = std::get_if<Box>(&shape)) return fold_into_box(*b, proposed);
  if (contains(domain, proposed)) return proposed;
  if (distance(from, proposed) > 0.5 * domain.feature_size())
    throw GeometryError("reflect_step: step longer than half the feature size; reduce the time step");
  if (std::holds_alternative<Opening>(shape) || std::holds_alternative<Cone>(shape))
    return fold_lines(domain, from, proposed);
  return fold_curved(domain, from, proposed);
}

double critical_radius(double nu, int d) {
  if (!(nu > 0)) throw std::invalid_argument("nu must be positive");
  return (d - 1) / nu;
}

std::vector<double> default_zgrid(int points, double zmin, double zmax) {
  if (points < 2 || !(zmin > 0) || !(zmax > zmin)) throw std::invalid_argument("bad z-grid");
  std::vector<double> z(points);
  const double a = std::log(zmin), b = std::log(zmax);
  for (int i = 0; i < points; ++i) z[i] = std::exp(a + (b - a) * i / (points - 1));
  return z;
}

double blocking_functional(double H, const ScalarFn& h, const ScalarFn& hprime, double nu, int d,
                           const std::vector<double>& zgrid) {
  if (zgrid.empty()) throw std::invalid_argument("z-grid must be nonempty");
  const double rho = critical_radius(nu, d);
  double best = kInf;
  for (double z : zgrid) {
    if (!(z > 0)) throw std::invalid_argument("z-grid must be strictly positive");
    const double hp = hprime(z);
    best = std::min(best, H + h(z) - rho * hp / std::sqrt(1.0 + hp * hp));
  }
  return best;
}

double boundary_angle_product(double H, const ScalarFn& h, const ScalarFn& hprime, double z, double r,
                              double x1) {
  const double w = H + h(z);
  const double arg = r * r - w * w;
  if (arg < 0) throw std::domain_error("boundary_angle_product: r^2 < (H + h(z))^2");
  return H + h(-x1) + hprime(-x1) * (-z - x1 - std::sqrt(arg));
}

double profile_shell_radius(double H, const ScalarFn& h, const ScalarFn& hprime, double z, double nu, int d) {
  const double hp = hprime(z);
  if (!(hp > 0)) throw std::domain_error("profile_shell_radius requires h'(z) > 0");
  return 0.5 * ((H + h(z)) * std::sqrt(1.0 + hp * hp) / hp + critical_radius(nu, d));
}

const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::Blocking: return "blocking";
    case Verdict::Invasion: return "invasion";
    default: return "ambiguous";
  }
}

Verdict opening_verdict(double r0, double R0, double nu, int d, double tol) {
  const double rho = critical_radius(nu, d);
  if (std::abs(r0 - rho) <= tol) return Verdict::Ambiguous;
  if (r0 > rho) return Verdict::Invasion;
  return r0 < R0 && rho < R0 + tol ? Verdict::Blocking : Verdict::Ambiguous;
}

Verdict cone_verdict(double r0, double alpha, double nu, int d, double tol) {
  const double bound = critical_radius(nu, d) * std::sin(alpha);
  if (std::abs(r0 - bound) <= tol) return Verdict::Ambiguous;
  return r0 < bound ? Verdict::Blocking : Verdict::Invasion;
}

Verdict profile_verdict(double H, const ScalarFn& h, const ScalarFn& hprime, double nu, int d,
                        const std::vector<double>& zgrid, double tol) {
  const double f = blocking_functional(H, h, hprime, nu, d, zgrid);
  if (std::abs(f) <= tol) return Verdict::Ambiguous;
  return f < 0 ? Verdict::Blocking : Verdict::Invasion;
}

const char* ball_kind_name(BallKind k) {
  switch (k) {
    case BallKind::Inside: return "inside";
    case BallKind::Outside: return "outside";
    case BallKind::Side: return "side";
    case BallKind::Corner: return "corner";
    default: return "hallway";
  }
}

BallClass classify_ball(const Domain& domain, const Point& center, double radius) {
  require_dim(domain, center);
  if (!(radius > 0)) throw std::invalid_argument("ball radius must be positive");
  if (std::holds_alternative<FullSpace>(domain.shape())) return {BallKind::Inside};
  if (domain.lines().empty()) throw GeometryError("ball classification needs a line decomposition");
  if (radius > domain.max_ball_radius()) throw GeometryError("ball radius exceeds the domain maximum");

  const auto& lines = domain.lines();
  double dmin = kInf;
  std::vector<int> hit;
  for (int i = 0; i < static_cast<int>(lines.size()); ++i) {
    const double dl = lines[i].distance_to(center);
    dmin = std::min(dmin, dl);
    if (dl < radius || hyperplane_extension_hit(domain, lines[i], center, radius)) hit.push_back(i);
  }
  const bool inside_center = contains(domain, center);
  if (!inside_center && dmin >= radius) return {BallKind::Outside};
  if (hit.empty()) return {BallKind::Inside};
  if (hit.size() == 1) return {BallKind::Side, hit[0]};
  if (hit.size() == 2) {
    const BallKind k = domain.lines_meet(hit[0], hit[1]) ? BallKind::Corner : BallKind::Hallway;
    return {k, hit[0], hit[1]};
  }
  throw GeometryError("ball meets more than two boundary lines");
}

std::vector<Point> reflected_preimages(const Domain& domain, const Point& w, const Point& center,
                                       double radius) {
  if (contains(domain, w)) return {w};
  const BallClass cls = classify_ball(domain, center, radius);
  if (cls.kind == BallKind::Outside || cls.kind == BallKind::Hallway || cls.kind == BallKind::Inside)
    throw GeometryError(std::string("reflected_preimages: unsupported ball class ") + ball_kind_name(cls.kind));
  const auto& lines = domain.lines();

  // z in D whose single mirror across `l` is w.
  const auto single = [&](const BoundaryLine& l, const Point& z) {
    return contains(domain, z) && l.projection_in_segment(z);
  };
  std::vector<Point> out;
  const auto add = [&](const Point& z) {
    for (const auto& y : out)
      if (distance(y, z) < 1e-12) return;
    out.push_back(z);
  };

  if (cls.kind == BallKind::Side) {
    const auto& l = lines[cls.line1];
    const Point z = l.mirror(w);
    if (single(l, z)) add(z);
    return out;
  }

  const BoundaryLine& a = lines[cls.line1];
  const BoundaryLine& b = lines[cls.line2];
  for (const BoundaryLine* l : {&a, &b}) {
    const Point z = l->mirror(w);
    if (single(*l, z)) add(z);
  }
  // Corner images: w is the mirror across H_first of zhat, zhat the mirror of z across `second`.
  for (auto [first, second] : {std::pair{&a, &b}, std::pair{&b, &a}}) {
    const Point zhat = first->mirror(w);
    const Point z = second->mirror(zhat);
    if (!contains(domain, z) || !second->projection_in_segment(z)) continue;
    if (contains(domain, zhat) || contains(domain, first->project(zhat))) continue;
    const bool is_single = (single(a, z) && distance(a.mirror(z), w) < 1e-12) ||
                           (single(b, z) && distance(b.mirror(z), w) < 1e-12);
    if (is_single) continue;
    add(z);
  }
  return out;
}

Point uniform_in_ball(const Point& center, double radius, Rng& rng) {
  Point z(center.dim);
  for (;;) {
    double r2 = 0;
    for (int i = 0; i < center.dim; ++i) {
      z[i] = 2.0 * rng.uniform() - 1.0;
      r2 += z[i] * z[i];
    }
    if (r2 < 1.0) break;
  }
  return center + z * radius;
}

Point reflected_sample(const Domain& domain, const Point& center, double radius, Rng& rng) {
  const BallClass cls = classify_ball(domain, center, radius);
  if (cls.kind == BallKind::Outside || cls.kind == BallKind::Hallway)
    throw GeometryError(std::string("reflected_sample: unsupported ball class ") + ball_kind_name(cls.kind));
  for (int attempt = 0; attempt < 16; ++attempt) {
    const Point z = uniform_in_ball(center, radius, rng);
    if (contains(domain, z)) return z;
    const auto pre = reflected_preimages(domain, z, center, radius);
    if (pre.empty()) continue;  // z on the boundary itself
    const std::size_t k = pre.size() == 1 ? 0 : static_cast<std::size_t>(rng.uniform() * pre.size());
    return pre[std::min(k, pre.size() - 1)];
  }
  throw GeometryError("reflected_sample: point has no preimage in the domain");
}

}  // namespace hz
