#include "hz/fd.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include <boost/numeric/odeint.hpp>

#if defined(__SSE__)
#include <xmmintrin.h>
#endif

namespace hz {

namespace {

constexpr std::uint8_t kEast = 1, kWest = 2, kNorth = 4, kSouth = 8;

void flush_denormals() {
#if defined(__SSE__)
  _mm_setcsr(_mm_getcsr() | 0x8040);
#endif
}

inline double reaction_term(double u, double gamma, double inv_eps2) {
  return inv_eps2 * u * (1.0 - u) * (2.0 * u - (1.0 - gamma));
}

double reference_cell(const Grid& g, const std::vector<double>& u, std::size_t k, double dt, double inv_h2,
                      double gamma, double inv_eps2, bool reaction) {
  const std::uint8_t f = g.faces[k];
  const double c = u[k];
  double lap = 0;
  if (f & kEast) lap += u[k + 1] - c;
  if (f & kWest) lap += u[k - 1] - c;
  if (f & kNorth) lap += u[k + g.nx] - c;
  if (f & kSouth) lap += u[k - g.nx] - c;
  double r = lap * inv_h2;
  if (reaction) r += reaction_term(c, gamma, inv_eps2);
  return c + dt * r;
}

void check_range(const std::vector<double>& u, double t) {
  const auto [mn, mx] = std::minmax_element(u.begin(), u.end());
  if (*mn < -1e-6 || *mx > 1.0 + 1e-6)
    throw InstabilityError("solve_ac: field left [0,1] at t=" + std::to_string(t) + "; reduce dt");
}

}  // namespace

std::size_t Grid::active_cells() const {
  return static_cast<std::size_t>(std::count(mask.begin(), mask.end(), std::uint8_t{1}));
}

std::size_t Grid::locate(const Point& x) const {
  const int i = std::clamp(static_cast<int>(std::floor((x[0] - x0) / h)), 0, nx - 1);
  const int j = dim == 1 ? 0 : std::clamp(static_cast<int>(std::floor((x[1] - y0) / h)), 0, ny - 1);
  return index(i, j);
}

double Grid::interpolate(const std::vector<double>& u, const Point& x) const {
  if (u.size() != size()) throw std::invalid_argument("interpolate: field size does not match the grid");
  // Lower-left centre of the enclosing stencil and the fractional offsets.
  auto axis = [this](double v, double origin, int n, int& lo, double& frac) {
    const double s = std::clamp((v - origin) / h - 0.5, 0.0, static_cast<double>(n - 1));
    lo = std::min(static_cast<int>(std::floor(s)), std::max(n - 2, 0));
    frac = n > 1 ? s - lo : 0.0;
  };
  int i = 0, j = 0;
  double fx = 0, fy = 0;
  axis(x[0], x0, nx, i, fx);
  if (dim == 2) axis(x[1], y0, ny, j, fy);
  double acc = 0, wsum = 0;
  for (int b = 0; b <= (dim == 2 && ny > 1 ? 1 : 0); ++b)
    for (int a = 0; a <= (nx > 1 ? 1 : 0); ++a) {
      const std::size_t k = index(i + a, j + b);
      if (!mask[k]) continue;
      const double w = (a ? fx : 1 - fx) * (b ? fy : 1 - fy);
      acc += w * u[k];
      wsum += w;
    }
  return wsum > 0 ? acc / wsum : u[locate(x)];
}

Grid make_grid(const Domain& domain, double h, const Point& lo, const Point& hi) {
  if (domain.dim() != lo.dim || lo.dim != hi.dim) throw std::invalid_argument("grid window dimension mismatch");
  if (lo.dim > 2) throw std::invalid_argument("finite differences support d = 1, 2; use the radial solver for balls");
  if (!(h > 0)) throw std::invalid_argument("grid spacing must be positive");
  Grid g;
  g.dim = lo.dim;
  g.h = h;
  g.x0 = lo[0];
  g.nx = static_cast<int>(std::lround((hi[0] - lo[0]) / h));
  if (g.dim == 2) {
    g.y0 = lo[1];
    g.ny = static_cast<int>(std::lround((hi[1] - lo[1]) / h));
  }
  if (g.nx < 2 || (g.dim == 2 && g.ny < 2)) throw std::invalid_argument("grid window too small");
  g.mask.assign(g.size(), 0);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) g.mask[g.index(i, j)] = contains(domain, g.centre(i, j)) ? 1 : 0;
  g.faces.assign(g.size(), 0);
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      const std::size_t k = g.index(i, j);
      if (!g.mask[k]) continue;
      std::uint8_t f = 0;
      if (i + 1 < g.nx && g.mask[k + 1]) f |= kEast;
      if (i > 0 && g.mask[k - 1]) f |= kWest;
      if (g.dim == 2) {
        if (j + 1 < g.ny && g.mask[k + g.nx]) f |= kNorth;
        if (j > 0 && g.mask[k - g.nx]) f |= kSouth;
      }
      g.faces[k] = f;
      const std::uint8_t all = g.dim == 2 ? (kEast | kWest | kNorth | kSouth) : (kEast | kWest);
      if (f != all) g.boundary_cells.push_back(static_cast<std::int32_t>(k));
    }
  }
  const int jlo = g.dim == 2 ? 1 : 0, jhi = g.dim == 2 ? g.ny - 1 : 1;
  for (int j = jlo; j < jhi; ++j) {
    int i = 1;
    while (i < g.nx - 1) {
      while (i < g.nx - 1 && !g.mask[g.index(i, j)]) ++i;
      const int b = i;
      while (i < g.nx - 1 && g.mask[g.index(i, j)]) ++i;
      if (i > b) g.runs.emplace_back(g.index(b, j), g.index(i, j));
    }
  }
  if (g.active_cells() == 0) throw std::invalid_argument("grid window does not meet the domain");
  return g;
}

double stable_dt(const Grid& grid, double epsilon, double nu, double safety) {
  const double gamma = nu * epsilon;
  const double diff = 2.0 * grid.dim / (grid.h * grid.h);
  return safety / (diff + (1.0 + gamma) / (epsilon * epsilon));
}

void fd_step_reference(const Grid& grid, const std::vector<double>& u, std::vector<double>& out, double dt,
                       double epsilon, double nu, bool reaction) {
  const double inv_h2 = 1.0 / (grid.h * grid.h);
  const double inv_eps2 = 1.0 / (epsilon * epsilon);
  const double gamma = nu * epsilon;
  out.assign(u.size(), 0.0);
  for (std::size_t k = 0; k < u.size(); ++k)
    if (grid.mask[k]) out[k] = reference_cell(grid, u, k, dt, inv_h2, gamma, inv_eps2, reaction);
}

void fd_step_parallel(const Grid& grid, const std::vector<double>& u, std::vector<double>& out, double dt,
                      double epsilon, double nu, bool reaction) {
  const double inv_h2 = 1.0 / (grid.h * grid.h);
  const double inv_eps2 = reaction ? 1.0 / (epsilon * epsilon) : 0.0;
  const double gamma = nu * epsilon;
  const int nx = grid.nx;
  out.resize(u.size(), 0.0);
  const double* __restrict uu = u.data();
  double* __restrict oo = out.data();
  const auto sweep = [&](std::size_t k0, std::size_t k1, std::size_t stride) {
    for (std::size_t k = k0; k < k1; ++k) {
      const double c = uu[k];
      const double nb = stride ? uu[k + stride] + uu[k - stride] + uu[k + 1] + uu[k - 1] - 4.0 * c
                               : uu[k + 1] + uu[k - 1] - 2.0 * c;
      oo[k] = c + dt * (nb * inv_h2 + inv_eps2 * c * (1.0 - c) * (2.0 * c - (1.0 - gamma)));
    }
  };
  // Runs never include the outer ring of the window, so all stencil reads are in range.
  const long nruns = static_cast<long>(grid.runs.size());
  const std::size_t stride = grid.dim == 2 ? static_cast<std::size_t>(nx) : 0;
#pragma omp parallel for schedule(static)
  for (long r = 0; r < nruns; ++r) sweep(grid.runs[r].first, grid.runs[r].second, stride);
  const auto& bc = grid.boundary_cells;
  const long nb = static_cast<long>(bc.size());
#pragma omp parallel for schedule(static)
  for (long b = 0; b < nb; ++b) {
    const std::size_t k = static_cast<std::size_t>(bc[b]);
    oo[k] = reference_cell(grid, u, k, dt, inv_h2, gamma, 1.0 / (epsilon * epsilon), reaction);
  }
}

double total_mass(const Grid& grid, const std::vector<double>& u) {
  double s = 0;
  for (std::size_t k = 0; k < u.size(); ++k)
    if (grid.mask[k]) s += u[k];
  return s * std::pow(grid.h, grid.dim);
}

FdResult solve_ac(const Grid& grid, double epsilon, double nu, const InitialCondition& p0, double T,
                  const std::vector<double>& snapshot_times, const FdOptions& opt) {
  if (!(epsilon > 0 && nu >= 0)) throw std::invalid_argument("solve_ac: bad epsilon/nu");
  if (grid.h > epsilon / 4.0 + 1e-15) throw std::invalid_argument("solve_ac: grid spacing must be <= epsilon/4");
  const double dt_max = stable_dt(grid, epsilon, nu, 1.0);
  const double dt = opt.dt > 0 ? opt.dt : stable_dt(grid, epsilon, nu);
  if (dt > dt_max * (1.0 + 1e-12)) throw std::invalid_argument("solve_ac: dt violates the explicit stability bound");

  flush_denormals();
#pragma omp parallel
  flush_denormals();

  std::vector<double> u(grid.size(), 0.0), next(grid.size(), 0.0);
  for (int j = 0; j < grid.ny; ++j)
    for (int i = 0; i < grid.nx; ++i) {
      const std::size_t k = grid.index(i, j);
      if (grid.mask[k]) u[k] = std::clamp(p0(grid.centre(i, j)), 0.0, 1.0);
    }

  std::vector<double> targets = snapshot_times;
  std::sort(targets.begin(), targets.end());
  FdResult res;
  std::size_t next_snap = 0;
  double t = 0;
  const auto take_snapshots = [&] {
    while (next_snap < targets.size() && targets[next_snap] <= t + 1e-12) {
      res.snapshots.push_back({targets[next_snap], u});
      ++next_snap;
    }
  };
  take_snapshots();
  while (t < T - 1e-12) {
    double h = std::min(dt, T - t);
    if (next_snap < targets.size()) h = std::min(h, targets[next_snap] - t);
    if (opt.parallel) fd_step_parallel(grid, u, next, h, epsilon, nu, opt.reaction);
    else fd_step_reference(grid, u, next, h, epsilon, nu, opt.reaction);
    u.swap(next);
    t += h;
    ++res.steps;
    take_snapshots();
    if (res.steps % std::max(1, opt.observe_every) == 0) {
      check_range(u, t);
      if (opt.observer && !opt.observer(t, u)) {
        res.stopped_early = true;
        break;
      }
    }
  }
  check_range(u, t);
  for (double& v : u) v = std::clamp(v, 0.0, 1.0);
  for (auto& s : res.snapshots)
    for (double& v : s.u) v = std::clamp(v, 0.0, 1.0);
  res.final_time = t;
  if (res.snapshots.empty() || res.snapshots.back().time < t) res.snapshots.push_back({t, u});
  return res;
}

double radial_stable_dt(const RadialGrid& grid, double epsilon, double nu, double safety) {
  const double gamma = nu * epsilon;
  double worst = 0;
  for (int i = 0; i < grid.n; ++i) {
    const double rl = i * grid.h, rr = (i + 1) * grid.h;
    const double vol = (std::pow(rr, grid.d) - std::pow(rl, grid.d)) / grid.d;
    const double ce = i + 1 < grid.n ? std::pow(rr, grid.d - 1) / (grid.h * vol) : 0.0;
    const double cw = i > 0 ? std::pow(rl, grid.d - 1) / (grid.h * vol) : 0.0;
    worst = std::max(worst, ce + cw);
  }
  return safety / (worst + (1.0 + gamma) / (epsilon * epsilon));
}

RadialResult solve_ac_radial(const RadialGrid& grid, double epsilon, double nu, const std::function<double(double)>& p0,
                             double T, const std::vector<double>& snapshot_times, double dt) {
  if (grid.n < 2 || !(grid.h > 0) || grid.d < 1 || grid.d > 3) throw std::invalid_argument("bad radial grid");
  if (grid.h > epsilon / 4.0 + 1e-15) throw std::invalid_argument("radial grid spacing must be <= epsilon/4");
  const double dt_max = radial_stable_dt(grid, epsilon, nu, 1.0);
  if (dt <= 0) dt = radial_stable_dt(grid, epsilon, nu);
  if (dt > dt_max * (1.0 + 1e-12)) throw std::invalid_argument("radial dt violates the stability bound");
  flush_denormals();

  const int n = grid.n;
  std::vector<double> ce(n, 0.0), cw(n, 0.0), u(n), next(n);
  for (int i = 0; i < n; ++i) {
    const double rl = i * grid.h, rr = (i + 1) * grid.h;
    const double vol = (std::pow(rr, grid.d) - std::pow(rl, grid.d)) / grid.d;
    if (i + 1 < n) ce[i] = std::pow(rr, grid.d - 1) / (grid.h * vol);
    if (i > 0) cw[i] = std::pow(rl, grid.d - 1) / (grid.h * vol);
    u[i] = std::clamp(p0(grid.centre(i)), 0.0, 1.0);
  }
  const double gamma = nu * epsilon, inv_eps2 = 1.0 / (epsilon * epsilon);
  std::vector<double> targets = snapshot_times;
  std::sort(targets.begin(), targets.end());
  RadialResult res;
  std::size_t next_snap = 0;
  double t = 0;
  const auto take = [&] {
    while (next_snap < targets.size() && targets[next_snap] <= t + 1e-12) res.snapshots.push_back({targets[next_snap++], u});
  };
  take();
  long steps = 0;
  while (t < T - 1e-12) {
    double h = std::min(dt, T - t);
    if (next_snap < targets.size()) h = std::min(h, targets[next_snap] - t);
    for (int i = 0; i < n; ++i) {
      const double c = u[i];
      double lap = 0;
      if (i + 1 < n) lap += ce[i] * (u[i + 1] - c);
      if (i > 0) lap += cw[i] * (u[i - 1] - c);
      next[i] = c + h * (lap + reaction_term(c, gamma, inv_eps2));
    }
    u.swap(next);
    t += h;
    if (++steps % 1000 == 0) check_range(u, t);
    take();
  }
  check_range(u, t);
  for (auto& s : res.snapshots)
    for (double& v : s.u) v = std::clamp(v, 0.0, 1.0);
  return res;
}

double interface_radius(const RadialGrid& grid, const FieldSnapshot& snap, double level) {
  const auto& u = snap.u;
  for (int i = 0; i + 1 < static_cast<int>(u.size()); ++i) {
    const double a = u[i] - level, b = u[i + 1] - level;
    if (a == 0) return grid.centre(i);
    if ((a > 0) != (b > 0) || b == 0) {
      const double s = a / (a - b);
      return grid.centre(i) + s * grid.h;
    }
  }
  throw std::runtime_error("interface_radius: no crossing");
}

FlowResult flow_ode_radius(double rho0, double nu, int d, double t, double rtol) {
  if (!(rho0 > 0)) throw std::invalid_argument("rho0 must be positive");
  if (!(t >= 0)) throw std::invalid_argument("t must be nonnegative");
  namespace ode = boost::numeric::odeint;
  using State = double;
  const double c = d - 1;
  const auto rhs = [&](const State& r, State& drdt, double) { drdt = nu - c / r; };
  auto stepper = ode::make_controlled(rtol * 1e-3, rtol, ode::runge_kutta_dopri5<State>());
  FlowResult out;
  State r = rho0;
  double now = 0;
  double dt = std::min(1e-3, std::max(t, 1e-12));
  const double floor_r = 1e-6 * rho0;
  while (now < t) {
    dt = std::min(dt, t - now);
    State trial = r;
    double tn = now, dtn = dt;
    if (stepper.try_step(rhs, trial, tn, dtn) == ode::fail) {
      dt = dtn;
      continue;
    }
    if (trial <= floor_r || !std::isfinite(trial)) {
      // Near extinction dR/dt ~ -c/R, so the remaining time is about R^2 / (2c).
      if (dt > 1e-14) {
        dt *= 0.25;
        continue;
      }
      out.extinct = true;
      out.extinction_time = now + r * r / (2.0 * c);
      out.radius = 0;
      return out;
    }
    r = trial;
    now = tn;
    dt = dtn;
  }
  out.radius = r;
  return out;
}

void write_snapshot_csv(const std::string& path, const Grid& grid, const FieldSnapshot& snap) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path);
  f.precision(10);
  f << (grid.dim == 1 ? "t,x,u\n" : "t,x,y,u\n");
  for (int j = 0; j < grid.ny; ++j)
    for (int i = 0; i < grid.nx; ++i) {
      const std::size_t k = grid.index(i, j);
      if (!grid.mask[k]) continue;
      f << snap.time << ',' << grid.xc(i);
      if (grid.dim == 2) f << ',' << grid.yc(j);
      f << ',' << snap.u[k] << '\n';
    }
}

void write_heatmap_pgm(const std::string& path, const Grid& grid, const FieldSnapshot& snap) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << "P5\n" << grid.nx << ' ' << grid.ny << "\n255\n";
  for (int j = grid.ny - 1; j >= 0; --j)
    for (int i = 0; i < grid.nx; ++i) {
      const std::size_t k = grid.index(i, j);
      const double v = grid.mask[k] ? std::clamp(snap.u[k], 0.0, 1.0) : 0.0;
      f.put(static_cast<char>(static_cast<unsigned char>(std::lround(v * 255.0))));
    }
}

}  // namespace hz
