#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "hz/geometry.hpp"
#include "hz/voting.hpp"

namespace hz {

class InstabilityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Uniform cell-centred grid over a window of a 1-d or 2-d domain. Cells whose
// centre lies outside the domain are masked; the window edges and masked
// neighbours act as zero-flux faces. In 1-d, ny = 1.
struct Grid {
  int nx = 0, ny = 1;
  double h = 0;
  double x0 = 0, y0 = 0;  // lower-left corner of the window
  int dim = 1;
  std::vector<std::uint8_t> mask;
  // Per-cell bitmask of open faces: 1 east, 2 west, 4 north, 8 south.
  std::vector<std::uint8_t> faces;
  // In-domain cells with at least one closed face.
  std::vector<std::int32_t> boundary_cells;
  // Half-open index ranges of in-domain cells per row, excluding the window's outer ring.
  std::vector<std::pair<std::size_t, std::size_t>> runs;

  std::size_t size() const { return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny); }
  std::size_t index(int i, int j) const { return static_cast<std::size_t>(j) * nx + i; }
  double xc(int i) const { return x0 + (i + 0.5) * h; }
  double yc(int j) const { return y0 + (j + 0.5) * h; }
  Point centre(int i, int j) const { return dim == 1 ? Point{xc(i)} : Point{xc(i), yc(j)}; }
  std::size_t active_cells() const;
  // Value at the cell containing x (nearest in-window cell).
  std::size_t locate(const Point& x) const;
  // Bilinear interpolation between cell centres; masked cells are dropped and
  // the weights renormalised. Clamped at the window edge.
  double interpolate(const std::vector<double>& u, const Point& x) const;
};

Grid make_grid(const Domain& domain, double h, const Point& lo, const Point& hi);

struct FieldSnapshot {
  double time = 0;
  std::vector<double> u;  // one value per grid cell; masked cells hold 0
};

struct FdOptions {
  double dt = 0;  // 0 selects the default stable step
  bool reaction = true;
  bool parallel = true;
  // Optional observer called every `observe_every` steps; returning false stops the run.
  std::function<bool(double, const std::vector<double>&)> observer;
  int observe_every = 100;
};

// Largest step keeping the explicit scheme monotone, times `safety`.
double stable_dt(const Grid& grid, double epsilon, double nu, double safety = 0.9);

struct FdResult {
  std::vector<FieldSnapshot> snapshots;
  double final_time = 0;
  long steps = 0;
  bool stopped_early = false;
};

FdResult solve_ac(const Grid& grid, double epsilon, double nu, const InitialCondition& p0, double T,
                  const std::vector<double>& snapshot_times, const FdOptions& opt = {});

// One explicit Euler step: serial reference (per-cell face tests) and the
// OpenMP kernel (branch-free interior sweep plus a boundary correction pass).
void fd_step_reference(const Grid& grid, const std::vector<double>& u, std::vector<double>& out, double dt,
                       double epsilon, double nu, bool reaction);
void fd_step_parallel(const Grid& grid, const std::vector<double>& u, std::vector<double>& out, double dt,
                      double epsilon, double nu, bool reaction);

double total_mass(const Grid& grid, const std::vector<double>& u);

// Radially symmetric solver on [0, rmax] in dimension d, finite-volume in r.
struct RadialGrid {
  int n = 0;
  double h = 0;
  int d = 2;
  double centre(int i) const { return (i + 0.5) * h; }
};

struct RadialResult {
  std::vector<FieldSnapshot> snapshots;
};

double radial_stable_dt(const RadialGrid& grid, double epsilon, double nu, double safety = 0.9);

RadialResult solve_ac_radial(const RadialGrid& grid, double epsilon, double nu, const std::function<double(double)>& p0,
                             double T, const std::vector<double>& snapshot_times, double dt = 0);

// Radius where the radial profile first crosses `level` moving outward.
double interface_radius(const RadialGrid& grid, const FieldSnapshot& snap, double level);

struct FlowResult {
  double radius = 0;
  bool extinct = false;
  double extinction_time = 0;
};

// dR/dt = nu - (d-1)/R by adaptive Runge-Kutta; R = 0 is absorbing.
FlowResult flow_ode_radius(double rho0, double nu, int d, double t, double rtol = 1e-8);

// CSV (x[,y],u) for in-domain cells and an 8-bit PGM heatmap.
void write_snapshot_csv(const std::string& path, const Grid& grid, const FieldSnapshot& snap);
void write_heatmap_pgm(const std::string& path, const Grid& grid, const FieldSnapshot& snap);

}  // namespace hz
