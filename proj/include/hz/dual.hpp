#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hz/geometry.hpp"
#include "hz/rng.hpp"
#include "hz/slfvs.hpp"
#include "hz/voting.hpp"

namespace hz {

// n u_n chi_n V_1 * int r^d mu(dr), with mu in unscaled radii.
double lineage_jump_rate(const ScalingRegime& regime, const RadiusMeasure& mu);

// Volume of B(0,r) intersected with B(z,r) for |z| = dist.
double lens_volume(int d, double r, double dist);

// int |z|^2 V_r(0,z) / V_r dz by adaptive quadrature of the radial integral.
double lens_second_moment(int d, double r);

// (u_n n chi_n) / (n^(2 beta) 2d) * int int |z|^2 V_r(0,z)/V_r dz mu(dr).
// A scaled lineage is close to W(sigma^2 t) with W a Brownian motion with generator Laplacian,
// so each coordinate of its displacement has variance 2 sigma^2 t.
double diffusion_constant(const ScalingRegime& regime, const RadiusMeasure& mu);

// One lineage jump for radius measure mu (radii as used by the simulation).
Point sample_jump(const Point& from, const RadiusMeasure& mu, Rng& rng);

enum class DualEventKind { Merge, Selective };

struct DualEvent {
  double time = 0;
  DualEventKind kind = DualEventKind::Merge;
  std::vector<int> marked;     // ids, ascending
  std::vector<int> offspring;  // Merge: the smallest marked id; Selective: three new ids
  std::vector<Point> offspring_pos;
};

struct DualParticle {
  int id = 0;
  Point pos;
  std::vector<std::uint8_t> label;  // Ulam-Harris word
};

// Event record of the dual. Neutral events that move a single lineage are not stored
// (the vote is carried along unchanged); they are counted in `jumps`.
struct DualHistory {
  Point start;
  double horizon = 0;
  std::vector<DualEvent> events;
  std::vector<DualParticle> alive;  // particles at the horizon
  std::vector<std::pair<double, int>> count_path;  // (time, N) after each change, starting at (0,1)
  long jumps = 0;
  long neutral_events = 0;
  long selective_events = 0;
  int next_id = 1;

  int final_count() const { return static_cast<int>(alive.size()); }
  int max_count() const;
  bool any_coalescence() const;
};

enum class DualMode {
  Thinned,      // events proposed from each particle's neighbourhood
  Homogeneous,  // events over the whole torus (test mode)
};

struct DualOptions {
  DualMode mode = DualMode::Thinned;
  std::size_t particle_budget = 20000;
  long event_budget = 100'000'000;
  // Optional torus (periodic window) and lattice snapping for comparison with a gridded forward process.
  bool torus = false;
  Point torus_lo, torus_hi;
  double snap = 0;  // cell size; positions become cell centres when > 0
  // Domain with boundary; offspring use reflected sampling. Full space when unset.
  const Domain* domain = nullptr;
};

// Dual of the process with parameters `params` (radii and intensity already in simulation units).
DualHistory simulate_dual(const Point& x, double t, const SlfvParams& params, std::uint64_t key,
                          const DualOptions& opt = {});

// Root vote: leaves vote Bernoulli(p), merges copy, selective events apply the biased majority.
int vote_on_dual(const DualHistory& history, const InitialCondition& p, double gamma, Rng& rng);

enum class ExcursionOutcome { Coalesced, Diverged, Overshoot };
const char* outcome_name(ExcursionOutcome o);

struct Excursion {
  bool inner = true;
  double start = 0, end = 0;
  bool complete = false;
};

struct ExcursionRecord {
  std::vector<Excursion> intervals;
  ExcursionOutcome outcome = ExcursionOutcome::Overshoot;
  double tau = 0;
  int inner_completed = 0;
  int outer_completed = 0;
};

// Separation of a pair of lineages, sampled after each event that moves either one.
struct PairPath {
  std::vector<double> times;
  std::vector<double> separation;
  bool coalesced = false;
  double coalescence_time = 0;
};

inline double horizon_length(double n, double c) { return std::pow(std::log(n), -c); }

// Alternating excursions at 5 R_n (up) and 4 R_n (down); outcome at the first of
// coalescence, separation >= L_n and time L_n, with L_n = (log n)^-c.
ExcursionRecord excursion_stats(const PairPath& path, double Rn, double n, double c = 3.0);

// Pair of sibling lineages placed uniformly in one event ball, followed under neutral
// events until coalescence or until time/separation reaches `horizon`.
PairPath simulate_pair(const SlfvParams& params, double horizon, std::uint64_t key, int d = 2);

}  // namespace hz
