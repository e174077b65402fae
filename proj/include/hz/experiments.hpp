#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hz/dual.hpp"
#include "hz/fd.hpp"
#include "hz/geometry.hpp"
#include "hz/slfvs.hpp"
#include "hz/voting.hpp"

namespace hz {

// Monte Carlo voting estimate against the exact 1-d travelling wave.
struct WaveRow {
  double x = 0, t = 0, mean = 0, stderr_ = 0, exact = 0, z = 0;
};
struct WaveReport {
  std::vector<WaveRow> rows;
  double max_abs_z = 0;
  double max_abs_err = 0;
  bool pass = false;
};
// zero_initial replaces the wave by p0 = 0 (exact answer 0).
WaveReport mc_vs_wave(double epsilon, double nu, double t, const std::vector<double>& xs, long replicates,
                      std::uint64_t seed, bool zero_initial = false);

// Monte Carlo voting estimate against the finite-difference oracle in a rectangle.
struct ProbeRow {
  Point x;
  double mc = 0, stderr_ = 0, fd = 0, z = 0;
};
struct McFdReport {
  std::vector<ProbeRow> rows;
  double max_abs_z = 0;
  double max_stderr = 0;
  bool pass = false;
};
McFdReport mc_vs_fd_2d(double epsilon, double nu, double t, const Point& lo, const Point& hi,
                       const std::vector<Point>& probes, long replicates, std::uint64_t seed, double h);

// FD blocking / invasion run with an analytic prediction.
struct BlockingSetup {
  Domain domain = Domain::full_space(2);
  Verdict predicted = Verdict::Ambiguous;
  double analytic_value = 0;  // r0 - rho*, r0 - rho* sin(alpha) or the blocking functional
  double epsilon = 0, nu = 0;
  double T = 0;
  double h = 0;  // 0 selects epsilon/4
  Point lo, hi;  // FD window
  std::vector<Point> probes;
  double block_level = 0.05;
  double invade_level = 0.9;
  int observe_every = 500;
};
struct BlockingReport {
  Verdict predicted = Verdict::Ambiguous;
  std::string observed;  // "blocking", "invasion" or "undetermined"
  double analytic_value = 0;
  double max_probe = 0;
  double min_probe_final = 0;
  double invasion_time = -1;
  double final_time = 0;
  long steps = 0;
  bool consistent = false;
  Grid grid;
  FieldSnapshot last;
};
BlockingReport run_blocking(const BlockingSetup& setup);

// Standard Opening setups used by the blocking experiments.
BlockingSetup opening_setup(double r0, double R0, double epsilon, double nu, double T);

// Radial FD interface against the flow ODE.
struct FlowRow {
  double rho0 = 0, t = 0, fd = 0, ode = 0, err = 0;
  bool extinct = false;
};
struct FlowReport {
  std::vector<FlowRow> rows;
  double rho_star = 0;
  double worst = 0;  // max |fd - ode| / rho*
  bool pass = false;
};
FlowReport radial_flow_check(double epsilon, double nu, int d, const std::vector<double>& rho_factors,
                             const std::vector<double>& times, double tolerance = 0.05);

// Reflected sampling against the fold density.
struct ReflectReport {
  std::string kind;
  long samples = 0;
  double chi2 = 0;
  double dof = 0;
  double pvalue = 0;
  double max_roundtrip = 0;
  bool pass = false;
};
// Exact probability of each bin of a square lattice of spacing `bin` under reflected sampling,
// by midpoint quadrature of the fold density with `sub` points per bin side.
std::vector<double> fold_bin_probabilities(const Domain& domain, const Point& center, double radius,
                                           const Point& origin, double bin, int nbx, int nby, int sub);
ReflectReport reflect_sample_test(const Domain& domain, const Point& center, double radius, long samples,
                                  std::uint64_t seed, double alpha = 0.01);

// Single-lineage law of the dual.
struct LineageReport {
  double rate_theory = 0, rate_empirical = 0, rate_relerr = 0;
  double sigma2 = 0;
  double ks = 0;
  bool pass = false;
};
LineageReport lineage_law_check(const ScalingRegime& regime, const RadiusMeasure& mu, double t, long replicates,
                                std::uint64_t seed);

// Strong/weak ladders of the dual.
struct LadderRow {
  double n = 0;
  double value = 0;
  double stderr_ = 0;
  long replicates = 0;
  double mean_particles = 0;
};
struct DichotomyReport {
  std::vector<LadderRow> strong;
  std::vector<LadderRow> weak;
  double weak_slope = 0;
  double weak_target = 0;
  bool strong_decreasing = false;
  bool weak_slope_ok = false;
  bool pass = false;
};
struct DichotomySetup {
  std::vector<double> ladder{1e3, 1e4, 1e5};
  double strong_beta = 0.45;
  double strong_gamma = 0.5;
  double strong_t = 0.1;
  long strong_replicates = 20000;
  double weak_beta = 0.2;
  double weak_u = 1.0;
  double weak_nu = 1.0;
  double weak_t = 0.05;
  long weak_replicates = 100000;
  double slope_tolerance = 0.3;
  RadiusMeasure mu = RadiusMeasure::point_mass(1.0);
};
ScalingRegime strong_ladder_regime(double n, double beta, double gamma);
double probability_many(const SlfvParams& params, double t, long replicates, std::uint64_t seed, double* stderr_out,
                        double* mean_particles = nullptr);
double probability_coalescence(const SlfvParams& params, double t, long replicates, std::uint64_t seed,
                               double* stderr_out, double* mean_particles = nullptr);
DichotomyReport regime_dichotomy(const DichotomySetup& setup, std::uint64_t seed);

// Sibling pairs: outcome fractions along a ladder.
struct PairRow {
  double n = 0, Rn = 0, Ln = 0;
  long coalesced = 0, diverged = 0, overshoot = 0, replicates = 0;
  double mean_inner = 0;
  double not_coalesced() const { return static_cast<double>(diverged + overshoot) / static_cast<double>(replicates); }
};
PairRow pair_outcomes(const ScalingRegime& regime, const RadiusMeasure& mu, double c, long replicates,
                      std::uint64_t seed);

// Forward SLFVS against dual voting on a torus.
struct DualityRow {
  std::string name;
  double forward = 0, forward_se = 0, dual = 0, dual_se = 0, z = 0;
};
struct DualityReport {
  std::vector<DualityRow> rows;
  bool pass = false;
};
struct DualitySetup {
  SlfvParams params;
  double side = 1.0;
  double h = 0.02;
  double t = 0.5;
  long forward_runs = 4000;
  long dual_replicates = 40000;
};
DualityReport duality_check(const DualitySetup& setup, std::uint64_t seed);

// Noisy circles: dual voting from the indicator of B(0, rho*).
struct CircleRow {
  double radius = 0, estimate = 0, stderr_ = 0, prediction = 0;
};
struct CircleReport {
  std::vector<CircleRow> rows;
  double sigma2 = 0;
  double rho_star = 0;
  bool pass = false;
};
// P_x[|W(sigma^2 t)| <= rho] for W with generator Laplacian, via the noncentral chi-square law.
double heat_ball_probability(double x_norm, double rho, double sigma2, double t, int d);
CircleReport noisy_circles(const ScalingRegime& regime, const RadiusMeasure& mu, double t,
                           const std::vector<double>& radii, long replicates, std::uint64_t seed);

}  // namespace hz
