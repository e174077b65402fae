#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "hz/fd.hpp"
#include "hz/geometry.hpp"
#include "hz/rng.hpp"
#include "hz/voting.hpp"

namespace hz {

// Finite measure on (0, R] stored as atoms; a density is discretized by the midpoint rule.
struct RadiusMeasure {
  std::vector<double> radii;
  std::vector<double> weights;

  static RadiusMeasure point_mass(double R, double mass = 1.0);
  static RadiusMeasure density(const std::function<double(double)>& f, double R, int bins = 64);

  double total() const;
  double max_radius() const;
  // sum of w * r^k
  double moment(double k) const;
  RadiusMeasure scaled(double factor) const;
  // r with probability proportional to w * r^d
  double sample_size_biased(Rng& rng, int d) const;
  double sample(Rng& rng) const;
};

struct SlfvParams {
  double u = 0;      // impact
  double gamma = 0;  // asymmetry
  double s = 0;      // selection; 0 gives the neutral process
  RadiusMeasure mu;
  // Events per unit time per unit volume per unit mass of mu.
  double intensity = 1.0;

  double selective_probability() const { return (1.0 + gamma) * s; }
  void validate() const;
};

enum class RegimeKind { Weak, Strong };

struct ScalingRegime {
  RegimeKind kind = RegimeKind::Weak;
  double n = 1;
  double beta = 0;
  int d = 2;
  // weak
  double eps_n = 0;
  double u = 1;
  double nu = 1;
  // strong
  double un = 0;
  double sn = 0;
  double gamman = 0;

  static ScalingRegime weak(double n, double beta, double eps_n, double u, double nu, int d);
  static ScalingRegime strong(double n, double beta, double u_n, double s_n, double gamma_n, int d);
  // Weak regime with eps_n = (log n)^(-1/4).
  static ScalingRegime weak_default(double n, double beta, double u, double nu, int d);

  double u_n() const;
  double s_n() const;
  double gamma_n() const;
  double u_hat() const { return u_n() * std::pow(n, 1.0 - 2.0 * beta); }
  double chi_n() const { return kind == RegimeKind::Strong ? 1.0 / u_hat() : 1.0; }
  double radius_scale() const { return std::pow(n, -beta); }
  // Time rate n*chi_n times the volume factor n^(d beta).
  double event_intensity() const { return n * chi_n() * std::pow(n, d * beta); }

  // Parameters of the rescaled process with radii of mu shrunk by n^-beta.
  SlfvParams params(const RadiusMeasure& mu) const;
};

struct RegimeReport {
  bool ok = true;
  std::string clause;
  double ratio_plain = 0;  // s_n n^(2 beta)
  double ratio_log = 0;    // s_n n^(2 beta) / (u_n log n)
  std::vector<std::string> warnings;
  std::string text() const;
};

RegimeReport validate_regime(const ScalingRegime& regime);
// Checks eps_n -> 0 and (log n)^(1/2) eps_n -> infinity along an increasing n-ladder.
RegimeReport validate_ladder(const std::vector<ScalingRegime>& ladder);

// Frequency of allele a on the cells of a grid. On a torus the grid window is the fundamental cell.
struct FrequencyField {
  Grid grid;
  Domain domain = Domain::full_space(2);
  bool torus = false;
  std::vector<double> w;

  std::size_t cell_of(const Point& z) const;
  double value_at(const Point& z) const { return w[cell_of(z)]; }
  double mean() const;
  // Riemann sum of psi * w over in-domain cells.
  double integrate(const std::function<double(const Point&)>& psi) const;
  Point wrap(const Point& z) const;
  // Displacement a - b, minimal image on a torus.
  Point delta(const Point& a, const Point& b) const;
  Point lo() const;
  Point hi() const;
};

FrequencyField make_field(const Domain& domain, double h, const Point& lo, const Point& hi, const InitialCondition& w0);
FrequencyField make_torus_field(double h, const Point& lo, const Point& hi, const InitialCondition& w0);

struct Event {
  Point center;
  double radius = 0;
};

struct EventOutcome {
  bool applied = false;
  bool selective = false;
  int offspring_type = 0;  // 1 = a
  int cells = 0;
};

// Parental location for an event ball: uniform on a torus or in free space, folded in a box,
// reflected sampling on line domains.
Point sample_parent(const FrequencyField& field, const Event& ev, Rng& rng);

EventOutcome step_event(FrequencyField& field, const Event& ev, const SlfvParams& params, Rng& rng);

// Mean value in a ball of constant frequency p after one event.
double expected_event_value(double p, double u, double gamma, double s);

struct SlfvSnapshot {
  double time = 0;
  std::vector<double> w;
};

struct SlfvRunOptions {
  std::size_t event_budget = 50'000'000;
  // Event centres are drawn in the window grown by this margin; negative selects the largest radius.
  double margin = -1;
};

struct SlfvRun {
  std::vector<SlfvSnapshot> snapshots;
  long events = 0;
  long applied = 0;
};

SlfvRun run_slfvs(FrequencyField& field, double T, const std::vector<double>& snapshot_times,
                  const SlfvParams& params, std::uint64_t seed, const SlfvRunOptions& opt = {});

}  // namespace hz
