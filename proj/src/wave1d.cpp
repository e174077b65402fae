#include "hz/wave1d.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hz {

double wave_profile(double x, double t, double epsilon, double nu) {
  if (!(epsilon > 0)) throw std::invalid_argument("epsilon must be positive");
  const double a = (x + nu * t) / epsilon;
  if (a >= 0) return 1.0 / (1.0 + std::exp(-a));
  const double e = std::exp(a);
  return e / (1.0 + e);
}

double wave_speed(double sigma, double s, double gamma) {
  if (!(s > 0)) throw std::invalid_argument("selection must be positive");
  return gamma * sigma * std::sqrt(s / 2.0);
}

double wave_residual(double x, double t, double epsilon, double nu) {
  const double p = wave_profile(x, t, epsilon, nu);
  const double q = p * (1.0 - p);
  const double ut = nu * q / epsilon;
  const double uxx = q * (1.0 - 2.0 * p) / (epsilon * epsilon);
  const double react = q * (2.0 * p - (1.0 - nu * epsilon)) / (epsilon * epsilon);
  return ut - uxx - react;
}

DecayReport check_decay(int k, double epsilon, double nu, double t, double epsilon_max, int points) {
  if (k < 0) throw std::invalid_argument("k must be nonnegative");
  if (!(epsilon > 0 && epsilon <= epsilon_max)) throw std::invalid_argument("epsilon above the decay threshold");
  if (points < 3) throw std::invalid_argument("need at least three grid points");
  const double band = k * epsilon * std::abs(std::log(epsilon));
  const double ek = std::pow(epsilon, k);
  const double span = band + 20.0 * epsilon;
  DecayReport rep;
  rep.worst_margin = 1.0;
  for (int i = 0; i < points; ++i) {
    const double z = -span + 2.0 * span * i / (points - 1) - nu * t;
    const double p = wave_profile(z, t, epsilon, nu);
    if (z >= band - nu * t) {
      rep.worst_margin = std::min(rep.worst_margin, p - (1.0 - ek));
      ++rep.points;
    }
    if (z <= -band - nu * t) {
      rep.worst_margin = std::min(rep.worst_margin, ek - p);
      ++rep.points;
    }
  }
  // Include the two threshold points themselves.
  rep.worst_margin = std::min(rep.worst_margin, wave_profile(band - nu * t, t, epsilon, nu) - (1.0 - ek));
  rep.worst_margin = std::min(rep.worst_margin, ek - wave_profile(-band - nu * t, t, epsilon, nu));
  rep.points += 2;
  rep.pass = rep.worst_margin >= 0;
  return rep;
}

SlopeReport check_slope(double z, double w, double t, double epsilon, double nu) {
  SlopeReport rep;
  const double gamma = nu * epsilon;
  const double pz = wave_profile(z, t, epsilon, nu);
  rep.lhs = std::abs(pz - wave_profile(w, t, epsilon, nu));
  rep.rhs = std::abs(z - w) / (48.0 * epsilon * std::abs(std::log(epsilon)));
  if (std::abs(z - w) > epsilon) rep.reason = "|z - w| > epsilon";
  else if (std::abs(pz - 0.5) > (5.0 + gamma) / 12.0) rep.reason = "profile at z too far from 1/2";
  else if (!(epsilon < std::min(1.0 / (2.0 * nu), std::exp(-36.0 / 23.0)))) rep.reason = "epsilon too large";
  rep.admissible = rep.reason.empty();
  rep.holds = rep.admissible && rep.lhs >= rep.rhs;
  return rep;
}

}  // namespace hz
