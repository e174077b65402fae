#pragma once

#include <string>

namespace hz {

// Logistic travelling wave 1 / (exp(-(x + nu t)/eps) + 1).
double wave_profile(double x, double t, double epsilon, double nu);

double wave_speed(double sigma, double s, double gamma);

// Residual of u_t - u_xx - eps^-2 u(1-u)(2u-(1-nu eps)) at the profile, from closed-form derivatives.
double wave_residual(double x, double t, double epsilon, double nu);

struct DecayReport {
  bool pass = false;
  double worst_margin = 0;
  int points = 0;
};

DecayReport check_decay(int k, double epsilon, double nu, double t, double epsilon_max = 0.2, int points = 4001);

struct SlopeReport {
  bool admissible = false;
  bool holds = false;
  double lhs = 0, rhs = 0;
  std::string reason;
};

SlopeReport check_slope(double z, double w, double t, double epsilon, double nu);

}  // namespace hz
