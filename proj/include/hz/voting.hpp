#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "hz/bbm.hpp"
#include "hz/geometry.hpp"

namespace hz {

double tie_probability(double gamma);

// Probability that the parent votes 1 given independent child probabilities.
double g3(double p1, double p2, double p3, double gamma);
double g(double p, double gamma);

enum class Direction { Up, Down };

inline constexpr long kIterationCap = 1'000'000;

long iterations_to_threshold(double p0, double gamma, double target, Direction dir, long cap = kIterationCap);

// (g((1+gamma)/2 + delta) - (1+gamma)/2) / delta.
double phase_one_ratio(double gamma, double delta);
// Largest delta for which the phase-one growth bound is claimed.
double phase_one_limit(double gamma);

struct InitialCondition {
  std::string name;
  std::function<double(const Point&)> fn;
  double operator()(const Point& x) const { return fn(x); }
};

InitialCondition constant_condition(double c);
InitialCondition heaviside_condition();
InitialCondition ball_indicator(double rho);
InitialCondition wave_condition(double epsilon, double nu);
// Upper profile around the shell: 1 on x1 >= 0, (1-gamma)/2 on the shell, ramping
// linearly in the signed distance to 1 (inside) or 0 (outside) over a width eta.
InitialCondition shell_profile(const Domain& opening, const ShellSpec& shell, double eta, double gamma);
inline double shell_profile_slope(double eta, double gamma) { return 0.5 * (1.0 - gamma) / eta; }

// Evaluates the vote of a stored tree, pruning subtrees whose outcome cannot matter.
int evaluate_vote(const HistoricalTree& tree, const InitialCondition& p, double gamma);
// Reference evaluation of every node.
int evaluate_vote_unpruned(const HistoricalTree& tree, const InitialCondition& p, double gamma);

struct VoteOutcome {
  int vote = 0;
  std::size_t nodes = 0;
  bool aborted = false;
};

// Lazily simulates the tree rooted at x over [0,t] and returns the root vote.
// Keyed randomness makes the result identical to simulate_tree + evaluate_vote with the same key.
VoteOutcome sample_vote(const VoteParams& params, const Domain& domain, const Point& x, double t,
                        const InitialCondition& p, std::uint64_t key, const TreeOptions& opt);

struct Estimate {
  double mean = 0;
  double stderr_ = 0;
  long replicates = 0;
  long aborted = 0;
  std::size_t nodes = 0;
  bool valid = true;
};

inline std::uint64_t replicate_key(std::uint64_t seed, long i) {
  return derive_key(seed, static_cast<std::uint64_t>(i) + 1);
}

Estimate estimate_solution(const Point& x, double t, const VoteParams& params, const Domain& domain,
                           const InitialCondition& p, long replicates, std::uint64_t seed, const TreeOptions& opt);

// Single-threaded reference with the same replicate keys.
Estimate estimate_solution_serial(const Point& x, double t, const VoteParams& params, const Domain& domain,
                                  const InitialCondition& p, long replicates, std::uint64_t seed,
                                  const TreeOptions& opt);

}  // namespace hz
