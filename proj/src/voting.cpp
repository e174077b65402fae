#include "hz/voting.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "hz/wave1d.hpp"

namespace hz {

namespace {

double clamp01(double p) { return std::clamp(p, 0.0, 1.0); }

Estimate finish(long ones, long aborted, std::size_t nodes, long replicates) {
  Estimate e;
  e.replicates = replicates;
  e.aborted = aborted;
  e.nodes = nodes;
  const long ok = replicates - aborted;
  if (ok > 0) {
    e.mean = static_cast<double>(ones) / static_cast<double>(ok);
    e.stderr_ = std::sqrt(e.mean * (1.0 - e.mean) / static_cast<double>(ok));
  }
  e.valid = ok > 0 && static_cast<double>(aborted) <= 0.01 * static_cast<double>(replicates);
  return e;
}

struct LazyVoter {
  const VoteParams& params;
  const Domain& domain;
  const InitialCondition& p;
  const TreeOptions& opt;
  double q;
  std::size_t nodes = 0;
  bool aborted = false;

  int vote(const Point& start, double remaining, std::uint64_t key) {
    if (aborted) return 0;
    if (++nodes > opt.node_budget) {
      aborted = true;
      return 0;
    }
    const NodeDraw d = draw_node(params, domain, start, remaining, key, opt);
    if (d.survives) return d.coin < p(d.end) ? 1 : 0;
    const double rem = remaining - d.lifetime;
    // The coin selects the rule: below 3q, child j = floor(coin/q) decides alone unless it
    // votes 0, in which case the other two must both vote 1; otherwise plain majority.
    // Exactly-one-1 with the 1 at child j gives 1 iff coin lies in [jq, (j+1)q).
    if (d.coin < 3.0 * q) {
      const std::uint64_t j = std::min<std::uint64_t>(static_cast<std::uint64_t>(d.coin / q), 2);
      if (vote(d.end, rem, derive_key(key, j + 1))) return 1;
      if (!vote(d.end, rem, derive_key(key, (j + 1) % 3 + 1))) return 0;
      return vote(d.end, rem, derive_key(key, (j + 2) % 3 + 1));
    }
    const int a = vote(d.end, rem, derive_key(key, 1));
    const int b = vote(d.end, rem, derive_key(key, 2));
    if (a == b) return a;
    return vote(d.end, rem, derive_key(key, 3));
  }
};

int stored_vote(const HistoricalTree& tree, int id, const InitialCondition& p, double q) {
  const auto& n = tree.nodes[id];
  if (n.leaf) return n.coin < p(n.path.back()) ? 1 : 0;
  if (n.coin < 3.0 * q) {
    const int j = std::min(static_cast<int>(n.coin / q), 2);
    if (stored_vote(tree, n.children[j], p, q)) return 1;
    if (!stored_vote(tree, n.children[(j + 1) % 3], p, q)) return 0;
    return stored_vote(tree, n.children[(j + 2) % 3], p, q);
  }
  const int a = stored_vote(tree, n.children[0], p, q);
  const int b = stored_vote(tree, n.children[1], p, q);
  if (a == b) return a;
  return stored_vote(tree, n.children[2], p, q);
}

int full_vote(const HistoricalTree& tree, int id, const InitialCondition& p, double q) {
  const auto& n = tree.nodes[id];
  if (n.leaf) return n.coin < p(n.path.back()) ? 1 : 0;
  int ones = 0, which = -1;
  for (int j = 0; j < 3; ++j) {
    if (full_vote(tree, n.children[j], p, q)) {
      ++ones;
      which = j;
    }
  }
  if (ones >= 2) return 1;
  if (ones == 1) return n.coin >= which * q && n.coin < (which + 1) * q ? 1 : 0;
  return 0;
}

}  // namespace

double tie_probability(double gamma) { return 2.0 * gamma / (3.0 + 3.0 * gamma); }

double g3(double p1, double p2, double p3, double gamma) {
  p1 = clamp01(p1);
  p2 = clamp01(p2);
  p3 = clamp01(p3);
  const double all = p1 * p2 * p3;
  const double two = p1 * p2 * (1 - p3) + p1 * (1 - p2) * p3 + (1 - p1) * p2 * p3;
  const double one = p1 * (1 - p2) * (1 - p3) + (1 - p1) * p2 * (1 - p3) + (1 - p1) * (1 - p2) * p3;
  return all + two + tie_probability(gamma) * one;
}

double g(double p, double gamma) { return g3(p, p, p, gamma); }

long iterations_to_threshold(double p0, double gamma, double target, Direction dir, long cap) {
  const double fixed = (1.0 - gamma) / 2.0;
  if (dir == Direction::Up && !(p0 > fixed)) throw std::invalid_argument("upward iteration needs p0 > (1-gamma)/2");
  if (dir == Direction::Down && !(p0 < fixed)) throw std::invalid_argument("downward iteration needs p0 < (1-gamma)/2");
  double p = p0;
  long n = 0;
  const auto done = [&] { return dir == Direction::Up ? p >= target : p <= target; };
  while (!done() && n < cap) {
    p = g(p, gamma);
    ++n;
  }
  return n;
}

double phase_one_ratio(double gamma, double delta) {
  const double c = (1.0 + gamma) / 2.0;
  return (g(c + delta, gamma) - c) / delta;
}

double phase_one_limit(double gamma) { return std::sqrt((1.0 + gamma * gamma) / 8.0) - gamma / 2.0; }

InitialCondition constant_condition(double c) {
  if (!(c >= 0 && c <= 1)) throw std::invalid_argument("constant must lie in [0,1]");
  return {"constant", [c](const Point&) { return c; }};
}

InitialCondition heaviside_condition() {
  return {"heaviside", [](const Point& x) { return x[0] >= 0 ? 1.0 : 0.0; }};
}

InitialCondition ball_indicator(double rho) {
  if (!(rho > 0)) throw std::invalid_argument("ball radius must be positive");
  return {"ball", [rho](const Point& x) { return norm(x) <= rho ? 1.0 : 0.0; }};
}

InitialCondition wave_condition(double epsilon, double nu) {
  return {"wave", [epsilon, nu](const Point& x) { return wave_profile(x[0], 0.0, epsilon, nu); }};
}

InitialCondition shell_profile(const Domain& opening, const ShellSpec& shell, double eta, double gamma) {
  if (!std::holds_alternative<Opening>(opening.shape())) throw std::invalid_argument("shell profile needs an Opening");
  if (!(eta > 0)) throw std::invalid_argument("eta must be positive");
  const double c = (1.0 - gamma) / 2.0;
  return {"shell", [opening, shell, eta, c](const Point& x) {
            if (x[0] >= 0) return 1.0;
            const double d = signed_distance_shell(opening, shell, x);
            if (d >= 0) return c + (1.0 - c) * std::min(d / eta, 1.0);
            return c - c * std::min(-d / eta, 1.0);
          }};
}

int evaluate_vote(const HistoricalTree& tree, const InitialCondition& p, double gamma) {
  if (tree.nodes.empty()) throw std::invalid_argument("empty tree");
  return stored_vote(tree, 0, p, tie_probability(gamma));
}

int evaluate_vote_unpruned(const HistoricalTree& tree, const InitialCondition& p, double gamma) {
  if (tree.nodes.empty()) throw std::invalid_argument("empty tree");
  return full_vote(tree, 0, p, tie_probability(gamma));
}

VoteOutcome sample_vote(const VoteParams& params, const Domain& domain, const Point& x, double t,
                        const InitialCondition& p, std::uint64_t key, const TreeOptions& opt) {
  LazyVoter v{params, domain, p, opt, params.tie_probability()};
  VoteOutcome out;
  out.vote = v.vote(x, t, key);
  out.nodes = v.nodes;
  out.aborted = v.aborted;
  if (out.aborted) out.vote = 0;
  return out;
}

Estimate estimate_solution(const Point& x, double t, const VoteParams& params, const Domain& domain,
                           const InitialCondition& p, long replicates, std::uint64_t seed, const TreeOptions& opt) {
  params.validate();
  if (replicates < 1) throw std::invalid_argument("replicates must be >= 1");
  if (!contains(domain, x)) throw GeometryError("estimate_solution: point outside domain");
  long ones = 0, aborted = 0;
  std::size_t nodes = 0;
#pragma omp parallel for schedule(dynamic, 8) reduction(+ : ones, aborted, nodes)
  for (long i = 0; i < replicates; ++i) {
    const VoteOutcome o = sample_vote(params, domain, x, t, p, replicate_key(seed, i), opt);
    nodes += o.nodes;
    if (o.aborted) ++aborted;
    else ones += o.vote;
  }
  return finish(ones, aborted, nodes, replicates);
}

Estimate estimate_solution_serial(const Point& x, double t, const VoteParams& params, const Domain& domain,
                                  const InitialCondition& p, long replicates, std::uint64_t seed,
                                  const TreeOptions& opt) {
  params.validate();
  if (replicates < 1) throw std::invalid_argument("replicates must be >= 1");
  if (!contains(domain, x)) throw GeometryError("estimate_solution: point outside domain");
  long ones = 0, aborted = 0;
  std::size_t nodes = 0;
  for (long i = 0; i < replicates; ++i) {
    const VoteOutcome o = sample_vote(params, domain, x, t, p, replicate_key(seed, i), opt);
    nodes += o.nodes;
    if (o.aborted) ++aborted;
    else ones += o.vote;
  }
  return finish(ones, aborted, nodes, replicates);
}

}  // namespace hz
