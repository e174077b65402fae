#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "hz/geometry.hpp"
#include "hz/rng.hpp"

namespace hz {

class BudgetExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct VoteParams {
  double epsilon = 0;
  double nu = 0;
  static constexpr double bm_speed = 2.0;

  double gamma() const { return nu * epsilon; }
  double branch_rate() const { return (1.0 + gamma()) / (epsilon * epsilon); }
  double tie_probability() const { return 2.0 * gamma() / (3.0 + 3.0 * gamma()); }
  void validate() const;
};

struct TreeOptions {
  // Euler step; infinity means one exact jump per lifetime (only for free space and boxes).
  double step = std::numeric_limits<double>::infinity();
  // Multiplies the generator; 0 freezes all paths (test mode).
  double diffusivity = 1.0;
  std::size_t node_budget = 10'000'000;
};

// Default Euler step eps^2/50, or an exact single jump when the domain allows it.
double default_step(const VoteParams& params, const Domain& domain);

struct TreeNode {
  std::vector<std::uint8_t> label;  // Ulam-Harris word, empty for the root
  int parent = -1;
  std::array<int, 3> children{-1, -1, -1};
  double birth = 0, death = 0;
  bool leaf = true;
  std::vector<double> times;
  std::vector<Point> path;  // path.front() is the birth position, path.back() the death position
  std::uint64_t key = 0;
  // Leaves vote 1 iff coin < p(position); internal nodes take the tie branch iff coin < tie probability.
  double coin = 0;
};

struct HistoricalTree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root
  double horizon = 0;

  std::size_t leaf_count() const;
  std::vector<int> leaves() const;
};

// Randomness of one individual: lifetime, motion over min(lifetime, remaining), then one coin.
struct NodeDraw {
  double lifetime = 0;
  bool survives = false;  // lifetime >= remaining
  Point end;
  double coin = 0;
};

// Advances pos for `duration` by speed-2 Brownian motion reflected in the domain.
Point advance(const Domain& domain, Point pos, double duration, const TreeOptions& opt, Rng& rng,
              std::vector<double>* times = nullptr, std::vector<Point>* path = nullptr, double t0 = 0);

NodeDraw draw_node(const VoteParams& params, const Domain& domain, const Point& start, double remaining,
                   std::uint64_t key, const TreeOptions& opt, std::vector<double>* times = nullptr,
                   std::vector<Point>* path = nullptr, double t0 = 0);

inline std::uint64_t root_key(std::uint64_t seed) { return derive_key(seed, 0x524f4f54ULL); }

HistoricalTree simulate_tree(const VoteParams& params, const Domain& domain, const Point& x, double horizon,
                             const TreeOptions& opt, std::uint64_t key);

bool contains_regular_tree(const HistoricalTree& tree, int depth);

double max_displacement(const HistoricalTree& tree, const Point& from);

}  // namespace hz
