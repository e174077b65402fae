#include "hz/bbm.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace hz {

void VoteParams::validate() const {
  if (!(epsilon > 0)) throw std::invalid_argument("epsilon must be positive");
  if (!(nu > 0)) throw std::invalid_argument("nu must be positive");
  if (!(gamma() > 0 && gamma() < 1)) throw std::invalid_argument("gamma = nu*epsilon must lie in (0,1)");
}

double default_step(const VoteParams& params, const Domain& domain) {
  if (domain.exact_transitions()) return std::numeric_limits<double>::infinity();
  return params.epsilon * params.epsilon / 50.0;
}

std::size_t HistoricalTree::leaf_count() const {
  return static_cast<std::size_t>(std::count_if(nodes.begin(), nodes.end(), [](const TreeNode& n) { return n.leaf; }));
}

std::vector<int> HistoricalTree::leaves() const {
  std::vector<int> out;
  for (int i = 0; i < static_cast<int>(nodes.size()); ++i)
    if (nodes[i].leaf) out.push_back(i);
  return out;
}

Point advance(const Domain& domain, Point pos, double duration, const TreeOptions& opt, Rng& rng,
              std::vector<double>* times, std::vector<Point>* path, double t0) {
  if (times) times->push_back(t0);
  if (path) path->push_back(pos);
  if (duration <= 0) return pos;
  const int d = pos.dim;
  if (!std::isfinite(opt.step) && !domain.exact_transitions())
    throw std::invalid_argument("exact transitions are only available for free space and boxes");
  const bool one_jump = opt.step >= duration;
  const long nsteps = one_jump ? 1 : static_cast<long>(std::ceil(duration / opt.step));
  const double dt = duration / static_cast<double>(nsteps);
  const double sd = std::sqrt(VoteParams::bm_speed * opt.diffusivity * dt);
  for (long k = 0; k < nsteps; ++k) {
    Point prop = pos;
    for (int i = 0; i < d; ++i) prop[i] += sd * rng.normal();
    pos = reflect_step(domain, pos, prop);
    if (times) times->push_back(t0 + dt * static_cast<double>(k + 1));
    if (path) path->push_back(pos);
  }
  return pos;
}

NodeDraw draw_node(const VoteParams& params, const Domain& domain, const Point& start, double remaining,
                   std::uint64_t key, const TreeOptions& opt, std::vector<double>* times,
                   std::vector<Point>* path, double t0) {
  Rng rng(key);
  NodeDraw out;
  out.lifetime = rng.exponential(params.branch_rate());
  out.survives = out.lifetime >= remaining;
  const double dur = out.survives ? remaining : out.lifetime;
  out.end = advance(domain, start, dur, opt, rng, times, path, t0);
  out.coin = rng.uniform();
  return out;
}

HistoricalTree simulate_tree(const VoteParams& params, const Domain& domain, const Point& x, double horizon,
                             const TreeOptions& opt, std::uint64_t key) {
  params.validate();
  if (!(opt.step > 0)) throw std::invalid_argument("step must be positive");
  if (!(horizon >= 0)) throw std::invalid_argument("horizon must be nonnegative");
  if (!contains(domain, x)) throw GeometryError("simulate_tree: start point outside domain");

  HistoricalTree tree;
  tree.horizon = horizon;
  struct Pending {
    int parent;
    int index;
    std::vector<std::uint8_t> label;
    std::uint64_t key;
    double birth;
    Point start;
  };
  std::vector<Pending> stack{{-1, 0, {}, key, 0.0, x}};
  while (!stack.empty()) {
    Pending job = std::move(stack.back());
    stack.pop_back();
    if (tree.nodes.size() >= opt.node_budget) throw BudgetExceeded("simulate_tree: node budget exceeded");
    TreeNode node;
    node.label = std::move(job.label);
    node.parent = job.parent;
    node.birth = job.birth;
    node.key = job.key;
    const NodeDraw draw =
        draw_node(params, domain, job.start, horizon - job.birth, job.key, opt, &node.times, &node.path, job.birth);
    node.death = draw.survives ? horizon : job.birth + draw.lifetime;
    node.leaf = draw.survives;
    node.coin = draw.coin;
    const int id = static_cast<int>(tree.nodes.size());
    if (job.parent >= 0) tree.nodes[job.parent].children[job.index] = id;
    const double death = node.death;
    const auto label = node.label;
    const bool leaf = node.leaf;
    tree.nodes.push_back(std::move(node));
    if (!leaf) {
      for (int i = 2; i >= 0; --i) {
        auto child_label = label;
        child_label.push_back(static_cast<std::uint8_t>(i + 1));
        stack.push_back({id, i, std::move(child_label), derive_key(job.key, i + 1), death, draw.end});
      }
    }
  }
  return tree;
}

bool contains_regular_tree(const HistoricalTree& tree, int depth) {
  if (depth < 0) throw std::invalid_argument("depth must be nonnegative");
  if (tree.nodes.empty()) return false;
  std::function<bool(int, int)> full = [&](int id, int level) {
    if (level == depth) return true;
    const auto& n = tree.nodes[id];
    if (n.leaf) return false;
    for (int c : n.children)
      if (!full(c, level + 1)) return false;
    return true;
  };
  return full(0, 0);
}

double max_displacement(const HistoricalTree& tree, const Point& from) {
  double best = 0;
  for (const auto& n : tree.nodes)
    for (const auto& p : n.path) best = std::max(best, distance(p, from));
  return best;
}

}  // namespace hz
