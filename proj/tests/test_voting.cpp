#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "hz/voting.hpp"
#include "hz/wave1d.hpp"

using namespace hz;

namespace {

// Independent form of g: at least two ones, or exactly one one resolved by the tie rule.
double g_oracle(double p, double gamma) {
  const double q = 2 * gamma / (3 + 3 * gamma);
  return p * p * p + 3 * p * p * (1 - p) + q * 3 * p * (1 - p) * (1 - p);
}

// Depth-1 tree in 1-d with leaves at the given positions.
HistoricalTree depth_one(double root_coin, double a, double b, double c) {
  HistoricalTree t;
  t.horizon = 1;
  TreeNode root;
  root.leaf = false;
  root.children = {1, 2, 3};
  root.death = 0.5;
  root.path = {Point{0.0}};
  root.coin = root_coin;
  t.nodes.push_back(root);
  for (double x : {a, b, c}) {
    TreeNode n;
    n.parent = 0;
    n.label = {static_cast<std::uint8_t>(t.nodes.size())};
    n.birth = 0.5;
    n.death = 1;
    n.path = {Point{0.0}, Point{x}};
    n.coin = 0.5;
    t.nodes.push_back(n);
  }
  return t;
}

}  // namespace

TEST_CASE("g3 examples") {
  CHECK(g3(1, 1, 0, 0.3) == 1.0);
  CHECK(g3(0, 0, 0, 0.3) == 0.0);
  CHECK(g3(1, 0, 0, 0.1) == doctest::Approx(0.2 / 3.3).epsilon(1e-14));
  CHECK(g3(-0.5, 2.0, 1.5, 0.2) == g3(0, 1, 1, 0.2));
  CHECK(tie_probability(0.5) == doctest::Approx(1.0 / 4.5));
}

TEST_CASE("g identity and fixed points") {
  CHECK(g(0.6, 0.1) == doctest::Approx(0.6 + 0.6 * 0.4 * 0.3 / 1.1).epsilon(1e-14));
  Rng rng(3);
  for (int i = 0; i < 1000; ++i) {
    const double p = rng.uniform(), gamma = rng.uniform();
    CHECK(std::abs(g(p, gamma) - p - p * (1 - p) * (2 * p - (1 - gamma)) / (1 + gamma)) <= 1e-12);
    CHECK(std::abs(g(p, gamma) - g_oracle(p, gamma)) <= 1e-12);
  }
  for (double gamma : {0.0, 0.1, 0.5, 0.9}) {
    CHECK(g(0, gamma) == 0.0);
    CHECK(g(1, gamma) == 1.0);
    CHECK(g((1 - gamma) / 2, gamma) == doctest::Approx((1 - gamma) / 2).epsilon(1e-14));
  }
}

TEST_CASE("g3 stays below the largest input under the unstable fixed point") {
  for (double gamma : {0.05, 0.3, 0.8}) {
    const double top = (1 - gamma) / 2;
    bool ok = true;
    for (int i = 0; i < 50; ++i)
      for (int j = 0; j < 50; ++j)
        for (int k = 0; k < 50; ++k) {
          const double p1 = top * i / 49, p2 = top * j / 49, p3 = top * k / 49;
          if (g3(p1, p2, p3, gamma) > std::max({p1, p2, p3}) + 1e-15) ok = false;
        }
    CHECK(ok);
  }
}

TEST_CASE("iterations to threshold") {
  CHECK(iterations_to_threshold(1.0, 0.2, 1.0, Direction::Up) == 0);
  CHECK(iterations_to_threshold(0.0, 0.2, 0.0, Direction::Down) == 0);
  CHECK_THROWS(iterations_to_threshold(0.3, 0.2, 0.9, Direction::Up));
  CHECK_THROWS(iterations_to_threshold(0.5, 0.2, 0.1, Direction::Down));

  long n = 0;
  for (double p = 0.56; p < 0.99; p = g_oracle(p, 0.1)) ++n;
  CHECK(iterations_to_threshold(0.56, 0.1, 0.99, Direction::Up) == n);

  long m = 0;
  for (double p = 0.3; p > 1e-6; p = g_oracle(p, 0.1)) ++m;
  CHECK(iterations_to_threshold(0.3, 0.1, 1e-6, Direction::Down) == m);

  // Iteration counts from (1+gamma)/2 + eps to 1 - eps^k grow like k |log eps|.
  const double gamma = 0.2;
  for (double eps : {1e-2, 1e-4, 1e-6})
    for (int k : {1, 2, 3}) {
      const long it = iterations_to_threshold((1 + gamma) / 2 + eps, gamma, 1 - std::pow(eps, k), Direction::Up);
      CHECK(it <= 4.0 * k * std::abs(std::log(eps)));
    }
}

TEST_CASE("phase one growth factor") {
  for (double gamma : {0.05, 0.2, 0.5}) {
    const double lim = phase_one_limit(gamma);
    REQUIRE(lim > 0);
    for (int i = 1; i <= 200; ++i) {
      const double delta = lim * i / 200.0;
      CHECK(phase_one_ratio(gamma, delta) >= (5 - gamma) / 4 - 1e-12);
    }
  }
}

TEST_CASE("vote on a hand-built depth-one tree") {
  const auto p = heaviside_condition();
  // Leaf votes (1,0,0).
  CHECK(evaluate_vote(depth_one(0.9, 1, -1, -1), p, 0.0) == 0);
  CHECK(evaluate_vote(depth_one(0.0, 1, -1, -1), p, 0.0) == 0);
  CHECK(evaluate_vote(depth_one(0.1, 1, 1, -1), p, 0.0) == 1);
  CHECK(evaluate_vote(depth_one(0.1, -1, -1, -1), p, 0.5) == 0);

  // Sweeping the root coin gives the tie probability for exactly one 1, whichever child it is.
  const double q = 2 * 0.5 / 4.5;
  for (int which = 0; which < 3; ++which) {
    double xs[3] = {-1, -1, -1};
    xs[which] = 1;
    const int N = 90000;
    long ones = 0;
    for (int i = 0; i < N; ++i) {
      const auto t = depth_one((i + 0.5) / N, xs[0], xs[1], xs[2]);
      const int v = evaluate_vote(t, p, 0.5);
      CHECK(v == evaluate_vote_unpruned(t, p, 0.5));
      ones += v;
    }
    CHECK(static_cast<double>(ones) / N == doctest::Approx(q).epsilon(1e-4));
  }
}

TEST_CASE("constant initial conditions") {
  const VoteParams vp{0.2, 1.0};
  const auto dom = Domain::full_space(2);
  const TreeOptions opt;
  const auto zero = estimate_solution(Point{0.0, 0.0}, 0.1, vp, dom, constant_condition(0), 200, 5, opt);
  CHECK(zero.mean == 0.0);
  CHECK(zero.stderr_ == 0.0);
  const auto one = estimate_solution(Point{0.0, 0.0}, 0.1, vp, dom, constant_condition(1), 200, 5, opt);
  CHECK(one.mean == 1.0);
  CHECK_THROWS(constant_condition(1.5));
}

TEST_CASE("pruned and full evaluation agree on stored trees") {
  const VoteParams vp{0.2, 2.0};
  const auto dom = Domain::full_space(1);
  TreeOptions opt;
  opt.step = 1e-3;
  const auto p = wave_condition(0.2, 2.0);
  for (int i = 0; i < 300; ++i) {
    const auto tree = simulate_tree(vp, dom, Point{0.1}, 0.08, opt, derive_key(11, i));
    const int a = evaluate_vote(tree, p, vp.gamma());
    CHECK(a == evaluate_vote_unpruned(tree, p, vp.gamma()));
    // The lazy sampler draws the same tree from the same key.
    CHECK(a == sample_vote(vp, dom, Point{0.1}, 0.08, p, tree.nodes[0].key, opt).vote);
  }
}

TEST_CASE("coupled monotonicity in the initial condition") {
  const VoteParams vp{0.2, 1.0};
  const auto om = Domain::opening(1.0, 3.0);
  const ShellSpec shell{1.5, 0.0};
  const auto low = heaviside_condition();
  const auto high = shell_profile(om, shell, 0.3, vp.gamma());
  TreeOptions opt;
  opt.step = default_step(vp, om);
  const Point xs[] = {{-0.1, 0.5}, {-0.5, 0.2}, {0.1, 0.9}};
  for (const auto& x : xs)
    for (int i = 0; i < 200; ++i) {
      const auto key = derive_key(17, i);
      const int a = sample_vote(vp, om, x, 0.05, low, key, opt).vote;
      const int b = sample_vote(vp, om, x, 0.05, high, key, opt).vote;
      CHECK(a <= b);
    }
}

TEST_CASE("parallel estimator matches the serial reference") {
  const VoteParams vp{0.25, 1.0};
  const auto dom = Domain::full_space(1);
  const TreeOptions opt;
  const auto p = wave_condition(0.25, 1.0);
  const auto a = estimate_solution(Point{0.0}, 0.2, vp, dom, p, 2000, 99, opt);
  const auto b = estimate_solution_serial(Point{0.0}, 0.2, vp, dom, p, 2000, 99, opt);
  CHECK(a.mean == b.mean);
  CHECK(a.nodes == b.nodes);
  CHECK(std::abs(a.mean - wave_profile(0.0, 0.2, 0.25, 1.0)) <= 4 * a.stderr_ + 1e-3);
}

TEST_CASE("node budget aborts") {
  const VoteParams vp{0.05, 1.0};
  TreeOptions opt;
  opt.node_budget = 50;
  const auto e = estimate_solution(Point{0.0}, 0.1, vp, Domain::full_space(1), heaviside_condition(), 20, 1, opt);
  CHECK(e.aborted > 0);
  CHECK_FALSE(e.valid);
}
