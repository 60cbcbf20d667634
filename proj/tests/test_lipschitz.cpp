#include <doctest.h>

#include <cmath>

#include "simplan/lipschitz.hpp"
#include "simplan/models.hpp"
#include "test_support.hpp"

using namespace simplan;
using namespace simplan::test;

namespace {

const SimplificationSchedule kSchedule(
    std::vector<double>{0.1, 0.2, 0.4, 0.8, 1.0});

// Workspace box for the randomized suites; particles and goals stay inside.
constexpr double kBoxHalf = 10.0;
constexpr double kDiameterL1 = 4.0 * kBoxHalf;

ParticleBelief random_box_belief(std::uint64_t seed, int n) {
  RngStream rng(seed);
  ParticleBelief belief;
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    belief.particles.emplace_back(kBoxHalf * (2.0 * rng.uniform() - 1.0),
                                  kBoxHalf * (2.0 * rng.uniform() - 1.0));
    belief.weights.push_back(0.05 + rng.uniform());
    total += belief.weights.back();
  }
  for (double& w : belief.weights) w /= total;
  return belief;
}

LipschitzReward distance_reward(const Vec2& goal) {
  LipschitzReward reward;
  reward.evaluate = [goal](const ParticleBelief& b, int) {
    return -expected_distance_to_goal(b, goal);
  };
  reward.lipschitz_constant = kDiameterL1;
  reward.metric = "l1";
  return reward;
}

}  // namespace

TEST_CASE("belief/view distance: full view is at distance zero") {
  const auto belief = random_box_belief(1, 20);
  SimplifiedView view;
  view.indices.resize(20);
  for (int i = 0; i < 20; ++i) view.indices[i] = i;
  view.level = kSchedule.finest_level();
  view.fraction = 1.0;
  CHECK(belief_distance_l1(belief, view) == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("belief/view distance: uniform half view has distance one") {
  ParticleBelief belief;
  for (int i = 0; i < 4; ++i) {
    belief.particles.emplace_back(i, 0);
    belief.weights.push_back(0.25);
  }
  SimplifiedView view;
  view.indices = {0, 1};
  view.level = 0;
  view.fraction = 0.5;
  CHECK(belief_distance_l1(belief, view) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("belief/view distance never increases along a refinement chain") {
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    const auto belief = random_box_belief(seed, 30);
    const RngStream rng(seed + 7);
    auto view = simplify(belief, kSchedule, 0, rng);
    double previous = belief_distance_l1(belief, view);
    while (view.level < kSchedule.finest_level()) {
      view = refine(view, belief, kSchedule, rng).view;
      const double current = belief_distance_l1(belief, view);
      CHECK(current <= previous + 1e-12);
      previous = current;
    }
    CHECK(previous == doctest::Approx(0.0).epsilon(1e-15));
  }
}

TEST_CASE("the distance-to-goal reward satisfies its Lipschitz contract") {
  // |r(b) - r(b_view)| <= diameter * d(b, b_view) on random pairs.
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto belief = random_box_belief(seed, 25);
    const Vec2 goal(6.0, -3.0);
    const auto reward = distance_reward(goal);
    const RngStream rng(seed);
    for (int level = 0; level <= kSchedule.finest_level(); ++level) {
      const auto view = simplify(belief, kSchedule, level, rng);
      const double r_full = reward.evaluate(belief, 0);
      const double r_view = reward.evaluate(view_as_belief(belief, view), 0);
      CHECK(std::abs(r_full - r_view) <=
            reward.lipschitz_constant * belief_distance_l1(belief, view) +
                1e-12);
    }
  }
}

TEST_CASE("reward bounds: full view collapses, zero constant pins the value") {
  const auto belief = random_box_belief(3, 15);
  const Vec2 goal(2.0, 2.0);
  const RngStream rng(11);

  auto reward = distance_reward(goal);
  const auto full = simplify(belief, kSchedule, kSchedule.finest_level(), rng);
  const auto at_full = lc_reward_bounds(reward, belief, full, 0);
  const double exact = reward.evaluate(belief, 0);
  CHECK(at_full.lower == doctest::Approx(exact).epsilon(1e-12));
  CHECK(at_full.upper == doctest::Approx(exact).epsilon(1e-12));

  reward.lipschitz_constant = 0.0;
  const auto coarse = simplify(belief, kSchedule, 0, rng);
  const auto at_zero = lc_reward_bounds(reward, belief, coarse, 0);
  const double on_view = reward.evaluate(view_as_belief(belief, coarse), 0);
  CHECK(at_zero.lower == on_view);
  CHECK(at_zero.upper == on_view);
}

TEST_CASE("reward bounds bracket the exact reward on random beliefs") {
  int checked = 0;
  for (std::uint64_t seed = 0; seed < 250; ++seed) {
    const auto belief = random_box_belief(seed, 10 + seed % 30);
    const Vec2 goal(8.0 - (seed % 17), -4.0 + (seed % 9));
    const auto reward = distance_reward(goal);
    const RngStream rng(seed * 3 + 1);
    for (int level = 0; level <= kSchedule.finest_level(); ++level) {
      const auto view = simplify(belief, kSchedule, level, rng);
      const auto bounds = lc_reward_bounds(reward, belief, view, 0);
      const double exact = reward.evaluate(belief, 0);
      CHECK(bounds.lower <= exact + 1e-12);
      CHECK(exact <= bounds.upper + 1e-12);
      ++checked;
    }
  }
  CHECK(checked == 1250);
}

TEST_CASE("negative Lipschitz constants are rejected") {
  const auto belief = random_box_belief(5, 8);
  auto reward = distance_reward(Vec2(0, 0));
  reward.lipschitz_constant = -1.0;
  const RngStream rng(2);
  const auto view = simplify(belief, kSchedule, 0, rng);
  CHECK_THROWS_AS(lc_reward_bounds(reward, belief, view, 0),
                  std::invalid_argument);
}

TEST_CASE("objective bounds: a single node reduces to its reward bounds") {
  LcTreeNode node;
  node.reward = BoundPair{-2.5, -1.5, 0};
  const auto bounds = lc_objective_bounds(node);
  CHECK(bounds.lower == -2.5);
  CHECK(bounds.upper == -1.5);
}

TEST_CASE("objective bounds match a hand-expanded two-level tree") {
  // Root with two observation branches, each with two leaves.
  LcTreeNode root;
  root.reward = BoundPair{1.0, 2.0, 0};
  LcTreeNode child_a;
  child_a.reward = BoundPair{0.5, 0.7, 0};
  child_a.children = {LcTreeNode{BoundPair{0.1, 0.2, 0}, {}},
                      LcTreeNode{BoundPair{-0.3, 0.0, 0}, {}}};
  LcTreeNode child_b;
  child_b.reward = BoundPair{-1.0, -0.5, 0};
  child_b.children = {LcTreeNode{BoundPair{2.0, 2.5, 0}, {}}};
  root.children = {child_a, child_b};

  // Hand expansion: child_a = 0.5 + (0.1 - 0.3)/2 .. 0.7 + (0.2 + 0.0)/2
  //                 child_b = -1.0 + 2.0 .. -0.5 + 2.5
  const double a_lower = 0.5 + 0.5 * (0.1 - 0.3);
  const double a_upper = 0.7 + 0.5 * (0.2 + 0.0);
  const double b_lower = 1.0, b_upper = 2.0;
  const double expected_lower = 1.0 + 0.5 * (a_lower + b_lower);
  const double expected_upper = 2.0 + 0.5 * (a_upper + b_upper);

  const auto bounds = lc_objective_bounds(root);
  CHECK(bounds.lower == doctest::Approx(expected_lower).epsilon(1e-12));
  CHECK(bounds.upper == doctest::Approx(expected_upper).epsilon(1e-12));
}

namespace {

struct SyntheticNode {
  ParticleBelief belief;
  std::vector<SyntheticNode> children;
};

SyntheticNode random_synthetic_tree(RngStream& rng, int depth, int max_depth,
                                    std::uint64_t& counter) {
  SyntheticNode node;
  node.belief = random_box_belief(counter++ * 7919 + 13, 12);
  if (depth < max_depth) {
    const int branches = 1 + static_cast<int>(rng.uniform_index(3));
    for (int b = 0; b < branches; ++b)
      node.children.push_back(
          random_synthetic_tree(rng, depth + 1, max_depth, counter));
  }
  return node;
}

double exact_objective_of(const SyntheticNode& node,
                          const LipschitzReward& reward) {
  double value = reward.evaluate(node.belief, 0);
  if (node.children.empty()) return value;
  double sum = 0.0;
  for (const auto& child : node.children) sum += exact_objective_of(child, reward);
  return value + sum / static_cast<double>(node.children.size());
}

LcTreeNode bound_tree(const SyntheticNode& node, const LipschitzReward& reward,
                      int level, const RngStream& rng, std::uint64_t& counter) {
  LcTreeNode out;
  const auto view = simplify(node.belief, kSchedule, level,
                             rng.substream("view", counter++));
  out.reward = lc_reward_bounds(reward, node.belief, view, 0);
  for (const auto& child : node.children)
    out.children.push_back(bound_tree(child, reward, level, rng, counter));
  return out;
}

}  // namespace

TEST_CASE("objective bounds bracket the exact objective on random trees") {
  const auto reward = distance_reward(Vec2(3.0, 3.0));
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    RngStream rng(seed);
    std::uint64_t counter = seed * 1000;
    const auto tree = random_synthetic_tree(rng, 0, 2, counter);
    const double exact = exact_objective_of(tree, reward);
    for (int level = 0; level <= kSchedule.finest_level(); ++level) {
      std::uint64_t view_counter = 0;
      const RngStream view_rng(seed + 500);
      const auto bounded = bound_tree(tree, reward, level, view_rng, view_counter);
      const auto bounds = lc_objective_bounds(bounded);
      CHECK(bounds.lower <= exact + 1e-9);
      CHECK(exact <= bounds.upper + 1e-9);
      if (level == kSchedule.finest_level()) {
        CHECK(bounds.lower == doctest::Approx(exact).epsilon(1e-12));
        CHECK(bounds.upper == doctest::Approx(exact).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("objective bound width shrinks to zero as views fill in") {
  const auto reward = distance_reward(Vec2(-2.0, 5.0));
  RngStream rng(17);
  std::uint64_t counter = 0;
  const auto tree = random_synthetic_tree(rng, 0, 2, counter);
  double previous = std::numeric_limits<double>::infinity();
  for (int level = 0; level <= kSchedule.finest_level(); ++level) {
    std::uint64_t view_counter = 0;
    const RngStream view_rng(99);
    const auto bounded = bound_tree(tree, reward, level, view_rng, view_counter);
    const double width = lc_objective_bounds(bounded).width();
    CHECK(width <= previous + 1e-12);
    previous = width;
  }
  CHECK(previous == doctest::Approx(0.0).epsilon(1e-12));
}
