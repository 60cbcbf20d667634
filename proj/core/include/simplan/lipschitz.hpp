#pragma once

#include <functional>
#include <string>
#include <vector>

#include "simplan/belief.hpp"
#include "simplan/entropy.hpp"

namespace simplan {

/// A belief-dependent reward together with its Lipschitz constant under a
/// named belief metric: |r(b1, a) - r(b2, a)| <= k * d(b1, b2).
struct LipschitzReward {
  std::function<double(const ParticleBelief&, int action)> evaluate;
  double lipschitz_constant = 0.0;
  std::string metric = "l1";
};

/// L1 distance between a belief and its subset view: the view's weights are
/// renormalized on the shared support and the excluded particles charge
/// their full weight. O(N).
double belief_distance_l1(const ParticleBelief& belief,
                          const SimplifiedView& view);

/// r evaluated on the renormalized view, padded by lipschitz_constant times
/// the belief/view distance on each side.
BoundPair lc_reward_bounds(const LipschitzReward& reward,
                           const ParticleBelief& belief,
                           const SimplifiedView& view, int action);

/// Per-node reward bounds arranged as a policy tree: each node carries the
/// bounds for its own belief under the policy's action, children are the
/// observation branches that follow it.
struct LcTreeNode {
  BoundPair reward;
  std::vector<LcTreeNode> children;
};

/// Accumulates the per-node bounds through the uniform-expectation value
/// recursion, yielding bounds on the policy's objective from this node down.
BoundPair lc_objective_bounds(const LcTreeNode& node);

}  // namespace simplan
