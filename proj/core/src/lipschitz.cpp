#include "simplan/lipschitz.hpp"

#include <cmath>
#include <stdexcept>

namespace simplan {

double belief_distance_l1(const ParticleBelief& belief,
                          const SimplifiedView& view) {
  double in_mass = 0.0;
  for (int i : view.indices) in_mass += belief.weights[i];
  if (!(in_mass > 0.0))
    throw std::invalid_argument("view carries no probability mass");

  std::vector<char> in_view(belief.size(), 0);
  for (int i : view.indices) in_view[i] = 1;

  double distance = 0.0;
  for (int i = 0; i < belief.size(); ++i) {
    if (in_view[i]) {
      distance += std::abs(belief.weights[i] - belief.weights[i] / in_mass);
    } else {
      distance += belief.weights[i];
    }
  }
  return distance;
}

BoundPair lc_reward_bounds(const LipschitzReward& reward,
                           const ParticleBelief& belief,
                           const SimplifiedView& view, int action) {
  if (reward.lipschitz_constant < 0.0)
    throw std::invalid_argument("lipschitz constant must be non-negative");
  const double value = reward.evaluate(view_as_belief(belief, view), action);
  const double pad = reward.lipschitz_constant * belief_distance_l1(belief, view);
  BoundPair out;
  out.lower = value - pad;
  out.upper = value + pad;
  out.level = view.level;
  return out;
}

BoundPair lc_objective_bounds(const LcTreeNode& node) {
  BoundPair out = node.reward;
  if (node.children.empty()) return out;
  double child_lower = 0.0;
  double child_upper = 0.0;
  for (const LcTreeNode& child : node.children) {
    const BoundPair sub = lc_objective_bounds(child);
    child_lower += sub.lower;
    child_upper += sub.upper;
  }
  const double inv = 1.0 / static_cast<double>(node.children.size());
  out.lower += inv * child_lower;
  out.upper += inv * child_upper;
  return out;
}

}  // namespace simplan
