#pragma once

#include <chrono>
#include <functional>
#include <memory>
#include <optional>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "simplan/belief.hpp"
#include "simplan/entropy.hpp"
#include "simplan/models.hpp"

namespace simplan {

/// Raised when a node, particle, or wall-time budget is exceeded.
struct BudgetExceededError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class TreeShape { DespotLike, PowssLike, PomcpLike };

TreeShape tree_shape_from_name(std::string_view name);
std::string_view to_string(TreeShape shape);

struct PlannerConfig {
  std::vector<Vec2> actions;
  Vec2 goal = Vec2::Zero();
  int horizon = 1;
  /// Observation branches per action edge for the action-dense shapes.
  int obs_branching = 1;
  int pomcp_rollouts = 5;
  /// Depth down to which the particle-dense shape branches one observation
  /// per particle; <= 0 means every level does.
  int powss_obs_depth = 0;
  double likelihood_floor = kLikelihoodFloor;
  SimplificationSchedule schedule{std::vector<double>{0.1, 0.2, 0.4, 0.8, 1.0}};
  std::uint64_t seed = 0;
  std::size_t max_nodes = 200000;
  double time_budget_seconds = 0.0;  // 0 disables the wall-time guard
  /// When set, a node's own reward bounds are refined only after refining
  /// its children fails to allow pruning, instead of together with them.
  bool lazy_immediate_refine = false;
};

/// Per-action planning state at a node.
struct ActionState {
  BoundPair bounds;   // objective bounds for committing to this action here
  int level = -1;     // min over the bounds' ingredient levels
  bool pruned = false;
  bool has_children = false;
};

inline constexpr int kLevelUnset = -1;
/// Level sentinel for ingredients that impose no constraint (the root's own
/// reward term).
inline constexpr int kLevelExact = 1 << 20;

struct BeliefTreeNode {
  int id = 0;
  int depth = 0;
  int incoming_action = -1;            // action index at the parent
  Vec2 incoming_action_vec = Vec2::Zero();
  int obs_index = -1;                  // observation branch under that action
  Vec2 incoming_observation = Vec2::Zero();
  ParticleBelief belief;
  BeliefTreeNode* parent = nullptr;
  std::vector<std::vector<std::unique_ptr<BeliefTreeNode>>> children;  // [action][obs]

  // Planning state, owned by the adaptive planner.
  double distance_cost = 0.0;          // expected L1 distance to goal, exact
  BoundPair reward_bounds;             // node's own reward term, entropy interval folded in
  int reward_level = kLevelUnset;
  std::optional<EntropyBoundCache> entropy_cache;
  SimplifiedView prev_view;            // over the parent's belief
  SimplifiedView next_view;            // over this node's belief
  std::vector<ActionState> action_state;
  int survivor = -1;
  int resolved_level = kLevelUnset;
  BoundPair node_bounds;

  bool is_leaf() const;
  int child_count(int action) const;
  int live_action_count() const;
  int first_live_action() const;
};

struct BuildResult {
  std::unique_ptr<BeliefTreeNode> root;
  int node_count = 0;
};

// Substreams that drive one edge's propagation and observation draws. The
// builders use these, and replay checks can reconstruct any child belief
// from (session, parent id, labels) alone.
RngStream edge_propagation_stream(const RngStream& session, int parent_id,
                                  int action);
RngStream edge_observation_stream(const RngStream& session, int parent_id,
                                  int action, int branch);

/// Action-dense, observation-sparse tree: expands every action at every
/// level with `obs_branching` sampled observation branches per action edge.
BuildResult build_despot_like(const ParticleBelief& root_belief,
                              const PlannerConfig& config,
                              const ModelSet& models,
                              const RngStream& session);

/// Action- and observation-dense tree: every action, one observation branch
/// per particle (within powss_obs_depth), single branches below that.
BuildResult build_powss_like(const ParticleBelief& root_belief,
                             const PlannerConfig& config,
                             const ModelSet& models, const RngStream& session);

/// Sparse, deep tree grown by `pomcp_rollouts` root-to-leaf descents; each
/// step either expands an untried action or re-enters an existing child.
BuildResult build_pomcp_like(const ParticleBelief& root_belief,
                             const PlannerConfig& config,
                             const ModelSet& models, const RngStream& session);

BuildResult build_tree(TreeShape shape, const ParticleBelief& root_belief,
                       const PlannerConfig& config, const ModelSet& models,
                       const RngStream& session);

void for_each_node(BeliefTreeNode& root,
                   const std::function<void(BeliefTreeNode&)>& fn);
void for_each_node(const BeliefTreeNode& root,
                   const std::function<void(const BeliefTreeNode&)>& fn);
int count_nodes(const BeliefTreeNode& root);

struct PolicyTree {
  int root_action = -1;
  std::unordered_map<int, int> choices;  // node id -> action index
};

/// Reward contributed by a non-root node (evaluated on its incoming
/// transition and its own belief).
using NodeRewardFn = std::function<double(const BeliefTreeNode&)>;

/// The composite objective: negative expected L1 distance to goal minus the
/// sampling-based entropy estimate of the node's incoming transition.
NodeRewardFn make_entropy_distance_reward(const Vec2& goal,
                                          const ModelSet& models);

struct ExactObjective {
  double value = 0.0;
  PolicyTree policy;
  /// Per-node action values (node id -> value per action index; NaN where an
  /// action has no children).
  std::unordered_map<int, std::vector<double>> action_values;
};

/// Bottom-up exact evaluation: an action's value is the mean over its
/// observation branches of (branch reward + branch subtree value); a node's
/// value is the max over its actions, ties to the lowest index.
ExactObjective exact_objective(
    const BeliefTreeNode& root, const NodeRewardFn& reward,
    std::optional<std::chrono::steady_clock::time_point> deadline = {});

/// Branch elimination among sibling actions: any live action whose upper
/// bound falls strictly below the best live lower bound is pruned. Returns
/// the newly pruned indices.
std::vector<int> prune_children(const std::vector<BoundPair>& bounds,
                                const std::vector<char>& live);

}  // namespace simplan
