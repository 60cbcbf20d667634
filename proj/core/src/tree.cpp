#include "simplan/tree.hpp"

#include <algorithm>
#include <cmath>
#include <utility>
#include <limits>

namespace simplan {
namespace {

using Clock = std::chrono::steady_clock;

int categorical_draw(const std::vector<double>& weights, RngStream& rng) {
  const double u = rng.uniform();
  double cumulative = 0.0;
  const int n = static_cast<int>(weights.size());
  for (int i = 0; i < n; ++i) {
    cumulative += weights[i];
    if (u <= cumulative) return i;
  }
  return n - 1;
}

class TreeBuilder {
 public:
  TreeBuilder(const PlannerConfig& config, const ModelSet& models,
              const RngStream& session)
      : config_(config), models_(models), session_(session) {
    if (config.horizon < 1)
      throw std::invalid_argument("horizon must be >= 1");
    if (config.actions.empty())
      throw std::invalid_argument("action set must not be empty");
    if (config.time_budget_seconds > 0.0) {
      deadline_ = Clock::now() + std::chrono::duration_cast<Clock::duration>(
                                     std::chrono::duration<double>(
                                         config.time_budget_seconds));
    }
  }

  std::unique_ptr<BeliefTreeNode> make_root(const ParticleBelief& belief) {
    auto root = std::make_unique<BeliefTreeNode>();
    root->id = next_id_++;
    root->belief = belief;
    root->children.resize(config_.actions.size());
    ++node_count_;
    return root;
  }

  /// Adds one observation branch under (parent, action), sharing the given
  /// propagated particle set. `source` picks the particle whose predicted
  /// state generates the observation; -1 draws it from the belief weights.
  BeliefTreeNode* add_branch(BeliefTreeNode& parent, int action,
                             const std::vector<Vec2>& propagated, int source) {
    check_budget();
    const int branch = parent.child_count(action);
    RngStream obs_rng =
        edge_observation_stream(session_, parent.id, action, branch);
    const int src = source >= 0
                        ? source
                        : categorical_draw(parent.belief.weights, obs_rng);
    const Vec2 z = models_.sample_observation(propagated[src], obs_rng);

    auto child = std::make_unique<BeliefTreeNode>();
    child->id = next_id_++;
    child->depth = parent.depth + 1;
    child->incoming_action = action;
    child->incoming_action_vec = config_.actions[action];
    child->obs_index = branch;
    child->incoming_observation = z;
    child->parent = &parent;
    child->belief = reweight_propagated(parent.belief, propagated, z, models_,
                                        config_.likelihood_floor);
    child->children.resize(config_.actions.size());
    ++node_count_;

    BeliefTreeNode* raw = child.get();
    parent.children[action].push_back(std::move(child));
    return raw;
  }

  std::vector<Vec2> propagate(BeliefTreeNode& parent, int action) {
    RngStream rng = edge_propagation_stream(session_, parent.id, action);
    return propagate_particles(parent.belief, config_.actions[action],
                               models_, rng);
  }

  int node_count() const { return node_count_; }

  void check_budget() const {
    if (node_count_ >= static_cast<int>(config_.max_nodes))
      throw BudgetExceededError("node budget exceeded while building tree");
    if (deadline_ && Clock::now() > *deadline_)
      throw BudgetExceededError("time budget exceeded while building tree");
  }

 private:
  const PlannerConfig& config_;
  const ModelSet& models_;
  RngStream session_;
  int next_id_ = 0;
  int node_count_ = 0;
  std::optional<Clock::time_point> deadline_;
};

void expand_dense(TreeBuilder& builder, BeliefTreeNode& node,
                  const PlannerConfig& config, int obs_per_particle_depth) {
  if (node.depth >= config.horizon) return;
  const int n_actions = static_cast<int>(config.actions.size());
  for (int a = 0; a < n_actions; ++a) {
    const auto propagated = builder.propagate(node, a);
    const bool per_particle =
        obs_per_particle_depth <= 0 || node.depth < obs_per_particle_depth;
    if (obs_per_particle_depth != 0 && !per_particle) {
      // Below the dense-observation depth the tree narrows to one branch.
      BeliefTreeNode* child = builder.add_branch(node, a, propagated, -1);
      expand_dense(builder, *child, config, obs_per_particle_depth);
      continue;
    }
    const int branches = obs_per_particle_depth == 0
                             ? config.obs_branching
                             : node.belief.size();
    for (int l = 0; l < branches; ++l) {
      const int source = obs_per_particle_depth == 0 ? -1 : l;
      BeliefTreeNode* child = builder.add_branch(node, a, propagated, source);
      expand_dense(builder, *child, config, obs_per_particle_depth);
    }
  }
}

}  // namespace

TreeShape tree_shape_from_name(std::string_view name) {
  if (name == "despot-like" || name == "despot") return TreeShape::DespotLike;
  if (name == "powss-like" || name == "powss") return TreeShape::PowssLike;
  if (name == "pomcp-like" || name == "pomcp") return TreeShape::PomcpLike;
  throw std::invalid_argument("unknown tree shape: " + std::string(name));
}

std::string_view to_string(TreeShape shape) {
  switch (shape) {
    case TreeShape::DespotLike: return "despot-like";
    case TreeShape::PowssLike: return "powss-like";
    case TreeShape::PomcpLike: return "pomcp-like";
  }
  return "unknown";
}

bool BeliefTreeNode::is_leaf() const {
  for (const auto& branch : children)
    if (!branch.empty()) return false;
  return true;
}

int BeliefTreeNode::child_count(int action) const {
  return static_cast<int>(children[action].size());
}

int BeliefTreeNode::live_action_count() const {
  int live = 0;
  for (const auto& state : action_state)
    if (state.has_children && !state.pruned) ++live;
  return live;
}

int BeliefTreeNode::first_live_action() const {
  for (int a = 0; a < static_cast<int>(action_state.size()); ++a)
    if (action_state[a].has_children && !action_state[a].pruned) return a;
  return -1;
}

RngStream edge_propagation_stream(const RngStream& session, int parent_id,
                                  int action) {
  return session.substream("node", static_cast<std::uint64_t>(parent_id))
      .substream("prop", static_cast<std::uint64_t>(action));
}

RngStream edge_observation_stream(const RngStream& session, int parent_id,
                                  int action, int branch) {
  return session.substream("node", static_cast<std::uint64_t>(parent_id))
      .substream("obs", static_cast<std::uint64_t>(action))
      .substream("branch", static_cast<std::uint64_t>(branch));
}

BuildResult build_despot_like(const ParticleBelief& root_belief,
                              const PlannerConfig& config,
                              const ModelSet& models,
                              const RngStream& session) {
  TreeBuilder builder(config, models, session);
  BuildResult result;
  result.root = builder.make_root(root_belief);
  expand_dense(builder, *result.root, config, 0);
  result.node_count = builder.node_count();
  return result;
}

BuildResult build_powss_like(const ParticleBelief& root_belief,
                             const PlannerConfig& config,
                             const ModelSet& models, const RngStream& session) {
  TreeBuilder builder(config, models, session);
  BuildResult result;
  result.root = builder.make_root(root_belief);
  const int dense_depth =
      config.powss_obs_depth <= 0 ? -1 : config.powss_obs_depth;
  expand_dense(builder, *result.root, config, dense_depth);
  result.node_count = builder.node_count();
  return result;
}

BuildResult build_pomcp_like(const ParticleBelief& root_belief,
                             const PlannerConfig& config,
                             const ModelSet& models, const RngStream& session) {
  if (config.pomcp_rollouts < 1)
    throw std::invalid_argument("rollout count must be >= 1");
  TreeBuilder builder(config, models, session);
  BuildResult result;
  result.root = builder.make_root(root_belief);
  const int n_actions = static_cast<int>(config.actions.size());

  for (int r = 0; r < config.pomcp_rollouts; ++r) {
    RngStream walk = session.substream("rollout", static_cast<std::uint64_t>(r));
    BeliefTreeNode* node = result.root.get();
    while (node->depth < config.horizon) {
      std::vector<int> untried;
      std::vector<BeliefTreeNode*> existing;
      for (int a = 0; a < n_actions; ++a) {
        if (node->child_count(a) == 0) {
          untried.push_back(a);
        } else {
          for (auto& child : node->children[a]) existing.push_back(child.get());
        }
      }
      const bool expand =
          existing.empty() ||
          (!untried.empty() && walk.uniform() < 0.5);
      if (expand) {
        const int a = untried[walk.uniform_index(untried.size())];
        const auto propagated = builder.propagate(*node, a);
        node = builder.add_branch(*node, a, propagated, -1);
      } else {
        node = existing[walk.uniform_index(existing.size())];
      }
    }
  }
  result.node_count = builder.node_count();
  return result;
}

BuildResult build_tree(TreeShape shape, const ParticleBelief& root_belief,
                       const PlannerConfig& config, const ModelSet& models,
                       const RngStream& session) {
  switch (shape) {
    case TreeShape::DespotLike:
      return build_despot_like(root_belief, config, models, session);
    case TreeShape::PowssLike:
      return build_powss_like(root_belief, config, models, session);
    case TreeShape::PomcpLike:
      return build_pomcp_like(root_belief, config, models, session);
  }
  throw std::invalid_argument("unknown tree shape");
}

void for_each_node(BeliefTreeNode& root,
                   const std::function<void(BeliefTreeNode&)>& fn) {
  fn(root);
  for (auto& branch : root.children)
    for (auto& child : branch) for_each_node(*child, fn);
}

void for_each_node(const BeliefTreeNode& root,
                   const std::function<void(const BeliefTreeNode&)>& fn) {
  fn(root);
  for (const auto& branch : root.children)
    for (const auto& child : branch)
      for_each_node(std::as_const(*child), fn);
}

int count_nodes(const BeliefTreeNode& root) {
  int count = 0;
  for_each_node(root, [&count](const BeliefTreeNode&) { ++count; });
  return count;
}

NodeRewardFn make_entropy_distance_reward(const Vec2& goal,
                                          const ModelSet& models) {
  return [goal, models](const BeliefTreeNode& node) {
    const double distance = expected_distance_to_goal(node.belief, goal);
    const double entropy =
        boers_entropy(node.parent->belief, node.belief,
                      node.incoming_action_vec, node.incoming_observation,
                      models)
            .value;
    return -distance - entropy;
  };
}

namespace {

double exact_value(const BeliefTreeNode& node, const NodeRewardFn& reward,
                   ExactObjective& out,
                   const std::optional<Clock::time_point>& deadline) {
  if (deadline && Clock::now() > *deadline)
    throw BudgetExceededError("time budget exceeded in exact evaluation");
  if (node.is_leaf()) return 0.0;

  const int n_actions = static_cast<int>(node.children.size());
  std::vector<double> values(n_actions,
                             std::numeric_limits<double>::quiet_NaN());
  int best = -1;
  double best_value = -std::numeric_limits<double>::infinity();
  for (int a = 0; a < n_actions; ++a) {
    if (node.children[a].empty()) continue;
    double total = 0.0;
    for (const auto& child : node.children[a])
      total += reward(*child) + exact_value(*child, reward, out, deadline);
    const double q = total / static_cast<double>(node.children[a].size());
    values[a] = q;
    if (q > best_value) {
      best_value = q;
      best = a;
    }
  }
  out.action_values.emplace(node.id, std::move(values));
  out.policy.choices.emplace(node.id, best);
  return best_value;
}

}  // namespace

ExactObjective exact_objective(
    const BeliefTreeNode& root, const NodeRewardFn& reward,
    std::optional<std::chrono::steady_clock::time_point> deadline) {
  ExactObjective out;
  out.value = exact_value(root, reward, out, deadline);
  out.policy.root_action = out.policy.choices.at(root.id);
  return out;
}

std::vector<int> prune_children(const std::vector<BoundPair>& bounds,
                                const std::vector<char>& live) {
  int best = -1;
  double best_lower = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < bounds.size(); ++i) {
    if (live[i] && bounds[i].lower > best_lower) {
      best_lower = bounds[i].lower;
      best = static_cast<int>(i);
    }
  }

  // The action attaining the best lower bound is never pruned; intervals may
  // invert by round-off when they collapse to points, and it must survive.
  std::vector<int> pruned;
  for (std::size_t i = 0; i < bounds.size(); ++i)
    if (live[i] && static_cast<int>(i) != best && bounds[i].upper < best_lower)
      pruned.push_back(static_cast<int>(i));
  return pruned;
}

}  // namespace simplan
