#include "simplan/planner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace simplan {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

RngStream node_view_stream(const RngStream& session, int node_id,
                           std::string_view which) {
  return session.substream("node", static_cast<std::uint64_t>(node_id))
      .substream(which);
}

// The node's own reward term: exact distance part, entropy interval flipped
// into reward orientation (a larger entropy means a smaller reward).
BoundPair fold_reward(double distance_cost, const BoundPair& entropy) {
  BoundPair out;
  out.lower = -distance_cost - entropy.upper;
  out.upper = -distance_cost - entropy.lower;
  out.level = entropy.level;
  return out;
}

}  // namespace

AdaptivePlanner::AdaptivePlanner(const PlannerConfig& config,
                                 const ModelSet& models,
                                 const RngStream& session)
    : config_(config),
      models_(models.with_counters(&diag_.counters)),
      session_(session) {
  if (config_.time_budget_seconds > 0.0) {
    deadline_ = Clock::now() + std::chrono::duration_cast<Clock::duration>(
                                   std::chrono::duration<double>(
                                       config_.time_budget_seconds));
  }
}

void AdaptivePlanner::check_deadline() const {
  if (deadline_ && Clock::now() > *deadline_)
    throw BudgetExceededError("time budget exceeded while planning");
}

void AdaptivePlanner::ensure_reward_bounds(BeliefTreeNode& node, int target) {
  if (node.parent == nullptr) {
    // The root's own reward is a constant offset shared by every action; it
    // never constrains pruning, so it contributes an exact zero term.
    if (node.reward_level == kLevelUnset) {
      node.reward_bounds = BoundPair{0.0, 0.0, 0};
      node.reward_level = kLevelExact;
    }
    return;
  }
  if (node.reward_level >= target) {
    ++diag_.skip_hits;
    return;
  }

  if (node.reward_level == kLevelUnset) {
    node.distance_cost = expected_distance_to_goal(node.belief, config_.goal);
    node.prev_view = simplify(node.parent->belief, config_.schedule, target,
                              node_view_stream(session_, node.id, "view-prev"));
    node.next_view = simplify(node.belief, config_.schedule, target,
                              node_view_stream(session_, node.id, "view-next"));
    node.entropy_cache = make_entropy_bound_cache(
        node.prev_view, node.next_view, node.parent->belief, node.belief,
        node.incoming_action_vec, node.incoming_observation, models_);
    node.reward_level = target;
    node.reward_bounds = fold_reward(node.distance_cost,
                                     node.entropy_cache->bounds());
    ++diag_.scratch_builds;
    return;
  }

  const RngStream prev_stream =
      node_view_stream(session_, node.id, "view-prev");
  const RngStream next_stream =
      node_view_stream(session_, node.id, "view-next");
  BoundPair entropy = node.entropy_cache->bounds();
  while (node.reward_level < target) {
    RefineStep prev_step =
        refine(node.prev_view, node.parent->belief, config_.schedule,
               prev_stream);
    RefineStep next_step =
        refine(node.next_view, node.belief, config_.schedule, next_stream);
    entropy = refine_entropy_bounds(*node.entropy_cache, prev_step.added,
                                    next_step.added, node.parent->belief,
                                    node.belief, models_);
    node.prev_view = std::move(prev_step.view);
    node.next_view = std::move(next_step.view);
    ++node.reward_level;
    ++diag_.refine_steps;
  }
  node.reward_bounds = fold_reward(node.distance_cost, entropy);
}

void AdaptivePlanner::recompute_action(BeliefTreeNode& node, int action) {
  ActionState& state = node.action_state[action];
  const auto& branch = node.children[action];

  double lower = 0.0;
  double upper = 0.0;
  int level = node.reward_level;
  for (const auto& child : branch) {
    lower += child->node_bounds.lower;
    upper += child->node_bounds.upper;
    level = std::min(level, child->resolved_level);
  }
  const double inv = 1.0 / static_cast<double>(branch.size());
  state.bounds.lower = node.reward_bounds.lower + inv * lower;
  state.bounds.upper = node.reward_bounds.upper + inv * upper;
  state.bounds.level = level;
  state.level = level;
}

void AdaptivePlanner::apply_pruning(BeliefTreeNode& node) {
  std::vector<BoundPair> bounds(node.action_state.size());
  std::vector<char> live(node.action_state.size(), 0);
  for (std::size_t a = 0; a < node.action_state.size(); ++a) {
    bounds[a] = node.action_state[a].bounds;
    live[a] = node.action_state[a].has_children && !node.action_state[a].pruned;
  }
  for (int a : prune_children(bounds, live))
    node.action_state[a].pruned = true;
}

int AdaptivePlanner::pick_refinement_action(const BeliefTreeNode& node) const {
  int coarsest = std::numeric_limits<int>::max();
  for (const ActionState& state : node.action_state)
    if (state.has_children && !state.pruned)
      coarsest = std::min(coarsest, state.level);

  int pick = -1;
  double widest = -std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < node.action_state.size(); ++a) {
    const ActionState& state = node.action_state[a];
    if (!state.has_children || state.pruned || state.level != coarsest)
      continue;
    const double gap = state.bounds.width();
    if (gap > widest) {
      widest = gap;
      pick = static_cast<int>(a);
    }
  }
  return pick;
}

void AdaptivePlanner::refine_action(BeliefTreeNode& node, int action,
                                    int target) {
  if (!config_.lazy_immediate_refine) ensure_reward_bounds(node, target);
  for (auto& child : node.children[action]) {
    if (child->resolved_level < target) adapt_subtree(*child, target);
  }
}

void AdaptivePlanner::resolve_first_visit(BeliefTreeNode& node, int target) {
  ensure_reward_bounds(node, target);

  const int n_actions = static_cast<int>(node.children.size());
  node.action_state.assign(n_actions, ActionState{});
  for (int a = 0; a < n_actions; ++a) {
    node.action_state[a].has_children = !node.children[a].empty();
    if (!node.action_state[a].has_children) continue;
    for (auto& child : node.children[a]) adapt_subtree(*child, target);
    recompute_action(node, a);
  }
  apply_pruning(node);

  while (node.live_action_count() > 1) {
    check_deadline();
    const int action = pick_refinement_action(node);
    const int level = node.action_state[action].level;
    if (level >= config_.schedule.finest_level() &&
        node.reward_level >= config_.schedule.finest_level()) {
      // Bounds are exact for every surviving action; keep the lowest index.
      const int keep = node.first_live_action();
      for (int a = keep + 1; a < n_actions; ++a)
        if (node.action_state[a].has_children) node.action_state[a].pruned = true;
      break;
    }
    const int next_level = std::min(level, node.reward_level) + 1;
    refine_action(node, action, next_level);
    for (int a = 0; a < n_actions; ++a)
      if (node.action_state[a].has_children && !node.action_state[a].pruned)
        recompute_action(node, a);
    apply_pruning(node);
    if (config_.lazy_immediate_refine && node.live_action_count() > 1 &&
        node.reward_level < next_level) {
      ensure_reward_bounds(node, next_level);
      for (int a = 0; a < n_actions; ++a)
        if (node.action_state[a].has_children && !node.action_state[a].pruned)
          recompute_action(node, a);
      apply_pruning(node);
    }
  }

  node.survivor = node.first_live_action();
  if (node.survivor < 0)
    throw std::logic_error("pruning left a node without live actions");
  node.node_bounds = node.action_state[node.survivor].bounds;
  node.resolved_level = node.action_state[node.survivor].level;
}

BoundPair AdaptivePlanner::adapt_subtree(BeliefTreeNode& node, int target) {
  check_deadline();
  if (node.resolved_level >= target) {
    ++diag_.skip_hits;
    return node.node_bounds;
  }

  if (node.is_leaf()) {
    ensure_reward_bounds(node, target);
    node.node_bounds = node.reward_bounds;
    node.resolved_level = node.reward_level;
    return node.node_bounds;
  }

  if (node.resolved_level != kLevelUnset) {
    // Already resolved to a single action; refine that branch only.
    refine_action(node, node.survivor, target);
    if (config_.lazy_immediate_refine) ensure_reward_bounds(node, target);
    recompute_action(node, node.survivor);
    node.node_bounds = node.action_state[node.survivor].bounds;
    node.resolved_level = node.action_state[node.survivor].level;
    return node.node_bounds;
  }

  resolve_first_visit(node, target);
  return node.node_bounds;
}

namespace {

void collect_policy(const BeliefTreeNode& node, PolicyTree& policy) {
  if (node.survivor < 0) return;
  policy.choices.emplace(node.id, node.survivor);
  for (const auto& child : node.children[node.survivor])
    collect_policy(*child, policy);
}

void collect_histogram(const BeliefTreeNode& root, int finest,
                       std::vector<std::vector<int>>& histogram) {
  for_each_node(root, [&](const BeliefTreeNode& node) {
    if (node.resolved_level == kLevelUnset) return;
    if (static_cast<int>(histogram.size()) <= node.depth)
      histogram.resize(node.depth + 1, std::vector<int>(finest + 1, 0));
    const int level = std::clamp(node.resolved_level, 0, finest);
    ++histogram[node.depth][level];
  });
}

}  // namespace

PlanResult AdaptivePlanner::solve(BeliefTreeNode& root) {
  const auto start = Clock::now();
  adapt_subtree(root, 0);

  PlanResult result;
  result.action = root.survivor;
  result.bounds = root.node_bounds;
  result.policy.root_action = root.survivor;
  collect_policy(root, result.policy);

  diag_.wall_seconds = seconds_since(start);
  diag_.node_count = count_nodes(root);
  collect_histogram(root, config_.schedule.finest_level(),
                    diag_.level_histogram);
  result.diagnostics = diag_;
  return result;
}

PlanResult plan(const ParticleBelief& root_belief, TreeShape shape,
                const PlannerConfig& config, const ModelSet& models) {
  const RngStream session(config.seed);
  const auto build_start = Clock::now();
  BuildResult built =
      build_tree(shape, root_belief, config, models.with_counters(nullptr),
                 session);
  const double build_seconds = seconds_since(build_start);

  AdaptivePlanner planner(config, models, session);
  PlanResult result = planner.solve(*built.root);
  result.diagnostics.build_seconds = build_seconds;
  return result;
}

PlanResult plan_tree(BeliefTreeNode& root, const PlannerConfig& config,
                     const ModelSet& models) {
  AdaptivePlanner planner(config, models, RngStream(config.seed));
  return planner.solve(root);
}

WarmupResult run_warmup_observations(ParticleBelief belief, Vec2 true_state,
                                     int rounds, const ModelSet& models,
                                     const RngStream& run,
                                     double likelihood_floor,
                                     double resample_ess_fraction) {
  RngStream sim = run.substream("warm-sim");
  for (int round = 0; round < rounds; ++round) {
    if (effective_sample_size(belief) <
        resample_ess_fraction * belief.size()) {
      RngStream resample_rng =
          run.substream("warm-resample", static_cast<std::uint64_t>(round));
      belief = systematic_resample(belief, resample_rng);
    }
    true_state = models.sample_transition(true_state, Vec2::Zero(), sim);
    const Vec2 z = models.sample_observation(true_state, sim);
    RngStream filter_rng =
        run.substream("warm-filter", static_cast<std::uint64_t>(round));
    belief = propagate_and_reweight(belief, Vec2::Zero(), z, models,
                                    filter_rng, likelihood_floor);
  }
  return {std::move(belief), true_state};
}

RecedingResult receding_horizon_run(const RecedingConfig& config,
                                    const ModelSet& models) {
  if (config.steps < 1) throw std::invalid_argument("steps must be >= 1");
  const RngStream run(config.seed);
  RngStream prior_rng = run.substream("prior");
  RngStream sim_rng = run.substream("sim");

  ParticleBelief belief = sample_gaussian_belief(
      config.start, config.prior_sigma, config.particles, prior_rng);
  Vec2 true_state = config.start;
  if (config.warmup_observations > 0) {
    WarmupResult warm = run_warmup_observations(
        std::move(belief), true_state, config.warmup_observations, models,
        run.substream("warmup"), config.planner.likelihood_floor,
        config.resample_ess_fraction);
    belief = std::move(warm.belief);
    true_state = warm.true_state;
  }

  RecedingResult result;
  for (int step = 0; step < config.steps; ++step) {
    StepRecord record;
    record.step = step;
    record.ess = effective_sample_size(belief);

    PlannerConfig step_config = config.planner;
    step_config.seed =
        run.substream("plan", static_cast<std::uint64_t>(step)).seed();

    const RngStream session(step_config.seed);
    BuildResult built = build_tree(config.shape, belief, step_config,
                                   models.with_counters(nullptr), session);

    const auto plan_start = Clock::now();
    AdaptivePlanner planner(step_config, models, session);
    PlanResult plan_result = planner.solve(*built.root);
    record.plan_seconds = seconds_since(plan_start);
    record.action = plan_result.action;
    record.bounds = plan_result.bounds;
    record.plan_counters = plan_result.diagnostics.counters;
    record.level_histogram = plan_result.diagnostics.level_histogram;

    if (config.compare_exact) {
      DensityCounters exact_counters;
      const ModelSet exact_models = models.with_counters(&exact_counters);
      const auto exact_start = Clock::now();
      const ExactObjective exact = exact_objective(
          *built.root,
          make_entropy_distance_reward(step_config.goal, exact_models));
      record.exact_seconds = seconds_since(exact_start);
      record.exact_action = exact.policy.root_action;
      record.exact_value = exact.value;
      record.exact_counters = exact_counters;
    }

    const Vec2 action_vec = step_config.actions[record.action];
    record.executed = action_vec;
    true_state = models.sample_transition(true_state, action_vec, sim_rng);
    record.true_state = true_state;
    record.observation = models.sample_observation(true_state, sim_rng);

    // Resampling guards the filter update only; planning always sees the
    // posterior weights so the in-tree estimator keeps them intact.
    if (effective_sample_size(belief) <
        config.resample_ess_fraction * belief.size()) {
      RngStream resample_rng =
          run.substream("resample", static_cast<std::uint64_t>(step));
      belief = systematic_resample(belief, resample_rng);
      record.resampled = true;
    }
    RngStream filter_rng =
        run.substream("filter", static_cast<std::uint64_t>(step));
    ParticleBelief next = propagate_and_reweight(
        belief, action_vec, record.observation, models, filter_rng,
        step_config.likelihood_floor);

    record.entropy_estimate =
        boers_entropy(belief, next, action_vec, record.observation, models)
            .value;
    record.distance_estimate =
        expected_distance_to_goal(next, step_config.goal);
    record.belief = next;
    belief = std::move(next);

    if (!result.reached_goal &&
        (true_state - step_config.goal).lpNorm<1>() <= config.goal_radius) {
      result.reached_goal = true;
      result.goal_step = step;
    }
    result.steps.push_back(std::move(record));
  }
  return result;
}

}  // namespace simplan
