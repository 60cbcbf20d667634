#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <vector>

#include "simplan/tree.hpp"

namespace simplan {

struct PlanDiagnostics {
  DensityCounters counters;  // density work spent on bound evaluation
  double wall_seconds = 0.0;
  double build_seconds = 0.0;
  std::uint64_t scratch_builds = 0;  // bound caches built from scratch
  std::uint64_t refine_steps = 0;    // incremental level advances
  std::uint64_t skip_hits = 0;       // requests satisfied by existing levels
  std::vector<std::vector<int>> level_histogram;  // [depth][level] -> nodes
  int node_count = 0;
};

struct PlanResult {
  int action = -1;
  BoundPair bounds;  // bracket the optimal objective at the root
  PolicyTree policy;
  PlanDiagnostics diagnostics;
};

/// Resolves a built belief tree bottom-up: per-action objective bounds are
/// assembled from entropy bounds at the coarsest level, actions are pruned
/// where the bounds separate, and only where siblings still overlap is the
/// simplification level escalated, re-using each node's cached partial sums.
class AdaptivePlanner {
 public:
  AdaptivePlanner(const PlannerConfig& config, const ModelSet& models,
                  const RngStream& session);

  /// Resolve the whole tree starting from the coarsest level and collect
  /// diagnostics. The tree keeps its per-node bound state afterwards.
  PlanResult solve(BeliefTreeNode& root);

  /// Resolve one subtree so its bounds hold at `target` or finer. Exposed
  /// for tests; solve() calls this with target 0 at the root.
  BoundPair adapt_subtree(BeliefTreeNode& node, int target);

  const PlanDiagnostics& diagnostics() const { return diag_; }

 private:
  void ensure_reward_bounds(BeliefTreeNode& node, int target);
  void refine_action(BeliefTreeNode& node, int action, int target);
  void resolve_first_visit(BeliefTreeNode& node, int target);
  void recompute_action(BeliefTreeNode& node, int action);
  void apply_pruning(BeliefTreeNode& node);
  int pick_refinement_action(const BeliefTreeNode& node) const;
  void check_deadline() const;

  PlannerConfig config_;
  ModelSet models_;
  RngStream session_;
  PlanDiagnostics diag_;
  std::optional<std::chrono::steady_clock::time_point> deadline_;
};

/// Build a tree of the given shape and resolve it. Density counters in the
/// result cover bound evaluation only, not tree construction.
PlanResult plan(const ParticleBelief& root_belief, TreeShape shape,
                const PlannerConfig& config, const ModelSet& models);

/// Resolve an externally built tree.
PlanResult plan_tree(BeliefTreeNode& root, const PlannerConfig& config,
                     const ModelSet& models);

struct RecedingConfig {
  PlannerConfig planner;
  TreeShape shape = TreeShape::DespotLike;
  Vec2 start = Vec2::Zero();
  double prior_sigma = 1.0;
  int particles = 100;
  int steps = 10;
  /// Zero-action observation rounds before the first session; they
  /// concentrate the fresh prior the way a deployed filter would be.
  int warmup_observations = 0;
  double goal_radius = 1.0;
  double resample_ess_fraction = 0.5;
  bool compare_exact = true;
  std::uint64_t seed = 0;
};

struct WarmupResult {
  ParticleBelief belief;
  Vec2 true_state;
};

/// Runs `rounds` zero-action filter updates against observations of the true
/// state (which only jitters by transition noise). Resampling follows the
/// same effective-sample-size rule as the receding loop.
WarmupResult run_warmup_observations(ParticleBelief belief, Vec2 true_state,
                                     int rounds, const ModelSet& models,
                                     const RngStream& run,
                                     double likelihood_floor,
                                     double resample_ess_fraction);

struct StepRecord {
  int step = 0;
  Vec2 true_state = Vec2::Zero();
  int action = -1;
  int exact_action = -1;
  Vec2 executed = Vec2::Zero();
  Vec2 observation = Vec2::Zero();
  BoundPair bounds;
  double exact_value = 0.0;
  double entropy_estimate = 0.0;
  double distance_estimate = 0.0;
  double ess = 0.0;
  bool resampled = false;
  DensityCounters plan_counters;
  DensityCounters exact_counters;
  double plan_seconds = 0.0;
  double exact_seconds = 0.0;
  std::vector<std::vector<int>> level_histogram;
  ParticleBelief belief;  // posterior after executing the step
};

struct RecedingResult {
  std::vector<StepRecord> steps;
  bool reached_goal = false;
  int goal_step = -1;
};

/// Plan, execute the first action, observe, update, repeat. Resampling is
/// applied only at the root between executed steps, when the effective
/// sample size falls below the configured fraction of N.
RecedingResult receding_horizon_run(const RecedingConfig& config,
                                    const ModelSet& models);

}  // namespace simplan
