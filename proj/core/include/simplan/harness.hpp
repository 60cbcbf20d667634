#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "simplan/planner.hpp"

namespace simplan {

/// One experiment description, loaded from a JSON config file. Every run is
/// fully determined by (config, seed list); nothing is seeded from the
/// clock.
struct RunConfig {
  std::string experiment;  // entropy-study | plan-bench | receding-run
  BeaconWorldConfig world;
  std::vector<double> schedule{0.1, 0.2, 0.4, 0.8, 1.0};
  std::vector<std::string> builders{"despot-like"};
  std::vector<int> particle_counts;
  std::vector<int> horizons;
  std::map<std::string, std::vector<int>> builder_horizons;
  std::vector<std::uint64_t> seeds;
  int steps = 10;
  int warmup_observations = 0;
  int rollouts = 5;
  int powss_obs_depth = 0;
  double time_budget_seconds = 35.0;
  std::size_t max_nodes = 200000;
  bool compare_exact = true;
  std::vector<Vec2> policy;  // predefined actions for the entropy study
  std::optional<double> lambda_lc;
  double resample_ess_fraction = 0.5;
  double likelihood_floor = kLikelihoodFloor;
  bool lazy_immediate_refine = false;
  double goal_radius = 1.0;
};

RunConfig parse_run_config(const std::string& json_text);
RunConfig load_run_config(const std::filesystem::path& path);

/// Rejects inconsistent configs (empty action sets, schedules that do not
/// end at 1.0, missing seeds, ...). Throws std::invalid_argument.
void validate_config(const RunConfig& config);

/// Canonical JSON echo of the config; key-sorted, stable across runs.
std::string canonical_config_json(const RunConfig& config);
std::uint64_t config_hash(const RunConfig& config);

/// Writes `<stem>.meta.json` next to the outputs so every CSV in the
/// directory is self-describing.
void emit_metadata(const RunConfig& config,
                   const std::filesystem::path& out_dir,
                   const std::string& stem);

GaussianTransitionModel make_transition_model(const RunConfig& config);
BeaconObservationModel make_observation_model(const RunConfig& config);
PlannerConfig make_planner_config(const RunConfig& config, int particles,
                                  int horizon, std::uint64_t seed);

struct EntropyStudyRow {
  int step = 0;
  double kf_entropy = 0.0;
  double boers = 0.0;
  double kde = 0.0;
  double naive = 0.0;
  std::vector<double> lower;  // per schedule level
  std::vector<double> upper;
};

/// Filter a trajectory under the config's predefined policy and record, per
/// step, the closed-form Kalman entropy, the sampling-based estimate, the
/// comparison estimators, and the entropy bounds at every schedule level.
std::vector<EntropyStudyRow> entropy_study_rows(const RunConfig& config,
                                                int particles,
                                                std::uint64_t seed);
void run_entropy_study(const RunConfig& config,
                       const std::filesystem::path& out_dir);

struct PlanBenchRow {
  std::string builder;
  int particles = 0;
  int horizon = 0;
  std::uint64_t seed = 0;
  std::string budget_note;  // empty, "build", or "exact"
  int action = -1;
  int exact_action = -1;
  bool actions_equal = false;
  double plan_lower = 0.0;
  double plan_upper = 0.0;
  int level = 0;
  double exact_value = 0.0;
  DensityCounters plan_counters;
  DensityCounters exact_counters;
  int nodes = 0;
  double build_seconds = 0.0;
  double plan_seconds = 0.0;
  double exact_seconds = 0.0;
};

std::vector<PlanBenchRow> plan_bench_rows(const RunConfig& config);
void run_plan_bench(const RunConfig& config,
                    const std::filesystem::path& out_dir);

RecedingConfig make_receding_config(const RunConfig& config,
                                    const std::string& builder, int particles,
                                    int horizon, std::uint64_t seed);
void run_receding(const RunConfig& config,
                  const std::filesystem::path& out_dir);

/// Shift every seed in the config; the CLI exposes this as --seed-offset.
RunConfig with_seed_offset(RunConfig config, std::uint64_t offset);

}  // namespace simplan
