#include "simplan/harness.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace simplan {
namespace {

using nlohmann::json;

Vec2 parse_vec2(const json& j, const char* what) {
  if (!j.is_array() || j.size() != 2)
    throw std::invalid_argument(std::string(what) + " must be a [x, y] pair");
  return Vec2(j[0].get<double>(), j[1].get<double>());
}

Vec2 named_action(const std::string& name, double step) {
  if (name == "left") return Vec2(-step, 0.0);
  if (name == "right") return Vec2(step, 0.0);
  if (name == "up") return Vec2(0.0, step);
  if (name == "down") return Vec2(0.0, -step);
  throw std::invalid_argument("unknown action name: " + name);
}

std::string format_double(double v) {
  char buffer[40];
  std::snprintf(buffer, sizeof(buffer), "%.17g", v);
  return buffer;
}

std::ofstream open_csv(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  return out;
}

}  // namespace

RunConfig parse_run_config(const std::string& json_text) {
  const json j = json::parse(json_text);
  RunConfig config;

  config.experiment = j.at("experiment").get<std::string>();

  const json& w = j.at("world");
  config.world.start = parse_vec2(w.at("start"), "world.start");
  if (w.contains("goal")) config.world.goal = parse_vec2(w.at("goal"), "world.goal");
  config.world.prior_sigma = w.at("prior_sigma").get<double>();
  config.world.sigma_transition = w.at("sigma_transition").get<double>();
  config.world.sigma_observation = w.at("sigma_observation").get<double>();
  config.world.range_floor = w.at("range_floor").get<double>();
  for (const json& b : w.at("beacons"))
    config.world.beacons.push_back(parse_vec2(b, "beacon"));
  config.world.step_length = w.value("step_length", 1.0);
  if (w.contains("actions")) {
    for (const json& a : w.at("actions")) {
      if (a.is_string()) {
        const auto name = a.get<std::string>();
        config.world.actions.push_back(
            named_action(name, config.world.step_length));
        config.world.action_names.push_back(name);
      } else {
        config.world.actions.push_back(parse_vec2(a, "action"));
        config.world.action_names.push_back(
            "a" + std::to_string(config.world.action_names.size()));
      }
    }
  }
  config.world.horizon = w.value("horizon", 1);
  config.world.particles = w.value("particles", 100);
  config.world.obs_branching = w.value("obs_branching", 1);
  config.world.seed = w.value("seed", std::uint64_t{0});

  if (j.contains("schedule"))
    config.schedule = j.at("schedule").get<std::vector<double>>();
  if (j.contains("builders"))
    config.builders = j.at("builders").get<std::vector<std::string>>();
  if (j.contains("particle_counts"))
    config.particle_counts = j.at("particle_counts").get<std::vector<int>>();
  if (j.contains("horizons"))
    config.horizons = j.at("horizons").get<std::vector<int>>();
  if (j.contains("builder_horizons")) {
    for (const auto& [key, value] : j.at("builder_horizons").items())
      config.builder_horizons[key] = value.get<std::vector<int>>();
  }
  if (j.contains("seeds"))
    config.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
  config.steps = j.value("steps", 10);
  config.warmup_observations = j.value("warmup_observations", 0);
  config.rollouts = j.value("rollouts", 5);
  config.powss_obs_depth = j.value("powss_obs_depth", 0);
  config.time_budget_seconds = j.value("time_budget_seconds", 35.0);
  config.max_nodes = j.value("max_nodes", std::size_t{200000});
  config.compare_exact = j.value("compare_exact", true);
  if (j.contains("policy"))
    for (const json& p : j.at("policy"))
      config.policy.push_back(parse_vec2(p, "policy action"));
  if (j.contains("lambda_lc") && !j.at("lambda_lc").is_null())
    config.lambda_lc = j.at("lambda_lc").get<double>();
  config.resample_ess_fraction = j.value("resample_ess_fraction", 0.5);
  config.likelihood_floor = j.value("likelihood_floor", kLikelihoodFloor);
  config.lazy_immediate_refine = j.value("lazy_immediate_refine", false);
  config.goal_radius = j.value("goal_radius", 1.0);
  return config;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read config " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_run_config(buffer.str());
}

void validate_config(const RunConfig& config) {
  const bool is_entropy = config.experiment == "entropy-study";
  const bool is_bench = config.experiment == "plan-bench";
  const bool is_receding = config.experiment == "receding-run";
  if (!is_entropy && !is_bench && !is_receding)
    throw std::invalid_argument("unknown experiment: " + config.experiment);

  SimplificationSchedule validate_schedule(config.schedule);  // throws if bad
  (void)validate_schedule;

  if (config.seeds.empty())
    throw std::invalid_argument("seeds must be listed explicitly");
  if (config.world.beacons.empty())
    throw std::invalid_argument("at least one beacon required");
  if (!(config.world.prior_sigma > 0.0) ||
      !(config.world.sigma_transition > 0.0) ||
      !(config.world.sigma_observation > 0.0) ||
      !(config.world.range_floor > 0.0))
    throw std::invalid_argument("world noise scales must be positive");
  if (config.steps < 1) throw std::invalid_argument("steps must be >= 1");

  if (is_entropy) {
    if (config.policy.empty())
      throw std::invalid_argument("entropy-study needs a predefined policy");
    if (config.particle_counts.empty())
      throw std::invalid_argument("entropy-study needs particle_counts");
  }
  if (is_bench || is_receding) {
    if (config.world.actions.empty())
      throw std::invalid_argument("planning experiments need an action set");
    if (config.world.horizon < 1)
      throw std::invalid_argument("horizon must be >= 1");
  }
  if (is_bench) {
    if (config.particle_counts.empty() || config.horizons.empty())
      throw std::invalid_argument("plan-bench needs particle_counts and horizons");
    if (config.builders.empty())
      throw std::invalid_argument("plan-bench needs at least one builder");
    if (!(config.time_budget_seconds > 0.0))
      throw std::invalid_argument("time budget must be positive");
  }
  for (const std::string& builder : config.builders)
    tree_shape_from_name(builder);  // throws on unknown names
}

namespace {

json config_to_json(const RunConfig& config) {
  json w;
  w["start"] = {config.world.start.x(), config.world.start.y()};
  w["goal"] = {config.world.goal.x(), config.world.goal.y()};
  w["prior_sigma"] = config.world.prior_sigma;
  w["sigma_transition"] = config.world.sigma_transition;
  w["sigma_observation"] = config.world.sigma_observation;
  w["range_floor"] = config.world.range_floor;
  w["beacons"] = json::array();
  for (const Vec2& b : config.world.beacons) w["beacons"].push_back({b.x(), b.y()});
  w["actions"] = json::array();
  for (std::size_t i = 0; i < config.world.actions.size(); ++i) {
    w["actions"].push_back(
        {config.world.actions[i].x(), config.world.actions[i].y()});
  }
  w["action_names"] = config.world.action_names;
  w["step_length"] = config.world.step_length;
  w["horizon"] = config.world.horizon;
  w["particles"] = config.world.particles;
  w["obs_branching"] = config.world.obs_branching;
  w["seed"] = config.world.seed;

  json j;
  j["experiment"] = config.experiment;
  j["world"] = std::move(w);
  j["schedule"] = config.schedule;
  j["builders"] = config.builders;
  j["particle_counts"] = config.particle_counts;
  j["horizons"] = config.horizons;
  j["builder_horizons"] = config.builder_horizons;
  j["seeds"] = config.seeds;
  j["steps"] = config.steps;
  j["warmup_observations"] = config.warmup_observations;
  j["rollouts"] = config.rollouts;
  j["powss_obs_depth"] = config.powss_obs_depth;
  j["time_budget_seconds"] = config.time_budget_seconds;
  j["max_nodes"] = config.max_nodes;
  j["compare_exact"] = config.compare_exact;
  j["policy"] = json::array();
  for (const Vec2& p : config.policy) j["policy"].push_back({p.x(), p.y()});
  if (config.lambda_lc) j["lambda_lc"] = *config.lambda_lc;
  j["resample_ess_fraction"] = config.resample_ess_fraction;
  j["likelihood_floor"] = config.likelihood_floor;
  j["lazy_immediate_refine"] = config.lazy_immediate_refine;
  j["goal_radius"] = config.goal_radius;
  return j;
}

}  // namespace

std::string canonical_config_json(const RunConfig& config) {
  return config_to_json(config).dump(2);
}

std::uint64_t config_hash(const RunConfig& config) {
  const std::string text = canonical_config_json(config);
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

void emit_metadata(const RunConfig& config,
                   const std::filesystem::path& out_dir,
                   const std::string& stem) {
  json meta;
  meta["config"] = config_to_json(config);
  char hash[24];
  std::snprintf(hash, sizeof(hash), "%016" PRIx64, config_hash(config));
  meta["config_hash"] = hash;
  meta["tool"] = "simplan";
  std::ofstream out(out_dir / (stem + ".meta.json"));
  if (!out) throw std::runtime_error("cannot write metadata in " + out_dir.string());
  out << meta.dump(2) << "\n";
}

GaussianTransitionModel make_transition_model(const RunConfig& config) {
  return GaussianTransitionModel(config.world.sigma_transition);
}

BeaconObservationModel make_observation_model(const RunConfig& config) {
  return BeaconObservationModel(config.world.beacons,
                                config.world.sigma_observation,
                                config.world.range_floor);
}

PlannerConfig make_planner_config(const RunConfig& config, int particles,
                                  int horizon, std::uint64_t seed) {
  (void)particles;
  PlannerConfig planner;
  planner.actions = config.world.actions;
  planner.goal = config.world.goal;
  planner.horizon = horizon;
  planner.obs_branching = config.world.obs_branching;
  planner.pomcp_rollouts = config.rollouts;
  planner.powss_obs_depth = config.powss_obs_depth;
  planner.likelihood_floor = config.likelihood_floor;
  planner.schedule = SimplificationSchedule(config.schedule);
  planner.seed = seed;
  planner.max_nodes = config.max_nodes;
  planner.time_budget_seconds = config.time_budget_seconds;
  planner.lazy_immediate_refine = config.lazy_immediate_refine;
  return planner;
}

std::vector<EntropyStudyRow> entropy_study_rows(const RunConfig& config,
                                                int particles,
                                                std::uint64_t seed) {
  const GaussianTransitionModel transition = make_transition_model(config);
  const BeaconObservationModel observation = make_observation_model(config);
  const ModelSet models(transition, observation);
  const SimplificationSchedule schedule(config.schedule);
  const int n_levels = schedule.finest_level() + 1;

  const RngStream run(seed);
  RngStream prior_rng = run.substream("prior");
  RngStream sim_rng = run.substream("sim");

  ParticleBelief belief = sample_gaussian_belief(
      config.world.start, config.world.prior_sigma, particles, prior_rng);
  GaussianState kf{config.world.start,
                   config.world.prior_sigma * config.world.prior_sigma *
                       Mat2::Identity()};
  Vec2 true_state = config.world.start;

  std::vector<EntropyStudyRow> rows;
  for (int step = 0; step < config.steps; ++step) {
    if (effective_sample_size(belief) <
        config.resample_ess_fraction * belief.size()) {
      RngStream resample_rng =
          run.substream("resample", static_cast<std::uint64_t>(step));
      belief = systematic_resample(belief, resample_rng);
    }

    const Vec2 action = config.policy[step % config.policy.size()];
    true_state = models.sample_transition(true_state, action, sim_rng);
    const Vec2 z = models.sample_observation(true_state, sim_rng);

    RngStream filter_rng =
        run.substream("filter", static_cast<std::uint64_t>(step));
    ParticleBelief next = propagate_and_reweight(
        belief, action, z, models, filter_rng, config.likelihood_floor);
    kf = kalman_step(kf, action, z, transition, observation);

    EntropyStudyRow row;
    row.step = step;
    row.kf_entropy = gaussian_entropy(kf);
    row.boers = boers_entropy(belief, next, action, z, models).value;
    row.kde = kde_entropy(next);
    row.naive = naive_weight_entropy(next);

    const RngStream prev_stream =
        run.substream("study-view-prev", static_cast<std::uint64_t>(step));
    const RngStream next_stream =
        run.substream("study-view-next", static_cast<std::uint64_t>(step));
    SimplifiedView prev_view = simplify(belief, schedule, 0, prev_stream);
    SimplifiedView next_view = simplify(next, schedule, 0, next_stream);
    EntropyBoundCache cache = make_entropy_bound_cache(
        prev_view, next_view, belief, next, action, z, models);
    BoundPair bounds = cache.bounds();
    row.lower.resize(n_levels);
    row.upper.resize(n_levels);
    row.lower[0] = bounds.lower;
    row.upper[0] = bounds.upper;
    for (int level = 1; level < n_levels; ++level) {
      RefineStep prev_step = refine(prev_view, belief, schedule, prev_stream);
      RefineStep next_step = refine(next_view, next, schedule, next_stream);
      bounds = refine_entropy_bounds(cache, prev_step.added, next_step.added,
                                     belief, next, models);
      prev_view = std::move(prev_step.view);
      next_view = std::move(next_step.view);
      row.lower[level] = bounds.lower;
      row.upper[level] = bounds.upper;
    }

    rows.push_back(std::move(row));
    belief = std::move(next);
  }
  return rows;
}

void run_entropy_study(const RunConfig& config,
                       const std::filesystem::path& out_dir) {
  validate_config(config);
  std::filesystem::create_directories(out_dir);
  emit_metadata(config, out_dir, "entropy_study");

  const SimplificationSchedule schedule(config.schedule);
  const int n_levels = schedule.finest_level() + 1;

  for (int particles : config.particle_counts) {
    for (std::uint64_t seed : config.seeds) {
      const auto rows = entropy_study_rows(config, particles, seed);
      auto out = open_csv(out_dir / ("entropy_N" + std::to_string(particles) +
                                     "_seed" + std::to_string(seed) + ".csv"));
      out << "step,kf_entropy,boers,kde,naive";
      for (int level = 0; level < n_levels; ++level)
        out << ",lb_" << level << ",ub_" << level;
      out << "\n";
      for (const auto& row : rows) {
        out << row.step << ',' << format_double(row.kf_entropy) << ','
            << format_double(row.boers) << ',' << format_double(row.kde) << ','
            << format_double(row.naive);
        for (int level = 0; level < n_levels; ++level)
          out << ',' << format_double(row.lower[level]) << ','
              << format_double(row.upper[level]);
        out << "\n";
      }
    }
  }
}

namespace {

std::vector<int> horizons_for(const RunConfig& config,
                              const std::string& builder) {
  const auto it = config.builder_horizons.find(builder);
  return it != config.builder_horizons.end() ? it->second : config.horizons;
}

}  // namespace

std::vector<PlanBenchRow> plan_bench_rows(const RunConfig& config) {
  const GaussianTransitionModel transition = make_transition_model(config);
  const BeaconObservationModel observation = make_observation_model(config);
  const ModelSet models(transition, observation);

  std::vector<PlanBenchRow> rows;
  for (const std::string& builder : config.builders) {
    const TreeShape shape = tree_shape_from_name(builder);
    for (int particles : config.particle_counts) {
      for (int horizon : horizons_for(config, builder)) {
        for (std::uint64_t seed : config.seeds) {
          PlanBenchRow row;
          row.builder = builder;
          row.particles = particles;
          row.horizon = horizon;
          row.seed = seed;

          const PlannerConfig planner_config =
              make_planner_config(config, particles, horizon, seed);
          RngStream prior_rng = RngStream(seed).substream("prior");
          ParticleBelief root_belief = sample_gaussian_belief(
              config.world.start, config.world.prior_sigma, particles,
              prior_rng);
          if (config.warmup_observations > 0) {
            WarmupResult warm = run_warmup_observations(
                std::move(root_belief), config.world.start,
                config.warmup_observations, models,
                RngStream(seed).substream("warmup"),
                config.likelihood_floor, config.resample_ess_fraction);
            root_belief = std::move(warm.belief);
          }

          const RngStream session(seed);
          std::unique_ptr<BeliefTreeNode> root;
          try {
            const auto build_start = std::chrono::steady_clock::now();
            BuildResult built =
                build_tree(shape, root_belief, planner_config,
                           models.with_counters(nullptr), session);
            row.build_seconds = std::chrono::duration<double>(
                                    std::chrono::steady_clock::now() -
                                    build_start)
                                    .count();
            root = std::move(built.root);
            row.nodes = built.node_count;

            AdaptivePlanner planner(planner_config, models, session);
            PlanResult plan_result = planner.solve(*root);
            row.plan_seconds = plan_result.diagnostics.wall_seconds;
            row.action = plan_result.action;
            row.plan_lower = plan_result.bounds.lower;
            row.plan_upper = plan_result.bounds.upper;
            row.level = plan_result.bounds.level;
            row.plan_counters = plan_result.diagnostics.counters;
          } catch (const BudgetExceededError&) {
            row.budget_note = "build";
            rows.push_back(std::move(row));
            continue;
          }

          if (config.compare_exact) {
            try {
              DensityCounters exact_counters;
              const ModelSet exact_models =
                  models.with_counters(&exact_counters);
              const auto deadline =
                  std::chrono::steady_clock::now() +
                  std::chrono::duration_cast<
                      std::chrono::steady_clock::duration>(
                      std::chrono::duration<double>(
                          config.time_budget_seconds));
              const auto exact_start = std::chrono::steady_clock::now();
              const ExactObjective exact = exact_objective(
                  *root,
                  make_entropy_distance_reward(config.world.goal,
                                               exact_models),
                  deadline);
              row.exact_seconds = std::chrono::duration<double>(
                                      std::chrono::steady_clock::now() -
                                      exact_start)
                                      .count();
              row.exact_action = exact.policy.root_action;
              row.exact_value = exact.value;
              row.exact_counters = exact_counters;
              row.actions_equal = row.exact_action == row.action;
            } catch (const BudgetExceededError&) {
              row.budget_note = "exact";
            }
          }
          rows.push_back(std::move(row));
        }
      }
    }
  }
  return rows;
}

void run_plan_bench(const RunConfig& config,
                    const std::filesystem::path& out_dir) {
  validate_config(config);
  std::filesystem::create_directories(out_dir);
  emit_metadata(config, out_dir, "plan_bench");

  const auto rows = plan_bench_rows(config);
  char hash[24];
  std::snprintf(hash, sizeof(hash), "%016" PRIx64, config_hash(config));

  auto bench = open_csv(out_dir / "bench.csv");
  bench << "builder,particles,horizon,seed,config_hash,budget_note,action,"
           "exact_action,actions_equal,plan_lower,plan_upper,level,"
           "exact_value,plan_transition,plan_observation,exact_transition,"
           "exact_observation,nodes\n";
  for (const auto& row : rows) {
    bench << row.builder << ',' << row.particles << ',' << row.horizon << ','
          << row.seed << ',' << hash << ',' << row.budget_note << ','
          << row.action << ',' << row.exact_action << ','
          << (row.actions_equal ? 1 : 0) << ','
          << format_double(row.plan_lower) << ','
          << format_double(row.plan_upper) << ',' << row.level << ','
          << format_double(row.exact_value) << ',' << row.plan_counters.transition
          << ',' << row.plan_counters.observation << ','
          << row.exact_counters.transition << ','
          << row.exact_counters.observation << ',' << row.nodes << "\n";
  }

  auto timings = open_csv(out_dir / "bench_timings.csv");
  timings << "builder,particles,horizon,seed,build_seconds,plan_seconds,"
             "exact_seconds\n";
  for (const auto& row : rows) {
    timings << row.builder << ',' << row.particles << ',' << row.horizon << ','
            << row.seed << ',' << format_double(row.build_seconds) << ','
            << format_double(row.plan_seconds) << ','
            << format_double(row.exact_seconds) << "\n";
  }

  // Mean per cell across seeds, the headline table.
  auto summary = open_csv(out_dir / "bench_summary.csv");
  summary << "builder,particles,horizon,cells,completed,actions_equal_all,"
             "mean_plan_seconds,mean_exact_seconds,mean_plan_density,"
             "mean_exact_density\n";
  std::map<std::tuple<std::string, int, int>, std::vector<const PlanBenchRow*>>
      cells;
  for (const auto& row : rows)
    cells[{row.builder, row.particles, row.horizon}].push_back(&row);
  for (const auto& [key, cell_rows] : cells) {
    int completed = 0;
    bool all_equal = true;
    double plan_s = 0.0, exact_s = 0.0, plan_d = 0.0, exact_d = 0.0;
    for (const auto* row : cell_rows) {
      if (!row->budget_note.empty()) continue;
      ++completed;
      all_equal = all_equal && (!config.compare_exact || row->actions_equal);
      plan_s += row->plan_seconds;
      exact_s += row->exact_seconds;
      plan_d += static_cast<double>(row->plan_counters.total());
      exact_d += static_cast<double>(row->exact_counters.total());
    }
    const double inv = completed > 0 ? 1.0 / completed : 0.0;
    summary << std::get<0>(key) << ',' << std::get<1>(key) << ','
            << std::get<2>(key) << ',' << cell_rows.size() << ',' << completed
            << ',' << (all_equal ? 1 : 0) << ','
            << format_double(plan_s * inv) << ',' << format_double(exact_s * inv)
            << ',' << format_double(plan_d * inv) << ','
            << format_double(exact_d * inv) << "\n";
  }
}

RecedingConfig make_receding_config(const RunConfig& config,
                                    const std::string& builder, int particles,
                                    int horizon, std::uint64_t seed) {
  RecedingConfig receding;
  receding.planner = make_planner_config(config, particles, horizon, seed);
  receding.shape = tree_shape_from_name(builder);
  receding.start = config.world.start;
  receding.prior_sigma = config.world.prior_sigma;
  receding.particles = particles;
  receding.steps = config.steps;
  receding.warmup_observations = config.warmup_observations;
  receding.goal_radius = config.goal_radius;
  receding.resample_ess_fraction = config.resample_ess_fraction;
  receding.compare_exact = config.compare_exact;
  receding.seed = seed;
  return receding;
}

void run_receding(const RunConfig& config,
                  const std::filesystem::path& out_dir) {
  validate_config(config);
  std::filesystem::create_directories(out_dir);
  emit_metadata(config, out_dir, "receding_run");

  const GaussianTransitionModel transition = make_transition_model(config);
  const BeaconObservationModel observation = make_observation_model(config);
  const ModelSet models(transition, observation);
  const std::string builder = config.builders.front();

  for (std::uint64_t seed : config.seeds) {
    const RecedingConfig receding = make_receding_config(
        config, builder, config.world.particles, config.world.horizon, seed);
    const RecedingResult result = receding_horizon_run(receding, models);
    const std::string tag = "_seed" + std::to_string(seed) + ".csv";

    auto trajectory = open_csv(out_dir / ("trajectory" + tag));
    trajectory << "step,true_x,true_y,action,action_name,exact_action,"
                  "actions_equal,resampled,ess,entropy,distance,lower,upper,"
                  "level,exact_value,plan_transition,plan_observation,"
                  "exact_transition,exact_observation\n";
    for (const auto& step : result.steps) {
      const std::string name =
          step.action >= 0 &&
                  step.action < static_cast<int>(config.world.action_names.size())
              ? config.world.action_names[step.action]
              : "a" + std::to_string(step.action);
      trajectory << step.step << ',' << format_double(step.true_state.x())
                 << ',' << format_double(step.true_state.y()) << ','
                 << step.action << ',' << name << ',' << step.exact_action
                 << ',' << (step.action == step.exact_action ? 1 : 0) << ','
                 << (step.resampled ? 1 : 0) << ',' << format_double(step.ess)
                 << ',' << format_double(step.entropy_estimate) << ','
                 << format_double(step.distance_estimate) << ','
                 << format_double(step.bounds.lower) << ','
                 << format_double(step.bounds.upper) << ',' << step.bounds.level
                 << ',' << format_double(step.exact_value) << ','
                 << step.plan_counters.transition << ','
                 << step.plan_counters.observation << ','
                 << step.exact_counters.transition << ','
                 << step.exact_counters.observation << "\n";
    }

    auto timings = open_csv(out_dir / ("timings" + tag));
    timings << "step,plan_seconds,exact_seconds\n";
    for (const auto& step : result.steps)
      timings << step.step << ',' << format_double(step.plan_seconds) << ','
              << format_double(step.exact_seconds) << "\n";

    auto histogram = open_csv(out_dir / ("histogram" + tag));
    histogram << "step,depth,level,count,depth_total,share\n";
    for (const auto& step : result.steps) {
      for (std::size_t depth = 0; depth < step.level_histogram.size(); ++depth) {
        int depth_total = 0;
        for (int count : step.level_histogram[depth]) depth_total += count;
        for (std::size_t level = 0; level < step.level_histogram[depth].size();
             ++level) {
          const int count = step.level_histogram[depth][level];
          const double share =
              depth_total > 0 ? static_cast<double>(count) / depth_total : 0.0;
          histogram << step.step << ',' << depth << ',' << level << ',' << count
                    << ',' << depth_total << ',' << format_double(share) << "\n";
        }
      }
    }

    auto beliefs = open_csv(out_dir / ("beliefs" + tag));
    beliefs << "step,particle,x,y,weight\n";
    for (const auto& step : result.steps) {
      for (int i = 0; i < step.belief.size(); ++i) {
        beliefs << step.step << ',' << i << ','
                << format_double(step.belief.particles[i].x()) << ','
                << format_double(step.belief.particles[i].y()) << ','
                << format_double(step.belief.weights[i]) << "\n";
      }
    }
  }
}

RunConfig with_seed_offset(RunConfig config, std::uint64_t offset) {
  for (std::uint64_t& seed : config.seeds) seed += offset;
  return config;
}

}  // namespace simplan
