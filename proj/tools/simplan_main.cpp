#include <cstdint>
#include <exception>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "simplan/harness.hpp"

namespace {

struct CommonArgs {
  std::string config_path;
  std::string out_dir = "out";
  std::uint64_t seed_offset = 0;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "Experiment config (JSON)")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->add_option("--out", args.out_dir, "Output directory");
  cmd->add_option("--seed-offset", args.seed_offset,
                  "Offset added to every seed in the config");
}

simplan::RunConfig load(const CommonArgs& args, const std::string& experiment) {
  simplan::RunConfig config = simplan::load_run_config(args.config_path);
  if (config.experiment != experiment) {
    throw std::invalid_argument("config declares experiment '" +
                                config.experiment + "', expected '" +
                                experiment + "'");
  }
  config = simplan::with_seed_offset(std::move(config), args.seed_offset);
  simplan::validate_config(config);
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Belief-space planning experiments: adaptive particle-subset entropy "
      "bounds over belief trees"};
  app.require_subcommand(1);

  CommonArgs entropy_args;
  CLI::App* entropy =
      app.add_subcommand("entropy-study",
                         "Entropy estimators and bounds along a trajectory");
  add_common(entropy, entropy_args);

  CommonArgs bench_args;
  CLI::App* bench = app.add_subcommand(
      "plan-bench", "Adaptive vs exact planner across tree shapes");
  add_common(bench, bench_args);

  CommonArgs receding_args;
  CLI::App* receding = app.add_subcommand(
      "receding-run", "Receding-horizon execution with diagnostics");
  add_common(receding, receding_args);

  CLI11_PARSE(app, argc, argv);

  try {
    if (entropy->parsed()) {
      simplan::run_entropy_study(load(entropy_args, "entropy-study"),
                                 entropy_args.out_dir);
    } else if (bench->parsed()) {
      simplan::run_plan_bench(load(bench_args, "plan-bench"),
                              bench_args.out_dir);
    } else if (receding->parsed()) {
      simplan::run_receding(load(receding_args, "receding-run"),
                            receding_args.out_dir);
    }
  } catch (const std::exception& e) {
    nlohmann::json error;
    error["error"] = e.what();
    std::cerr << error.dump() << std::endl;
    return 1;
  }
  return 0;
}
