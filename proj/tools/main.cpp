#include <CLI11.hpp>
#include <cstdlib>
#include <iostream>

#include "bcpnn/commands.hpp"
#include "bcpnn/config.hpp"

namespace {

struct CommonArgs {
  std::string config_path;
  std::string checkpoint_path;
  std::string out_dir;
  std::string mode;
  std::uint64_t seed = 0;
  bool seed_set = false;
};

bcpnn::ExperimentConfig resolve_config(const CommonArgs& args) {
  auto config = bcpnn::parse_config_file(args.config_path);
  if (args.seed_set) config.sim.seed = args.seed;
  if (!args.mode.empty()) config.activity = bcpnn::activity_from_name(args.mode);
  if (!args.out_dir.empty())
    config.output_dir = args.out_dir;
  else if (const char* env = std::getenv("BCPNN_OUT_DIR"); env && *env)
    config.output_dir = env;
  return config;
}

void add_common(CLI::App* cmd, CommonArgs& args, bool with_checkpoint) {
  cmd->add_option("--config", args.config_path, "experiment config file")
      ->required();
  cmd->add_option("--out", args.out_dir, "output directory (overrides output.dir)");
  cmd->add_option("--seed", args.seed, "master seed override")
      ->each([&args](const std::string&) { args.seed_set = true; });
  cmd->add_option("--mode", args.mode, "activity mode override")
      ->check(CLI::IsMember({"spiking", "rate"}));
  if (with_checkpoint)
    cmd->add_option("--checkpoint", args.checkpoint_path, "checkpoint file");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spiking BCPNN simulator: unsupervised representation learning with "
               "Hebbian-Bayesian plasticity and structural rewiring"};
  app.require_subcommand(1);

  CommonArgs args;
  std::string export_what;

  CLI::App* train = app.add_subcommand("train", "unsupervised training run");
  add_common(train, args, false);
  CLI::App* eval = app.add_subcommand("eval", "linear readout accuracy of a checkpoint");
  add_common(eval, args, true);
  CLI::App* sweep = app.add_subcommand("sweep", "tau_z x f_max grid on the reduced set");
  add_common(sweep, args, false);
  CLI::App* exp = app.add_subcommand("export", "diagnostic exports from a checkpoint");
  add_common(exp, args, true);
  exp->add_option("what", export_what, "rf | rates | supports")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    const auto config = resolve_config(args);
    if (train->parsed()) bcpnn::cmd_train(config);
    if (eval->parsed()) bcpnn::cmd_eval(config, args.checkpoint_path);
    if (sweep->parsed()) bcpnn::cmd_sweep(config);
    if (exp->parsed()) bcpnn::cmd_export(config, args.checkpoint_path, export_what);
  } catch (const bcpnn::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
