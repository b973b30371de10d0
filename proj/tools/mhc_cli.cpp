// Command-line front end: mhc_cli <experiment> --config FILE [--seed N] [--out DIR]

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "mhc/config.hpp"
#include "mhc/experiments.hpp"
#include "mhc/report.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

struct CommandArgs {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
};

int run_command(const std::string& name, const CommandArgs& args) {
  using namespace mhc::cli;
  std::ifstream f(args.config, std::ios::binary);
  if (!f) {
    std::cerr << "error: cannot read config '" << args.config << "'\n";
    return kExitConfig;
  }
  std::stringstream ss;
  ss << f.rdbuf();

  ExperimentConfig cfg;
  try {
    cfg = parse_config(ss.str(), args.config, name, args.seed.has_value());
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  if (args.seed) cfg.run.seed = *args.seed;
  if (!args.out.empty()) cfg.output.directory = args.out;
  try {
    std::filesystem::create_directories(cfg.output.directory);
    const auto probe = std::filesystem::path(cfg.output.directory) / ".mhc_write_probe";
    write_text_file(probe, "");
    std::filesystem::remove(probe);
  } catch (const std::exception& e) {
    std::cerr << "error: output directory '" << cfg.output.directory << "' is not writable: " << e.what() << "\n";
    return kExitConfig;
  }

  Sidecar meta;
  meta.config = config_to_json(cfg);
  meta.version = mhc::kVersion;
  meta.seed = cfg.run.seed;
  meta.experiment = cfg.experiment;
  meta.timestamp = utc_timestamp();

  RunOutput out;
  int status = 0;
  try {
    mhc::RandomStream rng(cfg.run.seed);
    run_experiment(cfg, rng, out);
    meta.complete = true;
  } catch (const std::exception& e) {
    meta.error = e.what();
    std::cerr << "error: " << cfg.experiment << ": " << e.what() << "\n";
    status = kExitRuntime;
  }
  for (const auto& w : out.warnings) std::cerr << "warning: " << w << "\n";
  try {
    for (const auto& p : emit_results(cfg.output.directory, out, meta, cfg.output.formats)) {
      std::cout << p.string() << "\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "error: writing results: " << e.what() << "\n";
    return kExitRuntime;
  }
  return status;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Metropolis-Hastings coupling experiments"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(mhc::kVersion));

  const std::vector<std::pair<std::string, std::string>> commands{
      {"sample", "run one chain and report moments"},
      {"couple", "run a synchronously coupled pair"},
      {"scaling", "rejection probability across a step-size grid"},
      {"bounds", "evaluate the analytic bound calculators"},
      {"plan", "choose radius, step size and step count for a target accuracy"},
      {"exit", "exit probability from a ball versus its bound"},
      {"tps-demo", "double-well path model sweeps over m = 3..8"}};

  std::vector<CommandArgs> args(commands.size());
  std::vector<CLI::App*> subs;
  for (std::size_t i = 0; i < commands.size(); ++i) {
    CLI::App* sub = app.add_subcommand(commands[i].first, commands[i].second);
    sub->add_option("--config", args[i].config, "YAML experiment configuration")->required();
    sub->add_option("--seed", args[i].seed, "experiment seed (overrides run.seed)");
    sub->add_option("--out", args[i].out, "output directory (overrides output.directory)");
    subs.push_back(sub);
  }

  CLI11_PARSE(app, argc, argv);

  for (std::size_t i = 0; i < subs.size(); ++i) {
    if (subs[i]->parsed()) return run_command(commands[i].first, args[i]);
  }
  return 1;
}
