// Command-line harness: seeded evolutionary search experiments with unified
// functional hashing, plus sweeps, counterfactual collision checks, and
// candidate replay. See README.md for config and output formats.

#include <cstdio>
#include <cstdlib>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ufh/experiment.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;

ufh::fs::path resolve_out_root(const std::string& cli_out, const ufh::ExperimentConfig& cfg) {
  if (!cli_out.empty()) return cli_out;
  if (!cfg.output_dir.empty()) return cfg.output_dir;
  if (const char* env = std::getenv("UFHLAB_OUT")) return env;
  return "runs";
}

ufh::ExperimentConfig load_config(const std::string& path,
                                  const std::vector<std::uint64_t>& seed_override) {
  ufh::ExperimentConfig cfg = ufh::experiment_config_from_json(ufh::parse_json_file(path));
  if (!seed_override.empty()) cfg.seeds = seed_override;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Evolutionary search laboratory with unified functional hashing"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::vector<std::uint64_t> seeds;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "Experiment config (JSON)")->required();
    cmd->add_option("--out", out_dir, "Output directory root");
    cmd->add_option("--seeds", seeds, "Override experiment seeds")->delimiter(',');
  };

  CLI::App* run = app.add_subcommand("run", "Run one experiment per seed");
  add_common(run);

  CLI::App* sweep = app.add_subcommand("sweep", "Run the config's sweep grid");
  add_common(sweep);

  CLI::App* counterfactual = app.add_subcommand(
      "counterfactual", "FEC run that also evaluates every cache hit and reports collisions");
  add_common(counterfactual);

  CLI::App* replay = app.add_subcommand("replay", "Re-evaluate a serialized candidate");
  std::string candidate_path;
  std::optional<std::uint64_t> task_seed;
  replay->add_option("--candidate", candidate_path, "Candidate JSON (or a summary.json)")
      ->required();
  replay->add_option("--config", config_path, "Experiment config (JSON)")->required();
  replay->add_option("--task-seed", task_seed,
                     "Fresh task seed for meta-validation (default: the config's seed)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (run->parsed()) {
      ufh::ExperimentConfig cfg = load_config(config_path, seeds);
      return ufh::command_run(cfg, resolve_out_root(out_dir, cfg));
    }
    if (sweep->parsed()) {
      ufh::ExperimentConfig cfg = load_config(config_path, seeds);
      return ufh::command_sweep(cfg, resolve_out_root(out_dir, cfg));
    }
    if (counterfactual->parsed()) {
      ufh::ExperimentConfig cfg = load_config(config_path, seeds);
      return ufh::command_counterfactual(cfg, resolve_out_root(out_dir, cfg));
    }
    if (replay->parsed()) {
      ufh::ExperimentConfig cfg = load_config(config_path, {});
      auto [fitness, hash] =
          ufh::replay_candidate(cfg, ufh::parse_json_file(candidate_path), task_seed);
      std::printf("fitness %.17g\n", fitness);
      std::printf("hash %s\n", ufh::to_hex16(hash).c_str());
      return kExitOk;
    }
  } catch (const ufh::IoError& e) {
    std::fprintf(stderr, "io error: %s\n", e.what());
    return kExitIo;
  } catch (const ufh::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitConfig;
  }
  return kExitOk;
}
