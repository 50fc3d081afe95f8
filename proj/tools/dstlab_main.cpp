#include <cstdint>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dstlab/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"dstlab - dynamic sparse training experiments and analysis"};
  app.require_subcommand(1);

  std::string config_path, out_dir = "runs";
  auto* train = app.add_subcommand("train", "run one experiment from a config file");
  train->add_option("-c,--config", config_path, "key=value config file")->required();
  train->add_option("-o,--out", out_dir, "output directory for run dirs");

  std::string sweep_path, sweep_out = "runs";
  unsigned jobs = 1;
  auto* sweep = app.add_subcommand("sweep", "run a criterion/density/seed grid");
  sweep->add_option("-c,--config", sweep_path, "sweep file (config plus axis lists)")->required();
  sweep->add_option("-o,--out", sweep_out, "output directory for run dirs");
  sweep->add_option("-j,--jobs", jobs, "worker threads (one experiment each)");

  dstlab::cli::AnalyzeOptions aopts;
  std::vector<std::string> inputs;
  std::string analyze_config, analyze_out;
  std::vector<std::string> criteria;
  std::vector<uint64_t> seeds;
  auto* analyze = app.add_subcommand("analyze", "similarity / itop / rank analyses");
  analyze->add_option("kind", aopts.kind,
                      "similarity-first | similarity-end | itop | rank | always-kept")
      ->required();
  analyze->add_option("inputs", inputs, "run directories or input files");
  analyze->add_option("--config", analyze_config, "base config (similarity-first)");
  analyze->add_option("--criteria", criteria, "criteria to compare (similarity-first)")
      ->delimiter(',');
  analyze->add_option("--seeds", seeds, "seeds to average over (similarity-first)")
      ->delimiter(',');
  analyze->add_option("-o,--out", analyze_out, "output CSV path")->required();

  std::string preset = "small-mlp";
  uint64_t gc_seed = 1;
  size_t samples = 200;
  auto* gradcheck = app.add_subcommand("gradcheck", "finite-difference gradient check");
  gradcheck->add_option("-p,--preset", preset, "architecture preset");
  gradcheck->add_option("--seed", gc_seed, "seed for parameters and batch");
  gradcheck->add_option("--samples", samples,
                        "parameters checked per tensor (0 = every parameter)");

  CLI11_PARSE(app, argc, argv);

  return dstlab::cli::run_guarded([&]() -> int {
    if (*train) return dstlab::cli::cmd_train(config_path, out_dir);
    if (*sweep) return dstlab::cli::cmd_sweep(sweep_path, sweep_out, jobs);
    if (*analyze) {
      for (const auto& in : inputs) aopts.inputs.emplace_back(in);
      aopts.config = analyze_config;
      aopts.criteria = criteria;
      aopts.seeds = seeds;
      aopts.out = analyze_out;
      return dstlab::cli::cmd_analyze(aopts);
    }
    return dstlab::cli::cmd_gradcheck(preset, gc_seed, samples);
  });
}
