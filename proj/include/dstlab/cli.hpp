#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

namespace dstlab::cli {

// Runs one experiment; artifacts land in out_dir/<config-hash>_s<seed>/ with
// a DONE marker on success. Returns the process exit status.
int cmd_train(const std::filesystem::path& config_path, const std::filesystem::path& out_dir);

// Executes the sweep grid with `jobs` worker threads, skipping run
// directories that already carry a DONE marker and discarding partial ones.
// Writes manifest.csv; nonzero iff any run failed.
int cmd_sweep(const std::filesystem::path& sweep_path, const std::filesystem::path& out_dir,
              unsigned jobs);

struct AnalyzeOptions {
  std::string kind;  // similarity-first | similarity-end | itop | rank | always-kept
  std::vector<std::filesystem::path> inputs;  // run dirs or files, per kind
  std::filesystem::path config;               // similarity-first base config
  std::vector<std::string> criteria;          // similarity-first
  std::vector<uint64_t> seeds;                // similarity-first
  std::filesystem::path out;
};

int cmd_analyze(const AnalyzeOptions& opts);

// Prints the max relative error between analytic and central-difference
// gradients on the preset; 0 iff it is below 1e-6. samples = 0 checks every
// parameter.
int cmd_gradcheck(const std::string& preset, uint64_t seed, size_t samples);

// Exception-to-exit-code mapping shared by all subcommands.
int run_guarded(const std::function<int()>& fn);

}  // namespace dstlab::cli
