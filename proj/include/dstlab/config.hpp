#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "dstlab/trainer.hpp"

namespace dstlab {

// Flat key=value config text: one pair per line, '#' starts a comment, blank
// lines ignored. Duplicate keys are rejected.
using KvMap = std::map<std::string, std::string>;

KvMap parse_kv_text(const std::string& text, const std::string& origin);
KvMap parse_kv_file(const std::filesystem::path& path);

// Materializes a TrainConfig from key=value pairs; any key outside the
// documented schema is an error naming that key.
TrainConfig make_train_config(const KvMap& kv);

// A sweep file is a config file plus optional comma-separated axis keys:
// densities, criteria, growths, seeds, update_periods. The grid is their
// cartesian product over the base config.
struct SweepSpec {
  KvMap base;
  std::vector<double> densities;
  std::vector<std::string> criteria;
  std::vector<std::string> growths;
  std::vector<uint64_t> seeds;
  std::vector<uint64_t> update_periods;
};

SweepSpec make_sweep_spec(const KvMap& kv);
std::vector<TrainConfig> sweep_grid(const SweepSpec& spec);

}  // namespace dstlab
