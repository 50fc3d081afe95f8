#include "dstlab/config.hpp"

#include <fstream>
#include <sstream>

#include "dstlab/common.hpp"

namespace dstlab {

KvMap parse_kv_text(const std::string& text, const std::string& origin) {
  KvMap kv;
  std::istringstream in(text);
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    const std::string t = trim(line);
    if (t.empty()) continue;
    const size_t eq = t.find('=');
    if (eq == std::string::npos)
      throw config_error(origin + ":" + std::to_string(lineno) + ": expected key=value, got '" +
                         t + "'");
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    if (key.empty()) throw config_error(origin + ":" + std::to_string(lineno) + ": empty key");
    if (kv.count(key))
      throw config_error(origin + ":" + std::to_string(lineno) + ": duplicate key '" + key + "'");
    kv[key] = value;
  }
  return kv;
}

KvMap parse_kv_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open config file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_kv_text(buf.str(), path.string());
}

namespace {

bool parse_bool(const std::string& v, const std::string& key) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw config_error("key '" + key + "' expects true/false, got '" + v + "'");
}

// Bad values in a config file are usage errors, not data-format errors.
double parse_f64(const std::string& v, const std::string& key) {
  try {
    return parse_double(v, "key '" + key + "'");
  } catch (const format_error& e) {
    throw config_error(e.what());
  }
}

uint64_t parse_u64(const std::string& v, const std::string& key) {
  long long x = 0;
  try {
    x = parse_int(v, "key '" + key + "'");
  } catch (const format_error& e) {
    throw config_error(e.what());
  }
  if (x < 0) throw config_error("key '" + key + "' must be non-negative");
  return static_cast<uint64_t>(x);
}

std::vector<double> parse_double_list(const std::string& v, const std::string& key) {
  std::vector<double> out;
  for (const std::string& part : split(v, ','))
    if (!part.empty()) out.push_back(parse_f64(part, key));
  return out;
}

std::vector<uint64_t> parse_u64_list(const std::string& v, const std::string& key) {
  std::vector<uint64_t> out;
  for (const std::string& part : split(v, ','))
    if (!part.empty()) out.push_back(parse_u64(part, key));
  return out;
}

std::vector<std::string> parse_string_list(const std::string& v) {
  std::vector<std::string> out;
  for (const std::string& part : split(v, ','))
    if (!part.empty()) out.push_back(part);
  return out;
}

const std::vector<std::string>& sweep_axis_keys() {
  static const std::vector<std::string> keys = {"densities", "criteria", "growths", "seeds",
                                                "update_periods"};
  return keys;
}

TrainConfig train_config_from(const KvMap& kv, bool allow_axes) {
  TrainConfig c;
  for (const auto& [key, value] : kv) {
    if (key == "architecture")
      c.architecture = value;
    else if (key == "dataset")
      c.dataset = value;
    else if (key == "dataset_path")
      c.dataset_path = value;
    else if (key == "label_column")
      c.label_column = value;
    else if (key == "density")
      c.density = parse_f64(value, key);
    else if (key == "allocation")
      c.allocation = value;
    else if (key == "criterion")
      c.criterion = value;
    else if (key == "growth")
      c.growth = value;
    else if (key == "pruning_scope")
      c.pruning_scope = value;
    else if (key == "prune_fraction")
      c.prune_fraction = parse_f64(value, key);
    else if (key == "prune_schedule")
      c.prune_schedule = value;
    else if (key == "linear_factor")
      c.linear_factor = parse_f64(value, key);
    else if (key == "linear_every")
      c.linear_every = parse_u64(value, key);
    else if (key == "update_period")
      c.update_period = parse_u64(value, key);
    else if (key == "update_stop_fraction")
      c.update_stop_fraction = parse_f64(value, key);
    else if (key == "epochs")
      c.epochs = parse_u64(value, key);
    else if (key == "batch_size")
      c.batch_size = parse_u64(value, key);
    else if (key == "lr")
      c.lr = parse_f64(value, key);
    else if (key == "lr_decay")
      c.lr_decay = parse_f64(value, key);
    else if (key == "milestones")
      c.milestones = parse_double_list(value, key);
    else if (key == "momentum")
      c.momentum = parse_f64(value, key);
    else if (key == "weight_decay")
      c.weight_decay = parse_f64(value, key);
    else if (key == "nesterov")
      c.nesterov = parse_bool(value, key);
    else if (key == "seed")
      c.seed = parse_u64(value, key);
    else if (key == "mest_lambda")
      c.mest_lambda = parse_f64(value, key);
    else if (key == "dst_update_batch_size")
      c.dst_update_batch_size = parse_u64(value, key);
    else if (key == "synth_n")
      c.synth_n = parse_u64(value, key);
    else if (key == "synth_d")
      c.synth_d = parse_u64(value, key);
    else if (key == "synth_classes")
      c.synth_classes = parse_u64(value, key);
    else if (key == "synth_seed")
      c.synth_seed = parse_u64(value, key);
    else if (key == "split_seed")
      c.split_seed = parse_u64(value, key);
    else if (key == "train_fraction")
      c.train_fraction = parse_f64(value, key);
    else if (key == "valid_fraction")
      c.valid_fraction = parse_f64(value, key);
    else if (key == "test_fraction")
      c.test_fraction = parse_f64(value, key);
    else {
      bool axis = false;
      for (const auto& a : sweep_axis_keys()) axis = axis || a == key;
      if (!(allow_axes && axis)) throw config_error("unknown config key '" + key + "'");
    }
  }
  c.validate();
  return c;
}

}  // namespace

TrainConfig make_train_config(const KvMap& kv) { return train_config_from(kv, false); }

SweepSpec make_sweep_spec(const KvMap& kv) {
  SweepSpec s;
  s.base = kv;
  train_config_from(kv, true);  // validate base keys early
  if (auto it = kv.find("densities"); it != kv.end())
    s.densities = parse_double_list(it->second, it->first);
  if (auto it = kv.find("criteria"); it != kv.end()) s.criteria = parse_string_list(it->second);
  if (auto it = kv.find("growths"); it != kv.end()) s.growths = parse_string_list(it->second);
  if (auto it = kv.find("seeds"); it != kv.end()) s.seeds = parse_u64_list(it->second, it->first);
  if (auto it = kv.find("update_periods"); it != kv.end())
    s.update_periods = parse_u64_list(it->second, it->first);
  for (const auto& a : sweep_axis_keys()) s.base.erase(a);
  return s;
}

std::vector<TrainConfig> sweep_grid(const SweepSpec& spec) {
  // Missing axes fall back to the base config's single value.
  const TrainConfig base = train_config_from(spec.base, false);
  const std::vector<double> densities =
      spec.densities.empty() ? std::vector<double>{base.density} : spec.densities;
  const std::vector<std::string> criteria =
      spec.criteria.empty() ? std::vector<std::string>{base.criterion} : spec.criteria;
  const std::vector<std::string> growths =
      spec.growths.empty() ? std::vector<std::string>{base.growth} : spec.growths;
  const std::vector<uint64_t> seeds =
      spec.seeds.empty() ? std::vector<uint64_t>{base.seed} : spec.seeds;
  const std::vector<uint64_t> periods =
      spec.update_periods.empty() ? std::vector<uint64_t>{base.update_period}
                                  : spec.update_periods;

  std::vector<TrainConfig> grid;
  for (double d : densities)
    for (const std::string& crit : criteria)
      for (const std::string& g : growths)
        for (uint64_t up : periods)
          for (uint64_t seed : seeds) {
            TrainConfig c = base;
            c.density = d;
            c.criterion = crit;
            c.growth = g;
            c.update_period = up;
            c.seed = seed;
            c.validate();
            grid.push_back(std::move(c));
          }
  if (grid.empty()) throw config_error("sweep grid is empty");
  return grid;
}

}  // namespace dstlab
