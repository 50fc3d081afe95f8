#include "dstlab/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "dstlab/common.hpp"

namespace dstlab {

double jaccard(const std::vector<size_t>& a, const std::vector<size_t>& b) {
  if (a.empty() && b.empty()) return 1.0;
  size_t i = 0, j = 0, inter = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] == b[j]) {
      ++inter;
      ++i;
      ++j;
    } else if (a[i] < b[j]) {
      ++i;
    } else {
      ++j;
    }
  }
  const size_t uni = a.size() + b.size() - inter;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

double mean_jaccard(const LayerSets& a, const LayerSets& b) {
  if (a.size() != b.size()) throw analysis_error("mean_jaccard: layer count mismatch");
  if (a.empty()) throw analysis_error("mean_jaccard: no layers");
  double sum = 0.0;
  for (size_t l = 0; l < a.size(); ++l) sum += jaccard(a[l], b[l]);
  return sum / static_cast<double>(a.size());
}

LayerSets sets_from_snapshot(const MaskSnapshot& s) {
  LayerSets out;
  out.reserve(s.layers.size());
  for (const auto& l : s.layers) out.push_back(l.active);
  return out;
}

double SimilarityMatrix::at(const std::string& a, const std::string& b) const {
  auto idx = [&](const std::string& name) {
    for (size_t i = 0; i < labels.size(); ++i)
      if (labels[i] == name) return i;
    throw analysis_error("no label '" + name + "' in similarity matrix");
  };
  return values[idx(a)][idx(b)];
}

std::string SimilarityMatrix::to_csv() const {
  std::string out = "criterion";
  for (const auto& l : labels) out += "," + l;
  out += "\n";
  for (size_t i = 0; i < labels.size(); ++i) {
    out += labels[i];
    for (size_t j = 0; j < labels.size(); ++j) out += "," + format_double(values[i][j]);
    out += "\n";
  }
  return out;
}

double random_baseline_jr(const std::vector<std::pair<size_t, size_t>>& layer_universe_subset,
                          const std::vector<uint64_t>& seeds) {
  std::set<uint64_t> unique(seeds.begin(), seeds.end());
  if (unique.size() < 2)
    throw analysis_error("random baseline needs at least two distinct seeds");
  std::vector<LayerSets> samples;
  for (uint64_t seed : unique) {
    LayerSets sets;
    for (size_t li = 0; li < layer_universe_subset.size(); ++li) {
      const auto [n, k] = layer_universe_subset[li];
      Rng rng = Rng::stream(seed, 1000 + li);
      std::vector<size_t> subset = rng.sample_slots(n, k);
      std::sort(subset.begin(), subset.end());
      sets.push_back(std::move(subset));
    }
    samples.push_back(std::move(sets));
  }
  double sum = 0.0;
  size_t pairs = 0;
  for (size_t i = 0; i < samples.size(); ++i)
    for (size_t j = i + 1; j < samples.size(); ++j) {
      sum += mean_jaccard(samples[i], samples[j]);
      ++pairs;
    }
  return sum / static_cast<double>(pairs);
}

SimilarityMatrix first_update_similarity(const TrainConfig& base,
                                         const std::vector<std::string>& criteria,
                                         const std::vector<uint64_t>& seeds, double* jr_out) {
  if (criteria.size() < 2) throw analysis_error("need at least two criteria to compare");
  if (seeds.empty()) throw analysis_error("need at least one seed");

  SimilarityMatrix m;
  m.labels = criteria;
  m.seed_count = seeds.size();
  m.values.assign(criteria.size(), std::vector<double>(criteria.size(), 0.0));
  std::vector<std::pair<size_t, size_t>> jr_plan;  // (active, k) per layer, from the first run

  for (uint64_t seed : seeds) {
    std::vector<LayerSets> prune_sets;
    uint64_t reference_hash = 0;
    for (size_t ci = 0; ci < criteria.size(); ++ci) {
      TrainConfig cfg = base;
      cfg.criterion = criteria[ci];
      cfg.seed = seed;
      Experiment ex(cfg);
      ex.run_to_pre_update();
      const uint64_t h = ex.state_hash();
      if (ci == 0) {
        reference_hash = h;
        if (jr_plan.empty()) {
          for (size_t li = 0; li < ex.mask().layers.size(); ++li) {
            const size_t active = ex.mask().layers[li].active_count;
            jr_plan.emplace_back(active, prune_count(ex.pending_rho(), active));
          }
        }
      } else if (h != reference_hash) {
        throw analysis_error("trajectory diverged before the first update (criterion " +
                             criteria[ci] + ", seed " + std::to_string(seed) +
                             "); criteria do not share a network state");
      }
      prune_sets.push_back(
          ex.pending_prune_sets(parse_criterion(criteria[ci], cfg.mest_lambda)));
    }
    for (size_t i = 0; i < criteria.size(); ++i)
      for (size_t j = 0; j < criteria.size(); ++j)
        m.values[i][j] += mean_jaccard(prune_sets[i], prune_sets[j]);
  }
  for (auto& row : m.values)
    for (double& v : row) v /= static_cast<double>(seeds.size());

  if (jr_out) {
    std::vector<uint64_t> jr_seeds;
    for (uint64_t s : seeds) jr_seeds.push_back(s);
    // The baseline wants independent subsets; pad with derived seeds if the
    // caller provided fewer than two.
    while (jr_seeds.size() < 2) jr_seeds.push_back(jr_seeds.back() + 7919);
    *jr_out = random_baseline_jr(jr_plan, jr_seeds);
  }
  return m;
}

namespace {

void require_same_structure(const std::vector<MaskSnapshot>& snaps) {
  if (snaps.size() < 2) throw analysis_error("need at least two snapshots");
  for (size_t i = 1; i < snaps.size(); ++i) {
    if (snaps[i].layers.size() != snaps[0].layers.size())
      throw analysis_error("snapshot layer structure mismatch");
    for (size_t l = 0; l < snaps[i].layers.size(); ++l)
      if (snaps[i].layers[l].shape != snaps[0].layers[l].shape)
        throw analysis_error("snapshot layer shape mismatch in layer " +
                             snaps[0].layers[l].name);
    if (std::fabs(snaps[i].density - snaps[0].density) > 1e-9)
      throw analysis_error("snapshot density mismatch: " + format_double(snaps[i].density) +
                           " vs " + format_double(snaps[0].density));
  }
}

}  // namespace

SimilarityMatrix end_mask_similarity(const std::vector<MaskSnapshot>& finals) {
  require_same_structure(finals);
  SimilarityMatrix m;
  std::set<std::string> seen;
  bool dup = false;
  for (const auto& s : finals) dup = dup || !seen.insert(s.criterion).second;
  for (const auto& s : finals)
    m.labels.push_back(dup ? s.criterion + "#s" + std::to_string(s.seed) : s.criterion);
  m.seed_count = 1;
  m.values.assign(finals.size(), std::vector<double>(finals.size(), 0.0));
  std::vector<LayerSets> sets;
  for (const auto& s : finals) sets.push_back(sets_from_snapshot(s));
  for (size_t i = 0; i < finals.size(); ++i)
    for (size_t j = 0; j < finals.size(); ++j) m.values[i][j] = mean_jaccard(sets[i], sets[j]);
  return m;
}

double init_vs_end(const MaskSnapshot& init, const MaskSnapshot& end) {
  std::vector<MaskSnapshot> pair = {init, end};
  require_same_structure(pair);
  return mean_jaccard(sets_from_snapshot(init), sets_from_snapshot(end));
}

std::pair<double, double> always_kept_fraction(const std::vector<MaskSnapshot>& finals) {
  if (finals.empty()) throw analysis_error("no snapshots");
  if (finals.size() == 1) return {1.0, 1.0};
  require_same_structure(finals);
  size_t kept = 0, removed = 0, active = 0, inactive = 0;
  for (size_t l = 0; l < finals[0].layers.size(); ++l) {
    const size_t layer_size = shape_product(finals[0].layers[l].shape);
    std::vector<uint32_t> counts(layer_size, 0);
    for (const auto& s : finals)
      for (size_t i : s.layers[l].active) ++counts[i];
    for (size_t i = 0; i < layer_size; ++i) {
      if (counts[i] == finals.size()) ++kept;
      if (counts[i] == 0) ++removed;
    }
    active += finals[0].layers[l].active.size();
    inactive += layer_size - finals[0].layers[l].active.size();
  }
  // Per-run active counts are equal across the runs (same density), so the
  // denominators are well defined.
  return {active == 0 ? 1.0 : static_cast<double>(kept) / static_cast<double>(active),
          inactive == 0 ? 1.0 : static_cast<double>(removed) / static_cast<double>(inactive)};
}

std::vector<double> itop_series_from_csv(const std::filesystem::path& record_csv) {
  std::ifstream in(record_csv);
  if (!in) throw data_error("cannot open " + record_csv.string());
  std::string line;
  if (!std::getline(in, line)) throw format_error("empty record csv " + record_csv.string());
  const std::vector<std::string> header = split(line, ',');
  long long col = -1;
  for (size_t i = 0; i < header.size(); ++i)
    if (header[i] == "itop") col = static_cast<long long>(i);
  if (col < 0) throw format_error("no itop column in " + record_csv.string());
  std::vector<double> out;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    const std::vector<std::string> cells = split(line, ',');
    out.push_back(parse_double(cells.at(static_cast<size_t>(col)), "itop"));
  }
  return out;
}

RankTable average_ranks(const std::vector<std::string>& methods,
                        const std::vector<std::string>& settings,
                        const std::vector<std::vector<double>>& accuracy) {
  if (methods.empty() || settings.empty()) throw analysis_error("empty rank input");
  if (accuracy.size() != settings.size()) throw analysis_error("accuracy rows != settings");
  RankTable t;
  t.methods = methods;
  t.settings = settings;
  t.ranks.assign(settings.size(), std::vector<double>(methods.size(), 0.0));
  t.average.assign(methods.size(), 0.0);
  for (size_t s = 0; s < settings.size(); ++s) {
    if (accuracy[s].size() != methods.size()) throw analysis_error("accuracy cols != methods");
    // rank 1 = highest accuracy; tied values share the mean of their ranks
    std::vector<size_t> order(methods.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
      if (accuracy[s][a] != accuracy[s][b]) return accuracy[s][a] > accuracy[s][b];
      return a < b;
    });
    size_t i = 0;
    while (i < order.size()) {
      size_t j = i;
      while (j + 1 < order.size() && accuracy[s][order[j + 1]] == accuracy[s][order[i]]) ++j;
      const double shared = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
      for (size_t k = i; k <= j; ++k) t.ranks[s][order[k]] = shared;
      i = j + 1;
    }
  }
  for (size_t m = 0; m < methods.size(); ++m) {
    double sum = 0.0;
    for (size_t s = 0; s < settings.size(); ++s) sum += t.ranks[s][m];
    t.average[m] = sum / static_cast<double>(settings.size());
  }
  return t;
}

std::string RankTable::to_csv() const {
  std::string out = "setting";
  for (const auto& m : methods) out += "," + m;
  out += "\n";
  for (size_t s = 0; s < settings.size(); ++s) {
    out += settings[s];
    for (size_t m = 0; m < methods.size(); ++m) out += "," + format_double(ranks[s][m]);
    out += "\n";
  }
  out += "average_rank";
  for (size_t m = 0; m < methods.size(); ++m) out += "," + format_double(average[m]);
  out += "\n";
  return out;
}

double nemenyi_cd(size_t k, size_t n_settings, double alpha) {
  if (std::fabs(alpha - 0.05) > 1e-12)
    throw analysis_error("only alpha = 0.05 critical values are tabulated");
  // Two-tailed Nemenyi critical values q_0.05(k): the studentized range
  // statistic at infinite degrees of freedom divided by sqrt(2); see Demsar,
  // "Statistical Comparisons of Classifiers over Multiple Data Sets", JMLR 7
  // (2006), Table 5.
  static const double q05[11] = {0.0,   0.0,   1.960, 2.343, 2.569, 2.728,
                                 2.850, 2.949, 3.031, 3.102, 3.164};
  if (k < 2 || k > 10)
    throw analysis_error("Nemenyi critical values tabulated for 2..10 methods");
  if (n_settings == 0) throw analysis_error("need at least one setting");
  return q05[k] * std::sqrt(static_cast<double>(k * (k + 1)) /
                            (6.0 * static_cast<double>(n_settings)));
}

std::vector<std::vector<std::string>> cd_groups(const RankTable& table, double cd) {
  std::vector<size_t> order(table.methods.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    if (table.average[a] != table.average[b]) return table.average[a] < table.average[b];
    return a < b;
  });
  std::vector<std::vector<std::string>> groups;
  size_t last_end = 0;  // suppress groups nested inside an earlier one
  for (size_t i = 0; i < order.size(); ++i) {
    size_t j = i;
    while (j + 1 < order.size() &&
           table.average[order[j + 1]] - table.average[order[i]] <= cd + 1e-12)
      ++j;
    if (j + 1 > last_end) {
      std::vector<std::string> g;
      for (size_t k = i; k <= j; ++k) g.push_back(table.methods[order[k]]);
      groups.push_back(std::move(g));
      last_end = j + 1;
    }
  }
  return groups;
}

void read_results_grid(const std::filesystem::path& path, std::vector<std::string>& methods,
                       std::vector<std::string>& settings,
                       std::vector<std::vector<double>>& accuracy) {
  std::ifstream in(path);
  if (!in) throw data_error("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw format_error("empty results file " + path.string());
  const std::vector<std::string> header = split(line, ',');
  if (header.size() != 3 || header[0] != "method" || header[1] != "setting" ||
      header[2] != "accuracy")
    throw format_error(path.string() + ": expected header method,setting,accuracy");

  std::map<std::pair<std::string, std::string>, double> cells;
  std::vector<std::string> method_order, setting_order;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    const std::vector<std::string> c = split(line, ',');
    if (c.size() != 3) throw format_error(path.string() + ": bad row '" + line + "'");
    const double acc = parse_double(c[2], "accuracy");
    if (!cells.emplace(std::make_pair(c[0], c[1]), acc).second)
      throw analysis_error("duplicate cell for method " + c[0] + ", setting " + c[1]);
    if (std::find(method_order.begin(), method_order.end(), c[0]) == method_order.end())
      method_order.push_back(c[0]);
    if (std::find(setting_order.begin(), setting_order.end(), c[1]) == setting_order.end())
      setting_order.push_back(c[1]);
  }
  std::string missing;
  for (const auto& s : setting_order)
    for (const auto& m : method_order)
      if (!cells.count({m, s})) missing += (missing.empty() ? "" : "; ") + m + " x " + s;
  if (!missing.empty())
    throw analysis_error("incomplete results grid, missing cells: " + missing);

  methods = method_order;
  settings = setting_order;
  accuracy.assign(settings.size(), std::vector<double>(methods.size(), 0.0));
  for (size_t s = 0; s < settings.size(); ++s)
    for (size_t m = 0; m < methods.size(); ++m)
      accuracy[s][m] = cells[{methods[m], settings[s]}];
}

}  // namespace dstlab
