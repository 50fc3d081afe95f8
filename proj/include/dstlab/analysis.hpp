#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dstlab/topology.hpp"
#include "dstlab/trainer.hpp"

namespace dstlab {

// Per-layer sorted flat-index sets, the common currency of the similarity
// analyses.
using LayerSets = std::vector<std::vector<size_t>>;

// |A n B| / |A u B| over sorted inputs; 1 when both sets are empty.
double jaccard(const std::vector<size_t>& a, const std::vector<size_t>& b);

// Unweighted mean of the per-layer Jaccard indices.
double mean_jaccard(const LayerSets& a, const LayerSets& b);

LayerSets sets_from_snapshot(const MaskSnapshot& s);

struct SimilarityMatrix {
  std::vector<std::string> labels;
  std::vector<std::vector<double>> values;
  size_t seed_count = 0;
  double at(const std::string& a, const std::string& b) const;
  std::string to_csv() const;
};

// Expected overlap of independently drawn random subsets: per layer,
// (universe size, subset size); mean pairwise layer-averaged Jaccard over one
// subset sample per seed. Needs at least two distinct seeds.
double random_baseline_jr(const std::vector<std::pair<size_t, size_t>>& layer_universe_subset,
                          const std::vector<uint64_t>& seeds);

// Runs the base config once per (criterion, seed) up to the first topology
// update; all runs of one seed must share the identical network state there
// (checked by state hash), and the matrix holds the mean over seeds of the
// pairwise Jaccard between the criteria's prune selections. jr_out, if given,
// receives the matching random-subset baseline.
SimilarityMatrix first_update_similarity(const TrainConfig& base,
                                         const std::vector<std::string>& criteria,
                                         const std::vector<uint64_t>& seeds,
                                         double* jr_out = nullptr);

// Pairwise layer-averaged Jaccard of final masks; labels from the snapshot
// criterion fields (falling back to criterion#seed when duplicated).
SimilarityMatrix end_mask_similarity(const std::vector<MaskSnapshot>& finals);

double init_vs_end(const MaskSnapshot& init, const MaskSnapshot& end);

// Fraction of active positions kept by every run and of inactive positions
// removed by every run; the runs must share density and layer structure.
std::pair<double, double> always_kept_fraction(const std::vector<MaskSnapshot>& finals);

// The itop column of a record.csv.
std::vector<double> itop_series_from_csv(const std::filesystem::path& record_csv);

struct RankTable {
  std::vector<std::string> methods;
  std::vector<std::string> settings;
  std::vector<std::vector<double>> ranks;  // settings x methods, ties averaged
  std::vector<double> average;             // per method
  std::string to_csv() const;
};

// Ranks per setting (1 = best accuracy, ties averaged) and per-method
// averages. accuracy is settings x methods and must be complete.
RankTable average_ranks(const std::vector<std::string>& methods,
                        const std::vector<std::string>& settings,
                        const std::vector<std::vector<double>>& accuracy);

// Critical distance q_alpha(k) * sqrt(k(k+1) / (6N)) of the Nemenyi test at
// alpha = 0.05 for k <= 10 methods.
double nemenyi_cd(size_t k, size_t n_settings, double alpha = 0.05);

// Maximal runs of rank-adjacent methods whose average ranks differ by at most
// cd, as used in critical-distance diagrams.
std::vector<std::vector<std::string>> cd_groups(const RankTable& table, double cd);

// results.csv with header method,setting,accuracy -> complete grid; missing
// cells are an error listing them.
void read_results_grid(const std::filesystem::path& path, std::vector<std::string>& methods,
                       std::vector<std::string>& settings,
                       std::vector<std::vector<double>>& accuracy);

}  // namespace dstlab
