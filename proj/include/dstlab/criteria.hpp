#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dstlab/rng.hpp"
#include "dstlab/topology.hpp"

namespace dstlab {

// Importance scores, lowest pruned first:
//   magnitude     |w|
//   set           |w|, selected separately for negative and non-negative weights
//   mest          |w| + lambda * |g|
//   sensitivity   |g| / (|w| + eps)
//   rsensitivity  |w| / (|g| + eps)
//   snip          |w| * |g|
//   random_prune  i.i.d. uniform scores (baseline)
enum class PruneKind { Magnitude, Set, Mest, Sensitivity, RSensitivity, Snip, RandomPrune };

struct PruneCriterion {
  PruneKind kind = PruneKind::Magnitude;
  double lambda = 1.0;   // mest only
  double eps = 1e-12;    // denominator guard for sensitivity/rsensitivity
};

enum class GrowthKind { Random, Gradient };

PruneCriterion parse_criterion(const std::string& name, double mest_lambda = 1.0);
std::string criterion_name(const PruneCriterion& c);
GrowthKind parse_growth(const std::string& name);
std::string growth_name(GrowthKind g);
std::vector<std::string> criterion_names();

// Elementwise scores for the deterministic criteria. The values at inactive
// positions are meaningless and never consulted by selection.
std::vector<double> score(const PruneCriterion& c, const std::vector<double>& weights,
                          const std::vector<double>& grads);

// The k active positions with the lowest scores, ties broken by lower flat
// index. SET prunes floor(k/2) negative and the rest non-negative weights by
// smallest magnitude; a sign class short of its quota spills the deficit to
// the other class. random_prune draws its scores from `rng`.
std::vector<size_t> select_prune_local(const PruneCriterion& c, const std::vector<double>& weights,
                                       const std::vector<double>& grads, const MaskLayer& mask,
                                       size_t k, Rng* rng = nullptr);

struct LayerState {
  const std::vector<double>* weights = nullptr;
  const std::vector<double>* grads = nullptr;
  const MaskLayer* mask = nullptr;
};

struct PruneDecision {
  std::vector<std::vector<size_t>> per_layer;  // sorted flat indices
  size_t total() const;
};

// Pools scores across layers and prunes the k_total lowest, skipping any
// candidate whose removal would leave its layer without a single active
// weight; the displaced prunes fall to the next-lowest global scores.
PruneDecision select_prune_global(const PruneCriterion& c, const std::vector<LayerState>& layers,
                                  size_t k_total, Rng* rng = nullptr);

// k inactive positions, uniform without replacement. When a ledger layer is
// given, candidates are listed never-activated first (each group in ascending
// index order); a uniform draw over slots stays uniform over positions, and
// the count of never-activated picks then depends only on the candidate
// counts and the stream, not on which positions the mask holds.
std::vector<size_t> select_grow_random(const MaskLayer& mask, size_t k, Rng& rng,
                                       const ExplorationLedger* ledger = nullptr,
                                       size_t ledger_layer = 0);

// Pooled variant over all layers; returns per-layer sorted indices.
std::vector<std::vector<size_t>> select_grow_random_global(const Mask& mask, size_t k_total,
                                                           Rng& rng,
                                                           const ExplorationLedger* ledger);

// The k inactive positions with the largest |gradient|, ties by lower flat
// index.
std::vector<size_t> select_grow_gradient(const std::vector<double>& dense_grads,
                                         const MaskLayer& mask, size_t k);

std::vector<std::vector<size_t>> select_grow_gradient_global(
    const std::vector<const std::vector<double>*>& dense_grads, const Mask& mask, size_t k_total);

// k = floor(rho_t * active_count)
size_t prune_count(double rho_t, size_t active_count);

}  // namespace dstlab
