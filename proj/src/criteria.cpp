#include "dstlab/criteria.hpp"

#include <algorithm>
#include <cmath>

#include "dstlab/common.hpp"

namespace dstlab {

PruneCriterion parse_criterion(const std::string& name, double mest_lambda) {
  PruneCriterion c;
  c.lambda = mest_lambda;
  if (name == "magnitude")
    c.kind = PruneKind::Magnitude;
  else if (name == "set")
    c.kind = PruneKind::Set;
  else if (name == "mest")
    c.kind = PruneKind::Mest;
  else if (name == "sensitivity")
    c.kind = PruneKind::Sensitivity;
  else if (name == "rsensitivity")
    c.kind = PruneKind::RSensitivity;
  else if (name == "snip")
    c.kind = PruneKind::Snip;
  else if (name == "random_prune")
    c.kind = PruneKind::RandomPrune;
  else {
    std::string valid;
    for (const auto& n : criterion_names()) valid += (valid.empty() ? "" : ", ") + n;
    throw config_error("unknown criterion '" + name + "' (valid: " + valid + ")");
  }
  if (!(c.lambda >= 0.0) || !std::isfinite(c.lambda))
    throw config_error("mest lambda must be finite and non-negative");
  return c;
}

std::string criterion_name(const PruneCriterion& c) {
  switch (c.kind) {
    case PruneKind::Magnitude:
      return "magnitude";
    case PruneKind::Set:
      return "set";
    case PruneKind::Mest:
      return "mest";
    case PruneKind::Sensitivity:
      return "sensitivity";
    case PruneKind::RSensitivity:
      return "rsensitivity";
    case PruneKind::Snip:
      return "snip";
    case PruneKind::RandomPrune:
      return "random_prune";
  }
  return "?";
}

std::vector<std::string> criterion_names() {
  return {"magnitude", "set", "mest", "sensitivity", "rsensitivity", "snip", "random_prune"};
}

GrowthKind parse_growth(const std::string& name) {
  if (name == "random") return GrowthKind::Random;
  if (name == "gradient") return GrowthKind::Gradient;
  throw config_error("unknown growth '" + name + "' (valid: random, gradient)");
}

std::string growth_name(GrowthKind g) {
  return g == GrowthKind::Random ? "random" : "gradient";
}

std::vector<double> score(const PruneCriterion& c, const std::vector<double>& weights,
                          const std::vector<double>& grads) {
  if (weights.size() != grads.size())
    throw config_error("score: weights and grads shape mismatch");
  std::vector<double> s(weights.size());
  for (size_t i = 0; i < weights.size(); ++i) {
    const double w = std::fabs(weights[i]);
    const double g = std::fabs(grads[i]);
    switch (c.kind) {
      case PruneKind::Magnitude:
      case PruneKind::Set:
        s[i] = w;
        break;
      case PruneKind::Mest:
        s[i] = w + c.lambda * g;
        break;
      case PruneKind::Sensitivity:
        s[i] = g / (w + c.eps);
        break;
      case PruneKind::RSensitivity:
        s[i] = w / (g + c.eps);
        break;
      case PruneKind::Snip:
        s[i] = w * g;
        break;
      case PruneKind::RandomPrune:
        throw config_error("random_prune has no deterministic score; use the selection ops");
    }
  }
  return s;
}

namespace {

struct Scored {
  double score;
  size_t idx;
};

// Ascending by (score, flat index); the index tie-break keeps selections
// reproducible across platforms.
void sort_scored(std::vector<Scored>& v) {
  std::sort(v.begin(), v.end(), [](const Scored& a, const Scored& b) {
    if (a.score != b.score) return a.score < b.score;
    return a.idx < b.idx;
  });
}

std::vector<double> random_scores(size_t n, Rng& rng) {
  std::vector<double> s(n);
  for (double& v : s) v = rng.uniform01();
  return s;
}

std::vector<size_t> take_smallest(const std::vector<double>& scores,
                                  const std::vector<size_t>& candidates, size_t k) {
  std::vector<Scored> pool;
  pool.reserve(candidates.size());
  for (size_t i : candidates) pool.push_back({scores[i], i});
  sort_scored(pool);
  std::vector<size_t> out;
  out.reserve(k);
  for (size_t i = 0; i < k; ++i) out.push_back(pool[i].idx);
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

std::vector<size_t> select_prune_local(const PruneCriterion& c, const std::vector<double>& weights,
                                       const std::vector<double>& grads, const MaskLayer& mask,
                                       size_t k, Rng* rng) {
  if (k > mask.active_count)
    throw selection_error("prune count " + std::to_string(k) + " exceeds " +
                          std::to_string(mask.active_count) + " active weights");
  if (k == 0) return {};
  const std::vector<size_t> active = mask.active_indices();

  if (c.kind == PruneKind::Set) {
    std::vector<size_t> neg, pos;
    for (size_t i : active)
      (weights[i] < 0.0 ? neg : pos).push_back(i);  // zeros count as non-negative
    size_t k_neg = k / 2;
    size_t k_pos = k - k_neg;
    if (neg.size() < k_neg) {
      k_pos += k_neg - neg.size();
      k_neg = neg.size();
    }
    if (pos.size() < k_pos) {
      k_neg += k_pos - pos.size();
      k_pos = pos.size();
    }
    std::vector<double> mag(weights.size());
    for (size_t i : active) mag[i] = std::fabs(weights[i]);
    std::vector<size_t> out = take_smallest(mag, neg, k_neg);
    std::vector<size_t> from_pos = take_smallest(mag, pos, k_pos);
    out.insert(out.end(), from_pos.begin(), from_pos.end());
    std::sort(out.begin(), out.end());
    return out;
  }

  if (c.kind == PruneKind::RandomPrune) {
    if (!rng) throw selection_error("random_prune requires an rng");
    return take_smallest(random_scores(weights.size(), *rng), active, k);
  }

  return take_smallest(score(c, weights, grads), active, k);
}

size_t PruneDecision::total() const {
  size_t n = 0;
  for (const auto& v : per_layer) n += v.size();
  return n;
}

PruneDecision select_prune_global(const PruneCriterion& c, const std::vector<LayerState>& layers,
                                  size_t k_total, Rng* rng) {
  size_t total_active = 0;
  for (const LayerState& l : layers) total_active += l.mask->active_count;
  if (k_total >= total_active && k_total != 0)
    throw selection_error("global prune count " + std::to_string(k_total) +
                          " must be below the " + std::to_string(total_active) +
                          " active weights");

  // SET's sign quota is layer-local by definition; global scope pools the
  // magnitude scores like the magnitude criterion does.
  struct Cand {
    double score;
    size_t layer, idx;
  };
  std::vector<Cand> pool;
  pool.reserve(total_active);
  for (size_t li = 0; li < layers.size(); ++li) {
    const LayerState& l = layers[li];
    std::vector<double> s;
    if (c.kind == PruneKind::RandomPrune) {
      if (!rng) throw selection_error("random_prune requires an rng");
      s = random_scores(l.weights->size(), *rng);
    } else if (c.kind == PruneKind::Set) {
      s.resize(l.weights->size());
      for (size_t i = 0; i < s.size(); ++i) s[i] = std::fabs((*l.weights)[i]);
    } else {
      s = score(c, *l.weights, *l.grads);
    }
    for (size_t i : l.mask->active_indices()) pool.push_back({s[i], li, i});
  }
  std::sort(pool.begin(), pool.end(), [](const Cand& a, const Cand& b) {
    if (a.score != b.score) return a.score < b.score;
    if (a.layer != b.layer) return a.layer < b.layer;
    return a.idx < b.idx;
  });

  PruneDecision d;
  d.per_layer.assign(layers.size(), {});
  std::vector<size_t> remaining(layers.size());
  for (size_t li = 0; li < layers.size(); ++li) remaining[li] = layers[li].mask->active_count;
  size_t chosen = 0;
  for (const Cand& cand : pool) {
    if (chosen == k_total) break;
    if (remaining[cand.layer] <= 1) continue;  // keep at least one active weight per layer
    d.per_layer[cand.layer].push_back(cand.idx);
    --remaining[cand.layer];
    ++chosen;
  }
  if (chosen < k_total)
    throw selection_error("global prune infeasible: the keep-one safeguard leaves only " +
                          std::to_string(chosen) + " of " + std::to_string(k_total) +
                          " requested prunes");
  for (auto& v : d.per_layer) std::sort(v.begin(), v.end());
  return d;
}

namespace {

// Candidate list for growth: never-activated positions first when a ledger is
// supplied, each group ascending.
std::vector<size_t> growth_candidates(const MaskLayer& mask, const ExplorationLedger* ledger,
                                      size_t ledger_layer) {
  std::vector<size_t> fresh, seen;
  for (size_t i = 0; i < mask.size(); ++i) {
    if (mask.bits[i]) continue;
    if (ledger && ledger->is_explored(ledger_layer, i))
      seen.push_back(i);
    else
      fresh.push_back(i);
  }
  fresh.insert(fresh.end(), seen.begin(), seen.end());
  return fresh;
}

}  // namespace

std::vector<size_t> select_grow_random(const MaskLayer& mask, size_t k, Rng& rng,
                                       const ExplorationLedger* ledger, size_t ledger_layer) {
  const size_t inactive = mask.size() - mask.active_count;
  if (k > inactive)
    throw selection_error("grow count " + std::to_string(k) + " exceeds " +
                          std::to_string(inactive) + " inactive positions");
  if (k == 0) return {};
  const std::vector<size_t> cand = growth_candidates(mask, ledger, ledger_layer);
  std::vector<size_t> out;
  out.reserve(k);
  for (size_t slot : rng.sample_slots(cand.size(), k)) out.push_back(cand[slot]);
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::vector<size_t>> select_grow_random_global(const Mask& mask, size_t k_total,
                                                           Rng& rng,
                                                           const ExplorationLedger* ledger) {
  std::vector<std::pair<size_t, size_t>> fresh, seen;  // (layer, idx)
  for (size_t li = 0; li < mask.layers.size(); ++li) {
    const MaskLayer& l = mask.layers[li];
    for (size_t i = 0; i < l.size(); ++i) {
      if (l.bits[i]) continue;
      if (ledger && ledger->is_explored(li, i))
        seen.emplace_back(li, i);
      else
        fresh.emplace_back(li, i);
    }
  }
  fresh.insert(fresh.end(), seen.begin(), seen.end());
  if (k_total > fresh.size())
    throw selection_error("global grow count exceeds inactive positions");
  std::vector<std::vector<size_t>> out(mask.layers.size());
  for (size_t slot : rng.sample_slots(fresh.size(), k_total))
    out[fresh[slot].first].push_back(fresh[slot].second);
  for (auto& v : out) std::sort(v.begin(), v.end());
  return out;
}

std::vector<size_t> select_grow_gradient(const std::vector<double>& dense_grads,
                                         const MaskLayer& mask, size_t k) {
  const size_t inactive = mask.size() - mask.active_count;
  if (k > inactive)
    throw selection_error("grow count " + std::to_string(k) + " exceeds " +
                          std::to_string(inactive) + " inactive positions");
  if (k == 0) return {};
  std::vector<Scored> pool;
  pool.reserve(inactive);
  for (size_t i = 0; i < mask.size(); ++i)
    if (!mask.bits[i]) pool.push_back({std::fabs(dense_grads[i]), i});
  std::sort(pool.begin(), pool.end(), [](const Scored& a, const Scored& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.idx < b.idx;
  });
  std::vector<size_t> out;
  out.reserve(k);
  for (size_t i = 0; i < k; ++i) out.push_back(pool[i].idx);
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::vector<size_t>> select_grow_gradient_global(
    const std::vector<const std::vector<double>*>& dense_grads, const Mask& mask, size_t k_total) {
  struct Cand {
    double mag;
    size_t layer, idx;
  };
  std::vector<Cand> pool;
  for (size_t li = 0; li < mask.layers.size(); ++li) {
    const MaskLayer& l = mask.layers[li];
    for (size_t i = 0; i < l.size(); ++i)
      if (!l.bits[i]) pool.push_back({std::fabs((*dense_grads[li])[i]), li, i});
  }
  if (k_total > pool.size()) throw selection_error("global grow count exceeds inactive positions");
  std::sort(pool.begin(), pool.end(), [](const Cand& a, const Cand& b) {
    if (a.mag != b.mag) return a.mag > b.mag;
    if (a.layer != b.layer) return a.layer < b.layer;
    return a.idx < b.idx;
  });
  std::vector<std::vector<size_t>> out(mask.layers.size());
  for (size_t i = 0; i < k_total; ++i) out[pool[i].layer].push_back(pool[i].idx);
  for (auto& v : out) std::sort(v.begin(), v.end());
  return out;
}

size_t prune_count(double rho_t, size_t active_count) {
  if (rho_t < 0.0 || rho_t > 1.0) throw config_error("prune fraction must be in [0, 1]");
  return static_cast<size_t>(std::floor(rho_t * static_cast<double>(active_count)));
}

}  // namespace dstlab
