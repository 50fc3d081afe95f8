#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "dstlab/network.hpp"
#include "dstlab/rng.hpp"

namespace dstlab {

// One maskable parameter tensor (Linear or Conv2d weights; biases are never
// masked).
struct MaskableLayer {
  std::string name;  // "layer<i>" with i the index in the layer sequence
  size_t net_layer = 0;
  std::vector<size_t> shape;
  size_t fan_in = 0, fan_out = 0;  // units for Linear, channels for Conv2d
  size_t kw = 0, kh = 0;           // 0 for Linear
  size_t size = 0;
};

std::vector<MaskableLayer> maskable_layers(const NetworkState& net);

struct MaskLayer {
  std::string name;
  std::vector<size_t> shape;
  std::vector<uint8_t> bits;
  size_t active_count = 0;

  size_t size() const { return bits.size(); }
  bool active(size_t i) const { return bits[i] != 0; }
  void set(size_t i) {
    if (!bits[i]) {
      bits[i] = 1;
      ++active_count;
    }
  }
  void clear(size_t i) {
    if (bits[i]) {
      bits[i] = 0;
      --active_count;
    }
  }
  std::vector<size_t> active_indices() const;
  std::vector<size_t> inactive_indices() const;
};

struct Mask {
  std::vector<MaskLayer> layers;
  std::vector<size_t> net_layer_index;  // parallel to layers

  size_t total_size() const;
  size_t total_active() const;
};

Mask full_mask_for(const NetworkState& net);

// Zeroes every weight whose mask bit is clear.
void apply_mask(NetworkState& net, const Mask& mask);

// Per-layer target densities; layers parallel to maskable_layers(net).
struct SparsityPlan {
  std::vector<MaskableLayer> layers;
  std::vector<double> density;
  double target = 1.0;
};

// Scale-based density allocation: density[l] = eps * scale[l] with eps solved
// so the global density equals D; any layer pushed above 1 is clamped and eps
// re-solved over the rest until a fixpoint. The ER scale for a layer with
// fan_in/fan_out units is (fan_in + fan_out) / (fan_in * fan_out); the ERK
// scale additionally folds kernel width and height in.
SparsityPlan er_allocate(const std::vector<MaskableLayer>& layers, double D);
SparsityPlan erk_allocate(const std::vector<MaskableLayer>& layers, double D);

// Integer active counts for a plan: round(d_l * n_l) per layer, then the
// largest layer absorbs the rounding drift so the global count is exact.
std::vector<size_t> plan_active_counts(const SparsityPlan& plan);

// Uniform mask with exactly plan_active_counts(plan) bits set per layer.
Mask sample_mask(const SparsityPlan& plan, Rng& rng);

double global_density(const Mask& mask);
double layer_density(const Mask& mask, size_t layer);

// Running union of every mask seen; the ITOP ratio is |union| / |maskable|.
struct ExplorationLedger {
  std::vector<std::vector<uint8_t>> bits;
  size_t explored = 0;
  size_t total = 0;

  void reset_from(const Mask& mask);
  void absorb(const Mask& mask);
  double itop_ratio() const;
  bool is_explored(size_t layer, size_t idx) const { return bits[layer][idx] != 0; }
};

// On-disk topology state. Plain text, fixed field order, newline-terminated
// lines, canonical shortest float formatting: equal snapshots are equal
// byte-for-byte on every platform.
struct MaskSnapshot {
  uint64_t step = 0;
  std::string criterion;
  std::string growth;
  uint64_t seed = 0;
  double density = 0.0;

  struct Layer {
    std::string name;
    std::vector<size_t> shape;
    std::vector<size_t> active;  // sorted flat indices
  };
  std::vector<Layer> layers;

  static MaskSnapshot from_mask(const Mask& mask, uint64_t step, const std::string& criterion,
                                const std::string& growth, uint64_t seed);
  std::string serialize() const;
  static MaskSnapshot parse(const std::string& text, const std::string& origin);
  void save(const std::filesystem::path& path) const;
  static MaskSnapshot load(const std::filesystem::path& path);
};

}  // namespace dstlab
