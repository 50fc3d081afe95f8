#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace dstlab {

// All sampling goes through this wrapper instead of <random> distributions:
// the engine (mt19937_64) is fully specified by the standard, the
// distributions are not, and reproducing runs bit-for-bit requires both.
class Rng {
 public:
  explicit Rng(uint64_t seed) : eng_(seed) {}

  // Derives an independent stream from (seed, stream_id) via splitmix64 so
  // that, e.g., data order and topology growth never share state.
  static Rng stream(uint64_t seed, uint64_t stream_id) {
    uint64_t z = seed + 0x9e3779b97f4a7c15ull * (stream_id + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return Rng(z ^ (z >> 31));
  }

  uint64_t next_u64() { return eng_(); }

  // Unbiased bounded draw by rejection; deterministic given the stream.
  uint64_t uniform_below(uint64_t n) {
    if (n <= 1) return 0;
    const uint64_t threshold = (0 - n) % n;  // 2^64 mod n
    for (;;) {
      uint64_t r = eng_();
      if (r >= threshold) return r % n;
    }
  }

  // Inclusive range.
  size_t uniform_int(size_t lo, size_t hi) {
    return lo + static_cast<size_t>(uniform_below(hi - lo + 1));
  }

  // 53-bit uniform in [0, 1).
  double uniform01() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  double uniform(double a, double b) { return a + (b - a) * uniform01(); }

  // Box-Muller with a cached spare draw.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1, u2;
    do {
      u1 = uniform01();
    } while (u1 <= 0.0);
    u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      size_t j = static_cast<size_t>(uniform_below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

  // Chooses k of n slots uniformly without replacement (partial
  // Fisher-Yates). Returns the selected slot ids in draw order. Which slots
  // come out depends only on (n, k) and the stream, never on what the caller
  // stores in them.
  std::vector<size_t> sample_slots(size_t n, size_t k) {
    std::vector<size_t> slots(n);
    for (size_t i = 0; i < n; ++i) slots[i] = i;
    if (k > n) k = n;
    for (size_t i = 0; i < k; ++i) {
      size_t j = uniform_int(i, n - 1);
      std::swap(slots[i], slots[j]);
    }
    slots.resize(k);
    return slots;
  }

 private:
  std::mt19937_64 eng_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// Stream ids used by the trainer; kept in one place so tests and the
// similarity harness can reproduce individual streams.
enum : uint64_t {
  kStreamInit = 0,
  kStreamDataOrder = 1,
  kStreamGrowth = 2,
  kStreamPrune = 3,
  kStreamUpdateBatch = 4,
};

}  // namespace dstlab
