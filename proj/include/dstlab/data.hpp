#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "dstlab/rng.hpp"
#include "dstlab/tensor.hpp"

namespace dstlab {

struct Dataset {
  std::string name;
  Tensor features;  // [N, d] or [N, c, h, w]
  std::vector<int> labels;
  int class_count = 0;

  size_t size() const { return labels.size(); }
  std::vector<size_t> sample_shape() const {
    return std::vector<size_t>(features.shape.begin() + 1, features.shape.end());
  }
};

// IDX image/label pair (the FashionMNIST/MNIST container format). Pixels are
// scaled to [0, 1]; shapes come out as [N, 1, 28, 28] for the standard files.
Dataset load_idx(const std::filesystem::path& images, const std::filesystem::path& labels);

// CIFAR-10 binary batch: records of 1 label byte + 3072 pixel bytes.
Dataset load_cifar10_binary(const std::filesystem::path& path);

// All data_batch_*.bin plus test_batch.bin found under dir, concatenated.
Dataset load_cifar10_dir(const std::filesystem::path& dir);

// Numeric CSV with a header row; the named column holds integer class labels.
Dataset load_csv_tabular(const std::filesystem::path& path, const std::string& label_column);

// Deterministic synthetic tabular task. For two classes: four Gaussian
// clusters centered at (+-mu, +-mu) on dims 0 and 1, labeled by XOR of the
// center signs, remaining dims pure noise - linearly inseparable by
// construction. For classes > 2: `classes` Gaussian blobs on a circle,
// labeled by blob.
Dataset synth_tabular(uint64_t seed, size_t n, size_t d, int classes);

struct SplitSpec {
  double train = 0.7, valid = 0.15, test = 0.15;
  uint64_t seed = 12345;
};

struct Split {
  std::vector<size_t> train, valid, test;
};

// Partitions [0, n) by a seeded permutation; every index lands in exactly one
// split and none is empty.
Split split_indices(size_t n, const SplitSpec& spec);

enum class NormKind { None, PerFeature, PerChannel };

// Standardizes in place with mean/std computed on the train indices only; a
// feature with (near-)zero spread is zeroed.
void standardize(Dataset& ds, const std::vector<size_t>& train_idx, NormKind kind);

struct Batch {
  Tensor features;
  std::vector<int> labels;
};

Batch gather_batch(const Dataset& ds, const std::vector<size_t>& order, size_t begin, size_t end);

// Contiguous [begin, end) chunks of size batch_size; the final partial batch
// is kept.
std::vector<std::pair<size_t, size_t>> batch_ranges(size_t n, size_t batch_size);

}  // namespace dstlab
