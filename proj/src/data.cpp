#include "dstlab/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include "dstlab/common.hpp"

namespace dstlab {

namespace {

std::vector<unsigned char> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw data_error("cannot open " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  return bytes;
}

uint32_t be32(const std::vector<unsigned char>& b, size_t off, const std::string& origin) {
  if (off + 4 > b.size())
    throw format_error("truncated file " + origin + " at offset " + std::to_string(off));
  return (uint32_t(b[off]) << 24) | (uint32_t(b[off + 1]) << 16) | (uint32_t(b[off + 2]) << 8) |
         uint32_t(b[off + 3]);
}

}  // namespace

Dataset load_idx(const std::filesystem::path& images, const std::filesystem::path& labels) {
  const auto ib = read_file_bytes(images);
  const auto lb = read_file_bytes(labels);
  if (ib.size() < 4) throw format_error("empty or truncated IDX image file " + images.string());
  if (lb.size() < 4) throw format_error("empty or truncated IDX label file " + labels.string());

  const uint32_t imagic = be32(ib, 0, images.string());
  if (imagic != 0x00000803)
    throw format_error("bad IDX image magic at offset 0 in " + images.string());
  const uint32_t lmagic = be32(lb, 0, labels.string());
  if (lmagic != 0x00000801)
    throw format_error("bad IDX label magic at offset 0 in " + labels.string());

  const uint32_t n = be32(ib, 4, images.string());
  const uint32_t rows = be32(ib, 8, images.string());
  const uint32_t cols = be32(ib, 12, images.string());
  const uint32_t n_labels = be32(lb, 4, labels.string());
  if (n != n_labels)
    throw format_error("IDX image/label count mismatch: " + std::to_string(n) + " vs " +
                       std::to_string(n_labels));
  const size_t pixels = size_t(n) * rows * cols;
  if (ib.size() != 16 + pixels)
    throw format_error("truncated IDX image payload in " + images.string() + " at offset " +
                       std::to_string(ib.size()));
  if (lb.size() != 8 + n)
    throw format_error("truncated IDX label payload in " + labels.string() + " at offset " +
                       std::to_string(lb.size()));

  Dataset ds;
  ds.name = "idx:" + images.filename().string();
  ds.features = Tensor({n, 1, rows, cols});
  for (size_t i = 0; i < pixels; ++i) ds.features.data[i] = double(ib[16 + i]) / 255.0;
  ds.labels.resize(n);
  int max_label = 0;
  for (size_t i = 0; i < n; ++i) {
    ds.labels[i] = int(lb[8 + i]);
    max_label = std::max(max_label, ds.labels[i]);
  }
  ds.class_count = max_label + 1;
  ds.features.require_finite(images.string());
  return ds;
}

Dataset load_cifar10_binary(const std::filesystem::path& path) {
  const auto bytes = read_file_bytes(path);
  constexpr size_t kRecord = 3073;  // 1 label byte + 3*32*32 pixels
  if (bytes.empty()) throw format_error("empty CIFAR-10 file " + path.string());
  if (bytes.size() % kRecord != 0)
    throw format_error("truncated CIFAR-10 record in " + path.string() + " at offset " +
                       std::to_string((bytes.size() / kRecord) * kRecord));
  const size_t n = bytes.size() / kRecord;
  Dataset ds;
  ds.name = "cifar10:" + path.filename().string();
  ds.features = Tensor({n, 3, 32, 32});
  ds.labels.resize(n);
  ds.class_count = 10;
  for (size_t r = 0; r < n; ++r) {
    const unsigned char* rec = bytes.data() + r * kRecord;
    if (rec[0] > 9)
      throw format_error("label byte " + std::to_string(int(rec[0])) + " out of range in " +
                         path.string() + " record " + std::to_string(r));
    ds.labels[r] = int(rec[0]);
    for (size_t i = 0; i < 3072; ++i)
      ds.features.data[r * 3072 + i] = double(rec[1 + i]) / 255.0;
  }
  return ds;
}

Dataset load_cifar10_dir(const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> files;
  for (int i = 1; i <= 5; ++i) {
    auto p = dir / ("data_batch_" + std::to_string(i) + ".bin");
    if (std::filesystem::exists(p)) files.push_back(p);
  }
  if (std::filesystem::exists(dir / "test_batch.bin")) files.push_back(dir / "test_batch.bin");
  if (files.empty())
    throw data_error("no CIFAR-10 .bin batches found under " + dir.string() +
                     " (expected data_batch_*.bin / test_batch.bin)");
  Dataset all;
  for (size_t fi = 0; fi < files.size(); ++fi) {
    Dataset part = load_cifar10_binary(files[fi]);
    if (fi == 0) {
      all = std::move(part);
      all.name = "cifar10";
    } else {
      all.features.data.insert(all.features.data.end(), part.features.data.begin(),
                               part.features.data.end());
      all.features.shape[0] += part.features.shape[0];
      all.labels.insert(all.labels.end(), part.labels.begin(), part.labels.end());
    }
  }
  return all;
}

Dataset load_csv_tabular(const std::filesystem::path& path, const std::string& label_column) {
  std::ifstream in(path);
  if (!in) throw data_error("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw format_error("empty CSV file " + path.string());
  const std::vector<std::string> header = split(line, ',');
  long long label_col = -1;
  for (size_t i = 0; i < header.size(); ++i)
    if (header[i] == label_column) label_col = static_cast<long long>(i);
  if (label_col < 0)
    throw format_error("label column '" + label_column + "' not found in " + path.string());

  std::vector<double> values;
  std::vector<int> labels;
  size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    const std::vector<std::string> cells = split(line, ',');
    if (cells.size() != header.size())
      throw format_error(path.string() + " row " + std::to_string(row) + ": expected " +
                         std::to_string(header.size()) + " columns, got " +
                         std::to_string(cells.size()));
    for (size_t c = 0; c < cells.size(); ++c) {
      double v;
      try {
        v = parse_double(cells[c], "cell");
      } catch (const format_error&) {
        throw format_error(path.string() + " row " + std::to_string(row) + " column " +
                           header[c] + ": non-numeric cell '" + cells[c] + "'");
      }
      if (static_cast<long long>(c) == label_col) {
        const int y = static_cast<int>(v);
        if (v != double(y) || y < 0)
          throw format_error(path.string() + " row " + std::to_string(row) +
                             ": label must be a non-negative integer, got '" + cells[c] + "'");
        labels.push_back(y);
      } else {
        values.push_back(v);
      }
    }
  }
  if (labels.empty()) throw format_error("no data rows in " + path.string());
  const size_t d = header.size() - 1;
  Dataset ds;
  ds.name = "csv:" + path.filename().string();
  ds.features = Tensor::from({labels.size(), d}, std::move(values));
  ds.labels = std::move(labels);
  ds.class_count = *std::max_element(ds.labels.begin(), ds.labels.end()) + 1;
  ds.features.require_finite(path.string());
  return ds;
}

Dataset synth_tabular(uint64_t seed, size_t n, size_t d, int classes) {
  if (n < 1 || d < 2 || classes < 2) throw config_error("synth_tabular requires n>=1, d>=2, classes>=2");
  Rng rng(seed);
  Dataset ds;
  ds.name = "synth";
  ds.features = Tensor({n, d});
  ds.labels.resize(n);
  ds.class_count = classes;
  const double mu = 1.5, sigma = 0.8;
  for (size_t i = 0; i < n; ++i) {
    double* x = ds.features.ptr() + i * d;
    if (classes == 2) {
      const size_t q = rng.uniform_below(4);
      const double cx = (q & 1) ? mu : -mu;
      const double cy = (q & 2) ? mu : -mu;
      x[0] = cx + sigma * rng.normal();
      x[1] = cy + sigma * rng.normal();
      ds.labels[i] = (cx * cy < 0.0) ? 1 : 0;
    } else {
      const size_t c = rng.uniform_below(static_cast<uint64_t>(classes));
      const double angle = 6.283185307179586 * double(c) / double(classes);
      x[0] = mu * std::cos(angle) + sigma * rng.normal();
      x[1] = mu * std::sin(angle) + sigma * rng.normal();
      ds.labels[i] = static_cast<int>(c);
    }
    for (size_t j = 2; j < d; ++j) x[j] = rng.normal();
  }
  return ds;
}

Split split_indices(size_t n, const SplitSpec& spec) {
  const double sum = spec.train + spec.valid + spec.test;
  if (std::fabs(sum - 1.0) > 1e-9) throw config_error("split fractions must sum to 1");
  std::vector<size_t> perm(n);
  for (size_t i = 0; i < n; ++i) perm[i] = i;
  Rng rng(spec.seed);
  rng.shuffle(perm);
  size_t n_train = static_cast<size_t>(std::llround(spec.train * double(n)));
  size_t n_valid = static_cast<size_t>(std::llround(spec.valid * double(n)));
  n_train = std::min(n_train, n >= 2 ? n - 2 : n);
  n_valid = std::min(n_valid, n - n_train >= 1 ? n - n_train - 1 : size_t(0));
  Split s;
  s.train.assign(perm.begin(), perm.begin() + n_train);
  s.valid.assign(perm.begin() + n_train, perm.begin() + n_train + n_valid);
  s.test.assign(perm.begin() + n_train + n_valid, perm.end());
  if (s.train.empty() || s.valid.empty() || s.test.empty())
    throw config_error("split produced an empty subset; dataset too small for the fractions");
  return s;
}

void standardize(Dataset& ds, const std::vector<size_t>& train_idx, NormKind kind) {
  if (kind == NormKind::None) return;
  const size_t per_sample = ds.features.size() / ds.features.dim(0);
  size_t groups, group_stride;
  if (kind == NormKind::PerFeature) {
    groups = per_sample;
    group_stride = 1;
  } else {  // PerChannel: [N, c, h, w]
    if (ds.features.shape.size() != 4)
      throw config_error("per-channel standardization needs [n, c, h, w] features");
    groups = ds.features.dim(1);
    group_stride = ds.features.dim(2) * ds.features.dim(3);
  }
  std::vector<double> mean(groups, 0.0), var(groups, 0.0);
  size_t count = 0;
  for (size_t idx : train_idx) {
    const double* x = ds.features.ptr() + idx * per_sample;
    for (size_t g = 0; g < groups; ++g)
      for (size_t j = 0; j < group_stride; ++j) mean[g] += x[g * group_stride + j];
    ++count;
  }
  const double denom = double(count) * double(group_stride);
  for (size_t g = 0; g < groups; ++g) mean[g] /= denom;
  for (size_t idx : train_idx) {
    const double* x = ds.features.ptr() + idx * per_sample;
    for (size_t g = 0; g < groups; ++g)
      for (size_t j = 0; j < group_stride; ++j) {
        const double dlt = x[g * group_stride + j] - mean[g];
        var[g] += dlt * dlt;
      }
  }
  std::vector<double> scale(groups);
  for (size_t g = 0; g < groups; ++g) {
    const double sd = std::sqrt(var[g] / denom);
    scale[g] = sd < 1e-12 ? 0.0 : 1.0 / sd;  // constant feature: zero it out
  }
  const size_t n = ds.features.dim(0);
  for (size_t i = 0; i < n; ++i) {
    double* x = ds.features.ptr() + i * per_sample;
    for (size_t g = 0; g < groups; ++g)
      for (size_t j = 0; j < group_stride; ++j)
        x[g * group_stride + j] = (x[g * group_stride + j] - mean[g]) * scale[g];
  }
}

Batch gather_batch(const Dataset& ds, const std::vector<size_t>& order, size_t begin, size_t end) {
  const size_t per_sample = ds.features.size() / ds.features.dim(0);
  std::vector<size_t> shape = ds.features.shape;
  shape[0] = end - begin;
  Batch b;
  b.features = Tensor(shape);
  b.labels.resize(end - begin);
  for (size_t i = begin; i < end; ++i) {
    const size_t src = order[i];
    std::memcpy(b.features.ptr() + (i - begin) * per_sample, ds.features.ptr() + src * per_sample,
                per_sample * sizeof(double));
    b.labels[i - begin] = ds.labels[src];
  }
  return b;
}

std::vector<std::pair<size_t, size_t>> batch_ranges(size_t n, size_t batch_size) {
  if (batch_size < 1) throw config_error("batch_size must be >= 1");
  std::vector<std::pair<size_t, size_t>> out;
  for (size_t b = 0; b < n; b += batch_size) out.emplace_back(b, std::min(b + batch_size, n));
  return out;
}

}  // namespace dstlab
