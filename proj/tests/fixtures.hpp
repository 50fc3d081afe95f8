#pragma once

// Small networks and batches shared by the unit and acceptance suites.

#include <vector>

#include "dstlab/network.hpp"
#include "dstlab/rng.hpp"

namespace dstlab::testfix {

struct Case {
  std::string name;
  NetworkState net;
  LossKind loss;
  Tensor batch;
  std::vector<int> labels;
};

inline Tensor random_batch(const std::vector<size_t>& sample_shape, size_t b, Rng& rng) {
  std::vector<size_t> shape = {b};
  shape.insert(shape.end(), sample_shape.begin(), sample_shape.end());
  Tensor t(shape);
  for (double& v : t.data) v = rng.normal();
  return t;
}

inline std::vector<int> random_labels(size_t b, int classes, Rng& rng) {
  std::vector<int> y(b);
  for (int& v : y) v = static_cast<int>(rng.uniform_below(classes));
  return y;
}

// Covers every layer kind the presets use: Linear and ReLU (mlp), 3x3 pad-1
// convolution with MaxPool2 and GlobalAvgPool (small-cnn), 5x5 unpadded
// convolution (lenet5-caffe), under both loss kinds.
inline std::vector<Case> gradcheck_cases(uint64_t seed) {
  Rng rng(seed);
  std::vector<Case> cases;
  {
    Case c;
    c.name = "mlp-bce";
    c.net = make_network({LayerSpec::linear(4, 3), LayerSpec::relu(), LayerSpec::linear(3, 1)});
    c.loss = LossKind::SigmoidBce;
    init_params(c.net, rng);
    c.batch = random_batch({4}, 3, rng);
    c.labels = random_labels(3, 2, rng);
    cases.push_back(std::move(c));
  }
  {
    Case c;
    c.name = "mlp-xent";
    c.net = make_network({LayerSpec::linear(5, 4), LayerSpec::relu(), LayerSpec::linear(4, 3)});
    c.loss = LossKind::SoftmaxXent;
    init_params(c.net, rng);
    c.batch = random_batch({5}, 2, rng);
    c.labels = random_labels(2, 3, rng);
    cases.push_back(std::move(c));
  }
  {
    Case c;
    c.name = "cnn-3x3-pool-gap";
    c.net = make_network({LayerSpec::conv2d(2, 3, 3, 1, 1), LayerSpec::relu(),
                          LayerSpec::maxpool2(), LayerSpec::conv2d(3, 4, 3, 1, 1),
                          LayerSpec::global_avg_pool(), LayerSpec::linear(4, 3)});
    c.loss = LossKind::SoftmaxXent;
    init_params(c.net, rng);
    c.batch = random_batch({2, 4, 4}, 2, rng);
    c.labels = random_labels(2, 3, rng);
    cases.push_back(std::move(c));
  }
  {
    Case c;
    c.name = "lenet-5x5";
    c.net = make_network({LayerSpec::conv2d(1, 2, 5, 1, 0), LayerSpec::maxpool2(),
                          LayerSpec::linear(8, 3)});
    c.loss = LossKind::SoftmaxXent;
    init_params(c.net, rng);
    c.batch = random_batch({1, 8, 8}, 2, rng);
    c.labels = random_labels(2, 3, rng);
    cases.push_back(std::move(c));
  }
  return cases;
}

inline double max_gradcheck_rel_err(Case& c, double h = 1e-5) {
  auto [loss, analytic] = loss_and_grad(c.net, c.batch, c.labels, c.loss);
  (void)loss;
  const ParamGrads fd = finite_diff_grad(c.net, c.batch, c.labels, c.loss, h);
  double worst = 0.0;
  for (size_t i = 0; i < c.net.layers.size(); ++i) {
    for (size_t j = 0; j < analytic.weights[i].size(); ++j)
      worst = std::max(worst, rel_err(analytic.weights[i].data[j], fd.weights[i].data[j]));
    for (size_t j = 0; j < analytic.biases[i].size(); ++j)
      worst = std::max(worst, rel_err(analytic.biases[i].data[j], fd.biases[i].data[j]));
  }
  return worst;
}

}  // namespace dstlab::testfix
