#pragma once

#include <string>
#include <utility>
#include <vector>

#include "dstlab/rng.hpp"
#include "dstlab/tensor.hpp"

namespace dstlab {

enum class LayerKind { Linear, Conv2d, ReLU, MaxPool2, GlobalAvgPool };

struct LayerSpec {
  LayerKind kind;
  size_t in = 0, out = 0;  // Linear: feature counts; Conv2d: channel counts
  size_t kernel = 0, stride = 1, pad = 0;
  bool has_bias = true;

  static LayerSpec linear(size_t in, size_t out, bool bias = true) {
    return {LayerKind::Linear, in, out, 0, 1, 0, bias};
  }
  static LayerSpec conv2d(size_t c_in, size_t c_out, size_t k, size_t stride, size_t pad,
                          bool bias = true) {
    return {LayerKind::Conv2d, c_in, c_out, k, stride, pad, bias};
  }
  static LayerSpec relu() { return {LayerKind::ReLU}; }
  static LayerSpec maxpool2() { return {LayerKind::MaxPool2}; }
  static LayerSpec global_avg_pool() { return {LayerKind::GlobalAvgPool}; }

  bool parametric() const { return kind == LayerKind::Linear || kind == LayerKind::Conv2d; }
  size_t weight_count() const;
  size_t fan_in() const;
  std::string describe() const;
};

// Layer sequence plus parameters and the forward caches needed by backward.
// One instance is owned by exactly one experiment; kernels may parallelize
// inside an op but the state itself is never shared.
struct NetworkState {
  std::vector<LayerSpec> layers;
  std::vector<Tensor> weights;  // empty Tensor for non-parametric layers
  std::vector<Tensor> biases;

  // forward caches
  std::vector<Tensor> inputs;
  std::vector<std::vector<size_t>> pool_argmax;
  Tensor logits;
  bool cache_valid = false;
};

struct ParamGrads {
  std::vector<Tensor> weights;
  std::vector<Tensor> biases;
};

enum class LossKind { SoftmaxXent, SigmoidBce };

NetworkState make_network(std::vector<LayerSpec> layers);
size_t param_count(const NetworkState& net);
ParamGrads zero_grads(const NetworkState& net);

// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) for weights and biases, drawn in
// layer order (weight then bias) from the given stream.
void init_params(NetworkState& net, Rng& rng);

// Runs the layer stack, caching activations for backward. Purely functional
// over (params, batch).
Tensor forward(NetworkState& net, const Tensor& batch);

double batch_loss(const Tensor& logits, const std::vector<int>& labels, LossKind kind);

// Mean loss over the batch plus dense gradients for every parameter,
// including weights currently held at zero by a mask.
std::pair<double, ParamGrads> loss_and_grad(NetworkState& net, const Tensor& batch,
                                            const std::vector<int>& labels, LossKind kind);

// Central-difference gradient of the batch loss for every parameter.
// O(#params) forward passes; test oracle for loss_and_grad.
ParamGrads finite_diff_grad(NetworkState& net, const Tensor& batch, const std::vector<int>& labels,
                            LossKind kind, double h);

// Same, restricted to `samples` positions per parameter tensor (chosen with
// `rng`); keeps gradient checks on the large presets affordable. A parameter
// whose +-h probes land on different sides of a ReLU or pooling kink is
// skipped: central differences do not estimate a derivative across a kink.
struct GradCheckResult {
  double max_rel_err = 0.0;
  size_t checked = 0;
  size_t skipped_kinks = 0;
};
GradCheckResult gradcheck_sampled(NetworkState& net, const Tensor& batch,
                                  const std::vector<int>& labels, LossKind kind, double h,
                                  size_t samples_per_tensor, Rng& rng);

double rel_err(double analytic, double reference);

struct Preset {
  std::string name;
  std::vector<LayerSpec> layers;
  LossKind loss;
  std::vector<size_t> input_shape;  // per-sample shape
  int class_count = 0;
};

Preset make_preset(const std::string& name);
std::vector<std::string> preset_names();

}  // namespace dstlab
