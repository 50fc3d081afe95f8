#include "dstlab/network.hpp"

#include <algorithm>
#include <cmath>

#include "dstlab/kernels.hpp"

namespace dstlab {

size_t LayerSpec::weight_count() const {
  switch (kind) {
    case LayerKind::Linear:
      return in * out;
    case LayerKind::Conv2d:
      return out * in * kernel * kernel;
    default:
      return 0;
  }
}

size_t LayerSpec::fan_in() const {
  switch (kind) {
    case LayerKind::Linear:
      return in;
    case LayerKind::Conv2d:
      return in * kernel * kernel;
    default:
      return 0;
  }
}

std::string LayerSpec::describe() const {
  switch (kind) {
    case LayerKind::Linear:
      return "Linear(" + std::to_string(in) + "," + std::to_string(out) + ")";
    case LayerKind::Conv2d:
      return "Conv2d(" + std::to_string(in) + "," + std::to_string(out) + "," +
             std::to_string(kernel) + ",s" + std::to_string(stride) + ",p" + std::to_string(pad) +
             ")";
    case LayerKind::ReLU:
      return "ReLU";
    case LayerKind::MaxPool2:
      return "MaxPool2";
    case LayerKind::GlobalAvgPool:
      return "GlobalAvgPool";
  }
  return "?";
}

NetworkState make_network(std::vector<LayerSpec> layers) {
  NetworkState net;
  net.layers = std::move(layers);
  net.weights.resize(net.layers.size());
  net.biases.resize(net.layers.size());
  net.inputs.resize(net.layers.size());
  net.pool_argmax.resize(net.layers.size());
  for (size_t i = 0; i < net.layers.size(); ++i) {
    const LayerSpec& l = net.layers[i];
    if (l.kind == LayerKind::Linear) {
      net.weights[i] = Tensor({l.out, l.in});
      if (l.has_bias) net.biases[i] = Tensor({l.out});
    } else if (l.kind == LayerKind::Conv2d) {
      net.weights[i] = Tensor({l.out, l.in, l.kernel, l.kernel});
      if (l.has_bias) net.biases[i] = Tensor({l.out});
    }
  }
  return net;
}

size_t param_count(const NetworkState& net) {
  size_t n = 0;
  for (size_t i = 0; i < net.layers.size(); ++i) n += net.weights[i].size() + net.biases[i].size();
  return n;
}

ParamGrads zero_grads(const NetworkState& net) {
  ParamGrads g;
  g.weights.resize(net.layers.size());
  g.biases.resize(net.layers.size());
  for (size_t i = 0; i < net.layers.size(); ++i) {
    if (net.weights[i].size()) g.weights[i] = Tensor(net.weights[i].shape);
    if (net.biases[i].size()) g.biases[i] = Tensor(net.biases[i].shape);
  }
  return g;
}

void init_params(NetworkState& net, Rng& rng) {
  for (size_t i = 0; i < net.layers.size(); ++i) {
    if (!net.layers[i].parametric()) continue;
    const double bound = 1.0 / std::sqrt(static_cast<double>(net.layers[i].fan_in()));
    for (double& v : net.weights[i].data) v = rng.uniform(-bound, bound);
    for (double& v : net.biases[i].data) v = rng.uniform(-bound, bound);
  }
}

namespace {

size_t flat_features(const Tensor& t) { return t.size() / t.dim(0); }

void require_image(const Tensor& t, const std::string& where) {
  if (t.shape.size() != 4)
    throw config_error(where + " expects a [batch, c, h, w] input, got shape " + t.shape_string());
}

}  // namespace

Tensor forward(NetworkState& net, const Tensor& batch) {
  if (batch.shape.empty() || batch.dim(0) == 0) throw config_error("empty batch");
  Tensor cur = batch;
  const size_t b = batch.dim(0);
  for (size_t i = 0; i < net.layers.size(); ++i) {
    const LayerSpec& l = net.layers[i];
    net.inputs[i] = cur;
    switch (l.kind) {
      case LayerKind::Linear: {
        if (flat_features(cur) != l.in)
          throw config_error(l.describe() + " got " + std::to_string(flat_features(cur)) +
                             " input features");
        Tensor out({b, l.out});
        kernels::linear_forward(cur.ptr(), net.weights[i].ptr(),
                                l.has_bias ? net.biases[i].ptr() : nullptr, out.ptr(), b, l.in,
                                l.out);
        cur = std::move(out);
        break;
      }
      case LayerKind::Conv2d: {
        require_image(cur, l.describe());
        if (cur.dim(1) != l.in)
          throw config_error(l.describe() + " got " + std::to_string(cur.dim(1)) + " channels");
        if (cur.dim(2) + 2 * l.pad < l.kernel || cur.dim(3) + 2 * l.pad < l.kernel)
          throw config_error(l.describe() + " kernel exceeds padded input " + cur.shape_string());
        kernels::ConvShape s{l.in, l.out, l.kernel, l.stride, l.pad, cur.dim(2), cur.dim(3)};
        Tensor out({b, l.out, s.h_out(), s.w_out()});
        kernels::conv2d_forward(cur.ptr(), net.weights[i].ptr(),
                                l.has_bias ? net.biases[i].ptr() : nullptr, out.ptr(), b, s);
        cur = std::move(out);
        break;
      }
      case LayerKind::ReLU: {
        Tensor out(cur.shape);
        kernels::relu_forward(cur.ptr(), out.ptr(), cur.size());
        cur = std::move(out);
        break;
      }
      case LayerKind::MaxPool2: {
        require_image(cur, "MaxPool2");
        if (cur.dim(2) % 2 || cur.dim(3) % 2)
          throw config_error("MaxPool2 requires even spatial dims, got " + cur.shape_string());
        Tensor out({b, cur.dim(1), cur.dim(2) / 2, cur.dim(3) / 2});
        net.pool_argmax[i].assign(out.size(), 0);
        kernels::maxpool2_forward(cur.ptr(), out.ptr(), net.pool_argmax[i].data(), b, cur.dim(1),
                                  cur.dim(2), cur.dim(3));
        cur = std::move(out);
        break;
      }
      case LayerKind::GlobalAvgPool: {
        require_image(cur, "GlobalAvgPool");
        Tensor out({b, cur.dim(1)});
        kernels::global_avg_pool_forward(cur.ptr(), out.ptr(), b, cur.dim(1), cur.dim(2),
                                         cur.dim(3));
        cur = std::move(out);
        break;
      }
    }
  }
  net.logits = cur;
  net.cache_valid = true;
  return cur;
}

namespace {

// Numerically stable per-sample losses; the batch reduction is the
// arithmetic mean taken in sample order.
double softmax_xent_loss(const Tensor& logits, const std::vector<int>& labels, Tensor* dlogits) {
  const size_t b = logits.dim(0), k = logits.dim(1);
  double total = 0.0;
  for (size_t s = 0; s < b; ++s) {
    const int y = labels[s];
    if (y < 0 || static_cast<size_t>(y) >= k)
      throw data_error("label " + std::to_string(y) + " out of range for " + std::to_string(k) +
                       " classes");
    const double* z = logits.ptr() + s * k;
    double zmax = z[0];
    for (size_t j = 1; j < k; ++j) zmax = std::max(zmax, z[j]);
    double sum = 0.0;
    for (size_t j = 0; j < k; ++j) sum += std::exp(z[j] - zmax);
    const double lse = zmax + std::log(sum);
    total += lse - z[static_cast<size_t>(y)];
    if (dlogits) {
      double* d = dlogits->ptr() + s * k;
      for (size_t j = 0; j < k; ++j)
        d[j] = (std::exp(z[j] - zmax) / sum - (static_cast<size_t>(y) == j ? 1.0 : 0.0)) /
               static_cast<double>(b);
    }
  }
  return total / static_cast<double>(b);
}

double sigmoid_bce_loss(const Tensor& logits, const std::vector<int>& labels, Tensor* dlogits) {
  const size_t b = logits.dim(0);
  if (logits.size() != b)
    throw config_error("sigmoid_bce expects one logit per sample, got shape " +
                       logits.shape_string());
  double total = 0.0;
  for (size_t s = 0; s < b; ++s) {
    const int y = labels[s];
    if (y != 0 && y != 1)
      throw data_error("label " + std::to_string(y) + " out of range for binary loss");
    const double z = logits.data[s];
    total += std::max(z, 0.0) - z * y + std::log1p(std::exp(-std::fabs(z)));
    if (dlogits) {
      const double sig = 1.0 / (1.0 + std::exp(-z));
      dlogits->data[s] = (sig - static_cast<double>(y)) / static_cast<double>(b);
    }
  }
  return total / static_cast<double>(b);
}

}  // namespace

double batch_loss(const Tensor& logits, const std::vector<int>& labels, LossKind kind) {
  if (logits.dim(0) != labels.size()) throw config_error("logits/labels batch size mismatch");
  return kind == LossKind::SoftmaxXent ? softmax_xent_loss(logits, labels, nullptr)
                                       : sigmoid_bce_loss(logits, labels, nullptr);
}

std::pair<double, ParamGrads> loss_and_grad(NetworkState& net, const Tensor& batch,
                                            const std::vector<int>& labels, LossKind kind) {
  const Tensor& logits = forward(net, batch);
  if (logits.dim(0) != labels.size()) throw config_error("logits/labels batch size mismatch");
  Tensor dcur(logits.shape);
  const double loss = kind == LossKind::SoftmaxXent ? softmax_xent_loss(logits, labels, &dcur)
                                                    : sigmoid_bce_loss(logits, labels, &dcur);

  ParamGrads grads = zero_grads(net);
  const size_t b = batch.dim(0);
  for (size_t ii = net.layers.size(); ii-- > 0;) {
    const LayerSpec& l = net.layers[ii];
    const Tensor& x = net.inputs[ii];
    switch (l.kind) {
      case LayerKind::Linear: {
        Tensor dx(x.shape);
        kernels::linear_backward(x.ptr(), net.weights[ii].ptr(), dcur.ptr(), dx.ptr(),
                                 grads.weights[ii].ptr(),
                                 l.has_bias ? grads.biases[ii].ptr() : nullptr, b, l.in, l.out);
        dcur = std::move(dx);
        break;
      }
      case LayerKind::Conv2d: {
        kernels::ConvShape s{l.in, l.out, l.kernel, l.stride, l.pad, x.dim(2), x.dim(3)};
        Tensor dx(x.shape);
        kernels::conv2d_backward(x.ptr(), net.weights[ii].ptr(), dcur.ptr(), dx.ptr(),
                                 grads.weights[ii].ptr(),
                                 l.has_bias ? grads.biases[ii].ptr() : nullptr, b, s);
        dcur = std::move(dx);
        break;
      }
      case LayerKind::ReLU: {
        Tensor dx(x.shape);
        kernels::relu_backward(x.ptr(), dcur.ptr(), dx.ptr(), x.size());
        dcur = std::move(dx);
        break;
      }
      case LayerKind::MaxPool2: {
        Tensor dx(x.shape);
        kernels::maxpool2_backward(dcur.ptr(), net.pool_argmax[ii].data(), dx.ptr(), b, x.dim(1),
                                   x.dim(2), x.dim(3));
        dcur = std::move(dx);
        break;
      }
      case LayerKind::GlobalAvgPool: {
        Tensor dx(x.shape);
        kernels::global_avg_pool_backward(dcur.ptr(), dx.ptr(), b, x.dim(1), x.dim(2), x.dim(3));
        dcur = std::move(dx);
        break;
      }
    }
  }
  return {loss, std::move(grads)};
}

namespace {

double loss_at(NetworkState& net, const Tensor& batch, const std::vector<int>& labels,
               LossKind kind) {
  return batch_loss(forward(net, batch), labels, kind);
}

double central_diff(NetworkState& net, const Tensor& batch, const std::vector<int>& labels,
                    LossKind kind, double* slot, double h) {
  const double saved = *slot;
  *slot = saved + h;
  const double lp = loss_at(net, batch, labels, kind);
  *slot = saved - h;
  const double lm = loss_at(net, batch, labels, kind);
  *slot = saved;
  return (lp - lm) / (2.0 * h);
}

}  // namespace

ParamGrads finite_diff_grad(NetworkState& net, const Tensor& batch, const std::vector<int>& labels,
                            LossKind kind, double h) {
  if (h <= 0.0) throw config_error("finite_diff_grad requires h > 0");
  ParamGrads g = zero_grads(net);
  for (size_t i = 0; i < net.layers.size(); ++i) {
    for (size_t j = 0; j < net.weights[i].size(); ++j)
      g.weights[i].data[j] = central_diff(net, batch, labels, kind, &net.weights[i].data[j], h);
    for (size_t j = 0; j < net.biases[i].size(); ++j)
      g.biases[i].data[j] = central_diff(net, batch, labels, kind, &net.biases[i].data[j], h);
  }
  return g;
}

// Relative error with a floor: gradients below the floor are effectively
// compared absolutely, which keeps central-difference round-off from
// dominating the metric.
double rel_err(double analytic, double reference) {
  const double denom = std::max({std::fabs(analytic), std::fabs(reference), 1e-3});
  return std::fabs(analytic - reference) / denom;
}

namespace {

// Fingerprint of every non-smooth decision the forward pass made: ReLU input
// signs and pooling argmax choices.
uint64_t kink_signature(const NetworkState& net) {
  HashAccumulator h;
  for (size_t i = 0; i < net.layers.size(); ++i) {
    if (net.layers[i].kind == LayerKind::ReLU) {
      for (double v : net.inputs[i].data) h.add(uint64_t(v > 0.0));
    } else if (net.layers[i].kind == LayerKind::MaxPool2) {
      for (size_t a : net.pool_argmax[i]) h.add(uint64_t(a));
    }
  }
  return h.value();
}

}  // namespace

GradCheckResult gradcheck_sampled(NetworkState& net, const Tensor& batch,
                                  const std::vector<int>& labels, LossKind kind, double h,
                                  size_t samples_per_tensor, Rng& rng) {
  auto [loss, analytic] = loss_and_grad(net, batch, labels, kind);
  (void)loss;
  GradCheckResult res;
  auto probe = [&](double* slot, double value) {
    const double saved = *slot;
    *slot = value;
    const double l = loss_at(net, batch, labels, kind);
    const uint64_t sig = kink_signature(net);
    *slot = saved;
    return std::make_pair(l, sig);
  };
  auto check_tensor = [&](Tensor& param, const Tensor& grad) {
    if (!param.size()) return;
    std::vector<size_t> idx;
    if (samples_per_tensor == 0 || param.size() <= samples_per_tensor) {
      idx.resize(param.size());
      for (size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    } else {
      idx = rng.sample_slots(param.size(), samples_per_tensor);
      std::sort(idx.begin(), idx.end());
    }
    for (size_t i : idx) {
      const auto [lp, sig_p] = probe(&param.data[i], param.data[i] + h);
      const auto [lm, sig_m] = probe(&param.data[i], param.data[i] - h);
      if (sig_p != sig_m) {
        ++res.skipped_kinks;
        continue;
      }
      const double fd = (lp - lm) / (2.0 * h);
      res.max_rel_err = std::max(res.max_rel_err, rel_err(grad.data[i], fd));
      ++res.checked;
    }
  };
  for (size_t i = 0; i < net.layers.size(); ++i) {
    check_tensor(net.weights[i], analytic.weights[i]);
    check_tensor(net.biases[i], analytic.biases[i]);
  }
  return res;
}

Preset make_preset(const std::string& name) {
  Preset p;
  p.name = name;
  if (name == "small-mlp") {
    p.layers = {LayerSpec::linear(24, 256), LayerSpec::relu(), LayerSpec::linear(256, 256),
                LayerSpec::relu(), LayerSpec::linear(256, 1)};
    p.loss = LossKind::SigmoidBce;
    p.input_shape = {24};
    p.class_count = 2;
  } else if (name == "large-mlp") {
    p.layers = {LayerSpec::linear(3 * 32 * 32, 1024), LayerSpec::relu(),
                LayerSpec::linear(1024, 512), LayerSpec::relu(), LayerSpec::linear(512, 10)};
    p.loss = LossKind::SoftmaxXent;
    p.input_shape = {3, 32, 32};
    p.class_count = 10;
  } else if (name == "small-cnn") {
    p.layers = {LayerSpec::conv2d(3, 32, 3, 1, 1),  LayerSpec::relu(),
                LayerSpec::maxpool2(),              LayerSpec::conv2d(32, 64, 3, 1, 1),
                LayerSpec::relu(),                  LayerSpec::maxpool2(),
                LayerSpec::conv2d(64, 128, 3, 1, 1), LayerSpec::relu(),
                LayerSpec::global_avg_pool(),       LayerSpec::linear(128, 10)};
    p.loss = LossKind::SoftmaxXent;
    p.input_shape = {3, 32, 32};
    p.class_count = 10;
  } else if (name == "lenet5-caffe") {
    p.layers = {LayerSpec::conv2d(1, 20, 5, 1, 0), LayerSpec::maxpool2(),
                LayerSpec::conv2d(20, 50, 5, 1, 0), LayerSpec::maxpool2(),
                LayerSpec::linear(800, 500),       LayerSpec::relu(),
                LayerSpec::linear(500, 10)};
    p.loss = LossKind::SoftmaxXent;
    p.input_shape = {1, 28, 28};
    p.class_count = 10;
  } else {
    std::string valid;
    for (const auto& n : preset_names()) valid += (valid.empty() ? "" : ", ") + n;
    throw config_error("unknown architecture '" + name + "' (valid: " + valid + ")");
  }
  return p;
}

std::vector<std::string> preset_names() {
  return {"small-mlp", "large-mlp", "small-cnn", "lenet5-caffe"};
}

}  // namespace dstlab
