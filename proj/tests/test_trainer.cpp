#include <doctest.h>

#include <cmath>
#include <limits>

#include "dstlab/trainer.hpp"

using namespace dstlab;

namespace {

TrainConfig tiny_config() {
  TrainConfig cfg;
  cfg.architecture = "small-mlp";
  cfg.dataset = "synth";
  cfg.synth_n = 600;
  cfg.synth_d = 24;
  cfg.density = 0.2;
  cfg.epochs = 3;
  cfg.batch_size = 64;
  cfg.update_period = 5;
  cfg.criterion = "magnitude";
  cfg.growth = "random";
  cfg.seed = 3;
  return cfg;
}

void check_mask_consistency(const Experiment& ex) {
  const Mask& mask = ex.mask();
  for (size_t li = 0; li < mask.layers.size(); ++li) {
    const Tensor& w = ex.net().weights[mask.net_layer_index[li]];
    for (size_t i = 0; i < mask.layers[li].size(); ++i)
      if (!mask.layers[li].bits[i]) CHECK(w.data[i] == 0.0);
  }
}

}  // namespace

TEST_CASE("vanilla sgd step: theta' = theta - lr * g") {
  NetworkState net = make_network({LayerSpec::linear(2, 1)});
  net.weights[0].data = {1.0, 2.0};
  net.biases[0].data = {0.5};
  ParamGrads g = zero_grads(net);
  g.weights[0].data = {0.1, -0.2};
  g.biases[0].data = {0.3};
  Mask mask = full_mask_for(net);
  OptimizerState opt = make_optimizer(net, 0.0, 0.0, false);
  sgd_step(net, g, mask, opt, 0.5);
  CHECK(net.weights[0].data[0] == doctest::Approx(1.0 - 0.05));
  CHECK(net.weights[0].data[1] == doctest::Approx(2.0 + 0.1));
  CHECK(net.biases[0].data[0] == doctest::Approx(0.5 - 0.15));
}

TEST_CASE("nesterov momentum and weight decay follow the reference update") {
  NetworkState net = make_network({LayerSpec::linear(1, 1, false)});
  net.weights[0].data = {1.0};
  ParamGrads g = zero_grads(net);
  g.weights[0].data = {0.5};
  Mask mask = full_mask_for(net);
  OptimizerState opt = make_optimizer(net, 0.9, 0.01, true);
  sgd_step(net, g, mask, opt, 0.1);
  // g' = 0.5 + 0.01*1 = 0.51; buf = 0.51; step = g' + 0.9*buf = 0.969
  CHECK(net.weights[0].data[0] == doctest::Approx(1.0 - 0.1 * 0.969));
}

TEST_CASE("masked weights never move and keep zero momentum") {
  NetworkState net = make_network({LayerSpec::linear(2, 1)});
  net.weights[0].data = {0.0, 2.0};
  ParamGrads g = zero_grads(net);
  g.weights[0].data = {5.0, 5.0};
  g.biases[0].data = {0.0};
  Mask mask = full_mask_for(net);
  mask.layers[0].clear(0);
  OptimizerState opt = make_optimizer(net, 0.9, 0.0, true);
  for (int i = 0; i < 3; ++i) sgd_step(net, g, mask, opt, 0.1);
  CHECK(net.weights[0].data[0] == 0.0);
  CHECK(opt.weight_momentum[0].data[0] == 0.0);
  CHECK(net.weights[0].data[1] < 2.0);
}

TEST_CASE("non-finite gradients abort with a divergence error") {
  NetworkState net = make_network({LayerSpec::linear(1, 1, false)});
  ParamGrads g = zero_grads(net);
  g.weights[0].data = {std::numeric_limits<double>::quiet_NaN()};
  Mask mask = full_mask_for(net);
  OptimizerState opt = make_optimizer(net, 0.9, 0.0, true);
  CHECK_THROWS_AS(sgd_step(net, g, mask, opt, 0.1), divergence_error);
}

TEST_CASE("dst_update matches a full hand computation") {
  // Single layer of 8 weights, active {0, 1, 2, 5}, rho = 0.5 -> k = 2.
  // Magnitude prunes the two smallest active |w|: index 1 (0.05) and index 5
  // (0.2). Gradient growth picks the two largest |g| among the pre-prune
  // inactive {3, 4, 6, 7}: index 6 (0.9) and index 3 (0.7).
  NetworkState net = make_network({LayerSpec::linear(8, 1, false)});
  net.weights[0].data = {0.9, -0.05, 0.4, 0.0, 0.0, 0.2, 0.0, 0.0};
  Mask mask = full_mask_for(net);
  for (size_t i : {3u, 4u, 6u, 7u}) mask.layers[0].clear(i);
  ParamGrads grads = zero_grads(net);
  grads.weights[0].data = {0.1, 0.2, 0.3, 0.7, 0.1, 0.4, 0.9, 0.3};
  OptimizerState opt = make_optimizer(net, 0.9, 0.0, true);
  opt.weight_momentum[0].data = {1, 1, 1, 1, 1, 1, 1, 1};
  ExplorationLedger ledger;
  ledger.reset_from(mask);
  Rng grow_rng(1), prune_rng(2);

  const UpdateResult res =
      dst_update(net, mask, opt, grads, parse_criterion("magnitude"), GrowthKind::Gradient, 0.5,
                 Scope::Local, grow_rng, prune_rng, ledger);

  CHECK(res.pruned[0] == std::vector<size_t>({1, 5}));
  CHECK(res.grown[0] == std::vector<size_t>({3, 6}));
  CHECK(mask.layers[0].active_count == 4);
  CHECK(mask.layers[0].bits == std::vector<uint8_t>({1, 0, 1, 1, 0, 0, 1, 0}));
  for (size_t i : {1u, 3u, 5u, 6u}) {
    CHECK(net.weights[0].data[i] == 0.0);
    CHECK(opt.weight_momentum[0].data[i] == 0.0);
  }
  CHECK(opt.weight_momentum[0].data[0] == 1.0);  // untouched active weight
  CHECK(ledger.itop_ratio() == doctest::Approx(6.0 / 8.0));  // {0,1,2,5} plus {3,6}
}

TEST_CASE("dst_update with rho 0 changes nothing") {
  NetworkState net = make_network({LayerSpec::linear(4, 1, false)});
  net.weights[0].data = {0.1, 0.2, 0.3, 0.0};
  Mask mask = full_mask_for(net);
  mask.layers[0].clear(3);
  const std::vector<uint8_t> before = mask.layers[0].bits;
  ParamGrads grads = zero_grads(net);
  OptimizerState opt = make_optimizer(net, 0.9, 0.0, true);
  ExplorationLedger ledger;
  ledger.reset_from(mask);
  Rng grow_rng(1), prune_rng(2);
  dst_update(net, mask, opt, grads, parse_criterion("magnitude"), GrowthKind::Random, 0.0,
             Scope::Local, grow_rng, prune_rng, ledger);
  CHECK(mask.layers[0].bits == before);
}

TEST_CASE("density is preserved per layer (local) and globally (global)") {
  TrainConfig cfg = tiny_config();
  for (const std::string scope : {"local", "global"}) {
    cfg.pruning_scope = scope;
    cfg.criterion = "snip";
    cfg.growth = "gradient";
    Experiment ex(cfg);
    std::vector<size_t> before;
    for (const auto& l : ex.mask().layers) before.push_back(l.active_count);
    const size_t total_before = ex.mask().total_active();
    ex.run_steps(12);  // crosses two updates
    if (scope == "local") {
      for (size_t li = 0; li < before.size(); ++li)
        CHECK(ex.mask().layers[li].active_count == before[li]);
    }
    CHECK(ex.mask().total_active() == total_before);
    check_mask_consistency(ex);
  }
}

TEST_CASE("mask-weight consistency holds at every step") {
  TrainConfig cfg = tiny_config();
  cfg.criterion = "set";
  Experiment ex(cfg);
  ex.on_step = [](const Experiment& e, uint64_t) { check_mask_consistency(e); };
  ex.run();
  CHECK(ex.record().rows.size() == cfg.epochs);
}

TEST_CASE("same config and seed reproduce the run bit for bit") {
  const TrainConfig cfg = tiny_config();
  Experiment a(cfg), b(cfg);
  a.run();
  b.run();
  CHECK(a.state_hash() == b.state_hash());
  CHECK(a.record().to_csv() == b.record().to_csv());
  REQUIRE(a.snapshots().size() == b.snapshots().size());
  for (size_t i = 0; i < a.snapshots().size(); ++i)
    CHECK(a.snapshots()[i].serialize() == b.snapshots()[i].serialize());
}

TEST_CASE("mest(lambda=0) produces the same trajectory as magnitude") {
  TrainConfig cfg = tiny_config();
  cfg.criterion = "mest";
  cfg.mest_lambda = 0.0;
  Experiment a(cfg);
  TrainConfig cfg2 = tiny_config();
  cfg2.criterion = "magnitude";
  Experiment b(cfg2);
  a.run_steps(11);
  b.run_steps(11);
  CHECK(a.state_hash() == b.state_hash());
}

TEST_CASE("static run: updates never fire and itop stays at the density") {
  TrainConfig cfg = tiny_config();
  cfg.update_period = 0;
  Experiment ex(cfg);
  ex.run();
  CHECK(ex.snapshots().size() == 2);  // init and final only
  for (const auto& row : ex.record().rows)
    CHECK(row.itop == doctest::Approx(row.density).epsilon(1e-9));
}

TEST_CASE("a dst run matches the static run bit for bit before its first update") {
  TrainConfig dst_cfg = tiny_config();
  dst_cfg.update_period = 7;
  TrainConfig static_cfg = tiny_config();
  static_cfg.update_period = 0;

  Experiment dst(dst_cfg), stat(static_cfg);
  CHECK(dst.first_update_step() == 7);
  dst.run_steps(6);
  stat.run_steps(6);
  CHECK(dst.state_hash() == stat.state_hash());
  dst.run_steps(1);
  stat.run_steps(1);
  CHECK(dst.state_hash() != stat.state_hash());  // the update really happened
}

TEST_CASE("update period beyond the run reproduces the static trajectory exactly") {
  TrainConfig huge = tiny_config();
  huge.update_period = 1000000;  // far beyond total steps
  TrainConfig stat = tiny_config();
  stat.update_period = 0;
  Experiment a(huge), b(stat);
  a.run();
  b.run();
  CHECK(a.state_hash() == b.state_hash());
  CHECK(a.record().to_csv() == b.record().to_csv());
  REQUIRE(a.snapshots().size() == b.snapshots().size());
  for (size_t i = 0; i < a.snapshots().size(); ++i)
    CHECK(a.snapshots()[i].serialize() == b.snapshots()[i].serialize());
}

TEST_CASE("evaluate: hand fixture with the documented tie rule") {
  // identity network: logits = features
  NetworkState net = make_network({LayerSpec::linear(2, 2)});
  net.weights[0].data = {1, 0, 0, 1};
  Dataset ds;
  ds.name = "fixture";
  ds.features = Tensor::from({4, 2}, {5, 0, 0, 5, 3, 1, 0, 0});
  ds.labels = {0, 1, 0, 1};
  ds.class_count = 2;
  auto [loss, acc] = evaluate(net, ds, {0, 1, 2, 3}, LossKind::SoftmaxXent, 2);
  // rows 0-2: argmax correct; row 3 is a tie -> class 0, label 1 -> wrong
  CHECK(acc == doctest::Approx(0.75));
  const double expected_loss =
      (std::log1p(std::exp(-5.0)) + std::log1p(std::exp(-5.0)) + std::log1p(std::exp(-2.0)) +
       std::log(2.0)) /
      4.0;
  CHECK(loss == doctest::Approx(expected_loss).epsilon(1e-9));

  // binary head: logit 0 resolves to class 0
  NetworkState bnet = make_network({LayerSpec::linear(1, 1, false)});
  bnet.weights[0].data = {1.0};
  Dataset bds;
  bds.features = Tensor::from({2, 1}, {0.0, 0.0});
  bds.labels = {0, 1};
  bds.class_count = 2;
  auto [bloss, bacc] = evaluate(bnet, bds, {0, 1}, LossKind::SigmoidBce, 2);
  CHECK(bacc == doctest::Approx(0.5));
  CHECK(bloss == doctest::Approx(std::log(2.0)));
}

TEST_CASE("evaluate rejects empty splits") {
  NetworkState net = make_network({LayerSpec::linear(2, 2)});
  Dataset ds;
  ds.features = Tensor({1, 2});
  ds.labels = {0};
  ds.class_count = 2;
  CHECK_THROWS_AS(evaluate(net, ds, {}, LossKind::SoftmaxXent, 2), data_error);
}

TEST_CASE("itop never decreases over a run") {
  Experiment ex(tiny_config());
  ex.run();
  double prev = 0.0;
  for (const auto& row : ex.record().rows) {
    CHECK(row.itop >= prev - 1e-15);
    prev = row.itop;
  }
  CHECK(prev <= 1.0);
}

TEST_CASE("run records carry one row per epoch and echo the config") {
  const TrainConfig cfg = tiny_config();
  Experiment ex(cfg);
  ex.run();
  CHECK(ex.record().rows.size() == cfg.epochs);
  CHECK(cfg.echo().at("criterion") == "magnitude");
  CHECK(cfg.echo_text().find("density=0.2") != std::string::npos);
}

TEST_CASE("dst_update_batch_size draws a larger scoring batch deterministically") {
  // snip + gradient growth actually consult the update gradient, so the
  // bigger scoring batch must change the trajectory.
  TrainConfig cfg = tiny_config();
  cfg.criterion = "snip";
  cfg.growth = "gradient";
  cfg.dst_update_batch_size = 256;
  Experiment a(cfg), b(cfg);
  a.run();
  b.run();
  CHECK(a.state_hash() == b.state_hash());

  TrainConfig plain = tiny_config();
  plain.criterion = "snip";
  plain.growth = "gradient";
  Experiment c(plain);
  c.run();
  CHECK(a.state_hash() != c.state_hash());  // the option does change the updates
}
