#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "dstlab/analysis.hpp"
#include "dstlab/topology.hpp"

using namespace dstlab;

namespace {

MaskableLayer linear_layer(const std::string& name, size_t fan_in, size_t fan_out) {
  MaskableLayer m;
  m.name = name;
  m.shape = {fan_out, fan_in};
  m.fan_in = fan_in;
  m.fan_out = fan_out;
  m.size = fan_in * fan_out;
  return m;
}

double direct_count_density(const SparsityPlan& plan) {
  const auto counts = plan_active_counts(plan);
  size_t active = 0, total = 0;
  for (size_t i = 0; i < counts.size(); ++i) {
    active += counts[i];
    total += plan.layers[i].size;
  }
  return double(active) / double(total);
}

}  // namespace

TEST_CASE("er_allocate: D = 1 gives density 1 everywhere") {
  const auto plan = er_allocate({linear_layer("a", 24, 256), linear_layer("b", 256, 1)}, 1.0);
  for (double d : plan.density) CHECK(d == doctest::Approx(1.0));
}

TEST_CASE("er_allocate: single layer gets exactly D") {
  const auto plan = er_allocate({linear_layer("a", 100, 50)}, 0.37);
  CHECK(plan.density[0] == doctest::Approx(0.37).epsilon(1e-12));
}

TEST_CASE("er_allocate: two-layer 24-256-1 at D=0.05 follows the scaling ratio") {
  const auto plan = er_allocate({linear_layer("a", 24, 256), linear_layer("b", 256, 1)}, 0.05);
  const double s1 = (24.0 + 256.0) / (24.0 * 256.0);
  const double s2 = (256.0 + 1.0) / (256.0 * 1.0);
  CHECK(plan.density[0] / plan.density[1] == doctest::Approx(s1 / s2).epsilon(1e-12));
  CHECK(std::fabs(direct_count_density(plan) - 0.05) / 0.05 < 0.005);
}

TEST_CASE("erk_allocate equals er_allocate on conv-free networks") {
  const std::vector<MaskableLayer> layers = {linear_layer("a", 24, 256),
                                             linear_layer("b", 256, 256),
                                             linear_layer("c", 256, 1)};
  const auto er = er_allocate(layers, 0.07);
  const auto erk = erk_allocate(layers, 0.07);
  for (size_t i = 0; i < layers.size(); ++i)
    CHECK(er.density[i] == doctest::Approx(erk.density[i]).epsilon(1e-15));
}

TEST_CASE("erk_allocate on the small-cnn preset at D=0.1") {
  NetworkState net = make_network(make_preset("small-cnn").layers);
  const auto plan = erk_allocate(maskable_layers(net), 0.1);
  CHECK(std::fabs(direct_count_density(plan) - 0.1) / 0.1 < 0.005);

  // Oracle result of the eps solve: the tiny 128->10 head clamps to density 1
  // first, then the first conv layer joins it; the middle convolutions stay
  // fractional with their ratio equal to the ratio of the scaling terms.
  REQUIRE(plan.layers.size() == 4);
  CHECK(plan.density[0] == doctest::Approx(1.0));
  CHECK(plan.density[3] == doctest::Approx(1.0));
  CHECK(plan.density[1] < 1.0);
  CHECK(plan.density[2] < 1.0);
  const double s2 = (32.0 + 64.0 + 3.0 + 3.0) / (32.0 * 64.0 * 9.0);
  const double s3 = (64.0 + 128.0 + 3.0 + 3.0) / (64.0 * 128.0 * 9.0);
  CHECK(plan.density[1] / plan.density[2] == doctest::Approx(s2 / s3).epsilon(1e-12));
}

TEST_CASE("erk_allocate: D = 1 gives density 1 everywhere") {
  NetworkState net = make_network(make_preset("small-cnn").layers);
  const auto plan = erk_allocate(maskable_layers(net), 1.0);
  for (double d : plan.density) CHECK(d == doctest::Approx(1.0));
}

TEST_CASE("allocation rejects out-of-range densities") {
  CHECK_THROWS_AS(er_allocate({linear_layer("a", 4, 4)}, 0.0), config_error);
  CHECK_THROWS_AS(er_allocate({linear_layer("a", 4, 4)}, 1.5), config_error);
}

TEST_CASE("global density tolerance holds across presets and densities") {
  for (const std::string preset : {"small-mlp", "small-cnn", "lenet5-caffe"}) {
    NetworkState net = make_network(make_preset(preset).layers);
    for (double D : {0.05, 0.1, 0.2, 0.5}) {
      const auto plan = erk_allocate(maskable_layers(net), D);
      INFO(preset << " D=" << D);
      CHECK(std::fabs(direct_count_density(plan) - D) / D < 0.005);
    }
  }
}

TEST_CASE("sample_mask: exact counts, full density, reproducibility") {
  const auto plan = er_allocate({linear_layer("a", 10, 10)}, 0.2);
  Rng r1(9), r2(9);
  const Mask m1 = sample_mask(plan, r1);
  const Mask m2 = sample_mask(plan, r2);
  CHECK(m1.layers[0].active_count == 20);
  CHECK(m1.layers[0].bits == m2.layers[0].bits);

  const auto full = er_allocate({linear_layer("a", 10, 10)}, 1.0);
  Rng r3(1);
  const Mask mf = sample_mask(full, r3);
  CHECK(mf.layers[0].active_count == 100);
}

TEST_CASE("two independent masks overlap like random subsets: J ~ d/(2-d)") {
  // closed form for two uniform k-subsets of n at density d = k/n
  const auto plan = er_allocate({linear_layer("a", 500, 200)}, 0.2);  // n = 100000
  Rng r1(1), r2(2);
  const Mask a = sample_mask(plan, r1);
  const Mask b = sample_mask(plan, r2);
  const double j = jaccard(a.layers[0].active_indices(), b.layers[0].active_indices());
  CHECK(std::fabs(j - 0.2 / 1.8) < 0.02);
}

TEST_CASE("densities count bits exactly") {
  const auto plan = er_allocate({linear_layer("a", 10, 10)}, 0.2);
  Rng rng(4);
  Mask m = sample_mask(plan, rng);
  CHECK(global_density(m) == doctest::Approx(0.2));
  CHECK(layer_density(m, 0) == doctest::Approx(0.2));
  for (size_t i = 0; i < m.layers[0].size(); ++i) m.layers[0].clear(i);
  CHECK(layer_density(m, 0) == 0.0);
}

TEST_CASE("exploration ledger: starts at D, grows monotonically, caps at 1") {
  const auto plan = er_allocate({linear_layer("a", 10, 10)}, 0.2);
  Rng rng(4);
  const Mask m = sample_mask(plan, rng);
  ExplorationLedger ledger;
  ledger.reset_from(m);
  CHECK(ledger.itop_ratio() == doctest::Approx(0.2));

  Mask all = m;
  for (size_t i = 0; i < all.layers[0].size(); ++i) all.layers[0].set(i);
  ledger.absorb(all);
  CHECK(ledger.itop_ratio() == doctest::Approx(1.0));
}

TEST_CASE("mask snapshots serialize byte-stably and round-trip") {
  const auto plan = er_allocate({linear_layer("a", 4, 3), linear_layer("b", 3, 2)}, 0.5);
  Rng rng(11);
  const Mask m = sample_mask(plan, rng);
  const MaskSnapshot s = MaskSnapshot::from_mask(m, 800, "magnitude", "random", 42);
  const std::string text = s.serialize();
  CHECK(text == MaskSnapshot::from_mask(m, 800, "magnitude", "random", 42).serialize());

  const MaskSnapshot back = MaskSnapshot::parse(text, "test");
  CHECK(back.step == 800);
  CHECK(back.criterion == "magnitude");
  CHECK(back.growth == "random");
  CHECK(back.seed == 42);
  CHECK(back.layers.size() == 2);
  for (size_t l = 0; l < 2; ++l) CHECK(back.layers[l].active == s.layers[l].active);
  CHECK(back.serialize() == text);

  const auto path = std::filesystem::temp_directory_path() / "dstlab_snap_test.txt";
  s.save(path);
  CHECK(MaskSnapshot::load(path).serialize() == text);
  std::filesystem::remove(path);
}

TEST_CASE("snapshot parser rejects malformed input") {
  CHECK_THROWS_AS(MaskSnapshot::parse("garbage\n", "test"), format_error);
  const std::string truncated = "DSTLAB-MASK v1\nstep 1\ncriterion m\n";
  CHECK_THROWS_AS(MaskSnapshot::parse(truncated, "test"), format_error);
}
