#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "dstlab/analysis.hpp"

using namespace dstlab;

namespace {

MaskSnapshot snapshot_of(std::vector<std::vector<size_t>> active_per_layer,
                         std::vector<size_t> layer_sizes, const std::string& criterion = "m",
                         uint64_t seed = 1) {
  MaskSnapshot s;
  s.criterion = criterion;
  s.growth = "random";
  s.seed = seed;
  size_t active = 0, total = 0;
  for (size_t l = 0; l < layer_sizes.size(); ++l) {
    MaskSnapshot::Layer layer;
    layer.name = "layer" + std::to_string(l);
    layer.shape = {layer_sizes[l]};
    layer.active = active_per_layer[l];
    active += layer.active.size();
    total += layer_sizes[l];
    s.layers.push_back(std::move(layer));
  }
  s.density = double(active) / double(total);
  return s;
}

}  // namespace

TEST_CASE("jaccard basics") {
  CHECK(jaccard({1, 2, 3}, {1, 2, 3}) == 1.0);
  CHECK(jaccard({1, 2}, {3, 4}) == 0.0);
  CHECK(jaccard({1}, {1, 2}) == 0.5);
  CHECK(jaccard({}, {}) == 1.0);  // both empty by convention
  CHECK(jaccard({}, {1}) == 0.0);
}

TEST_CASE("mean_jaccard averages layers without weighting") {
  const LayerSets a = {{1, 2}, {5}};
  const LayerSets b = {{1, 2}, {6}};
  CHECK(mean_jaccard(a, b) == doctest::Approx(0.5));
  CHECK_THROWS_AS(mean_jaccard(a, {{1}}), analysis_error);
}

TEST_CASE("mean_jaccard matches a brute-force recount on fixtures") {
  std::mt19937_64 gen(5);
  for (int trial = 0; trial < 20; ++trial) {
    LayerSets a, b;
    double expect = 0.0;
    const size_t layers = 1 + gen() % 4;
    for (size_t l = 0; l < layers; ++l) {
      std::vector<size_t> sa, sb;
      for (size_t i = 0; i < 30; ++i) {
        if (gen() % 3 == 0) sa.push_back(i);
        if (gen() % 3 == 0) sb.push_back(i);
      }
      size_t inter = 0, uni = 0;
      for (size_t i = 0; i < 30; ++i) {
        const bool ina = std::find(sa.begin(), sa.end(), i) != sa.end();
        const bool inb = std::find(sb.begin(), sb.end(), i) != sb.end();
        inter += ina && inb;
        uni += ina || inb;
      }
      expect += uni == 0 ? 1.0 : double(inter) / double(uni);
      a.push_back(sa);
      b.push_back(sb);
    }
    CHECK(mean_jaccard(a, b) == doctest::Approx(expect / layers).epsilon(1e-12));
  }
}

TEST_CASE("random baseline approaches d/(2-d) and needs two distinct seeds") {
  const double jr = random_baseline_jr({{100000, 20000}}, {1, 2, 3});
  CHECK(std::fabs(jr - 0.2 / 1.8) < 0.02);
  CHECK_THROWS_AS(random_baseline_jr({{100, 10}}, {5, 5}), analysis_error);
  const double full = random_baseline_jr({{50, 50}}, {1, 2});
  CHECK(full == 1.0);  // density 1: identical subsets
}

TEST_CASE("end-mask similarity: diagonal, symmetry, labels") {
  const MaskSnapshot a = snapshot_of({{0, 1}, {0}}, {4, 4}, "magnitude");
  const MaskSnapshot b = snapshot_of({{0, 2}, {1}}, {4, 4}, "snip");
  const SimilarityMatrix m = end_mask_similarity({a, b});
  CHECK(m.labels == std::vector<std::string>({"magnitude", "snip"}));
  CHECK(m.values[0][0] == 1.0);
  CHECK(m.values[1][1] == 1.0);
  CHECK(m.values[0][1] == m.values[1][0]);
  // layer 0: {0,1} vs {0,2} -> 1/3; layer 1: {0} vs {1} -> 0
  CHECK(m.values[0][1] == doctest::Approx(1.0 / 6.0));
  CHECK(m.at("magnitude", "snip") == m.values[0][1]);
}

TEST_CASE("end-mask similarity rejects density mismatches") {
  const MaskSnapshot a = snapshot_of({{0, 1}}, {4}, "a");
  const MaskSnapshot b = snapshot_of({{0, 1, 2}}, {4}, "b");
  CHECK_THROWS_AS(end_mask_similarity({a, b}), analysis_error);
}

TEST_CASE("init_vs_end is 1 for an untouched mask") {
  const MaskSnapshot a = snapshot_of({{0, 1}}, {4}, "a");
  CHECK(init_vs_end(a, a) == 1.0);
}

TEST_CASE("always-kept fractions: single run, disjoint masks, recount") {
  const MaskSnapshot a = snapshot_of({{0, 1}}, {8}, "a");
  CHECK(always_kept_fraction({a}) == std::pair<double, double>{1.0, 1.0});

  const MaskSnapshot b = snapshot_of({{2, 3}}, {8}, "b");
  const auto [kept, removed] = always_kept_fraction({a, b});
  CHECK(kept == 0.0);
  CHECK(removed == doctest::Approx(4.0 / 6.0));  // {4..7} of the 6 inactive

  const MaskSnapshot c = snapshot_of({{1, 2}}, {8}, "c");
  const auto [kept2, removed2] = always_kept_fraction({a, c});
  CHECK(kept2 == doctest::Approx(1.0 / 2.0));       // index 1 of 2 active
  CHECK(removed2 == doctest::Approx(5.0 / 6.0));    // {3..7} of the 6 inactive
}

TEST_CASE("average ranks: hand-computed 3-method 4-setting fixture") {
  const std::vector<std::string> methods = {"A", "B", "C"};
  const std::vector<std::string> settings = {"s1", "s2", "s3", "s4"};
  const std::vector<std::vector<double>> acc = {
      {0.9, 0.8, 0.7},   // ranks 1, 2, 3
      {0.5, 0.6, 0.4},   // ranks 2, 1, 3
      {0.7, 0.7, 0.1},   // ranks 1.5, 1.5, 3
      {0.5, 0.5, 0.5},   // all tied at 2
  };
  const RankTable t = average_ranks(methods, settings, acc);
  CHECK(t.ranks[0] == std::vector<double>({1, 2, 3}));
  CHECK(t.ranks[1] == std::vector<double>({2, 1, 3}));
  CHECK(t.ranks[2] == std::vector<double>({1.5, 1.5, 3}));
  CHECK(t.ranks[3] == std::vector<double>({2, 2, 2}));
  CHECK(t.average[0] == doctest::Approx(1.625));
  CHECK(t.average[1] == doctest::Approx(1.625));
  CHECK(t.average[2] == doctest::Approx(2.75));

  // rank sums per setting equal k(k+1)/2
  for (const auto& row : t.ranks) {
    double sum = 0;
    for (double r : row) sum += r;
    CHECK(sum == doctest::Approx(6.0));
  }

  const double cd = nemenyi_cd(3, 4);
  CHECK(cd == doctest::Approx(2.343 * std::sqrt(12.0 / 24.0)).epsilon(1e-12));
  const auto groups = cd_groups(t, cd);
  REQUIRE(groups.size() == 1);  // 2.75 - 1.625 = 1.125 < 1.656
  CHECK(groups[0].size() == 3);
}

TEST_CASE("nemenyi cd: k=2 reduces to 1.96/sqrt(N)") {
  for (size_t n : {1u, 4u, 9u, 25u})
    CHECK(nemenyi_cd(2, n) == doctest::Approx(1.960 / std::sqrt(double(n))).epsilon(1e-12));
  CHECK_THROWS_AS(nemenyi_cd(11, 5), analysis_error);
  CHECK_THROWS_AS(nemenyi_cd(3, 5, 0.01), analysis_error);
}

TEST_CASE("identical accuracies tie every method into one group") {
  const RankTable t = average_ranks({"A", "B", "C"}, {"s1", "s2"},
                                    {{0.5, 0.5, 0.5}, {0.4, 0.4, 0.4}});
  for (double a : t.average) CHECK(a == doctest::Approx(2.0));
  const auto groups = cd_groups(t, nemenyi_cd(3, 2));
  REQUIRE(groups.size() == 1);
}

TEST_CASE("cd_groups separates clearly distinct methods") {
  RankTable t;
  t.methods = {"A", "B", "C"};
  t.settings = {"x"};
  t.average = {1.0, 1.1, 3.0};
  const auto groups = cd_groups(t, 0.5);
  REQUIRE(groups.size() == 2);
  CHECK(groups[0] == std::vector<std::string>({"A", "B"}));
  CHECK(groups[1] == std::vector<std::string>({"C"}));
}

TEST_CASE("results grid reader rejects missing cells and lists them") {
  namespace fs = std::filesystem;
  const fs::path p = fs::temp_directory_path() / "dstlab_grid_test.csv";
  {
    std::ofstream out(p);
    out << "method,setting,accuracy\nA,s1,0.5\nA,s2,0.6\nB,s1,0.7\n";
  }
  std::vector<std::string> methods, settings;
  std::vector<std::vector<double>> acc;
  try {
    read_results_grid(p, methods, settings, acc);
    FAIL("expected analysis_error");
  } catch (const analysis_error& e) {
    CHECK(std::string(e.what()).find("B x s2") != std::string::npos);
  }
  {
    std::ofstream out(p);
    out << "method,setting,accuracy\nA,s1,0.5\nA,s2,0.6\nB,s1,0.7\nB,s2,0.65\n";
  }
  read_results_grid(p, methods, settings, acc);
  CHECK(methods == std::vector<std::string>({"A", "B"}));
  CHECK(settings == std::vector<std::string>({"s1", "s2"}));
  CHECK(acc[1][1] == doctest::Approx(0.65));
  fs::remove(p);
}

TEST_CASE("first-update similarity: degenerate pair mest(0) vs magnitude is exactly 1") {
  TrainConfig base;
  base.architecture = "small-mlp";
  base.dataset = "synth";
  base.synth_n = 600;
  base.density = 0.2;
  base.epochs = 1;
  base.batch_size = 64;
  base.update_period = 4;
  base.mest_lambda = 0.0;
  double jr = 0.0;
  const SimilarityMatrix m =
      first_update_similarity(base, {"magnitude", "mest"}, {1, 2}, &jr);
  CHECK(m.values[0][1] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(m.values[0][0] == doctest::Approx(1.0));
  CHECK(jr > 0.0);
  CHECK(jr < 1.0);
}

TEST_CASE("first-update similarity is a pure function of its inputs") {
  TrainConfig base;
  base.architecture = "small-mlp";
  base.dataset = "synth";
  base.synth_n = 600;
  base.density = 0.2;
  base.epochs = 1;
  base.batch_size = 64;
  base.update_period = 4;
  const SimilarityMatrix a = first_update_similarity(base, {"magnitude", "snip"}, {1, 2});
  const SimilarityMatrix b = first_update_similarity(base, {"magnitude", "snip"}, {1, 2});
  CHECK(a.to_csv() == b.to_csv());
}
