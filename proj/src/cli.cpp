#include "dstlab/cli.hpp"

#include <atomic>
#include <fstream>
#include <functional>
#include <iostream>
#include <thread>

#ifdef _OPENMP
#include <omp.h>
#endif

#include <json.hpp>

#include "dstlab/analysis.hpp"
#include "dstlab/common.hpp"
#include "dstlab/config.hpp"
#include "dstlab/trainer.hpp"

namespace dstlab::cli {

namespace fs = std::filesystem;

namespace {

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw data_error("cannot write " + path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
}

// Runs one configured experiment into its run directory. Returns the run
// status string ("ok" or the failure reason).
std::string execute_run(const TrainConfig& cfg, const fs::path& run_dir) {
  fs::create_directories(run_dir);
  try {
    Experiment ex(cfg);
    try {
      ex.run();
    } catch (const divergence_error&) {
      ex.write_outputs(run_dir);  // partial record, status field set, no DONE
      return ex.record().status;
    }
    ex.write_outputs(run_dir);
    write_text(run_dir / "DONE", "ok\n");
    return "ok";
  } catch (const std::exception& e) {
    write_text(run_dir / "FAILED", std::string(e.what()) + "\n");
    return e.what();
  }
}

}  // namespace

int cmd_train(const fs::path& config_path, const fs::path& out_dir) {
  const TrainConfig cfg = make_train_config(parse_kv_file(config_path));
  const fs::path run_dir = out_dir / cfg.run_dir_name();
  const std::string status = execute_run(cfg, run_dir);
  std::cout << run_dir.string() << " " << status << "\n";
  return status == "ok" ? 0 : 2;
}

int cmd_sweep(const fs::path& sweep_path, const fs::path& out_dir, unsigned jobs) {
  const SweepSpec spec = make_sweep_spec(parse_kv_file(sweep_path));
  const std::vector<TrainConfig> grid = sweep_grid(spec);
  fs::create_directories(out_dir);
  if (jobs == 0) jobs = 1;
#ifdef _OPENMP
  if (jobs > 1) {
    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    omp_set_num_threads(static_cast<int>(std::max(1u, hw / jobs)));
  }
#endif

  std::vector<std::string> status(grid.size());
  std::atomic<size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      const size_t i = next.fetch_add(1);
      if (i >= grid.size()) return;
      const fs::path run_dir = out_dir / grid[i].run_dir_name();
      if (fs::exists(run_dir / "DONE")) {
        status[i] = "done";  // completed by an earlier sweep
        continue;
      }
      if (fs::exists(run_dir)) fs::remove_all(run_dir);  // never reuse partial runs
      status[i] = execute_run(grid[i], run_dir);
    }
  };
  std::vector<std::thread> pool;
  for (unsigned j = 0; j < std::min<size_t>(jobs, grid.size()); ++j) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  std::string manifest =
      "run_dir,architecture,dataset,density,criterion,growth,update_period,seed,status\n";
  bool any_failed = false;
  for (size_t i = 0; i < grid.size(); ++i) {
    const TrainConfig& c = grid[i];
    const bool ok = status[i] == "ok" || status[i] == "done";
    any_failed = any_failed || !ok;
    manifest += c.run_dir_name() + "," + c.architecture + "," + c.dataset + "," +
                format_double(c.density) + "," + c.criterion + "," + c.growth + "," +
                std::to_string(c.update_period) + "," + std::to_string(c.seed) + "," +
                (ok ? status[i] : "failed") + "\n";
  }
  write_text(out_dir / "manifest.csv", manifest);
  for (size_t i = 0; i < grid.size(); ++i)
    if (status[i] != "ok" && status[i] != "done")
      std::cerr << grid[i].run_dir_name() << " failed: " << status[i] << "\n";
  std::cout << "sweep: " << grid.size() << " runs, manifest at "
            << (out_dir / "manifest.csv").string() << "\n";
  return any_failed ? 2 : 0;
}

namespace {

MaskSnapshot load_final_snapshot(const fs::path& run_dir) {
  const fs::path p = run_dir / "snapshots" / "mask_final.txt";
  if (!fs::exists(p))
    throw data_error("no final mask snapshot under " + run_dir.string() +
                     " (expected snapshots/mask_final.txt)");
  return MaskSnapshot::load(p);
}

int analyze_similarity_first(const AnalyzeOptions& o) {
  if (o.config.empty()) throw config_error("similarity-first needs --config");
  TrainConfig base = make_train_config(parse_kv_file(o.config));
  std::vector<std::string> criteria = o.criteria;
  if (criteria.empty())
    criteria = {"magnitude", "set", "mest", "sensitivity", "rsensitivity", "snip"};
  std::vector<uint64_t> seeds = o.seeds;
  if (seeds.empty()) seeds = {1, 2, 3, 4, 5};
  double jr = 0.0;
  const SimilarityMatrix m = first_update_similarity(base, criteria, seeds, &jr);
  write_text(o.out, m.to_csv());
  write_text(fs::path(o.out).concat(".jr"), "j_r=" + format_double(jr) + "\n");
  std::cout << "j_r " << format_double(jr) << "\n";
  return 0;
}

int analyze_similarity_end(const AnalyzeOptions& o) {
  if (o.inputs.size() < 2) throw config_error("similarity-end needs at least two run dirs");
  std::vector<MaskSnapshot> finals;
  for (const auto& dir : o.inputs) finals.push_back(load_final_snapshot(dir));
  write_text(o.out, end_mask_similarity(finals).to_csv());
  return 0;
}

int analyze_itop(const AnalyzeOptions& o) {
  if (o.inputs.size() != 1) throw config_error("itop needs exactly one run dir");
  const std::vector<double> series = itop_series_from_csv(o.inputs[0] / "record.csv");
  for (size_t i = 1; i < series.size(); ++i)
    if (series[i] + 1e-15 < series[i - 1])
      throw analysis_error("itop series decreases at epoch " + std::to_string(i + 1));
  std::string csv = "epoch,itop\n";
  for (size_t i = 0; i < series.size(); ++i)
    csv += std::to_string(i + 1) + "," + format_double(series[i]) + "\n";
  write_text(o.out, csv);
  return 0;
}

int analyze_rank(const AnalyzeOptions& o) {
  if (o.inputs.size() != 1) throw config_error("rank needs exactly one results.csv input");
  std::vector<std::string> methods, settings;
  std::vector<std::vector<double>> accuracy;
  read_results_grid(o.inputs[0], methods, settings, accuracy);
  const RankTable table = average_ranks(methods, settings, accuracy);
  const double cd = nemenyi_cd(methods.size(), settings.size());
  write_text(o.out, table.to_csv());

  nlohmann::ordered_json report;
  report["k"] = methods.size();
  report["n_settings"] = settings.size();
  report["alpha"] = 0.05;
  report["critical_distance"] = cd;
  nlohmann::ordered_json avg;
  for (size_t m = 0; m < methods.size(); ++m) avg[methods[m]] = table.average[m];
  report["average_ranks"] = avg;
  report["groups"] = cd_groups(table, cd);
  write_text(fs::path(o.out).concat(".cd.json"), report.dump(2) + "\n");
  return 0;
}

int analyze_always_kept(const AnalyzeOptions& o) {
  if (o.inputs.size() < 2) throw config_error("always-kept needs at least two run dirs");
  std::vector<MaskSnapshot> finals;
  for (const auto& dir : o.inputs) finals.push_back(load_final_snapshot(dir));
  for (size_t i = 1; i < finals.size(); ++i)
    if (finals[i].seed != finals[0].seed)
      throw analysis_error("always-kept compares runs of one seed; got seeds " +
                           std::to_string(finals[0].seed) + " and " +
                           std::to_string(finals[i].seed));
  const auto [kept, removed] = always_kept_fraction(finals);
  write_text(o.out, "always_kept,always_removed\n" + format_double(kept) + "," +
                        format_double(removed) + "\n");
  return 0;
}

}  // namespace

int cmd_analyze(const AnalyzeOptions& opts) {
  if (opts.out.empty()) throw config_error("analyze needs --out");
  if (opts.kind == "similarity-first") return analyze_similarity_first(opts);
  if (opts.kind == "similarity-end") return analyze_similarity_end(opts);
  if (opts.kind == "itop") return analyze_itop(opts);
  if (opts.kind == "rank") return analyze_rank(opts);
  if (opts.kind == "always-kept") return analyze_always_kept(opts);
  throw config_error("unknown analysis kind '" + opts.kind +
                     "' (valid: similarity-first, similarity-end, itop, rank, always-kept)");
}

int cmd_gradcheck(const std::string& preset_name, uint64_t seed, size_t samples) {
  const Preset preset = make_preset(preset_name);
  NetworkState net = make_network(preset.layers);
  Rng init = Rng::stream(seed, kStreamInit);
  init_params(net, init);

  Rng data(Rng::stream(seed, 97));
  std::vector<size_t> shape = {2};
  shape.insert(shape.end(), preset.input_shape.begin(), preset.input_shape.end());
  Tensor batch(shape);
  for (double& v : batch.data) v = data.normal();
  std::vector<int> labels(2);
  const int label_space = preset.loss == LossKind::SigmoidBce ? 2 : preset.class_count;
  for (int& y : labels) y = static_cast<int>(data.uniform_below(label_space));

  Rng pick(Rng::stream(seed, 98));
  const GradCheckResult res =
      gradcheck_sampled(net, batch, labels, preset.loss, 1e-5, samples, pick);
  std::cout << "gradcheck " << preset_name << ": max rel err " << format_double(res.max_rel_err)
            << " over " << res.checked << " parameters";
  if (res.skipped_kinks)
    std::cout << " (" << res.skipped_kinks << " skipped on relu/pool kinks)";
  std::cout << "\n";
  return res.checked > 0 && res.max_rel_err < 1e-6 ? 0 : 2;
}

int run_guarded(const std::function<int()>& fn) {
  try {
    return fn();
  } catch (const config_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace dstlab::cli
