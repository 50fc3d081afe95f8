#include "dstlab/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "dstlab/common.hpp"

namespace dstlab {

Scope parse_scope(const std::string& name) {
  if (name == "local") return Scope::Local;
  if (name == "global") return Scope::Global;
  throw config_error("unknown pruning_scope '" + name + "' (valid: local, global)");
}

namespace {

std::string bool_str(bool b) { return b ? "true" : "false"; }

std::string milestones_str(const std::vector<double>& m) {
  std::string s;
  for (size_t i = 0; i < m.size(); ++i) {
    if (i) s += ",";
    s += format_double(m[i]);
  }
  return s;
}

}  // namespace

std::map<std::string, std::string> TrainConfig::echo() const {
  std::map<std::string, std::string> e;
  e["architecture"] = architecture;
  e["dataset"] = dataset;
  e["dataset_path"] = dataset_path;
  e["label_column"] = label_column;
  e["density"] = format_double(density);
  e["allocation"] = allocation;
  e["criterion"] = criterion;
  e["growth"] = growth;
  e["pruning_scope"] = pruning_scope;
  e["prune_fraction"] = format_double(prune_fraction);
  e["prune_schedule"] = prune_schedule;
  e["linear_factor"] = format_double(linear_factor);
  e["linear_every"] = std::to_string(linear_every);
  e["update_period"] = std::to_string(update_period);
  e["update_stop_fraction"] = format_double(update_stop_fraction);
  e["epochs"] = std::to_string(epochs);
  e["batch_size"] = std::to_string(batch_size);
  e["lr"] = format_double(lr);
  e["lr_decay"] = format_double(lr_decay);
  e["milestones"] = milestones_str(milestones);
  e["momentum"] = format_double(momentum);
  e["weight_decay"] = format_double(weight_decay);
  e["nesterov"] = bool_str(nesterov);
  e["seed"] = std::to_string(seed);
  e["mest_lambda"] = format_double(mest_lambda);
  e["dst_update_batch_size"] = std::to_string(dst_update_batch_size);
  e["synth_n"] = std::to_string(synth_n);
  e["synth_d"] = std::to_string(synth_d);
  e["synth_classes"] = std::to_string(synth_classes);
  e["synth_seed"] = std::to_string(synth_seed);
  e["split_seed"] = std::to_string(split_seed);
  e["train_fraction"] = format_double(train_fraction);
  e["valid_fraction"] = format_double(valid_fraction);
  e["test_fraction"] = format_double(test_fraction);
  return e;
}

std::string TrainConfig::echo_text() const {
  std::string out;
  for (const auto& [k, v] : echo()) out += k + "=" + v + "\n";
  return out;
}

uint64_t TrainConfig::config_hash() const { return fnv1a64(echo_text()); }

std::string TrainConfig::run_dir_name() const {
  return hex64(config_hash()) + "_s" + std::to_string(seed);
}

void TrainConfig::validate() const {
  make_preset(architecture);
  if (!(density > 0.0 && density <= 1.0)) throw config_error("density must be in (0, 1]");
  parse_criterion(criterion, mest_lambda);
  parse_growth(growth);
  parse_scope(pruning_scope);
  if (allocation != "er" && allocation != "erk")
    throw config_error("unknown allocation '" + allocation + "' (valid: er, erk)");
  if (prune_schedule != "cosine" && prune_schedule != "linear" && prune_schedule != "constant")
    throw config_error("unknown prune_schedule '" + prune_schedule +
                       "' (valid: cosine, linear, constant)");
  if (prune_fraction < 0.0 || prune_fraction > 1.0)
    throw config_error("prune_fraction must be in [0, 1]");
  if (!(linear_factor > 0.0 && linear_factor <= 1.0))
    throw config_error("linear_factor must be in (0, 1]");
  if (linear_every < 1) throw config_error("linear_every must be >= 1");
  if (update_stop_fraction < 0.0 || update_stop_fraction > 1.0)
    throw config_error("update_stop_fraction must be in [0, 1]");
  if (epochs < 1) throw config_error("epochs must be >= 1");
  if (batch_size < 1) throw config_error("batch_size must be >= 1");
  if (!(lr > 0.0)) throw config_error("lr must be positive");
  if (!(lr_decay > 0.0 && lr_decay <= 1.0)) throw config_error("lr_decay must be in (0, 1]");
  if (momentum < 0.0 || momentum >= 1.0) throw config_error("momentum must be in [0, 1)");
  if (weight_decay < 0.0) throw config_error("weight_decay must be >= 0");
  if (dataset != "synth" && dataset != "fashion_mnist" && dataset != "cifar10" &&
      dataset != "csv")
    throw config_error("unknown dataset '" + dataset +
                       "' (valid: synth, fashion_mnist, cifar10, csv)");
}

OptimizerState make_optimizer(const NetworkState& net, double momentum, double weight_decay,
                              bool nesterov) {
  OptimizerState opt;
  opt.momentum = momentum;
  opt.weight_decay = weight_decay;
  opt.nesterov = nesterov;
  opt.weight_momentum.resize(net.layers.size());
  opt.bias_momentum.resize(net.layers.size());
  for (size_t i = 0; i < net.layers.size(); ++i) {
    if (net.weights[i].size()) opt.weight_momentum[i] = Tensor(net.weights[i].shape);
    if (net.biases[i].size()) opt.bias_momentum[i] = Tensor(net.biases[i].shape);
  }
  return opt;
}

void sgd_step(NetworkState& net, const ParamGrads& grads, const Mask& mask, OptimizerState& opt,
              double lr) {
  std::vector<const MaskLayer*> mask_of(net.layers.size(), nullptr);
  for (size_t li = 0; li < mask.layers.size(); ++li)
    mask_of[mask.net_layer_index[li]] = &mask.layers[li];

  auto update = [&](double& w, double g, double& buf) {
    if (!std::isfinite(g)) throw divergence_error("non-finite gradient");
    g += opt.weight_decay * w;
    buf = opt.momentum * buf + g;
    const double step = opt.nesterov ? g + opt.momentum * buf : buf;
    w -= lr * step;
  };

  for (size_t i = 0; i < net.layers.size(); ++i) {
    if (!net.layers[i].parametric()) continue;
    Tensor& w = net.weights[i];
    Tensor& mom = opt.weight_momentum[i];
    const Tensor& g = grads.weights[i];
    const MaskLayer* m = mask_of[i];
    for (size_t j = 0; j < w.size(); ++j) {
      if (m && !m->bits[j]) {
        w.data[j] = 0.0;
        mom.data[j] = 0.0;
        continue;
      }
      update(w.data[j], g.data[j], mom.data[j]);
    }
    if (net.layers[i].has_bias) {
      Tensor& b = net.biases[i];
      Tensor& bmom = opt.bias_momentum[i];
      for (size_t j = 0; j < b.size(); ++j) update(b.data[j], grads.biases[i].data[j], bmom.data[j]);
    }
  }
}

std::vector<size_t> local_prune_counts(const Mask& mask, double rho_t) {
  std::vector<size_t> ks(mask.layers.size());
  for (size_t li = 0; li < mask.layers.size(); ++li) {
    const MaskLayer& l = mask.layers[li];
    const size_t capacity = l.size() - l.active_count;  // pre-prune inactive positions
    ks[li] = std::min(prune_count(rho_t, l.active_count), capacity);
  }
  return ks;
}

UpdateResult dst_update(NetworkState& net, Mask& mask, OptimizerState& opt,
                        const ParamGrads& dense_grads, const PruneCriterion& criterion,
                        GrowthKind growth, double rho_t, Scope scope, Rng& growth_rng,
                        Rng& prune_rng, ExplorationLedger& ledger) {
  UpdateResult res;
  res.pruned.assign(mask.layers.size(), {});
  res.grown.assign(mask.layers.size(), {});

  if (scope == Scope::Local) {
    const std::vector<size_t> ks = local_prune_counts(mask, rho_t);
    for (size_t li = 0; li < mask.layers.size(); ++li) {
      const size_t nl = mask.net_layer_index[li];
      const size_t k = ks[li];
      if (k == 0) continue;
      const std::vector<double>& w = net.weights[nl].data;
      const std::vector<double>& g = dense_grads.weights[nl].data;
      res.pruned[li] = select_prune_local(criterion, w, g, mask.layers[li], k, &prune_rng);
      res.grown[li] = growth == GrowthKind::Random
                          ? select_grow_random(mask.layers[li], k, growth_rng, &ledger, li)
                          : select_grow_gradient(g, mask.layers[li], k);
    }
  } else {
    const size_t total = mask.total_size();
    const size_t active = mask.total_active();
    size_t cap_keep_one = 0;
    for (const auto& l : mask.layers)
      if (l.active_count > 0) cap_keep_one += l.active_count - 1;
    size_t k_total = std::min({prune_count(rho_t, active), total - active, cap_keep_one});
    if (k_total > 0) {
      std::vector<LayerState> views(mask.layers.size());
      std::vector<const std::vector<double>*> grad_ptrs(mask.layers.size());
      for (size_t li = 0; li < mask.layers.size(); ++li) {
        const size_t nl = mask.net_layer_index[li];
        views[li] = {&net.weights[nl].data, &dense_grads.weights[nl].data, &mask.layers[li]};
        grad_ptrs[li] = &dense_grads.weights[nl].data;
      }
      res.pruned = select_prune_global(criterion, views, k_total, &prune_rng).per_layer;
      res.grown = growth == GrowthKind::Random
                      ? select_grow_random_global(mask, k_total, growth_rng, &ledger)
                      : select_grow_gradient_global(grad_ptrs, mask, k_total);
    }
  }

  for (size_t li = 0; li < mask.layers.size(); ++li) {
    const size_t nl = mask.net_layer_index[li];
    Tensor& w = net.weights[nl];
    Tensor& mom = opt.weight_momentum[nl];
    for (size_t i : res.pruned[li]) {
      mask.layers[li].clear(i);
      w.data[i] = 0.0;
      mom.data[i] = 0.0;
    }
    for (size_t i : res.grown[li]) {
      mask.layers[li].set(i);
      w.data[i] = 0.0;
      mom.data[i] = 0.0;
    }
  }
  ledger.absorb(mask);
  return res;
}

std::pair<double, double> evaluate(NetworkState& net, const Dataset& ds,
                                   const std::vector<size_t>& idx, LossKind kind,
                                   size_t batch_size) {
  if (idx.empty()) throw data_error("evaluate: empty split");
  double loss_sum = 0.0;
  size_t correct = 0;
  for (const auto& [b, e] : batch_ranges(idx.size(), batch_size)) {
    Batch batch = gather_batch(ds, idx, b, e);
    const Tensor& logits = forward(net, batch.features);
    loss_sum += batch_loss(logits, batch.labels, kind) * static_cast<double>(e - b);
    const size_t n = e - b;
    if (kind == LossKind::SigmoidBce) {
      for (size_t i = 0; i < n; ++i) {
        const int pred = logits.data[i] > 0.0 ? 1 : 0;  // tie at zero goes to class 0
        if (pred == batch.labels[i]) ++correct;
      }
    } else {
      const size_t k = logits.dim(1);
      for (size_t i = 0; i < n; ++i) {
        size_t best = 0;
        for (size_t j = 1; j < k; ++j)
          if (logits.data[i * k + j] > logits.data[i * k + best]) best = j;
        if (static_cast<int>(best) == batch.labels[i]) ++correct;
      }
    }
  }
  return {loss_sum / static_cast<double>(idx.size()),
          static_cast<double>(correct) / static_cast<double>(idx.size())};
}

std::string RunRecord::to_csv() const {
  std::string out = "epoch,train_loss,val_loss,val_acc,lr,itop,density\n";
  for (const EpochRow& r : rows) {
    out += std::to_string(r.epoch) + "," + format_double(r.train_loss) + "," +
           format_double(r.val_loss) + "," + format_double(r.val_acc) + "," + format_double(r.lr) +
           "," + format_double(r.itop) + "," + format_double(r.density) + "\n";
  }
  return out;
}

namespace {

Dataset build_dataset(const TrainConfig& cfg) {
  std::filesystem::path root = cfg.dataset_path;
  if (root.empty()) {
    if (const char* env = std::getenv("DSTLAB_DATA_DIR")) root = env;
  }
  if (cfg.dataset == "synth")
    return synth_tabular(cfg.synth_seed, cfg.synth_n, cfg.synth_d,
                         static_cast<int>(cfg.synth_classes));
  if (cfg.dataset == "fashion_mnist") {
    if (root.empty())
      throw data_error("fashion_mnist needs dataset_path or DSTLAB_DATA_DIR; files "
                       "train-images-idx3-ubyte etc. expected there");
    Dataset train = load_idx(root / "train-images-idx3-ubyte", root / "train-labels-idx1-ubyte");
    const auto ti = root / "t10k-images-idx3-ubyte";
    if (std::filesystem::exists(ti)) {
      Dataset test = load_idx(ti, root / "t10k-labels-idx1-ubyte");
      train.features.data.insert(train.features.data.end(), test.features.data.begin(),
                                 test.features.data.end());
      train.features.shape[0] += test.features.shape[0];
      train.labels.insert(train.labels.end(), test.labels.begin(), test.labels.end());
      train.class_count = std::max(train.class_count, test.class_count);
    }
    train.name = "fashion_mnist";
    return train;
  }
  if (cfg.dataset == "cifar10") {
    if (root.empty()) throw data_error("cifar10 needs dataset_path or DSTLAB_DATA_DIR");
    return load_cifar10_dir(root);
  }
  if (cfg.dataset == "csv") {
    if (root.empty()) throw data_error("csv dataset needs dataset_path");
    return load_csv_tabular(root, cfg.label_column);
  }
  throw config_error("unknown dataset '" + cfg.dataset + "'");
}

NormKind norm_kind_for(const std::string& dataset) {
  if (dataset == "synth" || dataset == "csv") return NormKind::PerFeature;
  if (dataset == "cifar10") return NormKind::PerChannel;
  return NormKind::None;  // fashion_mnist stays in [0, 1]
}

}  // namespace

Experiment::Experiment(const TrainConfig& cfg)
    : cfg_(cfg),
      rng_data_(Rng::stream(cfg.seed, kStreamDataOrder)),
      rng_growth_(Rng::stream(cfg.seed, kStreamGrowth)),
      rng_prune_(Rng::stream(cfg.seed, kStreamPrune)),
      rng_update_batch_(Rng::stream(cfg.seed, kStreamUpdateBatch)) {
  cfg_.validate();
  const Preset preset = make_preset(cfg_.architecture);
  preset_loss_ = preset.loss;
  net_ = make_network(preset.layers);

  dataset_ = build_dataset(cfg_);
  if (dataset_.sample_shape() != preset.input_shape &&
      shape_product(dataset_.sample_shape()) != shape_product(preset.input_shape))
    throw config_error("dataset sample shape " + Tensor(dataset_.sample_shape()).shape_string() +
                       " does not match architecture input");
  if (dataset_.class_count > preset.class_count)
    throw config_error("dataset has " + std::to_string(dataset_.class_count) +
                       " classes but architecture supports " +
                       std::to_string(preset.class_count));
  split_ = split_indices(dataset_.size(),
                         {cfg_.train_fraction, cfg_.valid_fraction, cfg_.test_fraction,
                          cfg_.split_seed});
  standardize(dataset_, split_.train, norm_kind_for(cfg_.dataset));

  // Init stream: dense parameter draw first, then the mask sample.
  Rng rng_init = Rng::stream(cfg_.seed, kStreamInit);
  init_params(net_, rng_init);
  plan_ = cfg_.allocation == "er" ? er_allocate(maskable_layers(net_), cfg_.density)
                                  : erk_allocate(maskable_layers(net_), cfg_.density);
  mask_ = sample_mask(plan_, rng_init);
  apply_mask(net_, mask_);
  ledger_.reset_from(mask_);
  opt_ = make_optimizer(net_, cfg_.momentum, cfg_.weight_decay, cfg_.nesterov);

  criterion_ = parse_criterion(cfg_.criterion, cfg_.mest_lambda);
  growth_ = parse_growth(cfg_.growth);
  scope_ = parse_scope(cfg_.pruning_scope);

  ranges_ = batch_ranges(split_.train.size(), cfg_.batch_size);
  total_steps_ = cfg_.epochs * ranges_.size();
  const uint64_t stop =
      static_cast<uint64_t>(cfg_.update_stop_fraction * static_cast<double>(total_steps_));
  cadence_ = {cfg_.update_period, stop};
  if (cfg_.prune_schedule == "cosine")
    prune_schedule_ = PruneSchedule::cosine(cfg_.prune_fraction, std::max<uint64_t>(stop, 1));
  else if (cfg_.prune_schedule == "linear")
    prune_schedule_ = PruneSchedule::linear(cfg_.prune_fraction, cfg_.linear_factor,
                                            cfg_.linear_every);
  else
    prune_schedule_ = PruneSchedule::constant(cfg_.prune_fraction);
  lr_schedule_ = {cfg_.lr, cfg_.milestones, cfg_.lr_decay};

  record_.total_steps = total_steps_;
  push_snapshot(0);
}

uint64_t Experiment::first_update_step() const {
  if (cadence_.every == 0 || cadence_.every > cadence_.stop) return 0;  // never updates
  return cadence_.every;
}

void Experiment::begin_epoch() {
  current_lr_ = lr_at(lr_schedule_, epoch_, cfg_.epochs);
  epoch_order_ = split_.train;
  rng_data_.shuffle(epoch_order_);
  epoch_loss_sum_ = 0.0;
  epoch_loss_count_ = 0;
}

void Experiment::end_epoch() {
  auto [val_loss, val_acc] = evaluate(net_, dataset_, split_.valid, preset_loss_, cfg_.batch_size);
  EpochRow row;
  row.epoch = epoch_ + 1;
  row.train_loss = epoch_loss_sum_ / static_cast<double>(epoch_loss_count_);
  row.val_loss = val_loss;
  row.val_acc = val_acc;
  row.lr = current_lr_;
  row.itop = ledger_.itop_ratio();
  row.density = global_density(mask_);
  record_.rows.push_back(row);
  ++epoch_;
  pos_in_epoch_ = 0;
}

Experiment::StepOutcome Experiment::step_once(bool stop_before_update) {
  if (pos_in_epoch_ == 0) begin_epoch();
  const auto [b, e] = ranges_[pos_in_epoch_];
  Batch batch = gather_batch(dataset_, epoch_order_, b, e);
  ++t_;
  auto [loss, grads] = loss_and_grad(net_, batch.features, batch.labels, preset_loss_);
  if (!std::isfinite(loss)) {
    record_.status = "diverged at step " + std::to_string(t_);
    throw divergence_error(record_.status);
  }
  try {
    sgd_step(net_, grads, mask_, opt_, current_lr_);
  } catch (const divergence_error&) {
    record_.status = "diverged at step " + std::to_string(t_);
    throw;
  }
  epoch_loss_sum_ += loss;
  ++epoch_loss_count_;
  if (is_update_step(cadence_, t_)) {
    if (stop_before_update) {
      held_grads_ = std::move(grads);
      return StepOutcome::StoppedPreUpdate;
    }
    do_update(grads);
  }
  ++pos_in_epoch_;
  if (pos_in_epoch_ == ranges_.size()) end_epoch();
  if (on_step) on_step(*this, t_);
  return StepOutcome::Stepped;
}

void Experiment::do_update(const ParamGrads& grads) {
  const double rho = prune_fraction_at(prune_schedule_, t_);
  const ParamGrads* update_grads = &grads;
  ParamGrads big;
  if (cfg_.dst_update_batch_size > 0) {
    // Score/growth gradients from a dedicated larger batch; the optimizer
    // step above still used the regular batch.
    const size_t n = std::min<size_t>(cfg_.dst_update_batch_size, split_.train.size());
    std::vector<size_t> idx;
    idx.reserve(n);
    for (size_t slot : rng_update_batch_.sample_slots(split_.train.size(), n))
      idx.push_back(split_.train[slot]);
    Batch batch = gather_batch(dataset_, idx, 0, idx.size());
    auto [big_loss, big_grads] = loss_and_grad(net_, batch.features, batch.labels, preset_loss_);
    if (!std::isfinite(big_loss)) {
      record_.status = "diverged at step " + std::to_string(t_);
      throw divergence_error(record_.status);
    }
    big = std::move(big_grads);
    update_grads = &big;
  }
  dst_update(net_, mask_, opt_, *update_grads, criterion_, growth_, rho, scope_, rng_growth_,
             rng_prune_, ledger_);
  push_snapshot(t_);
}

void Experiment::push_snapshot(uint64_t step) {
  snapshots_.push_back(
      MaskSnapshot::from_mask(mask_, step, cfg_.criterion, cfg_.growth, cfg_.seed));
}

uint64_t Experiment::run_steps(uint64_t n) {
  uint64_t taken = 0;
  while (taken < n && epoch_ < cfg_.epochs) {
    step_once(false);
    ++taken;
  }
  return taken;
}

void Experiment::run_to_pre_update() {
  const uint64_t target = first_update_step();
  if (target == 0) throw config_error("run_to_pre_update: this run never updates its topology");
  while (epoch_ < cfg_.epochs) {
    if (step_once(true) == StepOutcome::StoppedPreUpdate) return;
  }
  throw config_error("run_to_pre_update: training ended before the first update");
}

std::vector<std::vector<size_t>> Experiment::pending_prune_sets(const PruneCriterion& criterion) {
  if (!held_grads_) throw analysis_error("no held update state; call run_to_pre_update first");
  // Measurement, not an update: the raw floor(rho * active) selection, even
  // when the regrow side could not match it (e.g. density 1).
  const double rho = pending_rho();
  std::vector<std::vector<size_t>> sets(mask_.layers.size());
  for (size_t li = 0; li < mask_.layers.size(); ++li) {
    const size_t nl = mask_.net_layer_index[li];
    const size_t k = prune_count(rho, mask_.layers[li].active_count);
    sets[li] = select_prune_local(criterion, net_.weights[nl].data,
                                  held_grads_->weights[nl].data, mask_.layers[li], k,
                                  &rng_prune_);
  }
  return sets;
}

double Experiment::pending_rho() const { return prune_fraction_at(prune_schedule_, t_); }

uint64_t Experiment::state_hash() const {
  HashAccumulator h;
  h.add(t_);
  for (size_t i = 0; i < net_.layers.size(); ++i) {
    h.add(net_.weights[i].data);
    h.add(net_.biases[i].data);
    h.add(opt_.weight_momentum[i].data);
    h.add(opt_.bias_momentum[i].data);
  }
  for (const auto& l : mask_.layers) h.add(l.bits);
  return h.value();
}

void Experiment::run() {
  const auto start = std::chrono::steady_clock::now();
  try {
    while (epoch_ < cfg_.epochs) step_once(false);
  } catch (const divergence_error&) {
    wall_seconds_ = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    throw;
  }
  auto [test_loss, test_acc] = evaluate(net_, dataset_, split_.test, preset_loss_, cfg_.batch_size);
  record_.test_loss = test_loss;
  record_.test_acc = test_acc;
  record_.final_itop = ledger_.itop_ratio();
  push_snapshot(total_steps_);
  wall_seconds_ = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

void Experiment::write_outputs(const std::filesystem::path& run_dir) const {
  namespace fs = std::filesystem;
  fs::create_directories(run_dir / "snapshots");

  std::ofstream csv(run_dir / "record.csv", std::ios::binary);
  const std::string csv_text = record_.to_csv();
  csv.write(csv_text.data(), static_cast<std::streamsize>(csv_text.size()));
  csv.close();

  nlohmann::ordered_json summary;
  summary["status"] = record_.status;
  summary["final_test_loss"] = record_.test_loss;
  summary["final_test_accuracy"] = record_.test_acc;
  summary["final_itop"] = record_.final_itop;
  summary["total_steps"] = record_.total_steps;
  nlohmann::ordered_json cfg_json;
  for (const auto& [k, v] : cfg_.echo()) cfg_json[k] = v;
  summary["config"] = cfg_json;
  std::ofstream js(run_dir / "summary.json", std::ios::binary);
  js << summary.dump(2) << "\n";
  js.close();

  for (size_t i = 0; i < snapshots_.size(); ++i) {
    const MaskSnapshot& s = snapshots_[i];
    std::string name;
    if (s.step == 0)
      name = "mask_init.txt";
    else if (i + 1 == snapshots_.size() && record_.status == "ok" && s.step == total_steps_)
      name = "mask_final.txt";
    else
      name = "mask_update_" + std::to_string(s.step) + ".txt";
    s.save(run_dir / "snapshots" / name);
  }

  // Wall-clock lives outside the deterministic artifact set.
  std::ofstream timing(run_dir / "timing.txt", std::ios::binary);
  timing << format_double(wall_seconds_) << "\n";
}

}  // namespace dstlab
