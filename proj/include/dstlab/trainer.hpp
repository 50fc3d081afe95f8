#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dstlab/criteria.hpp"
#include "dstlab/data.hpp"
#include "dstlab/network.hpp"
#include "dstlab/schedule.hpp"
#include "dstlab/topology.hpp"

namespace dstlab {

enum class Scope { Local, Global };

Scope parse_scope(const std::string& name);

// Fully materialized run description; echo() is the canonical sorted
// key=value text used for hashing and run-directory naming.
struct TrainConfig {
  std::string architecture = "small-mlp";
  std::string dataset = "synth";
  std::string dataset_path;
  std::string label_column = "label";
  double density = 1.0;
  std::string allocation = "erk";
  std::string criterion = "magnitude";
  std::string growth = "random";
  std::string pruning_scope = "local";
  double prune_fraction = 0.5;
  std::string prune_schedule = "cosine";
  double linear_factor = 0.99;
  uint64_t linear_every = 600;
  uint64_t update_period = 800;  // 0 disables topology updates
  double update_stop_fraction = 1.0;
  uint64_t epochs = 100;
  uint64_t batch_size = 128;
  double lr = 0.01;
  double lr_decay = 0.1;
  std::vector<double> milestones = {0.5, 0.75};
  double momentum = 0.9;
  double weight_decay = 0.0005;
  bool nesterov = true;
  uint64_t seed = 1;
  double mest_lambda = 1.0;
  uint64_t dst_update_batch_size = 0;  // 0: reuse the step's own batch gradient
  uint64_t synth_n = 20000;
  uint64_t synth_d = 24;
  uint64_t synth_classes = 2;
  uint64_t synth_seed = 7;
  uint64_t split_seed = 12345;
  double train_fraction = 0.7;
  double valid_fraction = 0.15;
  double test_fraction = 0.15;

  std::map<std::string, std::string> echo() const;
  std::string echo_text() const;
  uint64_t config_hash() const;  // over echo_text(), seed included
  std::string run_dir_name() const;
  void validate() const;
};

struct OptimizerState {
  std::vector<Tensor> weight_momentum;
  std::vector<Tensor> bias_momentum;
  double momentum = 0.9;
  double weight_decay = 0.0005;
  bool nesterov = true;
};

OptimizerState make_optimizer(const NetworkState& net, double momentum, double weight_decay,
                              bool nesterov);

// SGD with momentum, Nesterov correction and L2 weight decay, applied to
// active weights only. Inactive weights and their momentum stay exactly zero;
// biases are never masked.
void sgd_step(NetworkState& net, const ParamGrads& grads, const Mask& mask, OptimizerState& opt,
              double lr);

struct UpdateResult {
  std::vector<std::vector<size_t>> pruned;
  std::vector<std::vector<size_t>> grown;
};

// One topology update: prune k = floor(rho_t * active) by the criterion, then
// regrow exactly k positions drawn from the pre-prune inactive set (so a
// weight pruned in this update can never return in the same update). Pruned
// and regrown weights are set to zero and their momentum reset; per-layer
// (local) or global (global scope) active counts are preserved.
UpdateResult dst_update(NetworkState& net, Mask& mask, OptimizerState& opt,
                        const ParamGrads& dense_grads, const PruneCriterion& criterion,
                        GrowthKind growth, double rho_t, Scope scope, Rng& growth_rng,
                        Rng& prune_rng, ExplorationLedger& ledger);

// Per-layer prune counts for one update, capped by the growth capacity of the
// pre-prune inactive set.
std::vector<size_t> local_prune_counts(const Mask& mask, double rho_t);

std::pair<double, double> evaluate(NetworkState& net, const Dataset& ds,
                                   const std::vector<size_t>& idx, LossKind kind,
                                   size_t batch_size);

struct EpochRow {
  uint64_t epoch = 0;  // 1-based in the CSV
  double train_loss = 0, val_loss = 0, val_acc = 0, lr = 0, itop = 0, density = 0;
};

struct RunRecord {
  std::vector<EpochRow> rows;
  double test_loss = 0, test_acc = 0;
  double final_itop = 0;
  uint64_t total_steps = 0;
  std::string status = "ok";
  std::string to_csv() const;
};

// One training run. Owns its network, mask, optimizer and RNG streams;
// deterministic: (config, seed) fixes every output byte.
class Experiment {
 public:
  explicit Experiment(const TrainConfig& cfg);

  void run();
  const RunRecord& record() const { return record_; }
  const std::vector<MaskSnapshot>& snapshots() const { return snapshots_; }
  const TrainConfig& config() const { return cfg_; }
  double wall_seconds() const { return wall_seconds_; }

  // record.csv, summary.json, snapshots/, timing.txt under run_dir.
  void write_outputs(const std::filesystem::path& run_dir) const;

  // --- fine-grained control for tests and the similarity harness ---
  uint64_t total_steps() const { return total_steps_; }
  uint64_t first_update_step() const;
  uint64_t step() const { return t_; }
  // Advances whole steps (including scheduled updates); returns steps taken.
  uint64_t run_steps(uint64_t n);
  // Advances to the first scheduled update, leaving the optimizer step done,
  // the update unapplied and the step's dense gradients held. The experiment
  // is not resumable afterwards.
  void run_to_pre_update();
  // Prune sets the given criterion would select in the held pre-update state.
  std::vector<std::vector<size_t>> pending_prune_sets(const PruneCriterion& criterion);
  double pending_rho() const;
  uint64_t state_hash() const;
  const Mask& mask() const { return mask_; }
  const NetworkState& net() const { return net_; }
  const ExplorationLedger& ledger() const { return ledger_; }
  const Dataset& dataset() const { return dataset_; }
  const Split& split() const { return split_; }
  LossKind loss_kind() const { return preset_loss_; }

  // Test hook, called after every completed step.
  std::function<void(const Experiment&, uint64_t)> on_step;

 private:
  enum class StepOutcome { Stepped, StoppedPreUpdate };
  void begin_epoch();
  void end_epoch();
  StepOutcome step_once(bool stop_before_update);
  void do_update(const ParamGrads& grads);
  void push_snapshot(uint64_t step);

  TrainConfig cfg_;
  LossKind preset_loss_;
  NetworkState net_;
  Mask mask_;
  SparsityPlan plan_;
  ExplorationLedger ledger_;
  OptimizerState opt_;
  Dataset dataset_;
  Split split_;
  PruneCriterion criterion_;
  GrowthKind growth_;
  Scope scope_;
  PruneSchedule prune_schedule_;
  UpdateCadence cadence_;
  LrSchedule lr_schedule_;
  Rng rng_data_;
  Rng rng_growth_;
  Rng rng_prune_;
  Rng rng_update_batch_;

  uint64_t t_ = 0;
  uint64_t epoch_ = 0;
  size_t pos_in_epoch_ = 0;
  std::vector<size_t> epoch_order_;
  std::vector<std::pair<size_t, size_t>> ranges_;
  double epoch_loss_sum_ = 0;
  size_t epoch_loss_count_ = 0;
  double current_lr_ = 0;
  uint64_t total_steps_ = 0;
  std::optional<ParamGrads> held_grads_;
  RunRecord record_;
  std::vector<MaskSnapshot> snapshots_;
  double wall_seconds_ = 0;
};

}  // namespace dstlab
