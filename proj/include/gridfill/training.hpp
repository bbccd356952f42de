#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "gridfill/dataset.hpp"
#include "gridfill/kvconfig.hpp"
#include "gridfill/masks.hpp"
#include "gridfill/models.hpp"
#include "gridfill/ops.hpp"

namespace gridfill {

/// Which masks training draws from, and the rate range for day-based kinds.
struct MaskPolicy {
  std::vector<MaskKind> kinds = {MaskKind::random_days, MaskKind::continuous,
                                 MaskKind::irregular};
  double rate_min = 0.05;
  double rate_max = 0.5;
};

struct TrainConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::size_t batch_size = 16;
  std::size_t max_epochs = 50;
  std::size_t patience = 5;
  double hole_weight = 6.0;
  std::uint64_t seed = 0;
  MaskPolicy masks;
  // Global gradient-norm clip; negative selects the architecture default
  // (5.0 for pconv, off for the autoencoders), 0 disables it.
  double grad_clip = -1.0;

  /// Throws ValidationError on out-of-range settings.
  void validate() const;
  double clip_for(Architecture arch) const;

  /// Reads the keys in `train_config_keys()`; missing keys keep defaults.
  static TrainConfig from(const KvConfig& cfg);
  void write(KvConfig& cfg) const;
};

const std::vector<std::string>& train_config_keys();

/// Mask for training item `item` in `epoch`. Kind and rate are drawn from
/// the policy with a seed derived from (seed, epoch, item).
MaskGrid sample_training_mask(const MaskPolicy& policy, std::uint64_t seed, std::size_t epoch,
                              std::size_t item);

/// Hole-weighted reconstruction loss: weight `hole_weight` on holes that are
/// raw-valid, 1 on observed valid cells, 0 on raw-invalid cells.
LossResult masked_loss(const Tensor& pred, const Tensor& target, const MaskGrid& mask,
                       const Tensor& validity, double hole_weight);

struct AdamState {
  std::vector<Tensor> m;
  std::vector<Tensor> v;
  std::size_t step = 0;
};

AdamState adam_init(const std::vector<Tensor>& params);

/// One bias-corrected Adam update in place. Throws NonFiniteError when a
/// gradient is NaN or infinite (parameters are left untouched).
void adam_step(std::vector<Tensor>& params, const std::vector<Tensor>& grads, AdamState& state,
               const TrainConfig& config);

/// Scales `grads` so their joint L2 norm is at most `max_norm`. Returns the
/// norm before clipping.
double clip_gradients(std::vector<Tensor>& grads, double max_norm);

enum class StopReason { early_stop, max_epochs };
std::string_view to_string(StopReason r);

/// Tracks the best validation loss; epochs are numbered from 1.
class EarlyStopper {
 public:
  explicit EarlyStopper(std::size_t patience) : patience_(patience) {}
  /// Records an epoch's loss and returns true when training should stop.
  bool update(std::size_t epoch, double val_loss);
  bool improved() const { return improved_; }
  std::size_t best_epoch() const { return best_epoch_; }
  double best_loss() const { return best_loss_; }

 private:
  std::size_t patience_;
  std::size_t best_epoch_ = 0;
  double best_loss_ = 0.0;
  std::size_t stale_ = 0;
  bool improved_ = false;
};

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0.0;
  double val_loss = 0.0;
  double seconds = 0.0;
};

struct TrainLog {
  double initial_val_loss = 0.0;  // before the first update
  std::vector<EpochRecord> epochs;
  std::size_t best_epoch = 0;
  StopReason stop = StopReason::max_epochs;

  /// Minimum validation loss over completed epochs (the initial loss if none).
  double best_val_loss() const;
  /// `epoch,train_loss,val_loss,seconds`, one row per completed epoch.
  std::string csv() const;
};

struct TrainResult {
  ModelBundle model;
  TrainLog log;
};

/// Input and target pair as the networks see them.
struct TrainingSample {
  Tensor input;
  Tensor input_mask;
};
TrainingSample make_sample(const EnergyImage& image, const MaskGrid& mask);

/// Frozen validation masks, one per item.
std::vector<MaskGrid> validation_masks(const MaskPolicy& policy, std::uint64_t seed,
                                       std::size_t count);

/// Mean masked loss of the model over images with the given masks.
double evaluate_loss(const ModelBundle& model, const std::vector<EnergyImage>& images,
                     const std::vector<MaskGrid>& masks, double hole_weight);

/// Fingerprint of the training data (FNV over the image payloads).
std::string dataset_fingerprint(const std::vector<EnergyImage>& images);

using EpochCallback = std::function<void(const EpochRecord&)>;

/// Minibatch Adam with fresh masks each epoch, early stopping on a frozen
/// validation set, and best-epoch parameter restore. Throws ValidationError
/// on empty sets or a persistence model, NonFiniteError on divergence.
TrainResult train(ModelBundle model, const std::vector<EnergyImage>& train_set,
                  const std::vector<EnergyImage>& val_set, const TrainConfig& config,
                  const EpochCallback& on_epoch = {});

}  // namespace gridfill
