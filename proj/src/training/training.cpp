#include "gridfill/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <numeric>
#include <sstream>

#include "gridfill/error.hpp"
#include "gridfill/io.hpp"
#include "gridfill/parallel.hpp"
#include "gridfill/rng.hpp"

namespace gridfill {

namespace {

std::vector<MaskKind> parse_kinds(const std::string& text) {
  std::vector<MaskKind> kinds;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b == std::string::npos) continue;
    kinds.push_back(parse_mask_kind(item.substr(b, e - b + 1)));
  }
  return kinds;
}

std::size_t non_negative(const KvConfig& cfg, const char* key, std::size_t fallback) {
  const long v = cfg.get_int(key, static_cast<long>(fallback));
  if (v < 0) throw ValidationError(std::string(key) + " must be non-negative");
  return static_cast<std::size_t>(v);
}

}  // namespace

const std::vector<std::string>& train_config_keys() {
  static const std::vector<std::string> keys = {
      "learning_rate", "beta1",      "beta2",    "epsilon",  "batch_size",
      "max_epochs",    "patience",   "hole_weight", "seed",  "mask_kinds",
      "rate_min",      "rate_max",   "grad_clip"};
  return keys;
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw ValidationError("learning_rate must be positive");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0))
    throw ValidationError("adam betas must lie in [0, 1)");
  if (!(epsilon > 0.0)) throw ValidationError("epsilon must be positive");
  if (batch_size == 0) throw ValidationError("batch_size must be at least 1");
  if (max_epochs == 0) throw ValidationError("max_epochs must be at least 1");
  if (patience >= max_epochs) throw ValidationError("patience must be below max_epochs");
  if (!(hole_weight > 0.0)) throw ValidationError("hole_weight must be positive");
  if (masks.kinds.empty()) throw ValidationError("mask policy needs at least one kind");
  if (!(masks.rate_min >= 0.05 && masks.rate_max <= 0.5 && masks.rate_min <= masks.rate_max))
    throw ValidationError("training mask rates must satisfy 0.05 <= rate_min <= rate_max <= 0.5");
  if (std::isnan(grad_clip)) throw ValidationError("grad_clip is NaN");
}

double TrainConfig::clip_for(Architecture arch) const {
  if (grad_clip >= 0.0) return grad_clip;
  return arch == Architecture::pconv ? 5.0 : 0.0;
}

TrainConfig TrainConfig::from(const KvConfig& cfg) {
  TrainConfig c;
  c.learning_rate = cfg.get_double("learning_rate", c.learning_rate);
  c.beta1 = cfg.get_double("beta1", c.beta1);
  c.beta2 = cfg.get_double("beta2", c.beta2);
  c.epsilon = cfg.get_double("epsilon", c.epsilon);
  c.batch_size = non_negative(cfg, "batch_size", c.batch_size);
  c.max_epochs = non_negative(cfg, "max_epochs", c.max_epochs);
  c.patience = non_negative(cfg, "patience", c.patience);
  c.hole_weight = cfg.get_double("hole_weight", c.hole_weight);
  c.seed = static_cast<std::uint64_t>(cfg.get_int("seed", static_cast<long>(c.seed)));
  if (cfg.has("mask_kinds")) c.masks.kinds = parse_kinds(cfg.get_string("mask_kinds", ""));
  c.masks.rate_min = cfg.get_double("rate_min", c.masks.rate_min);
  c.masks.rate_max = cfg.get_double("rate_max", c.masks.rate_max);
  c.grad_clip = cfg.get_double("grad_clip", c.grad_clip);
  return c;
}

void TrainConfig::write(KvConfig& cfg) const {
  auto num = [](double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
  };
  cfg.set("learning_rate", num(learning_rate));
  cfg.set("beta1", num(beta1));
  cfg.set("beta2", num(beta2));
  cfg.set("epsilon", num(epsilon));
  cfg.set("batch_size", std::to_string(batch_size));
  cfg.set("max_epochs", std::to_string(max_epochs));
  cfg.set("patience", std::to_string(patience));
  cfg.set("hole_weight", num(hole_weight));
  cfg.set("seed", std::to_string(seed));
  std::string kinds;
  for (auto k : masks.kinds) {
    if (!kinds.empty()) kinds += ",";
    kinds += to_string(k);
  }
  cfg.set("mask_kinds", kinds);
  cfg.set("rate_min", num(masks.rate_min));
  cfg.set("rate_max", num(masks.rate_max));
  cfg.set("grad_clip", num(grad_clip));
}

MaskGrid sample_training_mask(const MaskPolicy& policy, std::uint64_t seed, std::size_t epoch,
                              std::size_t item) {
  if (policy.kinds.empty()) throw ValidationError("mask policy needs at least one kind");
  Rng rng(derive_seed(seed, "train.mask", {epoch, item}));
  const MaskKind kind = policy.kinds[uniform_index(rng, policy.kinds.size())];
  const double rate = uniform(rng, policy.rate_min, policy.rate_max);
  const std::uint64_t mask_seed = rng();
  if (kind == MaskKind::irregular) {
    IrregularConfig ic;
    ic.min_coverage = policy.rate_min;
    ic.max_coverage = policy.rate_max;
    return irregular_mask(mask_seed, ic);
  }
  return make_mask(kind, rate, mask_seed);
}

LossResult masked_loss(const Tensor& pred, const Tensor& target, const MaskGrid& mask,
                       const Tensor& validity, double hole_weight) {
  require_same_shape(pred, target, "masked_loss");
  require_same_shape(pred, mask.grid, "masked_loss");
  require_same_shape(pred, validity, "masked_loss");
  Tensor weight(pred.shape());
  for (std::size_t i = 0; i < weight.size(); ++i) {
    if (validity[i] == 0.0) continue;
    weight[i] = mask.grid[i] == 0.0 ? hole_weight : 1.0;
  }
  return weighted_mse_loss(pred, target, weight);
}

AdamState adam_init(const std::vector<Tensor>& params) {
  AdamState s;
  for (const auto& p : params) {
    s.m.emplace_back(p.shape());
    s.v.emplace_back(p.shape());
  }
  return s;
}

void adam_step(std::vector<Tensor>& params, const std::vector<Tensor>& grads, AdamState& state,
               const TrainConfig& config) {
  if (grads.size() != params.size() || state.m.size() != params.size())
    throw ShapeError("adam_step: parameter, gradient and state counts differ");
  for (std::size_t k = 0; k < grads.size(); ++k) {
    require_same_shape(params[k], grads[k], "adam_step");
    if (!grads[k].all_finite())
      throw NonFiniteError("adam_step: non-finite gradient in parameter " + std::to_string(k));
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(config.beta1, t);
  const double c2 = 1.0 - std::pow(config.beta2, t);
  for (std::size_t k = 0; k < params.size(); ++k) {
    double* p = params[k].data();
    double* m = state.m[k].data();
    double* v = state.v[k].data();
    const double* g = grads[k].data();
    for (std::size_t i = 0; i < params[k].size(); ++i) {
      m[i] = config.beta1 * m[i] + (1.0 - config.beta1) * g[i];
      v[i] = config.beta2 * v[i] + (1.0 - config.beta2) * g[i] * g[i];
      const double mhat = m[i] / c1;
      const double vhat = v[i] / c2;
      p[i] -= config.learning_rate * mhat / (std::sqrt(vhat) + config.epsilon);
    }
  }
}

double clip_gradients(std::vector<Tensor>& grads, double max_norm) {
  double sq = 0.0;
  for (const auto& g : grads)
    for (double x : g.values()) sq += x * x;
  const double norm = std::sqrt(sq);
  if (max_norm > 0.0 && norm > max_norm) {
    const double scale = max_norm / norm;
    for (auto& g : grads) g *= scale;
  }
  return norm;
}

std::string_view to_string(StopReason r) {
  return r == StopReason::early_stop ? "early_stop" : "max_epochs";
}

bool EarlyStopper::update(std::size_t epoch, double val_loss) {
  if (best_epoch_ == 0 || val_loss < best_loss_) {
    best_loss_ = val_loss;
    best_epoch_ = epoch;
    stale_ = 0;
    improved_ = true;
  } else {
    ++stale_;
    improved_ = false;
  }
  return stale_ >= patience_;
}

double TrainLog::best_val_loss() const {
  if (epochs.empty()) return initial_val_loss;
  double best = epochs.front().val_loss;
  for (const auto& e : epochs) best = std::min(best, e.val_loss);
  return best;
}

std::string TrainLog::csv() const {
  std::ostringstream os;
  os.precision(10);
  os << "epoch,train_loss,val_loss,seconds\n";
  for (const auto& e : epochs)
    os << e.epoch << ',' << e.train_loss << ',' << e.val_loss << ',' << e.seconds << '\n';
  return os.str();
}

TrainingSample make_sample(const EnergyImage& image, const MaskGrid& mask) {
  TrainingSample s;
  s.input_mask = model_input_mask(mask, image.validity);
  s.input = image.matrix;
  for (std::size_t i = 0; i < s.input.size(); ++i)
    if (s.input_mask[i] == 0.0) s.input[i] = 0.0;
  return s;
}

std::vector<MaskGrid> validation_masks(const MaskPolicy& policy, std::uint64_t seed,
                                       std::size_t count) {
  std::vector<MaskGrid> masks;
  masks.reserve(count);
  const std::uint64_t vseed = derive_seed(seed, "train.validation");
  for (std::size_t i = 0; i < count; ++i) masks.push_back(sample_training_mask(policy, vseed, 0, i));
  return masks;
}

double evaluate_loss(const ModelBundle& model, const std::vector<EnergyImage>& images,
                     const std::vector<MaskGrid>& masks, double hole_weight) {
  if (images.empty()) throw ValidationError("evaluate_loss: empty image set");
  if (images.size() != masks.size()) throw ShapeError("evaluate_loss: one mask per image required");
  std::vector<double> losses(images.size());
  parallel_for(images.size(), [&](std::size_t i) {
    const auto sample = make_sample(images[i], masks[i]);
    const Tensor pred = forward(model, sample.input, sample.input_mask);
    losses[i] = masked_loss(pred, images[i].matrix, masks[i], images[i].validity, hole_weight).loss;
  });
  double sum = 0.0;
  for (double l : losses) sum += l;
  return sum / static_cast<double>(losses.size());
}

std::string dataset_fingerprint(const std::vector<EnergyImage>& images) {
  std::uint64_t h = hash_string("gridfill.dataset");
  auto mix = [&h](std::string_view bytes) { h = splitmix64(h ^ hash_string(bytes)); };
  for (const auto& img : images) {
    mix(img.meter_id);
    mix(std::string_view(reinterpret_cast<const char*>(img.matrix.data()),
                         img.matrix.size() * sizeof(double)));
    mix(std::string_view(reinterpret_cast<const char*>(img.validity.data()),
                         img.validity.size() * sizeof(double)));
  }
  return hex64(h);
}

TrainResult train(ModelBundle model, const std::vector<EnergyImage>& train_set,
                  const std::vector<EnergyImage>& val_set, const TrainConfig& config,
                  const EpochCallback& on_epoch) {
  configure_allocator();
  config.validate();
  if (model.arch == Architecture::persistence)
    throw ValidationError("persistence has no parameters to train");
  if (train_set.empty()) throw ValidationError("train: empty training set");
  if (val_set.empty()) throw ValidationError("train: empty validation set");

  using clock = std::chrono::steady_clock;
  const double clip = config.clip_for(model.arch);
  const auto val_masks = validation_masks(config.masks, config.seed, val_set.size());

  TrainLog log;
  log.initial_val_loss = evaluate_loss(model, val_set, val_masks, config.hole_weight);
  AdamState state = adam_init(model.params);
  EarlyStopper stopper(config.patience);
  std::vector<Tensor> best_params = model.params;

  std::vector<std::size_t> order(train_set.size());
  const std::size_t chunk = std::max<std::size_t>(1, std::min(thread_count(), config.batch_size));

  for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
    const auto t0 = clock::now();
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng shuffle_rng(derive_seed(config.seed, "train.shuffle", {epoch}));
    shuffle(order.begin(), order.end(), shuffle_rng);

    double loss_sum = 0.0;
    std::size_t batch_index = 0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size, ++batch_index) {
      const std::size_t n = std::min(config.batch_size, order.size() - start);
      std::vector<Tensor> accum;
      for (const auto& p : model.params) accum.emplace_back(p.shape());
      double batch_loss = 0.0;

      // Samples run in parallel chunks; gradients are summed in batch order
      // so results do not depend on the thread count.
      for (std::size_t c0 = 0; c0 < n; c0 += chunk) {
        const std::size_t cn = std::min(chunk, n - c0);
        std::vector<double> losses(cn);
        std::vector<std::vector<Tensor>> grads(cn);
        parallel_for(cn, [&](std::size_t j) {
          const std::size_t item = order[start + c0 + j];
          const auto& img = train_set[item];
          const MaskGrid mask = sample_training_mask(config.masks, config.seed, epoch, item);
          const auto sample = make_sample(img, mask);
          ForwardTrace trace;
          const Tensor pred = forward(model, sample.input, sample.input_mask, &trace);
          auto lr = masked_loss(pred, img.matrix, mask, img.validity, config.hole_weight);
          losses[j] = lr.loss;
          grads[j] = backward(model, trace, lr.grad);
        });
        for (std::size_t j = 0; j < cn; ++j) {
          batch_loss += losses[j];
          for (std::size_t k = 0; k < accum.size(); ++k) accum[k] += grads[j][k];
        }
      }
      if (!std::isfinite(batch_loss))
        throw NonFiniteError("non-finite training loss at epoch " + std::to_string(epoch) +
                             ", batch " + std::to_string(batch_index + 1));
      const double inv = 1.0 / static_cast<double>(n);
      for (auto& g : accum) g *= inv;
      if (clip > 0.0) clip_gradients(accum, clip);
      adam_step(model.params, accum, state, config);
      loss_sum += batch_loss;
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = loss_sum / static_cast<double>(order.size());
    rec.val_loss = evaluate_loss(model, val_set, val_masks, config.hole_weight);
    if (!std::isfinite(rec.val_loss))
      throw NonFiniteError("non-finite validation loss at epoch " + std::to_string(epoch));
    rec.seconds = std::chrono::duration<double>(clock::now() - t0).count();
    log.epochs.push_back(rec);
    if (on_epoch) on_epoch(rec);

    const bool stop = stopper.update(epoch, rec.val_loss);
    if (stopper.improved()) best_params = model.params;
    if (stop) {
      log.stop = StopReason::early_stop;
      break;
    }
  }

  log.best_epoch = stopper.best_epoch();
  model.params = std::move(best_params);
  model.provenance.seed = config.seed;
  model.provenance.epochs_run = log.epochs.size();
  model.provenance.best_val_loss = stopper.best_loss();
  model.provenance.data_fingerprint = dataset_fingerprint(train_set);
  model.provenance.trained = true;
  return {std::move(model), std::move(log)};
}

}  // namespace gridfill
