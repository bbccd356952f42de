#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "gridfill/dataset.hpp"
#include "gridfill/kvconfig.hpp"
#include "gridfill/masks.hpp"
#include "gridfill/ops.hpp"
#include "gridfill/tensor.hpp"

namespace gridfill {

enum class Architecture { persistence, ae1d, ae2d, pconv };

std::string_view to_string(Architecture a);
Architecture parse_architecture(std::string_view text);

/// Width and size knobs for the three networks. Defaults follow the
/// reference layouts; every field can be overridden from a config file
/// (keys listed by `model_config_keys`).
struct ModelConfig {
  // 1D autoencoder on the 8736-hour series.
  std::vector<std::size_t> ae1d_encoder = {16, 8, 8};
  std::vector<std::size_t> ae1d_decoder = {8, 8, 16};
  std::size_t ae1d_kernel = 7;
  std::size_t ae1d_bottleneck = 128;
  // 2D autoencoder on the 168x52 grid.
  std::vector<std::size_t> ae2d_encoder = {16, 8};
  std::vector<std::size_t> ae2d_decoder = {8, 16};
  std::size_t ae2d_bottleneck = 256;
  // Partial-convolution U-Net on the 192x192 grid: encoder widths are
  // base, 2*base, 4*base, 8*base.
  std::size_t pconv_base = 32;
  double pconv_leaky_alpha = 0.2;

  static ModelConfig from(const KvConfig& cfg);
  void write(KvConfig& cfg) const;
};

const std::vector<std::string>& model_config_keys();

enum class LayerKind { conv1d, conv2d, pconv2d, dense };

/// One parameterized layer. Weights and bias live in ModelBundle::params at
/// 2*i and 2*i+1.
struct LayerDesc {
  std::string name;
  LayerKind kind = LayerKind::conv2d;
  Shape weight_shape;
  std::size_t stride = 1;
  std::size_t padding = 0;
};

struct Provenance {
  std::uint64_t seed = 0;
  std::size_t epochs_run = 0;
  double best_val_loss = 0.0;
  std::string data_fingerprint = "none";
  bool trained = false;
};

/// Architecture, parameters and training provenance of one imputer.
struct ModelBundle {
  Architecture arch = Architecture::persistence;
  ModelConfig config;
  std::vector<LayerDesc> layers;
  std::vector<Tensor> params;
  Provenance provenance;

  std::size_t parameter_count() const;
  ConvKernel kernel(std::size_t layer) const;
  const Tensor& weights(std::size_t layer) const { return params[2 * layer]; }
  const Tensor& bias(std::size_t layer) const { return params[2 * layer + 1]; }
};

/// Layer list implied by an architecture and config.
std::vector<LayerDesc> layer_layout(Architecture arch, const ModelConfig& config);

/// Fresh bundle with He-uniform weights (Xavier for the sigmoid head) and
/// zero biases. Persistence has no layers and counts as trained.
ModelBundle build_model(Architecture arch, const ModelConfig& config = {}, std::uint64_t seed = 0);
ModelBundle build_ae1d(const ModelConfig& config = {}, std::uint64_t seed = 0);
ModelBundle build_ae2d(const ModelConfig& config = {}, std::uint64_t seed = 0);
ModelBundle build_pconv_unet(const ModelConfig& config = {}, std::uint64_t seed = 0);

/// Text manifest followed by GFT1 tensor payloads. save(load(x)) == x.
std::string serialize_model(const ModelBundle& model);
ModelBundle deserialize_model(const std::string& bytes);
void save_model(const std::filesystem::path& path, const ModelBundle& model);
ModelBundle load_model(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Differentiable forward pass

/// Intermediate activations recorded by `forward` for `backward`.
struct ForwardTrace {
  std::vector<Tensor> acts;
  std::vector<Tensor> masks;
  std::vector<PoolResult> pools;
};

/// Network output on the (168,52) grid. `input` holds observed values with
/// holes zeroed; `mask` is 1 on cells the network may read. Not valid for
/// persistence.
Tensor forward(const ModelBundle& model, const Tensor& input, const Tensor& mask,
               ForwardTrace* trace = nullptr);

/// Parameter gradients (parallel to model.params) of <grad_out, forward(...)>.
std::vector<Tensor> backward(const ModelBundle& model, const ForwardTrace& trace,
                             const Tensor& grad_out);

/// Encoder-side masks recorded by a pconv forward: input mask on the
/// 192x192 grid then the updated mask after each encoder stage.
std::vector<Tensor> pconv_encoder_masks(const ForwardTrace& trace);

// ---------------------------------------------------------------------------
// Imputation

/// Filled grid plus provenance: observed cells are copied verbatim; holes
/// and raw-invalid cells carry the model's estimate.
struct Imputation {
  Tensor filled{Shape{kHoursPerWeek, kWeeks}};
  Tensor imputed{Shape{kHoursPerWeek, kWeeks}};  // 1 on estimated cells
  MaskGrid mask;
};

/// Cells the models may read: observed under `mask` and raw-valid.
Tensor model_input_mask(const MaskGrid& mask, const Tensor& validity);

/// Weekly persistence: each hole (h, w) takes the value at (h, w') for the
/// nearest earlier observed week w', else the nearest later one. Throws
/// ValidationError when hour-of-week h has no observed week at all.
Tensor persistence_fill(const Tensor& matrix, const Tensor& observed);

Imputation persistence_impute(const EnergyImage& image, const MaskGrid& mask);

/// Runs the model on the masked image and composes the result. Throws
/// ValidationError for an untrained network unless `allow_untrained`.
Imputation impute(const ModelBundle& model, const EnergyImage& image, const MaskGrid& mask,
                  bool allow_untrained = false);

}  // namespace gridfill
