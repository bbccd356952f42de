#include "gridfill/error.hpp"
#include "gridfill/models.hpp"

namespace gridfill {

Tensor model_input_mask(const MaskGrid& mask, const Tensor& validity) {
  require_same_shape(mask.grid, validity, "model_input_mask");
  Tensor out(validity.shape());
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = (mask.grid[i] != 0.0 && validity[i] != 0.0) ? 1.0 : 0.0;
  return out;
}

Imputation impute(const ModelBundle& model, const EnergyImage& image, const MaskGrid& mask,
                  bool allow_untrained) {
  require_same_shape(image.matrix, mask.grid, "impute");
  if (model.arch == Architecture::persistence) return persistence_impute(image, mask);
  if (!model.provenance.trained && !allow_untrained) {
    throw ValidationError(std::string(to_string(model.arch)) + " model is untrained");
  }
  const Tensor readable = model_input_mask(mask, image.validity);
  Tensor input = image.matrix;
  for (std::size_t i = 0; i < input.size(); ++i)
    if (readable[i] == 0.0) input[i] = 0.0;
  const Tensor pred = forward(model, input, readable);

  Imputation out;
  out.mask = mask;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const bool fill = readable[i] == 0.0;
    out.filled[i] = fill ? pred[i] : image.matrix[i];
    out.imputed[i] = fill ? 1.0 : 0.0;
  }
  return out;
}

}  // namespace gridfill
