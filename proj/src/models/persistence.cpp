#include "gridfill/error.hpp"
#include "gridfill/models.hpp"

namespace gridfill {

Tensor persistence_fill(const Tensor& matrix, const Tensor& observed) {
  require_same_shape(matrix, observed, "persistence_fill");
  const std::size_t rows = matrix.dim(0), weeks = matrix.dim(1);
  Tensor out = matrix;
  for (std::size_t h = 0; h < rows; ++h) {
    // Source week per column: last observed week so far, carried forward.
    long last = -1;
    long first_observed = -1;
    for (std::size_t w = 0; w < weeks; ++w) {
      if (observed.at(h, w) != 0.0) {
        first_observed = static_cast<long>(w);
        break;
      }
    }
    for (std::size_t w = 0; w < weeks; ++w) {
      if (observed.at(h, w) != 0.0) {
        last = static_cast<long>(w);
        continue;
      }
      const long src = last >= 0 ? last : first_observed;
      if (src < 0) {
        throw ValidationError("persistence: hour-of-week " + std::to_string(h) +
                              " has no observed week to copy from");
      }
      out.at(h, w) = matrix.at(h, static_cast<std::size_t>(src));
    }
  }
  return out;
}

Imputation persistence_impute(const EnergyImage& image, const MaskGrid& mask) {
  const Tensor observed = model_input_mask(mask, image.validity);
  const Tensor filled = persistence_fill(image.matrix, observed);
  Imputation out;
  out.mask = mask;
  for (std::size_t i = 0; i < filled.size(); ++i) {
    const bool fill = observed[i] == 0.0;
    out.filled[i] = fill ? filled[i] : image.matrix[i];
    out.imputed[i] = fill ? 1.0 : 0.0;
  }
  return out;
}

}  // namespace gridfill
