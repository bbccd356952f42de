#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "gridfill/dataset.hpp"
#include "gridfill/tensor.hpp"

namespace gridfill {

enum class MaskKind { random_days, continuous, irregular };

std::string_view to_string(MaskKind k);
MaskKind parse_mask_kind(std::string_view text);

/// Binary (168,52) grid aligned to an EnergyImage: 1 = observed, 0 = hole.
struct MaskGrid {
  Tensor grid{Shape{kHoursPerWeek, kWeeks}, 1.0};
  MaskKind kind = MaskKind::random_days;
  double target_rate = 0.0;
  std::uint64_t seed = 0;

  std::size_t hole_count() const;
  double hole_fraction() const;
};

/// round-half-to-even(rate * 364).
std::size_t masked_day_count(double rate);

/// Marks all 24 cells of year-day `day` (0..363) as holes.
void mask_day(Tensor& grid, std::size_t day);

/// `masked_day_count(rate)` distinct days, drawn uniformly without
/// replacement. Throws ValidationError unless 0 <= rate <= 0.5.
MaskGrid random_day_mask(double rate, std::uint64_t seed);
/// One contiguous, non-wrapping block of `masked_day_count(rate)` days.
MaskGrid continuous_mask(double rate, std::uint64_t seed);

struct IrregularConfig {
  std::size_t min_strokes = 5;
  std::size_t max_strokes = 20;
  std::size_t min_thickness = 1;
  std::size_t max_thickness = 4;
  std::size_t min_vertices = 3;
  std::size_t max_vertices = 8;
  double max_segment = 14.0;  // cells per random-walk step
  double min_coverage = 0.05;
  double max_coverage = 0.5;
};

/// Random-walk brush strokes. Strokes are added until coverage reaches
/// min_coverage; a draw that overshoots max_coverage is redrawn (a bounded
/// number of times). max_strokes == 0 gives an all-ones grid.
MaskGrid irregular_mask(std::uint64_t seed, const IrregularConfig& config = {});

/// Generates a mask of the given kind; `rate` is ignored for irregular masks.
MaskGrid make_mask(MaskKind kind, double rate, std::uint64_t seed);

/// Copy of `matrix` with holes set to 0.
Tensor apply_mask(const Tensor& matrix, const MaskGrid& mask);

/// 1 where a synthetic hole meets a raw-valid cell: the cells that are scored.
Tensor effective_mask(const MaskGrid& mask, const Tensor& validity);

/// Text header `kind rate seed` followed by 168 lines of 52 '0'/'1'.
void write_mask(const std::filesystem::path& path, const MaskGrid& mask);
MaskGrid read_mask(const std::filesystem::path& path);
std::string mask_to_text(const MaskGrid& mask);

}  // namespace gridfill
