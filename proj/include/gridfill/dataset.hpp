#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gridfill/tensor.hpp"
#include "gridfill/timeutil.hpp"

namespace gridfill {

inline constexpr std::size_t kHoursPerDay = 24;
inline constexpr std::size_t kHoursPerWeek = 168;
inline constexpr std::size_t kWeeks = 52;
inline constexpr std::size_t kDays = 364;
inline constexpr std::size_t kYearHours = kHoursPerWeek * kWeeks;  // 8736
inline constexpr std::size_t kResizedSide = 192;

enum class MeterType { electricity, chilledwater, steam, hotwater };

std::string_view to_string(MeterType t);
/// Case-insensitive; '_', '-' and spaces are ignored ("chilled_water" works).
MeterType parse_meter_type(std::string_view text);
/// Heating/cooling meters; everything except electricity.
bool weather_dependent(MeterType t);

/// One meter's hourly series. `valid[i] == 0` marks a reading that is
/// missing in the source or was flagged by cleaning; the value is kept.
struct MeterRecord {
  std::string meter_id;
  std::string site_id;
  MeterType type = MeterType::electricity;
  HourStamp start = 0;
  std::vector<double> values;
  std::vector<std::uint8_t> valid;

  std::size_t size() const { return values.size(); }
  std::size_t invalid_count() const;
};

// ---------------------------------------------------------------------------
// Ingestion

struct CsvSchema {
  std::string timestamp = "timestamp";
  std::string site_id = "site_id";
  std::string meter_id = "meter_id";
  std::string meter_type = "meter_type";
  std::string reading = "reading";
};

struct IngestResult {
  std::vector<MeterRecord> records;  // ordered by first appearance
  std::vector<std::string> warnings;
};

/// Long-format hourly CSV (optionally gzip-compressed) to one gridded record
/// per meter. Hours without a row are invalid; duplicate timestamps keep the
/// last row; empty/NaN readings are invalid. Throws ParseError (with line
/// number) or ValidationError for an unknown meter type.
IngestResult ingest_csv(const std::filesystem::path& path, const CsvSchema& schema = {});

/// Writes records in the ingestion format (one row per valid hour).
void write_csv(std::ostream& out, const std::vector<MeterRecord>& records);

// ---------------------------------------------------------------------------
// Cleaning and filtering

struct CleanRules {
  std::size_t nonzero_streak = 24;  // constant non-zero runs this long are flagged
  std::size_t zero_streak = 48;     // constant zero runs this long are flagged
  double spike_iqr_factor = 10.0;   // |x - median| > factor * IQR is flagged
};

/// Flags (never modifies) suspicious cells: negative or non-finite values,
/// long constant runs and spikes. The spike rule is skipped when IQR is 0.
MeterRecord clean(MeterRecord record, const CleanRules& rules = {});

/// Offset of the modeling year: the first Monday 00:00 in the record with
/// 8736 hours available after it. Returns false when no such window exists.
bool modeling_year_offset(const MeterRecord& record, std::size_t& offset);
/// The modeling-year window as its own record. Throws ValidationError when
/// the record is too short.
MeterRecord slice_modeling_year(const MeterRecord& record);

struct Exclusion {
  std::string meter_id;
  std::string reason;
};

struct FilterResult {
  std::vector<MeterRecord> kept;
  std::vector<Exclusion> excluded;
};

/// Keeps records whose invalid fraction over the modeling year is strictly
/// below `threshold`. Records without a full modeling year are excluded.
FilterResult filter_low_missing(std::vector<MeterRecord> records, double threshold = 0.05);

// ---------------------------------------------------------------------------
// Normalization and reshaping

struct NormParams {
  double x_min = 0.0;
  double x_max = 0.0;

  /// Constant series (x_max == x_min) map to 0 and back to x_min.
  double normalize(double x) const;
  double denormalize(double x) const;
};

struct Normalized {
  std::vector<double> values;  // invalid cells are 0
  NormParams params;
};

/// Min-max scaling to [0,1] with min/max taken over valid cells only.
Normalized normalize(std::span<const double> values, std::span<const std::uint8_t> valid);

/// A meter-year on the hour-of-week x week grid: hour t of the year sits at
/// (row t % 168, col t / 168).
struct EnergyImage {
  std::string meter_id;
  std::string site_id;
  MeterType type = MeterType::electricity;
  Tensor matrix{Shape{kHoursPerWeek, kWeeks}};    // normalized readings
  Tensor validity{Shape{kHoursPerWeek, kWeeks}};  // 1 = reading available
  NormParams norm;
  HourStamp week0_start = 0;
};

inline std::size_t grid_index(std::size_t hour) {
  return (hour % kHoursPerWeek) * kWeeks + hour / kHoursPerWeek;
}

/// 8736 values to a (168,52) tensor. Throws ValidationError on wrong length.
Tensor reshape_to_grid(std::span<const double> series);
std::vector<double> flatten_grid(const Tensor& grid);

/// Slices the modeling year, normalizes it and reshapes it.
EnergyImage make_image(const MeterRecord& record);

// ---------------------------------------------------------------------------
// Resizing between the 168x52 grid and the network's square grid

/// Corner-aligned bilinear interpolation of a (H,W) grid onto (out_h,out_w).
Tensor resize_bilinear(const Tensor& grid, std::size_t out_h = kResizedSide,
                       std::size_t out_w = kResizedSide);
/// Bilinear interpolation using only cells with mask = 1; the corner weights
/// are renormalized over observed corners and the result is 0 where no
/// corner is observed. Equals resize_bilinear when the mask is all ones.
Tensor resize_bilinear_masked(const Tensor& grid, const Tensor& mask,
                              std::size_t out_h = kResizedSide, std::size_t out_w = kResizedSide);
/// Nearest-neighbour resize for binary grids.
Tensor resize_nearest(const Tensor& grid, std::size_t out_h = kResizedSide,
                      std::size_t out_w = kResizedSide);
/// Evaluates the bilinear surface through a resized grid at the original
/// (out_h,out_w) grid coordinates.
Tensor sample_back(const Tensor& resized, std::size_t out_h = kHoursPerWeek,
                   std::size_t out_w = kWeeks);
/// Adjoint of sample_back: maps a gradient on the small grid to the resized grid.
Tensor sample_back_adjoint(const Tensor& grad, std::size_t resized_h = kResizedSide,
                           std::size_t resized_w = kResizedSide);

// ---------------------------------------------------------------------------
// Augmentation

/// Circular shift of the flattened year forward by `hours`.
EnergyImage shift_image(const EnergyImage& image, std::size_t hours);
/// x -> 1 - x on valid cells.
EnergyImage flip_image(const EnergyImage& image);
/// {original, shifted, flipped, shifted+flipped} per input image, in that
/// order; the shift is drawn uniformly from [1,167] per image.
std::vector<EnergyImage> augment(const std::vector<EnergyImage>& images, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Site-based folds

inline constexpr std::size_t kFoldCount = 5;

struct FoldAssignment {
  std::map<std::string, std::size_t> site_fold;
};

/// Greedy balancing of meter counts: sites ordered by count (largest first,
/// seeded tie-break), each placed on the currently lightest fold (lowest
/// index on ties). Throws ValidationError with fewer than 5 sites.
FoldAssignment assign_folds(const std::vector<EnergyImage>& images, std::uint64_t seed);

struct SplitRound {
  std::vector<std::size_t> train;  // indices into the image list
  std::vector<std::size_t> val;
  std::vector<std::size_t> test;
};

/// Round r trains on folds r, r+1, r+2, validates on r+3 and tests on r+4
/// (mod 5).
SplitRound split_round(const std::vector<EnergyImage>& images, const FoldAssignment& folds,
                       std::size_t round);

/// True when no site appears in two of train/val/test.
bool sites_disjoint(const std::vector<EnergyImage>& images, const SplitRound& split);

// ---------------------------------------------------------------------------
// Processed store

void write_image(const std::filesystem::path& path, const EnergyImage& image);
EnergyImage read_image(const std::filesystem::path& path);

void write_folds(const std::filesystem::path& path, const FoldAssignment& folds);
FoldAssignment read_folds(const std::filesystem::path& path);

/// Directory layout: images/<n>.img, index.csv (file,meter_id,site_id,
/// meter_type), folds.csv (site_id,fold_index), exclusions.log.
struct ImageStore {
  std::filesystem::path root;

  static ImageStore create(const std::filesystem::path& root, const std::vector<EnergyImage>& images,
                           const FoldAssignment& folds, const std::vector<Exclusion>& excluded);
  std::vector<EnergyImage> load_all() const;
  FoldAssignment folds() const;
};

}  // namespace gridfill
