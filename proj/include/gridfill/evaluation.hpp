#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "gridfill/dataset.hpp"
#include "gridfill/masks.hpp"
#include "gridfill/models.hpp"

namespace gridfill {

/// Mean squared error over cells with eval_mask = 1. Throws ValidationError
/// when the mask selects nothing.
double mse_masked(const Tensor& pred, const Tensor& truth, const Tensor& eval_mask);

/// 1 - SSres/SStot over cells with eval_mask = 1. Throws
/// DegenerateMetricError for fewer than 2 cells or constant truth.
double r2_masked(const Tensor& pred, const Tensor& truth, const Tensor& eval_mask);

struct EvalRow {
  std::string model;
  std::string meter_id;
  std::string site_id;
  MeterType meter_type = MeterType::electricity;
  MaskKind mask_kind = MaskKind::random_days;
  double rate = 0.0;
  std::size_t fold = 0;
  double mse = 0.0;
  double r2 = 0.0;
  std::size_t n_cells = 0;
};

/// Truth, mask and every model's output for one meter, kept for plot data.
struct ExampleTrace {
  std::string meter_id;
  MaskKind mask_kind = MaskKind::random_days;
  double rate = 0.0;
  std::size_t fold = 0;
  HourStamp week0_start = 0;
  Tensor truth{Shape{kHoursPerWeek, kWeeks}};
  Tensor validity{Shape{kHoursPerWeek, kWeeks}};
  MaskGrid mask;
  std::vector<std::pair<std::string, Tensor>> filled;  // model id -> grid
};

struct EvalReport {
  std::vector<EvalRow> rows;
  std::size_t degenerate_excluded = 0;
  std::vector<ExampleTrace> examples;

  static const char* csv_header();
  std::string csv() const;
};

/// The experiment matrix: mask kinds x rates x folds x test meters.
struct ExperimentSpec {
  std::vector<MaskKind> kinds = {MaskKind::random_days, MaskKind::continuous};
  std::vector<double> rates = {0.05, 0.10, 0.20, 0.30, 0.40, 0.50};
  std::vector<std::size_t> folds = {0, 1, 2, 3, 4};
  std::uint64_t seed = 0;
  bool denormalized = false;     // score in original units instead of [0,1]
  std::size_t examples_per_kind = 2;
  double example_rate = 0.20;
};

/// Trained networks keyed by (model id, fold).
class ModelSet {
 public:
  void add(std::size_t fold, ModelBundle model);
  /// Persistence needs no entry. Throws ValidationError naming the fold when
  /// a network is missing.
  const ModelBundle& get(const std::string& id, std::size_t fold) const;

 private:
  std::map<std::pair<std::string, std::size_t>, ModelBundle> models_;
  ModelBundle persistence_;
};

/// Mask seed for one matrix cell; shared by all models so scores are paired.
std::uint64_t experiment_mask_seed(std::uint64_t seed, const std::string& meter_id, MaskKind kind,
                                   double rate, std::size_t fold);

/// Scores every (model, kind, rate, fold, test meter). Rows are ordered by
/// model (as listed), kind, rate, fold, meter id. Rows whose R2 is undefined
/// are dropped and counted in `degenerate_excluded`.
EvalReport run_experiment(const ExperimentSpec& spec, const std::vector<EnergyImage>& images,
                          const FoldAssignment& folds, const std::vector<std::string>& model_ids,
                          const ModelSet& models);

struct Summary {
  std::size_t count = 0;
  double mean = 0.0;
  double median = 0.0;
  double q1 = 0.0;
  double q3 = 0.0;
};

/// Quartiles by linear interpolation between order statistics.
Summary summarize(std::vector<double> values);

struct SummaryRow {
  std::vector<std::string> key;
  Summary mse;
  Summary r2;
};

struct SummaryTable {
  std::vector<std::string> keys;
  std::vector<SummaryRow> rows;  // sorted by key
  std::string csv() const;
};

/// Group keys: model, meter_id, site_id, meter_type, mask_kind, rate, fold.
/// Throws ValidationError on an unknown key or an empty report.
SummaryTable aggregate(const EvalReport& report, const std::vector<std::string>& keys);

/// Writes plot data into `dir`: long-form boxplot CSVs (fig6_long.csv,
/// fig8_long.csv), one overlay CSV per example and heatmap matrices
/// (input with holes, truth, each model's output).
std::vector<std::filesystem::path> emit_plots(const EvalReport& report,
                                              const std::filesystem::path& dir);

/// Matrix text: one line per row, values separated by spaces, NaN as "nan".
std::string matrix_text(const Tensor& grid);

}  // namespace gridfill
