#include <algorithm>
#include <cmath>
#include <cstdio>
#include <tuple>

#include "gridfill/error.hpp"
#include "gridfill/evaluation.hpp"
#include "gridfill/parallel.hpp"
#include "gridfill/rng.hpp"

namespace gridfill {

void ModelSet::add(std::size_t fold, ModelBundle model) {
  const std::string id(to_string(model.arch));
  models_.insert_or_assign({id, fold}, std::move(model));
}

const ModelBundle& ModelSet::get(const std::string& id, std::size_t fold) const {
  if (id == "persistence") return persistence_;
  const auto it = models_.find({id, fold});
  if (it == models_.end())
    throw ValidationError("no trained " + id + " model for fold " + std::to_string(fold));
  return it->second;
}

std::uint64_t experiment_mask_seed(std::uint64_t seed, const std::string& meter_id, MaskKind kind,
                                   double rate, std::size_t fold) {
  const auto permille = static_cast<std::uint64_t>(std::llround(rate * 1000.0));
  return derive_seed(seed, "evaluate.mask",
                     {hash_string(meter_id), static_cast<std::uint64_t>(kind), permille, fold});
}

namespace {

struct KeyedRow {
  std::size_t model = 0;
  std::size_t kind = 0;
  std::size_t rate = 0;
  std::size_t fold = 0;
  EvalRow row;
};

struct UnitResult {
  std::vector<KeyedRow> rows;
  std::size_t degenerate = 0;
  std::vector<ExampleTrace> examples;
};

Tensor denormalized(const Tensor& grid, const NormParams& norm) {
  Tensor out = grid;
  for (auto& v : out.values()) v = norm.denormalize(v);
  return out;
}

}  // namespace

EvalReport run_experiment(const ExperimentSpec& spec, const std::vector<EnergyImage>& images,
                          const FoldAssignment& folds, const std::vector<std::string>& model_ids,
                          const ModelSet& models) {
  configure_allocator();
  if (model_ids.empty()) throw ValidationError("run_experiment: no models requested");
  if (spec.kinds.empty() || spec.rates.empty() || spec.folds.empty())
    throw ValidationError("run_experiment: empty experiment matrix");
  for (const auto& id : model_ids) parse_architecture(id);
  for (std::size_t f : spec.folds) {
    if (f >= kFoldCount) throw ValidationError("fold index out of range: " + std::to_string(f));
    for (const auto& id : model_ids) models.get(id, f);
  }

  struct Unit {
    std::size_t fold;
    std::size_t image;
    bool first_fold;
    std::size_t rank;  // position among the fold's test meters by id
  };
  std::vector<Unit> units;
  for (std::size_t fi = 0; fi < spec.folds.size(); ++fi) {
    const std::size_t f = spec.folds[fi];
    auto test = split_round(images, folds, f).test;
    std::sort(test.begin(), test.end(),
              [&](std::size_t a, std::size_t b) { return images[a].meter_id < images[b].meter_id; });
    for (std::size_t r = 0; r < test.size(); ++r) units.push_back({f, test[r], fi == 0, r});
  }

  std::vector<UnitResult> results(units.size());
  parallel_for(units.size(), [&](std::size_t u) {
    const Unit& unit = units[u];
    const EnergyImage& img = images[unit.image];
    UnitResult& out = results[u];
    for (std::size_t ki = 0; ki < spec.kinds.size(); ++ki) {
      for (std::size_t ri = 0; ri < spec.rates.size(); ++ri) {
        const MaskKind kind = spec.kinds[ki];
        const double rate = spec.rates[ri];
        const MaskGrid mask = make_mask(
            kind, rate, experiment_mask_seed(spec.seed, img.meter_id, kind, rate, unit.fold));
        const Tensor eval = effective_mask(mask, img.validity);
        const Tensor truth = spec.denormalized ? denormalized(img.matrix, img.norm) : img.matrix;
        const bool capture = unit.first_fold && unit.rank < spec.examples_per_kind &&
                             std::fabs(rate - spec.example_rate) < 1e-9;
        ExampleTrace trace;
        if (capture) {
          trace.meter_id = img.meter_id;
          trace.mask_kind = kind;
          trace.rate = rate;
          trace.fold = unit.fold;
          trace.week0_start = img.week0_start;
          trace.truth = img.matrix;
          trace.validity = img.validity;
          trace.mask = mask;
        }
        for (std::size_t mi = 0; mi < model_ids.size(); ++mi) {
          const ModelBundle& model = models.get(model_ids[mi], unit.fold);
          const Imputation imp = model.arch == Architecture::persistence
                                     ? persistence_impute(img, mask)
                                     : impute(model, img, mask);
          if (capture) trace.filled.emplace_back(model_ids[mi], imp.filled);
          const Tensor pred = spec.denormalized ? denormalized(imp.filled, img.norm) : imp.filled;
          KeyedRow kr{mi, ki, ri, unit.fold, {}};
          EvalRow& row = kr.row;
          row.model = model_ids[mi];
          row.meter_id = img.meter_id;
          row.site_id = img.site_id;
          row.meter_type = img.type;
          row.mask_kind = kind;
          row.rate = rate;
          row.fold = unit.fold;
          try {
            row.mse = mse_masked(pred, truth, eval);
            row.r2 = r2_masked(pred, truth, eval);
          } catch (const ValidationError&) {
            ++out.degenerate;
            continue;
          }
          for (double e : eval.values()) row.n_cells += e != 0.0;
          out.rows.push_back(std::move(kr));
        }
        if (capture) out.examples.push_back(std::move(trace));
      }
    }
  });

  std::vector<KeyedRow> all;
  EvalReport report;
  for (auto& r : results) {
    std::move(r.rows.begin(), r.rows.end(), std::back_inserter(all));
    report.degenerate_excluded += r.degenerate;
    std::move(r.examples.begin(), r.examples.end(), std::back_inserter(report.examples));
  }
  std::stable_sort(all.begin(), all.end(), [](const KeyedRow& a, const KeyedRow& b) {
    return std::tie(a.model, a.kind, a.rate, a.fold, a.row.meter_id) <
           std::tie(b.model, b.kind, b.rate, b.fold, b.row.meter_id);
  });
  report.rows.reserve(all.size());
  for (auto& k : all) report.rows.push_back(std::move(k.row));
  return report;
}

}  // namespace gridfill
