#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <set>

#include "gridfill/dataset.hpp"
#include "gridfill/error.hpp"
#include "gridfill/rng.hpp"
#include "helpers.hpp"
#include "oracles.hpp"

using namespace gridfill;
using testing_helpers::dot;
using testing_helpers::random_tensor;
using testing_helpers::synthetic_image;
using testing_helpers::TempDir;

namespace {

const HourStamp kMonday = parse_timestamp("2016-01-04 00:00");

MeterRecord make_record(const std::string& id, const std::string& site, HourStamp start,
                        std::size_t hours, std::uint64_t seed) {
  Rng rng(seed);
  MeterRecord r;
  r.meter_id = id;
  r.site_id = site;
  r.start = start;
  r.values.resize(hours);
  r.valid.assign(hours, 1);
  for (auto& v : r.values) v = 100.0 + 20.0 * standard_normal(rng);
  return r;
}

void write_text(const std::filesystem::path& p, const std::string& s) {
  std::ofstream(p) << s;
}

}  // namespace

TEST(MeterType, ParsingIsLenient) {
  EXPECT_EQ(parse_meter_type("chilled_water"), MeterType::chilledwater);
  EXPECT_EQ(parse_meter_type("Hot Water"), MeterType::hotwater);
  EXPECT_EQ(parse_meter_type("ELECTRICITY"), MeterType::electricity);
  EXPECT_THROW(parse_meter_type("gas"), ValidationError);
  EXPECT_FALSE(weather_dependent(MeterType::electricity));
  EXPECT_TRUE(weather_dependent(MeterType::steam));
}

TEST(Ingest, GridsRowsAndMarksGaps) {
  TempDir dir("ingest");
  write_text(dir / "in.csv",
             "timestamp,site_id,meter_id,meter_type,reading\n"
             "2016-01-01 00:00:00,s1,m1,electricity,1.5\n"
             "2016-01-01 03:00:00,s1,m1,electricity,2.5\n"
             "2016-01-01 01:00:00,s1,m1,electricity,\n"
             "2016-01-01 03:00:00,s1,m1,electricity,9\n"
             "2016-01-01 00:00:00,s2,m2,chilledwater,NaN\n");
  const IngestResult r = ingest_csv(dir / "in.csv");
  ASSERT_EQ(r.records.size(), 2u);
  const MeterRecord& m1 = r.records[0];
  EXPECT_EQ(m1.meter_id, "m1");
  ASSERT_EQ(m1.size(), 4u);
  EXPECT_EQ(m1.values[0], 1.5);
  EXPECT_EQ(m1.valid, (std::vector<std::uint8_t>{1, 0, 0, 1}));
  EXPECT_EQ(m1.values[3], 9.0);  // duplicate keeps the last row
  EXPECT_EQ(m1.invalid_count(), 2u);
  EXPECT_EQ(r.records[1].type, MeterType::chilledwater);
  EXPECT_EQ(r.records[1].valid[0], 0);
  EXPECT_FALSE(r.warnings.empty());  // 01:00 arrives after 03:00
}

TEST(Ingest, ReportsLineNumbers) {
  TempDir dir("ingest_bad");
  write_text(dir / "bad.csv",
             "timestamp,site_id,meter_id,meter_type,reading\n"
             "2016-01-01 00:00:00,s1,m1,electricity,1\n"
             "2016-01-01 01:00:00,s1,m1,electricity,abc\n");
  try {
    ingest_csv(dir / "bad.csv");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find('3'), std::string::npos);
  }
  write_text(dir / "nocol.csv", "timestamp,site_id,meter_id,reading\n");
  EXPECT_THROW(ingest_csv(dir / "nocol.csv"), ParseError);
  write_text(dir / "type.csv",
             "timestamp,site_id,meter_id,meter_type,reading\n2016-01-01 00:00,s,m,gas,1\n");
  EXPECT_THROW(ingest_csv(dir / "type.csv"), ValidationError);
}

TEST(Ingest, WriteCsvRoundTrip) {
  TempDir dir("ingest_rt");
  auto a = make_record("a", "s1", kMonday, 50, 1);
  a.valid[7] = 0;
  auto b = make_record("b", "s2", kMonday + 3, 20, 2);
  b.type = MeterType::steam;
  {
    std::ofstream out(dir / "rt.csv");
    write_csv(out, {a, b});
  }
  const auto back = ingest_csv(dir / "rt.csv").records;
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0].valid, a.valid);
  EXPECT_EQ(back[1].start, b.start);
  EXPECT_EQ(back[1].type, MeterType::steam);
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a.valid[i]) EXPECT_NEAR(back[0].values[i], a.values[i], 1e-7 * std::abs(a.values[i]));
}

TEST(Clean, FlagsNegativesStreaksAndSpikes) {
  auto r = make_record("m", "s", kMonday, 400, 3);
  r.values[5] = -1.0;
  for (std::size_t i = 100; i < 124; ++i) r.values[i] = 42.0;  // 24-hour flat run
  for (std::size_t i = 200; i < 247; ++i) r.values[i] = 0.0;   // 47 zeros: kept
  r.values[300] = 1e6;
  const MeterRecord c = clean(r);
  EXPECT_EQ(c.values, r.values);
  EXPECT_EQ(c.valid[5], 0);
  for (std::size_t i = 100; i < 124; ++i) EXPECT_EQ(c.valid[i], 0);
  for (std::size_t i = 200; i < 247; ++i) EXPECT_EQ(c.valid[i], 1);
  EXPECT_EQ(c.valid[300], 0);
  EXPECT_EQ(c.valid[301], 1);
}

TEST(Clean, ConstantSeriesSkipsSpikeRule) {
  MeterRecord r;
  r.values = {3, 3, 3, 4, 3, 3};
  r.valid.assign(6, 1);
  const auto c = clean(r, CleanRules{100, 100, 10.0});
  EXPECT_EQ(c.invalid_count(), 0u);
}

TEST(ModelingYear, StartsOnFirstMonday) {
  const auto r = make_record("m", "s", kMonday - 5, kYearHours + 10, 4);
  std::size_t off = 99;
  ASSERT_TRUE(modeling_year_offset(r, off));
  EXPECT_EQ(off, 5u);
  const auto y = slice_modeling_year(r);
  EXPECT_EQ(y.start, kMonday);
  EXPECT_EQ(y.size(), kYearHours);
  EXPECT_EQ(weekday(y.start), 0);
  const auto short_rec = make_record("m", "s", kMonday - 5, kYearHours + 2, 4);
  EXPECT_FALSE(modeling_year_offset(short_rec, off));
  EXPECT_THROW(slice_modeling_year(short_rec), ValidationError);
}

TEST(Filter, ThresholdIsStrict) {
  auto keep = make_record("keep", "s", kMonday, kYearHours, 5);
  auto drop = make_record("drop", "s", kMonday, kYearHours, 6);
  // 436 invalid hours is just under 5%; 437 reaches it.
  for (std::size_t i = 0; i < 436; ++i) keep.valid[i * 20] = 0;
  for (std::size_t i = 0; i < 437; ++i) drop.valid[i * 19] = 0;
  auto shortr = make_record("short", "s", kMonday, 100, 7);
  const auto f = filter_low_missing({keep, drop, shortr}, 0.05);
  ASSERT_EQ(f.kept.size(), 1u);
  EXPECT_EQ(f.kept[0].meter_id, "keep");
  ASSERT_EQ(f.excluded.size(), 2u);
  EXPECT_EQ(f.excluded[0].meter_id, "drop");
}

// Normalization and reshaping round trips over random series.
TEST(RoundTrip, NormalizeAndReshapeOverRandomSeries) {
  Rng rng(31);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<double> x(kYearHours);
    std::vector<std::uint8_t> valid(kYearHours, 1);
    const double scale = std::pow(10.0, uniform(rng, -2.0, 4.0));
    const double offset = uniform(rng, 0.0, 10.0) * scale;
    for (auto& v : x) v = offset + scale * uniform01(rng);
    for (std::size_t i = 0; i < 50; ++i) valid[uniform_index(rng, kYearHours)] = 0;

    const Normalized n = normalize(x, valid);
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (!valid[i]) {
        ASSERT_EQ(n.values[i], 0.0);
        continue;
      }
      ASSERT_GE(n.values[i], 0.0);
      ASSERT_LE(n.values[i], 1.0);
      ASSERT_LE(std::abs(n.params.denormalize(n.values[i]) - x[i]), 1e-12 * std::max(1.0, std::abs(x[i])))
          << "trial " << trial;
    }
    const Tensor g = reshape_to_grid(x);
    ASSERT_EQ(flatten_grid(g), x);
    ASSERT_EQ(g.at(trial % kHoursPerWeek, trial % kWeeks),
              x[(trial % kWeeks) * kHoursPerWeek + trial % kHoursPerWeek]);
  }
}

TEST(Normalize, ConstantAndEmptySeries) {
  std::vector<double> x(10, 7.0);
  std::vector<std::uint8_t> v(10, 1);
  const auto n = normalize(x, v);
  for (double y : n.values) EXPECT_EQ(y, 0.0);
  EXPECT_EQ(n.params.denormalize(0.0), 7.0);
  std::vector<std::uint8_t> none(10, 0);
  EXPECT_THROW(normalize(x, none), ValidationError);
  EXPECT_THROW(reshape_to_grid(x), ValidationError);
}

TEST(MakeImage, LayoutAndValidity) {
  auto r = make_record("m", "s", kMonday, kYearHours, 8);
  r.valid[170] = 0;
  const EnergyImage img = make_image(r);
  EXPECT_EQ(img.week0_start, kMonday);
  EXPECT_EQ(img.validity.at(2, 1), 0.0);  // hour 170 = row 2, week 1
  EXPECT_EQ(img.matrix.at(2, 1), 0.0);
  EXPECT_NEAR(img.norm.denormalize(img.matrix.at(5, 3)), r.values[3 * 168 + 5], 1e-9);
}

TEST(Resize, CornersAlignAndLinearSurfacesSurvive) {
  Tensor plane({kHoursPerWeek, kWeeks});
  for (std::size_t i = 0; i < kHoursPerWeek; ++i)
    for (std::size_t j = 0; j < kWeeks; ++j) plane.at(i, j) = 0.3 + 0.01 * i - 0.02 * j;
  const Tensor big = resize_bilinear(plane);
  ASSERT_EQ(big.shape(), (Shape{kResizedSide, kResizedSide}));
  EXPECT_NEAR(big.at(0, 0), plane.at(0, 0), 1e-14);
  EXPECT_NEAR(big.at(191, 191), plane.at(167, 51), 1e-13);
  // A bilinear surface through a linear function is that function, so
  // resampling back reproduces the grid.
  EXPECT_LT(oracle::max_abs_diff(sample_back(big), plane), 1e-12);
}

TEST(Resize, MaskedMatchesPlainOnFullMaskAndIgnoresHoles) {
  Rng rng(32);
  const Tensor g = random_tensor(rng, {kHoursPerWeek, kWeeks});
  const Tensor ones({kHoursPerWeek, kWeeks}, 1.0);
  EXPECT_LE(oracle::max_abs_diff(resize_bilinear_masked(g, ones), resize_bilinear(g)), 1e-14);
  Tensor mask = ones;
  Tensor g2 = g;
  for (std::size_t i = 0; i < mask.size(); i += 3) {
    mask[i] = 0.0;
    g2[i] = 1e9;
  }
  EXPECT_EQ(resize_bilinear_masked(g, mask), resize_bilinear_masked(g2, mask));
  const Tensor none({kHoursPerWeek, kWeeks}, 0.0);
  const Tensor empty = resize_bilinear_masked(g, none);
  for (double v : empty.values()) EXPECT_EQ(v, 0.0);
}

TEST(Resize, NearestKeepsBinaryValues) {
  Rng rng(33);
  const Tensor m = testing_helpers::random_binary(rng, {kHoursPerWeek, kWeeks}, 0.5);
  const Tensor big = resize_nearest(m);
  for (double v : big.values()) EXPECT_TRUE(v == 0.0 || v == 1.0);
  EXPECT_EQ(big.at(0, 0), m.at(0, 0));
  EXPECT_EQ(big.at(191, 191), m.at(167, 51));
}

TEST(Resize, SampleBackAdjoint) {
  Rng rng(34);
  const Tensor r = random_tensor(rng, {kResizedSide, kResizedSide});
  const Tensor g = random_tensor(rng, {kHoursPerWeek, kWeeks});
  EXPECT_NEAR(dot(sample_back(r), g), dot(r, sample_back_adjoint(g)), 1e-9);
}

TEST(Augment, QuadruplesAndFlipIsInvolution) {
  std::vector<EnergyImage> imgs;
  for (std::uint64_t s = 0; s < 6; ++s) {
    imgs.push_back(synthetic_image(s, "m" + std::to_string(s)));
    imgs.back().validity[s * 11] = 0.0;
    imgs.back().matrix[s * 11] = 0.0;
  }
  const auto aug = augment(imgs, 99);
  ASSERT_EQ(aug.size(), 4 * imgs.size());
  for (std::size_t i = 0; i < imgs.size(); ++i) {
    EXPECT_EQ(aug[4 * i].matrix, imgs[i].matrix);
    // 1 - (1 - x) can differ from x by one rounding step.
    EXPECT_LE(oracle::max_abs_diff(flip_image(flip_image(imgs[i])).matrix, imgs[i].matrix), 1e-15);
    EXPECT_EQ(flip_image(flip_image(imgs[i])).validity, imgs[i].validity);
    EXPECT_EQ(flip_image(aug[4 * i + 1]).matrix, aug[4 * i + 3].matrix);
    EXPECT_EQ(aug[4 * i + 2].matrix, flip_image(imgs[i]).matrix);
    EXPECT_EQ(aug[4 * i + 2].validity, imgs[i].validity);
    // Invalid cells stay zero under flipping.
    EXPECT_EQ(aug[4 * i + 2].matrix[i * 11], 0.0);
    EXPECT_EQ(aug[4 * i + 1].meter_id, imgs[i].meter_id);
  }
  EXPECT_EQ(augment(imgs, 99)[1].matrix, aug[1].matrix);
}

TEST(Augment, ShiftMovesTheFlattenedYear) {
  const EnergyImage img = synthetic_image(5);
  const auto shifted = shift_image(img, 30);
  const auto a = flatten_grid(img.matrix), b = flatten_grid(shifted.matrix);
  for (std::size_t t = 0; t < kYearHours; ++t) ASSERT_EQ(b[(t + 30) % kYearHours], a[t]);
  EXPECT_EQ(shift_image(img, kYearHours).matrix, img.matrix);
}

TEST(Folds, EverySplitIsSiteDisjoint) {
  Rng rng(35);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    std::vector<EnergyImage> imgs;
    const std::size_t sites = 5 + uniform_index(rng, 10);
    for (std::size_t s = 0; s < sites; ++s) {
      const std::size_t n = 1 + uniform_index(rng, 8);
      for (std::size_t m = 0; m < n; ++m) {
        EnergyImage img;
        img.site_id = "s" + std::to_string(s);
        img.meter_id = img.site_id + "_" + std::to_string(m);
        imgs.push_back(img);
      }
    }
    const FoldAssignment f = assign_folds(imgs, seed);
    std::set<std::size_t> used;
    for (const auto& [site, fold] : f.site_fold) used.insert(fold);
    EXPECT_EQ(used.size(), kFoldCount);
    std::vector<std::size_t> tested(imgs.size(), 0);
    for (std::size_t round = 0; round < kFoldCount; ++round) {
      const SplitRound sp = split_round(imgs, f, round);
      ASSERT_TRUE(sites_disjoint(imgs, sp));
      ASSERT_EQ(sp.train.size() + sp.val.size() + sp.test.size(), imgs.size());
      for (auto i : sp.test) ++tested[i];
    }
    for (auto t : tested) EXPECT_EQ(t, 1u);  // every meter is tested exactly once
  }
}

TEST(Folds, NeedFiveSites) {
  std::vector<EnergyImage> imgs(4);
  for (std::size_t i = 0; i < 4; ++i) imgs[i].site_id = "s" + std::to_string(i);
  EXPECT_THROW(assign_folds(imgs, 0), ValidationError);
  SplitRound bad{{0}, {0}, {1}};
  EXPECT_FALSE(sites_disjoint(imgs, bad));
}

TEST(Store, RoundTripsImagesFoldsAndExclusions) {
  TempDir dir("store");
  std::vector<EnergyImage> imgs;
  for (std::uint64_t s = 0; s < 5; ++s) {
    imgs.push_back(synthetic_image(s, "m" + std::to_string(s)));
    imgs.back().site_id = "site" + std::to_string(s);
    imgs.back().type = static_cast<MeterType>(s % 4);
    imgs.back().week0_start = kMonday;
  }
  const auto folds = assign_folds(imgs, 1);
  const auto store = ImageStore::create(dir / "st", imgs, folds, {{"x", "too sparse"}});
  const auto back = store.load_all();
  ASSERT_EQ(back.size(), imgs.size());
  for (std::size_t i = 0; i < imgs.size(); ++i) {
    EXPECT_EQ(back[i].meter_id, imgs[i].meter_id);
    EXPECT_EQ(back[i].type, imgs[i].type);
    EXPECT_EQ(back[i].matrix, imgs[i].matrix);
    EXPECT_EQ(back[i].validity, imgs[i].validity);
    EXPECT_EQ(back[i].norm.x_max, imgs[i].norm.x_max);
    EXPECT_EQ(back[i].week0_start, kMonday);
  }
  EXPECT_EQ(store.folds().site_fold, folds.site_fold);
  EXPECT_TRUE(std::filesystem::exists(dir / "st" / "exclusions.log"));
  EXPECT_TRUE(std::filesystem::exists(dir / "st" / "index.csv"));
}
