#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "gridfill/error.hpp"
#include "gridfill/gradcheck.hpp"
#include "gridfill/models.hpp"
#include "helpers.hpp"
#include "oracles.hpp"

using namespace gridfill;
using testing_helpers::dot;
using testing_helpers::random_tensor;
using testing_helpers::synthetic_image;
using testing_helpers::TempDir;

namespace {

ModelConfig tiny_config() {
  ModelConfig c;
  c.ae1d_encoder = {3, 2, 2};
  c.ae1d_decoder = {2, 2, 3};
  c.ae1d_bottleneck = 8;
  c.ae2d_encoder = {3, 2};
  c.ae2d_decoder = {2, 3};
  c.ae2d_bottleneck = 8;
  c.pconv_base = 2;
  return c;
}

// Image with a few raw-invalid cells; never leaves an hour-of-week row empty.
EnergyImage image_with_gaps(std::uint64_t seed) {
  EnergyImage img = synthetic_image(seed, "m" + std::to_string(seed));
  Rng rng(seed + 1000);
  for (int k = 0; k < 200; ++k) {
    const std::size_t i = uniform_index(rng, img.matrix.size());
    img.validity[i] = 0.0;
    img.matrix[i] = 0.0;
  }
  return img;
}

}  // namespace

TEST(Architecture, NamesRoundTrip) {
  for (auto a : {Architecture::persistence, Architecture::ae1d, Architecture::ae2d,
                 Architecture::pconv})
    EXPECT_EQ(parse_architecture(to_string(a)), a);
  EXPECT_THROW(parse_architecture("unet3d"), ValidationError);
}

TEST(ModelConfig, KeysRoundTripThroughKvConfig) {
  ModelConfig c = tiny_config();
  c.pconv_leaky_alpha = 0.1;
  KvConfig kv;
  c.write(kv);
  for (const auto& [k, v] : kv.entries())
    EXPECT_NE(std::find(model_config_keys().begin(), model_config_keys().end(), k),
              model_config_keys().end());
  const ModelConfig back = ModelConfig::from(kv);
  EXPECT_EQ(back.ae1d_encoder, c.ae1d_encoder);
  EXPECT_EQ(back.ae2d_bottleneck, c.ae2d_bottleneck);
  EXPECT_EQ(back.pconv_base, 2u);
  EXPECT_EQ(back.pconv_leaky_alpha, 0.1);
  EXPECT_THROW(ModelConfig::from(KvConfig::parse("ae2d_encoder = 4,x")), ValidationError);
}

TEST(Build, ShapesAndDeterministicInit) {
  for (auto a : {Architecture::ae1d, Architecture::ae2d, Architecture::pconv}) {
    const ModelBundle m = build_model(a, tiny_config(), 3);
    ASSERT_EQ(m.params.size(), 2 * m.layers.size());
    std::size_t count = 0;
    for (std::size_t l = 0; l < m.layers.size(); ++l) {
      EXPECT_EQ(m.weights(l).shape(), m.layers[l].weight_shape);
      EXPECT_EQ(m.bias(l).shape(), (Shape{m.layers[l].weight_shape[0]}));
      for (double b : m.bias(l).values()) EXPECT_EQ(b, 0.0);
      count += m.weights(l).size() + m.bias(l).size();
    }
    EXPECT_EQ(m.parameter_count(), count);
    EXPECT_FALSE(m.provenance.trained);
    EXPECT_EQ(build_model(a, tiny_config(), 3).params, m.params);
    EXPECT_NE(build_model(a, tiny_config(), 4).params, m.params);
  }
  const ModelBundle p = build_model(Architecture::persistence);
  EXPECT_TRUE(p.layers.empty());
  EXPECT_TRUE(p.provenance.trained);
}

TEST(Build, DefaultPconvIsEightLayerUnet) {
  const ModelBundle m = build_pconv_unet();
  std::size_t pconv_layers = 0;
  for (const auto& l : m.layers) pconv_layers += l.kind == LayerKind::pconv2d;
  EXPECT_EQ(pconv_layers, 8u);
  EXPECT_EQ(m.layers.front().weight_shape, (Shape{32, 1, 7, 7}));
}

TEST(Serialize, RoundTripIsExact) {
  TempDir dir("model");
  for (auto a : {Architecture::persistence, Architecture::ae1d, Architecture::ae2d,
                 Architecture::pconv}) {
    ModelBundle m = build_model(a, tiny_config(), 9);
    m.provenance = {123, 7, 0.0123456789012345, "abcdef", true};
    const std::string bytes = serialize_model(m);
    const ModelBundle back = deserialize_model(bytes);
    EXPECT_EQ(back.arch, m.arch);
    EXPECT_EQ(back.params, m.params);
    EXPECT_EQ(back.provenance.seed, 123u);
    EXPECT_EQ(back.provenance.best_val_loss, m.provenance.best_val_loss);
    EXPECT_EQ(back.config.pconv_base, 2u);
    EXPECT_EQ(serialize_model(back), bytes);
    save_model(dir / "m.gfm", m);
    EXPECT_EQ(serialize_model(load_model(dir / "m.gfm")), bytes);
  }
  EXPECT_ANY_THROW(deserialize_model("not a model"));
  std::string cut = serialize_model(build_model(Architecture::ae2d, tiny_config(), 1));
  cut.resize(cut.size() / 2);
  EXPECT_ANY_THROW(deserialize_model(cut));
}

TEST(Forward, OutputsGridInUnitRange) {
  const EnergyImage img = synthetic_image(1);
  const MaskGrid mask = random_day_mask(0.2, 1);
  const Tensor readable = model_input_mask(mask, img.validity);
  for (auto a : {Architecture::ae1d, Architecture::ae2d, Architecture::pconv}) {
    const ModelBundle m = build_model(a, tiny_config(), 2);
    const Tensor y = forward(m, apply_mask(img.matrix, mask), readable);
    ASSERT_EQ(y.shape(), (Shape{kHoursPerWeek, kWeeks}));
    for (double v : y.values()) {
      ASSERT_TRUE(std::isfinite(v));
      ASSERT_GE(v, 0.0);
      ASSERT_LE(v, 1.0);
    }
  }
  EXPECT_THROW(forward(build_model(Architecture::persistence), img.matrix, readable), ValidationError);
}

TEST(Forward, PconvMasksStayFullOnFullInput) {
  const ModelBundle m = build_pconv_unet(tiny_config(), 5);
  const EnergyImage img = synthetic_image(2);
  ForwardTrace trace;
  forward(m, img.matrix, Tensor({kHoursPerWeek, kWeeks}, 1.0), &trace);
  const auto masks = pconv_encoder_masks(trace);
  ASSERT_GE(masks.size(), 2u);
  for (const auto& mk : masks)
    for (double v : mk.values()) ASSERT_EQ(v, 1.0);
}

TEST(Forward, PconvIgnoresHoleValues) {
  const ModelBundle m = build_pconv_unet(tiny_config(), 6);
  const EnergyImage img = synthetic_image(3);
  const MaskGrid mask = continuous_mask(0.3, 3);
  Tensor noisy = img.matrix;
  Rng rng(3);
  for (std::size_t i = 0; i < noisy.size(); ++i)
    if (mask.grid[i] == 0.0) noisy[i] = 100.0 * standard_normal(rng);
  EXPECT_EQ(forward(m, img.matrix, mask.grid), forward(m, noisy, mask.grid));
}

// Backprop through whole networks against central differences on a sample
// of parameter coordinates.
TEST(Backward, MatchesFiniteDifferences) {
  const EnergyImage img = synthetic_image(4);
  const MaskGrid mask = random_day_mask(0.2, 4);
  const Tensor readable = model_input_mask(mask, img.validity);
  const Tensor input = apply_mask(img.matrix, mask);
  Rng rng(44);
  const Tensor g = random_tensor(rng, {kHoursPerWeek, kWeeks});
  for (auto a : {Architecture::ae1d, Architecture::ae2d, Architecture::pconv}) {
    ModelBundle m = build_model(a, tiny_config(), 7);
    // Zero biases put masked windows exactly on the ReLU kink, where central
    // differences are meaningless; nudge them off it.
    for (std::size_t l = 0; l < m.layers.size(); ++l)
      for (auto& b : m.params[2 * l + 1].values()) b = 0.05 * standard_normal(rng);
    ForwardTrace trace;
    forward(m, input, readable, &trace);
    const auto grads = backward(m, trace, g);
    ASSERT_EQ(grads.size(), m.params.size());
    for (std::size_t p = 0; p < m.params.size(); ++p) {
      ASSERT_EQ(grads[p].shape(), m.params[p].shape());
      for (int k = 0; k < 3; ++k) {
        const std::size_t i = uniform_index(rng, m.params[p].size());
        // A small step keeps ReLU and max-pool switches out of the stencil.
        const double orig = m.params[p][i], h = 1e-6;
        m.params[p][i] = orig + h;
        const double up = dot(g, forward(m, input, readable));
        m.params[p][i] = orig - h;
        const double down = dot(g, forward(m, input, readable));
        m.params[p][i] = orig;
        const double numeric = (up - down) / (2 * h);
        const double scale = std::max({std::abs(numeric), std::abs(grads[p][i]), 1e-6});
        EXPECT_LE(std::abs(numeric - grads[p][i]) / scale, 1e-4)
            << to_string(a) << " layer param " << p << " coord " << i;
      }
    }
  }
}

TEST(Persistence, FillExamples) {
  Tensor m({2, 4}, std::vector<double>{1, 2, 3, 4, 5, 6, 7, 8});
  Tensor obs({2, 4}, std::vector<double>{0, 1, 0, 1, 1, 0, 0, 1});
  const Tensor f = persistence_fill(m, obs);
  // Row 0: week 0 has no earlier week, so it takes week 1; week 2 takes week 1.
  EXPECT_EQ(f, Tensor({2, 4}, std::vector<double>{2, 2, 2, 4, 5, 5, 5, 8}));
  EXPECT_THROW(persistence_fill(m, Tensor({2, 4}, std::vector<double>{0, 0, 0, 0, 1, 1, 1, 1})),
               ValidationError);
}

// Persistence against a naive per-hole scan on randomly masked meters.
TEST(Persistence, MatchesBruteForceOnFiftyMeters) {
  Rng rng(55);
  for (std::uint64_t meter = 0; meter < 50; ++meter) {
    const EnergyImage img = image_with_gaps(meter);
    const auto kind = static_cast<MaskKind>(uniform_index(rng, 3));
    const MaskGrid mask = make_mask(kind, uniform(rng, 0.05, 0.5), rng());
    const Imputation imp = persistence_impute(img, mask);
    const Tensor readable = model_input_mask(mask, img.validity);
    const Tensor want = oracle::persistence(img.matrix, readable);
    for (std::size_t i = 0; i < want.size(); ++i) {
      ASSERT_EQ(imp.filled[i], want[i]) << "meter " << meter << " cell " << i;
      ASSERT_EQ(imp.imputed[i], readable[i] == 0.0 ? 1.0 : 0.0);
    }
  }
}

TEST(Impute, ObservedCellsAreCopiedVerbatim) {
  ModelBundle m = build_ae2d(tiny_config(), 8);
  const EnergyImage img = image_with_gaps(9);
  const MaskGrid mask = random_day_mask(0.1, 9);
  EXPECT_THROW(impute(m, img, mask), ValidationError);
  const Imputation imp = impute(m, img, mask, true);
  const Tensor readable = model_input_mask(mask, img.validity);
  for (std::size_t i = 0; i < readable.size(); ++i) {
    if (readable[i] != 0.0) {
      ASSERT_EQ(imp.filled[i], img.matrix[i]);
      ASSERT_EQ(imp.imputed[i], 0.0);
    } else {
      ASSERT_EQ(imp.imputed[i], 1.0);
    }
  }
  // Hole contents never matter.
  EnergyImage noisy = img;
  for (std::size_t i = 0; i < readable.size(); ++i)
    if (readable[i] == 0.0) noisy.matrix[i] = 42.0;
  m.provenance.trained = true;
  EXPECT_EQ(impute(m, noisy, mask).filled, impute(m, img, mask).filled);
}

TEST(Impute, FullMaskLeavesImageUnchanged) {
  EnergyImage img = synthetic_image(10);
  const Imputation imp = persistence_impute(img, MaskGrid{});
  EXPECT_EQ(imp.filled, img.matrix);
  for (double v : imp.imputed.values()) EXPECT_EQ(v, 0.0);
}
