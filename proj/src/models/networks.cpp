#include <stdexcept>

#include "gridfill/error.hpp"
#include "gridfill/models.hpp"

namespace gridfill {

namespace {

// ---------------------------------------------------------------------------
// The two autoencoders are straight pipelines, run by a small interpreter
// that records each step's input for the backward sweep.

enum class Op { conv1d, conv2d, dense, relu, sigmoid, pool, up1d, up2d, reshape };

struct Step {
  Op op;
  std::size_t layer = 0;  // for parameterized steps
  Shape shape = {};       // for reshape
};

std::vector<Step> pipeline(const ModelBundle& m) {
  std::vector<Step> steps;
  const bool one_d = m.arch == Architecture::ae1d;
  const auto& enc = one_d ? m.config.ae1d_encoder : m.config.ae2d_encoder;
  const auto& dec = one_d ? m.config.ae1d_decoder : m.config.ae2d_decoder;
  const Op conv = one_d ? Op::conv1d : Op::conv2d;
  std::size_t layer = 0;
  Shape latent;
  if (one_d) {
    std::size_t len = kYearHours;
    for (std::size_t i = 0; i < enc.size(); ++i) {
      steps.push_back({conv, layer++});
      steps.push_back({Op::relu});
      len = conv_out_size(len, m.config.ae1d_kernel, 2, m.config.ae1d_kernel / 2);
    }
    latent = {enc.back(), len};
  } else {
    std::size_t h = kHoursPerWeek, w = kWeeks;
    for (std::size_t i = 0; i < enc.size(); ++i) {
      steps.push_back({conv, layer++});
      steps.push_back({Op::relu});
      steps.push_back({Op::pool});
      h = (h + 1) / 2;
      w = (w + 1) / 2;
    }
    latent = {enc.back(), h, w};
  }
  steps.push_back({Op::reshape, 0, {shape_size(latent)}});
  steps.push_back({Op::dense, layer++});
  steps.push_back({Op::relu});
  steps.push_back({Op::dense, layer++});
  steps.push_back({Op::relu});
  steps.push_back({Op::reshape, 0, latent});
  for (std::size_t i = 0; i < dec.size(); ++i) {
    steps.push_back({one_d ? Op::up1d : Op::up2d});
    steps.push_back({conv, layer++});
    steps.push_back({Op::relu});
  }
  steps.push_back({conv, layer++});
  steps.push_back({Op::sigmoid});
  return steps;
}

Tensor run_step(const ModelBundle& m, const Step& s, const Tensor& x, ForwardTrace* trace) {
  switch (s.op) {
    case Op::conv1d: return conv1d_forward(x, m.kernel(s.layer));
    case Op::conv2d: return conv2d_forward(x, m.kernel(s.layer));
    case Op::dense: return dense_forward(x, m.weights(s.layer), m.bias(s.layer));
    case Op::relu: return relu(x);
    case Op::sigmoid: return sigmoid(x);
    case Op::pool: {
      auto pooled = maxpool2d(x);
      Tensor out = pooled.output;
      if (trace) trace->pools.push_back(std::move(pooled));
      return out;
    }
    case Op::up1d: return nearest_upsample1d(x);
    case Op::up2d: return nearest_upsample2d(x);
    case Op::reshape: return x.reshaped(s.shape);
  }
  throw std::logic_error("unhandled step");
}

Tensor sequential_forward(const ModelBundle& m, const Tensor& input, ForwardTrace* trace) {
  const auto steps = pipeline(m);
  Tensor x = m.arch == Architecture::ae1d ? Tensor({1, kYearHours}, flatten_grid(input))
                                          : input.reshaped({1, kHoursPerWeek, kWeeks});
  for (const auto& s : steps) {
    if (trace) trace->acts.push_back(x);
    x = run_step(m, s, x, trace);
  }
  if (trace) trace->acts.push_back(x);
  return m.arch == Architecture::ae1d ? reshape_to_grid(x.values()) : x.reshaped({kHoursPerWeek, kWeeks});
}

std::vector<Tensor> sequential_backward(const ModelBundle& m, const ForwardTrace& trace,
                                        const Tensor& grad_out) {
  const auto steps = pipeline(m);
  if (trace.acts.size() != steps.size() + 1) throw Error("trace does not match the model");
  std::vector<Tensor> grads;
  for (const auto& p : m.params) grads.emplace_back(p.shape());

  Tensor g = m.arch == Architecture::ae1d ? Tensor({1, kYearHours}, flatten_grid(grad_out))
                                          : grad_out.reshaped({1, kHoursPerWeek, kWeeks});
  std::size_t pool = trace.pools.size();
  for (std::size_t i = steps.size(); i-- > 0;) {
    const auto& s = steps[i];
    const Tensor& x = trace.acts[i];
    switch (s.op) {
      case Op::conv1d:
      case Op::conv2d: {
        auto cg = s.op == Op::conv1d ? conv1d_backward(x, m.kernel(s.layer), g)
                                     : conv2d_backward(x, m.kernel(s.layer), g);
        grads[2 * s.layer] += cg.weights;
        grads[2 * s.layer + 1] += cg.bias;
        g = std::move(cg.input);
        break;
      }
      case Op::dense: {
        auto dg = dense_backward(x, m.weights(s.layer), g);
        grads[2 * s.layer] += dg.weights;
        grads[2 * s.layer + 1] += dg.bias;
        g = std::move(dg.input);
        break;
      }
      case Op::relu: g = relu_backward(x, g); break;
      case Op::sigmoid: g = sigmoid_backward(trace.acts[i + 1], g); break;
      case Op::pool: g = maxpool2d_backward(trace.pools[--pool], g); break;
      case Op::up1d: g = nearest_upsample1d_backward(g); break;
      case Op::up2d: g = nearest_upsample2d_backward(g); break;
      case Op::reshape: g = g.reshaped(x.shape()); break;
    }
  }
  return grads;
}

// ---------------------------------------------------------------------------
// Partial-convolution U-Net. Layers 0-3 are the encoder, 4-7 the decoder,
// 8 the 1x1 head.

constexpr std::size_t kStages = 4;

// One mask plane per channel: `a_channels` copies of `a` then `b_channels`
// copies of `b`.
Tensor stacked_mask(const Tensor& a, std::size_t a_channels, const Tensor& b, std::size_t b_channels) {
  const std::size_t plane = a.size();
  Tensor out({a_channels + b_channels, a.dim(1), a.dim(2)});
  for (std::size_t c = 0; c < a_channels; ++c)
    std::copy(a.raw().begin(), a.raw().end(), out.raw().begin() + static_cast<std::ptrdiff_t>(c * plane));
  for (std::size_t c = 0; c < b_channels; ++c)
    std::copy(b.raw().begin(), b.raw().end(),
              out.raw().begin() + static_cast<std::ptrdiff_t>((a_channels + c) * plane));
  return out;
}

// Trace layout:
//   acts:  [x0, (z_e, h_e) x4, (cat_d, z_d, h_d) x4, z_head, y]
//   masks: [m0, m_e1..m_e4, catmask_d1..catmask_d4]
Tensor pconv_forward(const ModelBundle& m, const Tensor& input, const Tensor& mask, ForwardTrace* trace) {
  const Tensor x0 = resize_bilinear_masked(input, mask).reshaped({1, kResizedSide, kResizedSide});
  const Tensor m0 = resize_nearest(mask).reshaped({1, kResizedSide, kResizedSide});
  if (trace) {
    trace->acts.push_back(x0);
    trace->masks.push_back(m0);
  }

  std::vector<Tensor> feats{x0}, masks{m0};
  for (std::size_t i = 0; i < kStages; ++i) {
    auto r = partial_conv2d_forward(feats.back(), masks.back(), m.kernel(i));
    Tensor h = relu(r.output);
    if (trace) {
      trace->acts.push_back(r.output);
      trace->acts.push_back(h);
      trace->masks.push_back(r.mask);
    }
    feats.push_back(std::move(h));
    masks.push_back(std::move(r.mask));
  }

  Tensor h = feats.back(), hm = masks.back();
  for (std::size_t j = 0; j < kStages; ++j) {
    const std::size_t skip = kStages - 1 - j;  // feats index 3,2,1,0
    Tensor up = nearest_upsample2d(h);
    Tensor up_mask = nearest_upsample2d(hm);
    Tensor cat = concat_channels(up, feats[skip]);
    Tensor cat_mask = stacked_mask(up_mask, up.dim(0), masks[skip], feats[skip].dim(0));
    auto r = partial_conv2d_forward(cat, cat_mask, m.kernel(kStages + j));
    h = leaky_relu(r.output, m.config.pconv_leaky_alpha);
    hm = std::move(r.mask);
    if (trace) {
      trace->acts.push_back(std::move(cat));
      trace->acts.push_back(r.output);
      trace->acts.push_back(h);
      trace->masks.push_back(std::move(cat_mask));
    }
  }
  Tensor z = conv2d_forward(h, m.kernel(2 * kStages));
  Tensor y = sigmoid(z);
  if (trace) {
    trace->acts.push_back(z);
    trace->acts.push_back(y);
  }
  return sample_back(y.reshaped({kResizedSide, kResizedSide}));
}

std::vector<Tensor> pconv_backward(const ModelBundle& m, const ForwardTrace& t, const Tensor& grad_out) {
  if (t.acts.size() != 1 + 2 * kStages + 3 * kStages + 2 || t.masks.size() != 1 + 2 * kStages) {
    throw Error("trace does not match the model");
  }
  std::vector<Tensor> grads;
  for (const auto& p : m.params) grads.emplace_back(p.shape());
  auto add = [&](std::size_t layer, const ConvGrads& cg) {
    grads[2 * layer] += cg.weights;
    grads[2 * layer + 1] += cg.bias;
  };
  auto enc_z = [&](std::size_t i) -> const Tensor& { return t.acts[1 + 2 * i]; };
  auto enc_h = [&](std::size_t i) -> const Tensor& { return t.acts[2 + 2 * i]; };
  auto dec_base = [&](std::size_t j) { return 1 + 2 * kStages + 3 * j; };

  const std::size_t last = t.acts.size() - 1;
  Tensor g = sample_back_adjoint(grad_out).reshaped({1, kResizedSide, kResizedSide});
  g = sigmoid_backward(t.acts[last], g);
  {
    auto cg = conv2d_backward(t.acts[dec_base(kStages - 1) + 2], m.kernel(2 * kStages), g);
    add(2 * kStages, cg);
    g = std::move(cg.input);
  }

  // Gradients flowing into encoder outputs through skips.
  std::vector<Tensor> skip_grad;
  for (std::size_t i = 0; i < kStages; ++i) skip_grad.emplace_back(enc_h(i).shape());

  for (std::size_t j = kStages; j-- > 0;) {
    const std::size_t base = dec_base(j);
    g = leaky_relu_backward(t.acts[base + 1], m.config.pconv_leaky_alpha, g);
    auto cg = partial_conv2d_backward(t.acts[base], t.masks[1 + kStages + j], m.kernel(kStages + j), g);
    add(kStages + j, cg);
    const std::size_t skip = kStages - 1 - j;
    const std::size_t up_channels = t.acts[base].dim(0) - (skip == 0 ? 1 : enc_h(skip - 1).dim(0));
    auto [g_up, g_skip] = split_channels(cg.input, up_channels);
    if (skip > 0) skip_grad[skip - 1] += g_skip;
    g = nearest_upsample2d_backward(g_up);
  }

  // g now holds d/d(h_e4); walk the encoder back, adding skip gradients.
  for (std::size_t i = kStages; i-- > 0;) {
    if (i + 1 < kStages) g += skip_grad[i];
    g = relu_backward(enc_z(i), g);
    const Tensor& in = i == 0 ? t.acts[0] : enc_h(i - 1);
    auto cg = partial_conv2d_backward(in, t.masks[i], m.kernel(i), g);
    add(i, cg);
    g = std::move(cg.input);
  }
  return grads;
}

void check_grid(const Tensor& t, const char* what) {
  if (t.shape() != Shape{kHoursPerWeek, kWeeks}) {
    throw ShapeError(std::string("forward: ") + what + " must be (168,52), got " + shape_str(t.shape()));
  }
}

}  // namespace

Tensor forward(const ModelBundle& model, const Tensor& input, const Tensor& mask, ForwardTrace* trace) {
  check_grid(input, "input");
  check_grid(mask, "mask");
  if (trace) *trace = ForwardTrace{};
  switch (model.arch) {
    case Architecture::persistence:
      throw ValidationError("persistence has no differentiable forward pass");
    case Architecture::ae1d:
    case Architecture::ae2d:
      return sequential_forward(model, input, trace);
    case Architecture::pconv:
      return pconv_forward(model, input, mask, trace);
  }
  throw std::logic_error("unhandled architecture");
}

std::vector<Tensor> backward(const ModelBundle& model, const ForwardTrace& trace, const Tensor& grad_out) {
  check_grid(grad_out, "gradient");
  switch (model.arch) {
    case Architecture::persistence:
      throw ValidationError("persistence has no parameters");
    case Architecture::ae1d:
    case Architecture::ae2d:
      return sequential_backward(model, trace, grad_out);
    case Architecture::pconv:
      return pconv_backward(model, trace, grad_out);
  }
  throw std::logic_error("unhandled architecture");
}

std::vector<Tensor> pconv_encoder_masks(const ForwardTrace& trace) {
  if (trace.masks.size() < 1 + kStages) throw Error("trace holds no pconv encoder masks");
  return {trace.masks.begin(), trace.masks.begin() + 1 + kStages};
}

}  // namespace gridfill
