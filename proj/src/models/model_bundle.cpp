#include <cmath>
#include <cstdio>
#include <sstream>

#include "gridfill/error.hpp"
#include "gridfill/io.hpp"
#include "gridfill/models.hpp"
#include "gridfill/rng.hpp"

namespace gridfill {

std::string_view to_string(Architecture a) {
  switch (a) {
    case Architecture::persistence: return "persistence";
    case Architecture::ae1d: return "ae1d";
    case Architecture::ae2d: return "ae2d";
    case Architecture::pconv: return "pconv";
  }
  return "unknown";
}

Architecture parse_architecture(std::string_view text) {
  if (text == "persistence") return Architecture::persistence;
  if (text == "ae1d") return Architecture::ae1d;
  if (text == "ae2d") return Architecture::ae2d;
  if (text == "pconv") return Architecture::pconv;
  throw ValidationError("unknown model '" + std::string(text) + "'");
}

namespace {

std::string_view to_string(LayerKind k) {
  switch (k) {
    case LayerKind::conv1d: return "conv1d";
    case LayerKind::conv2d: return "conv2d";
    case LayerKind::pconv2d: return "pconv2d";
    case LayerKind::dense: return "dense";
  }
  return "unknown";
}

LayerKind parse_layer_kind(std::string_view s) {
  if (s == "conv1d") return LayerKind::conv1d;
  if (s == "conv2d") return LayerKind::conv2d;
  if (s == "pconv2d") return LayerKind::pconv2d;
  if (s == "dense") return LayerKind::dense;
  throw Error("unknown layer kind '" + std::string(s) + "'");
}

std::string join(const std::vector<std::size_t>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s;
}

std::vector<std::size_t> parse_list(const std::string& key, const std::string& text) {
  std::vector<std::size_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      const long v = std::stol(item);
      if (v <= 0) throw std::out_of_range(item);
      out.push_back(static_cast<std::size_t>(v));
    } catch (const std::exception&) {
      throw ValidationError("config key '" + key + "' expects positive integers, got '" + text + "'");
    }
  }
  if (out.empty()) throw ValidationError("config key '" + key + "' is empty");
  return out;
}

std::size_t positive(const KvConfig& cfg, const std::string& key, std::size_t fallback) {
  const long v = cfg.get_int(key, static_cast<long>(fallback));
  if (v <= 0) throw ValidationError("config key '" + key + "' must be positive");
  return static_cast<std::size_t>(v);
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

const std::vector<std::string>& model_config_keys() {
  static const std::vector<std::string> keys = {
      "ae1d_encoder", "ae1d_decoder", "ae1d_kernel", "ae1d_bottleneck",   "ae2d_encoder",
      "ae2d_decoder", "ae2d_bottleneck", "pconv_base", "pconv_leaky_alpha"};
  return keys;
}

ModelConfig ModelConfig::from(const KvConfig& cfg) {
  ModelConfig c;
  auto list = [&](const char* key, std::vector<std::size_t>& dst) {
    if (cfg.has(key)) dst = parse_list(key, cfg.get_string(key, ""));
  };
  list("ae1d_encoder", c.ae1d_encoder);
  list("ae1d_decoder", c.ae1d_decoder);
  list("ae2d_encoder", c.ae2d_encoder);
  list("ae2d_decoder", c.ae2d_decoder);
  c.ae1d_kernel = positive(cfg, "ae1d_kernel", c.ae1d_kernel);
  c.ae1d_bottleneck = positive(cfg, "ae1d_bottleneck", c.ae1d_bottleneck);
  c.ae2d_bottleneck = positive(cfg, "ae2d_bottleneck", c.ae2d_bottleneck);
  c.pconv_base = positive(cfg, "pconv_base", c.pconv_base);
  c.pconv_leaky_alpha = cfg.get_double("pconv_leaky_alpha", c.pconv_leaky_alpha);
  if (c.ae1d_encoder.size() != c.ae1d_decoder.size() || c.ae2d_encoder.size() != c.ae2d_decoder.size()) {
    throw ValidationError("autoencoder encoder and decoder need the same depth");
  }
  return c;
}

void ModelConfig::write(KvConfig& cfg) const {
  cfg.set("ae1d_encoder", join(ae1d_encoder));
  cfg.set("ae1d_decoder", join(ae1d_decoder));
  cfg.set("ae1d_kernel", std::to_string(ae1d_kernel));
  cfg.set("ae1d_bottleneck", std::to_string(ae1d_bottleneck));
  cfg.set("ae2d_encoder", join(ae2d_encoder));
  cfg.set("ae2d_decoder", join(ae2d_decoder));
  cfg.set("ae2d_bottleneck", std::to_string(ae2d_bottleneck));
  cfg.set("pconv_base", std::to_string(pconv_base));
  cfg.set("pconv_leaky_alpha", fmt(pconv_leaky_alpha));
}

std::size_t ModelBundle::parameter_count() const {
  std::size_t n = 0;
  for (const auto& p : params) n += p.size();
  return n;
}

ConvKernel ModelBundle::kernel(std::size_t layer) const {
  return ConvKernel{weights(layer), bias(layer), layers[layer].stride, layers[layer].padding};
}

std::vector<LayerDesc> layer_layout(Architecture arch, const ModelConfig& c) {
  std::vector<LayerDesc> layers;
  switch (arch) {
    case Architecture::persistence:
      break;
    case Architecture::ae1d: {
      const std::size_t k = c.ae1d_kernel, pad = k / 2;
      std::size_t in = 1, len = kYearHours;
      for (std::size_t i = 0; i < c.ae1d_encoder.size(); ++i) {
        layers.push_back({"enc" + std::to_string(i + 1), LayerKind::conv1d, {c.ae1d_encoder[i], in, k}, 2, pad});
        in = c.ae1d_encoder[i];
        len = conv_out_size(len, k, 2, pad);
      }
      if (len << c.ae1d_encoder.size() != kYearHours) {
        throw ValidationError("ae1d: encoder length " + std::to_string(len) +
                              " does not upsample back to 8736");
      }
      const std::size_t flat = in * len;
      layers.push_back({"bottleneck", LayerKind::dense, {c.ae1d_bottleneck, flat}, 1, 0});
      layers.push_back({"expand", LayerKind::dense, {flat, c.ae1d_bottleneck}, 1, 0});
      for (std::size_t i = 0; i < c.ae1d_decoder.size(); ++i) {
        layers.push_back({"dec" + std::to_string(i + 1), LayerKind::conv1d, {c.ae1d_decoder[i], in, k}, 1, pad});
        in = c.ae1d_decoder[i];
      }
      layers.push_back({"head", LayerKind::conv1d, {1, in, k}, 1, pad});
      break;
    }
    case Architecture::ae2d: {
      std::size_t in = 1, h = kHoursPerWeek, w = kWeeks;
      for (std::size_t i = 0; i < c.ae2d_encoder.size(); ++i) {
        layers.push_back({"enc" + std::to_string(i + 1), LayerKind::conv2d, {c.ae2d_encoder[i], in, 3, 3}, 1, 1});
        in = c.ae2d_encoder[i];
        h = (h + 1) / 2;
        w = (w + 1) / 2;
      }
      if (h << c.ae2d_encoder.size() != kHoursPerWeek || w << c.ae2d_encoder.size() != kWeeks) {
        throw ValidationError("ae2d: encoder depth does not pool the 168x52 grid evenly");
      }
      const std::size_t flat = in * h * w;
      layers.push_back({"bottleneck", LayerKind::dense, {c.ae2d_bottleneck, flat}, 1, 0});
      layers.push_back({"expand", LayerKind::dense, {flat, c.ae2d_bottleneck}, 1, 0});
      for (std::size_t i = 0; i < c.ae2d_decoder.size(); ++i) {
        layers.push_back({"dec" + std::to_string(i + 1), LayerKind::conv2d, {c.ae2d_decoder[i], in, 3, 3}, 1, 1});
        in = c.ae2d_decoder[i];
      }
      layers.push_back({"head", LayerKind::conv2d, {1, in, 3, 3}, 1, 1});
      break;
    }
    case Architecture::pconv: {
      const std::size_t b = c.pconv_base;
      const std::size_t widths[4] = {b, 2 * b, 4 * b, 8 * b};
      const std::size_t kernels[4] = {7, 5, 5, 3};
      std::size_t in = 1;
      for (std::size_t i = 0; i < 4; ++i) {
        layers.push_back({"enc" + std::to_string(i + 1), LayerKind::pconv2d,
                          {widths[i], in, kernels[i], kernels[i]}, 2, kernels[i] / 2});
        in = widths[i];
      }
      // Decoder stage i joins the upsampled features with encoder skip 3-i
      // (the last stage joins the 1-channel input).
      for (std::size_t i = 0; i < 4; ++i) {
        const std::size_t skip = i < 3 ? widths[2 - i] : 1;
        const std::size_t out = i < 3 ? widths[2 - i] : b;
        layers.push_back({"dec" + std::to_string(i + 1), LayerKind::pconv2d, {out, in + skip, 3, 3}, 1, 1});
        in = out;
      }
      layers.push_back({"head", LayerKind::conv2d, {1, in, 1, 1}, 1, 0});
      break;
    }
  }
  return layers;
}

ModelBundle build_model(Architecture arch, const ModelConfig& config, std::uint64_t seed) {
  ModelBundle m;
  m.arch = arch;
  m.config = config;
  m.layers = layer_layout(arch, config);
  m.provenance.seed = seed;
  m.provenance.trained = arch == Architecture::persistence;
  Rng rng(derive_seed(seed, "model.init", {static_cast<std::uint64_t>(arch)}));
  for (std::size_t i = 0; i < m.layers.size(); ++i) {
    const auto& l = m.layers[i];
    const std::size_t fan_out = l.weight_shape[0];
    const std::size_t fan_in = shape_size(l.weight_shape) / fan_out;
    const bool head = i + 1 == m.layers.size();
    const double bound = head ? std::sqrt(6.0 / static_cast<double>(fan_in + fan_out))
                              : std::sqrt(6.0 / static_cast<double>(fan_in));
    Tensor w(l.weight_shape);
    for (auto& v : w.raw()) v = uniform(rng, -bound, bound);
    m.params.push_back(std::move(w));
    m.params.emplace_back(Shape{fan_out}, 0.0);
  }
  return m;
}

ModelBundle build_ae1d(const ModelConfig& config, std::uint64_t seed) {
  return build_model(Architecture::ae1d, config, seed);
}
ModelBundle build_ae2d(const ModelConfig& config, std::uint64_t seed) {
  return build_model(Architecture::ae2d, config, seed);
}
ModelBundle build_pconv_unet(const ModelConfig& config, std::uint64_t seed) {
  return build_model(Architecture::pconv, config, seed);
}

// ---------------------------------------------------------------------------
// Checkpoint format

std::string serialize_model(const ModelBundle& m) {
  std::ostringstream out;
  out << "gridfill-model 1\n";
  out << "architecture " << to_string(m.arch) << "\n";
  KvConfig cfg;
  m.config.write(cfg);
  for (const auto& [k, v] : cfg.entries()) out << "config " << k << " " << v << "\n";
  for (const auto& l : m.layers) {
    out << "layer " << l.name << " " << to_string(l.kind) << " stride " << l.stride << " padding "
        << l.padding << " weights " << join(l.weight_shape) << "\n";
  }
  const auto& p = m.provenance;
  out << "provenance seed " << p.seed << "\n"
      << "provenance epochs_run " << p.epochs_run << "\n"
      << "provenance best_val_loss " << fmt(p.best_val_loss) << "\n"
      << "provenance data_fingerprint " << p.data_fingerprint << "\n"
      << "provenance trained " << (p.trained ? 1 : 0) << "\n"
      << "params " << m.params.size() << "\n";
  for (const auto& t : m.params) write_tensor(out, t);
  return out.str();
}

namespace {

std::vector<std::string> words(const std::string& line) {
  std::istringstream ss(line);
  std::vector<std::string> w;
  std::string s;
  while (ss >> s) w.push_back(s);
  return w;
}

}  // namespace

ModelBundle deserialize_model(const std::string& bytes) {
  std::istringstream in(bytes);
  std::string line;
  if (!std::getline(in, line) || line != "gridfill-model 1") throw Error("not a gridfill model checkpoint");
  ModelBundle m;
  KvConfig cfg;
  std::vector<LayerDesc> layers;
  std::size_t nparams = 0;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    const auto w = words(line);
    if (w.empty()) continue;
    if (w[0] == "architecture" && w.size() == 2) {
      m.arch = parse_architecture(w[1]);
    } else if (w[0] == "config" && w.size() == 3) {
      cfg.set(w[1], w[2]);
    } else if (w[0] == "layer" && w.size() == 9) {
      LayerDesc l{w[1], parse_layer_kind(w[2]), parse_list("weights", w[8]), std::stoul(w[4]), std::stoul(w[6])};
      layers.push_back(std::move(l));
    } else if (w[0] == "provenance" && w.size() == 3) {
      auto& p = m.provenance;
      if (w[1] == "seed") p.seed = std::stoull(w[2]);
      else if (w[1] == "epochs_run") p.epochs_run = std::stoul(w[2]);
      else if (w[1] == "best_val_loss") p.best_val_loss = std::stod(w[2]);
      else if (w[1] == "data_fingerprint") p.data_fingerprint = w[2];
      else if (w[1] == "trained") p.trained = w[2] == "1";
      else throw ParseError("unknown provenance field " + w[1], lineno);
    } else if (w[0] == "params" && w.size() == 2) {
      nparams = std::stoul(w[1]);
      break;
    } else {
      throw ParseError("unexpected checkpoint line '" + line + "'", lineno);
    }
  }
  m.config = ModelConfig::from(cfg);
  m.layers = layer_layout(m.arch, m.config);
  if (layers.size() != m.layers.size()) throw Error("checkpoint layer list does not match its architecture");
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const auto& a = layers[i];
    const auto& b = m.layers[i];
    if (a.name != b.name || a.kind != b.kind || a.weight_shape != b.weight_shape || a.stride != b.stride ||
        a.padding != b.padding) {
      throw Error("checkpoint layer " + a.name + " does not match its architecture");
    }
  }
  if (nparams != 2 * m.layers.size()) throw Error("checkpoint parameter count mismatch");
  for (std::size_t i = 0; i < nparams; ++i) {
    m.params.push_back(read_tensor(in));
    const Shape expected = i % 2 == 0 ? m.layers[i / 2].weight_shape : Shape{m.layers[i / 2].weight_shape[0]};
    if (m.params.back().shape() != expected) {
      throw Error("checkpoint tensor " + std::to_string(i) + " has shape " +
                  shape_str(m.params.back().shape()) + ", expected " + shape_str(expected));
    }
  }
  return m;
}

void save_model(const std::filesystem::path& path, const ModelBundle& model) {
  write_file_atomic(path, serialize_model(model));
}

ModelBundle load_model(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw ValidationError("checkpoint not found: " + path.string());
  return deserialize_model(read_file(path));
}

}  // namespace gridfill
