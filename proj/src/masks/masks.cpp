#include "gridfill/masks.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

#include "gridfill/error.hpp"
#include "gridfill/io.hpp"
#include "gridfill/rng.hpp"

namespace gridfill {

std::string_view to_string(MaskKind k) {
  switch (k) {
    case MaskKind::random_days: return "random_days";
    case MaskKind::continuous: return "continuous";
    case MaskKind::irregular: return "irregular";
  }
  return "unknown";
}

MaskKind parse_mask_kind(std::string_view text) {
  if (text == "random_days" || text == "random") return MaskKind::random_days;
  if (text == "continuous") return MaskKind::continuous;
  if (text == "irregular") return MaskKind::irregular;
  throw ValidationError("unknown mask kind '" + std::string(text) + "'");
}

std::size_t MaskGrid::hole_count() const {
  return static_cast<std::size_t>(std::count(grid.raw().begin(), grid.raw().end(), 0.0));
}

double MaskGrid::hole_fraction() const {
  return static_cast<double>(hole_count()) / static_cast<double>(grid.size());
}

std::size_t masked_day_count(double rate) {
  // nearbyint uses the current rounding mode, which defaults to half-even.
  return static_cast<std::size_t>(std::nearbyint(rate * static_cast<double>(kDays)));
}

void mask_day(Tensor& grid, std::size_t day) {
  if (day >= kDays) throw ValidationError("mask_day: day " + std::to_string(day) + " outside the year");
  if (grid.shape() != Shape{kHoursPerWeek, kWeeks}) throw ShapeError("mask_day: expected a (168,52) grid");
  for (std::size_t h = 0; h < kHoursPerDay; ++h) grid[grid_index(day * kHoursPerDay + h)] = 0.0;
}

namespace {

void check_rate(double rate) {
  if (!(rate >= 0.0 && rate <= 0.5)) {
    throw ValidationError("mask rate must lie in [0, 0.5], got " + std::to_string(rate));
  }
}

}  // namespace

MaskGrid random_day_mask(double rate, std::uint64_t seed) {
  check_rate(rate);
  MaskGrid m;
  m.kind = MaskKind::random_days;
  m.target_rate = rate;
  m.seed = seed;
  const std::size_t n = masked_day_count(rate);
  std::vector<std::size_t> days(kDays);
  for (std::size_t d = 0; d < kDays; ++d) days[d] = d;
  Rng rng(seed);
  // Partial Fisher-Yates: the first n entries are a uniform sample.
  for (std::size_t i = 0; i < n; ++i) {
    const auto j = i + uniform_index(rng, kDays - i);
    std::swap(days[i], days[j]);
    mask_day(m.grid, days[i]);
  }
  return m;
}

MaskGrid continuous_mask(double rate, std::uint64_t seed) {
  check_rate(rate);
  MaskGrid m;
  m.kind = MaskKind::continuous;
  m.target_rate = rate;
  m.seed = seed;
  const std::size_t n = masked_day_count(rate);
  if (n == 0) return m;
  Rng rng(seed);
  const auto start = uniform_index(rng, kDays - n + 1);
  for (std::size_t d = start; d < start + n; ++d) mask_day(m.grid, d);
  return m;
}

namespace {

void stamp(Tensor& grid, double y, double x, std::size_t thickness) {
  const long h = static_cast<long>(grid.dim(0)), w = static_cast<long>(grid.dim(1));
  const long cy = std::lround(y), cx = std::lround(x);
  const long lo = -static_cast<long>(thickness - 1) / 2;
  const long hi = lo + static_cast<long>(thickness) - 1;
  for (long dy = lo; dy <= hi; ++dy) {
    for (long dx = lo; dx <= hi; ++dx) {
      const long yy = cy + dy, xx = cx + dx;
      if (yy >= 0 && yy < h && xx >= 0 && xx < w) grid.at(static_cast<std::size_t>(yy), static_cast<std::size_t>(xx)) = 0.0;
    }
  }
}

void draw_stroke(Tensor& grid, Rng& rng, const IrregularConfig& c) {
  const double h = static_cast<double>(grid.dim(0)), w = static_cast<double>(grid.dim(1));
  double y = uniform(rng, 0.0, h - 1.0), x = uniform(rng, 0.0, w - 1.0);
  const auto thickness = static_cast<std::size_t>(
      uniform_int(rng, static_cast<long>(c.min_thickness), static_cast<long>(c.max_thickness)));
  const auto vertices = uniform_int(rng, static_cast<long>(c.min_vertices), static_cast<long>(c.max_vertices));
  double angle = uniform(rng, 0.0, 2.0 * std::numbers::pi);
  for (long v = 0; v < vertices; ++v) {
    angle += uniform(rng, -std::numbers::pi / 2.0, std::numbers::pi / 2.0);
    const double len = uniform(rng, 2.0, c.max_segment);
    const double ny = std::clamp(y + len * std::sin(angle), 0.0, h - 1.0);
    const double nx = std::clamp(x + len * std::cos(angle), 0.0, w - 1.0);
    const int steps = static_cast<int>(std::ceil(std::max(std::abs(ny - y), std::abs(nx - x)))) + 1;
    for (int s = 0; s <= steps; ++s) {
      const double f = static_cast<double>(s) / steps;
      stamp(grid, y + f * (ny - y), x + f * (nx - x), thickness);
    }
    y = ny;
    x = nx;
  }
}

double coverage(const Tensor& grid) {
  return static_cast<double>(std::count(grid.raw().begin(), grid.raw().end(), 0.0)) /
         static_cast<double>(grid.size());
}

}  // namespace

MaskGrid irregular_mask(std::uint64_t seed, const IrregularConfig& config) {
  MaskGrid m;
  m.kind = MaskKind::irregular;
  m.seed = seed;
  if (config.max_strokes == 0) return m;
  Rng rng(seed);
  constexpr int kAttempts = 16;
  for (int attempt = 0; attempt < kAttempts; ++attempt) {
    m.grid.fill(1.0);
    const auto strokes = uniform_int(rng, static_cast<long>(config.min_strokes),
                                     static_cast<long>(config.max_strokes));
    for (long s = 0; s < strokes; ++s) draw_stroke(m.grid, rng, config);
    // Top up thin draws; bounded so a tiny config cannot loop forever.
    for (int extra = 0; extra < 64 && coverage(m.grid) < config.min_coverage; ++extra) {
      draw_stroke(m.grid, rng, config);
    }
    if (coverage(m.grid) <= config.max_coverage) break;
  }
  m.target_rate = coverage(m.grid);
  return m;
}

MaskGrid make_mask(MaskKind kind, double rate, std::uint64_t seed) {
  switch (kind) {
    case MaskKind::random_days: return random_day_mask(rate, seed);
    case MaskKind::continuous: return continuous_mask(rate, seed);
    case MaskKind::irregular: return irregular_mask(seed);
  }
  throw ValidationError("unknown mask kind");
}

Tensor apply_mask(const Tensor& matrix, const MaskGrid& mask) {
  require_same_shape(matrix, mask.grid, "apply_mask");
  Tensor out = matrix;
  for (std::size_t i = 0; i < out.size(); ++i)
    if (mask.grid[i] == 0.0) out[i] = 0.0;
  return out;
}

Tensor effective_mask(const MaskGrid& mask, const Tensor& validity) {
  require_same_shape(mask.grid, validity, "effective_mask");
  Tensor out(validity.shape());
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = (mask.grid[i] == 0.0 && validity[i] != 0.0) ? 1.0 : 0.0;
  return out;
}

std::string mask_to_text(const MaskGrid& mask) {
  char head[96];
  std::snprintf(head, sizeof head, "%s %.17g %llu\n", std::string(to_string(mask.kind)).c_str(),
                mask.target_rate, static_cast<unsigned long long>(mask.seed));
  std::string out = head;
  for (std::size_t r = 0; r < mask.grid.dim(0); ++r) {
    for (std::size_t c = 0; c < mask.grid.dim(1); ++c) out += mask.grid.at(r, c) != 0.0 ? '1' : '0';
    out += '\n';
  }
  return out;
}

void write_mask(const std::filesystem::path& path, const MaskGrid& mask) {
  write_file_atomic(path, mask_to_text(mask));
}

MaskGrid read_mask(const std::filesystem::path& path) {
  std::istringstream in(read_file(path));
  MaskGrid m;
  std::string kind;
  unsigned long long seed = 0;
  if (!(in >> kind >> m.target_rate >> seed)) throw ParseError("bad mask header", 1);
  m.kind = parse_mask_kind(kind);
  m.seed = seed;
  std::string line;
  std::getline(in, line);
  for (std::size_t r = 0; r < kHoursPerWeek; ++r) {
    if (!std::getline(in, line) || line.size() != kWeeks) {
      throw ParseError("mask rows must have 52 characters", r + 2);
    }
    for (std::size_t c = 0; c < kWeeks; ++c) {
      if (line[c] != '0' && line[c] != '1') throw ParseError("mask cells must be 0 or 1", r + 2);
      m.grid.at(r, c) = line[c] == '1' ? 1.0 : 0.0;
    }
  }
  return m;
}

}  // namespace gridfill
