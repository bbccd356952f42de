#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <unordered_map>

#include "gridfill/dataset.hpp"
#include "gridfill/error.hpp"
#include "gridfill/io.hpp"

namespace gridfill {

std::string_view to_string(MeterType t) {
  switch (t) {
    case MeterType::electricity: return "electricity";
    case MeterType::chilledwater: return "chilledwater";
    case MeterType::steam: return "steam";
    case MeterType::hotwater: return "hotwater";
  }
  return "unknown";
}

MeterType parse_meter_type(std::string_view text) {
  std::string key;
  for (char c : text) {
    if (c == '_' || c == '-' || c == ' ') continue;
    key += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  if (key == "electricity") return MeterType::electricity;
  if (key == "chilledwater") return MeterType::chilledwater;
  if (key == "steam") return MeterType::steam;
  if (key == "hotwater") return MeterType::hotwater;
  throw ValidationError("unknown meter type '" + std::string(text) + "'");
}

bool weather_dependent(MeterType t) { return t != MeterType::electricity; }

std::size_t MeterRecord::invalid_count() const {
  return static_cast<std::size_t>(std::count(valid.begin(), valid.end(), std::uint8_t{0}));
}

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    auto comma = line.find(',', start);
    auto f = line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
    while (!f.empty() && f.front() == ' ') f.remove_prefix(1);
    while (!f.empty() && f.back() == ' ') f.remove_suffix(1);
    if (f.size() >= 2 && f.front() == '"' && f.back() == '"') f = f.substr(1, f.size() - 2);
    out.push_back(f);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

bool parse_reading(std::string_view s, double& v) {
  if (s.empty() || s == "NaN" || s == "nan" || s == "NA" || s == "null") return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) throw std::invalid_argument("reading");
  return std::isfinite(v);
}

struct Pending {
  std::string site_id;
  MeterType type;
  std::vector<std::pair<HourStamp, double>> rows;  // NaN = missing reading
  HourStamp last = std::numeric_limits<HourStamp>::min();
  bool warned = false;
};

}  // namespace

IngestResult ingest_csv(const std::filesystem::path& path, const CsvSchema& schema) {
  LineReader reader(path);
  std::string line;
  if (!reader.next(line)) throw ParseError("empty input, missing header", 1);

  const auto header = split_fields(line);
  auto column = [&](const std::string& name) {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw ParseError("missing column '" + name + "'", 1);
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t c_ts = column(schema.timestamp), c_site = column(schema.site_id),
                    c_meter = column(schema.meter_id), c_type = column(schema.meter_type),
                    c_read = column(schema.reading);
  const std::size_t needed = std::max({c_ts, c_site, c_meter, c_type, c_read}) + 1;

  IngestResult result;
  std::unordered_map<std::string, Pending> pending;
  std::vector<std::string> order;
  while (reader.next(line)) {
    if (line.empty()) continue;
    const auto lineno = reader.line_number();
    const auto f = split_fields(line);
    if (f.size() < needed) throw ParseError("expected at least " + std::to_string(needed) + " fields", lineno);

    HourStamp ts;
    try {
      ts = parse_timestamp(f[c_ts]);
    } catch (const ValidationError& e) {
      throw ParseError(e.what(), lineno);
    }
    double value = std::numeric_limits<double>::quiet_NaN();
    try {
      double v;
      if (parse_reading(f[c_read], v)) value = v;
    } catch (const std::invalid_argument&) {
      throw ParseError("bad reading '" + std::string(f[c_read]) + "'", lineno);
    }
    MeterType type;
    try {
      type = parse_meter_type(f[c_type]);
    } catch (const ValidationError& e) {
      throw ValidationError(std::string(e.what()) + " (line " + std::to_string(lineno) + ")");
    }

    std::string meter(f[c_meter]);
    auto [it, inserted] = pending.try_emplace(meter);
    Pending& p = it->second;
    if (inserted) {
      p.site_id = std::string(f[c_site]);
      p.type = type;
      order.push_back(meter);
    }
    if (ts < p.last && !p.warned) {
      result.warnings.push_back("meter " + meter + ": non-monotone timestamp at line " +
                                std::to_string(lineno));
      p.warned = true;
    }
    p.last = std::max(p.last, ts);
    p.rows.emplace_back(ts, value);
  }

  for (const auto& meter : order) {
    const Pending& p = pending.at(meter);
    HourStamp lo = p.rows.front().first, hi = lo;
    for (const auto& [ts, v] : p.rows) {
      lo = std::min(lo, ts);
      hi = std::max(hi, ts);
    }
    MeterRecord rec;
    rec.meter_id = meter;
    rec.site_id = p.site_id;
    rec.type = p.type;
    rec.start = lo;
    const auto n = static_cast<std::size_t>(hi - lo + 1);
    rec.values.assign(n, 0.0);
    rec.valid.assign(n, 0);
    // Later rows overwrite earlier ones: duplicates keep the last.
    for (const auto& [ts, v] : p.rows) {
      const auto i = static_cast<std::size_t>(ts - lo);
      rec.values[i] = std::isnan(v) ? 0.0 : v;
      rec.valid[i] = std::isnan(v) ? 0 : 1;
    }
    result.records.push_back(std::move(rec));
  }
  return result;
}

void write_csv(std::ostream& out, const std::vector<MeterRecord>& records) {
  out << "timestamp,site_id,meter_id,meter_type,reading\n";
  std::string buf;
  char num[64];
  for (const auto& r : records) {
    const std::string suffix = "," + r.site_id + "," + r.meter_id + "," + std::string(to_string(r.type)) + ",";
    buf.clear();
    for (std::size_t i = 0; i < r.size(); ++i) {
      if (!r.valid[i]) continue;
      buf += format_timestamp(r.start + static_cast<HourStamp>(i));
      buf += suffix;
      std::snprintf(num, sizeof num, "%.10g", r.values[i]);
      buf += num;
      buf += '\n';
    }
    out << buf;
  }
}

}  // namespace gridfill
