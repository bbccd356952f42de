#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

#include "gridfill/error.hpp"
#include "gridfill/evaluation.hpp"
#include "gridfill/io.hpp"

namespace gridfill {

namespace {

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string rate_text(double rate) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%.2f", rate);
  return buf;
}

std::string key_value(const EvalRow& row, const std::string& key) {
  if (key == "model") return row.model;
  if (key == "meter_id") return row.meter_id;
  if (key == "site_id") return row.site_id;
  if (key == "meter_type") return std::string(to_string(row.meter_type));
  if (key == "mask_kind") return std::string(to_string(row.mask_kind));
  if (key == "rate") return rate_text(row.rate);
  if (key == "fold") return std::to_string(row.fold);
  throw ValidationError("unknown group key: " + key);
}

std::string safe_name(std::string s) {
  for (auto& c : s)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '_') c = '_';
  return s;
}

}  // namespace

const char* EvalReport::csv_header() {
  return "model,meter_id,site_id,meter_type,mask_kind,rate,fold,mse,r2,n_cells";
}

std::string EvalReport::csv() const {
  std::string out = csv_header();
  out += '\n';
  for (const auto& r : rows) {
    out += r.model + ',' + r.meter_id + ',' + r.site_id + ',' + std::string(to_string(r.meter_type)) +
           ',' + std::string(to_string(r.mask_kind)) + ',' + rate_text(r.rate) + ',' +
           std::to_string(r.fold) + ',' + num(r.mse) + ',' + num(r.r2) + ',' +
           std::to_string(r.n_cells) + '\n';
  }
  return out;
}

SummaryTable aggregate(const EvalReport& report, const std::vector<std::string>& keys) {
  if (report.rows.empty()) throw ValidationError("aggregate: empty report");
  for (const auto& k : keys) key_value(report.rows.front(), k);
  std::map<std::vector<std::string>, std::pair<std::vector<double>, std::vector<double>>> groups;
  for (const auto& row : report.rows) {
    std::vector<std::string> key;
    for (const auto& k : keys) key.push_back(key_value(row, k));
    auto& g = groups[key];
    g.first.push_back(row.mse);
    g.second.push_back(row.r2);
  }
  SummaryTable table;
  table.keys = keys;
  for (auto& [key, vals] : groups)
    table.rows.push_back({key, summarize(vals.first), summarize(vals.second)});
  return table;
}

std::string SummaryTable::csv() const {
  std::string out;
  for (const auto& k : keys) out += k + ',';
  out += "count,mse_mean,mse_median,mse_q1,mse_q3,r2_mean,r2_median,r2_q1,r2_q3\n";
  for (const auto& r : rows) {
    for (const auto& v : r.key) out += v + ',';
    out += std::to_string(r.mse.count) + ',' + num(r.mse.mean) + ',' + num(r.mse.median) + ',' +
           num(r.mse.q1) + ',' + num(r.mse.q3) + ',' + num(r.r2.mean) + ',' + num(r.r2.median) +
           ',' + num(r.r2.q1) + ',' + num(r.r2.q3) + '\n';
  }
  return out;
}

std::string matrix_text(const Tensor& grid) {
  if (grid.rank() != 2) throw ShapeError("matrix_text: expected a 2D grid, got " + shape_str(grid.shape()));
  std::string out;
  for (std::size_t i = 0; i < grid.dim(0); ++i) {
    for (std::size_t j = 0; j < grid.dim(1); ++j) {
      if (j) out += ' ';
      out += num(grid.at(i, j));
    }
    out += '\n';
  }
  return out;
}

std::vector<std::filesystem::path> emit_plots(const EvalReport& report,
                                              const std::filesystem::path& dir) {
  if (report.rows.empty()) throw ValidationError("emit_plots: empty report");
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> written;
  auto put = [&](const std::string& name, const std::string& content) {
    write_file_atomic(dir / name, content);
    written.push_back(dir / name);
  };

  std::string by_rate = "model,mask_kind,rate,meter_id,fold,mse,r2\n";
  std::string by_type = "model,meter_type,mask_kind,rate,meter_id,fold,mse,r2\n";
  for (const auto& r : report.rows) {
    const std::string kind(to_string(r.mask_kind));
    by_rate += r.model + ',' + kind + ',' + rate_text(r.rate) + ',' + r.meter_id + ',' +
               std::to_string(r.fold) + ',' + num(r.mse) + ',' + num(r.r2) + '\n';
    by_type += r.model + ',' + std::string(to_string(r.meter_type)) + ',' + kind + ',' +
               rate_text(r.rate) + ',' + r.meter_id + ',' + std::to_string(r.fold) + ',' +
               num(r.mse) + ',' + num(r.r2) + '\n';
  }
  put("by_rate_long.csv", by_rate);
  put("by_meter_type_long.csv", by_type);

  for (const auto& ex : report.examples) {
    const std::string stem = "example_" + safe_name(ex.meter_id) + "_" +
                             std::string(to_string(ex.mask_kind)) + "_" + rate_text(ex.rate);
    std::string overlay = "hour,timestamp,truth,observed";
    for (const auto& [id, grid] : ex.filled) overlay += ',' + id;
    overlay += '\n';
    for (std::size_t t = 0; t < kYearHours; ++t) {
      const std::size_t g = grid_index(t);
      overlay += std::to_string(t) + ',' +
                 format_timestamp(ex.week0_start + static_cast<HourStamp>(t)) + ',' +
                 (ex.validity[g] != 0.0 ? num(ex.truth[g]) : std::string("nan")) + ',' +
                 (ex.mask.grid[g] != 0.0 ? "1" : "0");
      for (const auto& [id, grid] : ex.filled) overlay += ',' + num(grid[g]);
      overlay += '\n';
    }
    put(stem + "_overlay.csv", overlay);

    Tensor input = ex.truth;
    Tensor truth = ex.truth;
    for (std::size_t i = 0; i < input.size(); ++i) {
      if (ex.validity[i] == 0.0) truth[i] = std::nan("");
      if (ex.mask.grid[i] == 0.0 || ex.validity[i] == 0.0) input[i] = std::nan("");
    }
    put(stem + "_input.txt", matrix_text(input));
    put(stem + "_truth.txt", matrix_text(truth));
    for (const auto& [id, grid] : ex.filled) put(stem + "_imputed_" + id + ".txt", matrix_text(grid));
  }
  return written;
}

}  // namespace gridfill
