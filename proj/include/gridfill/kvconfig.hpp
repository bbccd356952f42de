#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace gridfill {

/// Flat `key = value` text config; `#` starts a comment. Unknown keys are
/// reported by `unknown_keys` so callers can reject typos.
class KvConfig {
 public:
  KvConfig() = default;
  static KvConfig parse(const std::string& text);
  static KvConfig load(const std::filesystem::path& path);

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  void set(const std::string& key, const std::string& value) { values_[key] = value; }

  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  long get_int(const std::string& key, long fallback) const;

  std::vector<std::string> unknown_keys(const std::vector<std::string>& known) const;
  const std::map<std::string, std::string>& entries() const { return values_; }
  std::string dump() const;

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace gridfill
