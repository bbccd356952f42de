#pragma once

#include <filesystem>
#include <functional>
#include <memory>
#include <string>

namespace gridfill {

/// Writes to `path.tmp` then renames over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);
std::string read_file(const std::filesystem::path& path);
/// FNV-1a of the file bytes as 16 hex digits.
std::string file_fingerprint(const std::filesystem::path& path);
std::string hex64(std::uint64_t v);

/// Line reader over plain or gzip-compressed text (zlib reads both).
class LineReader {
 public:
  explicit LineReader(const std::filesystem::path& path);
  ~LineReader();
  LineReader(const LineReader&) = delete;
  LineReader& operator=(const LineReader&) = delete;

  /// False at end of input. Strips the trailing newline and any '\r'.
  bool next(std::string& line);
  std::size_t line_number() const { return line_no_; }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  std::size_t line_no_ = 0;
};

}  // namespace gridfill
