#include "gridfill/io.hpp"

#include <zlib.h>

#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

#include "gridfill/error.hpp"
#include "gridfill/rng.hpp"

namespace gridfill {

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw Error("failed writing " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string file_fingerprint(const std::filesystem::path& path) {
  return hex64(hash_string(read_file(path)));
}

struct LineReader::Impl {
  gzFile file = nullptr;
  std::vector<char> buf = std::vector<char>(1 << 16);
};

LineReader::LineReader(const std::filesystem::path& path) : impl_(std::make_unique<Impl>()) {
  impl_->file = gzopen(path.string().c_str(), "rb");
  if (!impl_->file) throw ValidationError("cannot open " + path.string());
  gzbuffer(impl_->file, 1 << 17);
}

LineReader::~LineReader() {
  if (impl_ && impl_->file) gzclose(impl_->file);
}

bool LineReader::next(std::string& line) {
  line.clear();
  bool got = false;
  while (gzgets(impl_->file, impl_->buf.data(), static_cast<int>(impl_->buf.size()))) {
    got = true;
    line += impl_->buf.data();
    if (!line.empty() && line.back() == '\n') break;
  }
  if (!got) return false;
  while (!line.empty() && (line.back() == '\n' || line.back() == '\r')) line.pop_back();
  ++line_no_;
  return true;
}

}  // namespace gridfill
