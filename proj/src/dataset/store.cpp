#include <cstdio>
#include <fstream>
#include <sstream>

#include "gridfill/dataset.hpp"
#include "gridfill/error.hpp"
#include "gridfill/io.hpp"

namespace gridfill {

namespace {

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string expect_field(std::istream& in, const std::string& key, const std::filesystem::path& path) {
  std::string line;
  if (!std::getline(in, line) || line.rfind(key + " ", 0) != 0) {
    throw Error(path.string() + ": expected '" + key + "' line");
  }
  return line.substr(key.size() + 1);
}

}  // namespace

void write_image(const std::filesystem::path& path, const EnergyImage& image) {
  std::ostringstream out;
  out << "gridfill-image 1\n"
      << "meter_id " << image.meter_id << "\n"
      << "site_id " << image.site_id << "\n"
      << "meter_type " << to_string(image.type) << "\n"
      << "week0_start " << format_timestamp(image.week0_start) << "\n"
      << "x_min " << fmt_double(image.norm.x_min) << "\n"
      << "x_max " << fmt_double(image.norm.x_max) << "\n"
      << "payload matrix validity\n";
  write_tensor(out, image.matrix);
  write_tensor(out, image.validity);
  write_file_atomic(path, out.str());
}

EnergyImage read_image(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open image " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != "gridfill-image 1") {
    throw Error(path.string() + ": not a gridfill image file");
  }
  EnergyImage img;
  img.meter_id = expect_field(in, "meter_id", path);
  img.site_id = expect_field(in, "site_id", path);
  img.type = parse_meter_type(expect_field(in, "meter_type", path));
  img.week0_start = parse_timestamp(expect_field(in, "week0_start", path));
  img.norm.x_min = std::stod(expect_field(in, "x_min", path));
  img.norm.x_max = std::stod(expect_field(in, "x_max", path));
  expect_field(in, "payload", path);
  img.matrix = read_tensor(in);
  img.validity = read_tensor(in);
  const Shape grid{kHoursPerWeek, kWeeks};
  if (img.matrix.shape() != grid || img.validity.shape() != grid) {
    throw Error(path.string() + ": image payload is not (168,52)");
  }
  return img;
}

void write_folds(const std::filesystem::path& path, const FoldAssignment& folds) {
  std::string out = "site_id,fold_index\n";
  for (const auto& [site, fold] : folds.site_fold) out += site + "," + std::to_string(fold) + "\n";
  write_file_atomic(path, out);
}

FoldAssignment read_folds(const std::filesystem::path& path) {
  LineReader reader(path);
  std::string line;
  FoldAssignment folds;
  if (!reader.next(line) || line != "site_id,fold_index") {
    throw ParseError("fold file must start with 'site_id,fold_index'", 1);
  }
  while (reader.next(line)) {
    if (line.empty()) continue;
    const auto comma = line.rfind(',');
    if (comma == std::string::npos) throw ParseError("expected site_id,fold_index", reader.line_number());
    std::size_t fold;
    try {
      fold = std::stoul(line.substr(comma + 1));
    } catch (const std::exception&) {
      throw ParseError("bad fold index", reader.line_number());
    }
    if (fold >= kFoldCount) throw ParseError("fold index out of range", reader.line_number());
    folds.site_fold[line.substr(0, comma)] = fold;
  }
  return folds;
}

ImageStore ImageStore::create(const std::filesystem::path& root, const std::vector<EnergyImage>& images,
                              const FoldAssignment& folds, const std::vector<Exclusion>& excluded) {
  std::filesystem::create_directories(root / "images");
  std::string index = "file,meter_id,site_id,meter_type\n";
  for (std::size_t i = 0; i < images.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "%06zu.img", i);
    write_image(root / "images" / name, images[i]);
    index += std::string(name) + "," + images[i].meter_id + "," + images[i].site_id + "," +
             std::string(to_string(images[i].type)) + "\n";
  }
  write_file_atomic(root / "index.csv", index);
  write_folds(root / "folds.csv", folds);
  std::string log;
  for (const auto& e : excluded) log += "excluded " + e.meter_id + ": " + e.reason + "\n";
  write_file_atomic(root / "exclusions.log", log);
  return ImageStore{root};
}

std::vector<EnergyImage> ImageStore::load_all() const {
  LineReader reader(root / "index.csv");
  std::string line;
  reader.next(line);
  std::vector<EnergyImage> images;
  while (reader.next(line)) {
    if (line.empty()) continue;
    images.push_back(read_image(root / "images" / line.substr(0, line.find(','))));
  }
  return images;
}

FoldAssignment ImageStore::folds() const { return read_folds(root / "folds.csv"); }

}  // namespace gridfill
