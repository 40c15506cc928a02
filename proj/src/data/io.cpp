#include "c4il/data/io.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

namespace c4il {

namespace {

constexpr std::uint32_t kImageMagic = 0x00000803;
constexpr std::uint32_t kLabelMagic = 0x00000801;

std::uint32_t read_be32(std::istream& in, const char* what) {
  std::array<unsigned char, 4> b{};
  if (!in.read(reinterpret_cast<char*>(b.data()), 4)) throw DataError(std::string("idx: truncated ") + what);
  return (std::uint32_t{b[0]} << 24) | (std::uint32_t{b[1]} << 16) | (std::uint32_t{b[2]} << 8) | b[3];
}

std::vector<unsigned char> read_bytes(std::istream& in, std::size_t n, const char* what) {
  std::vector<unsigned char> out(n);
  if (n > 0 && !in.read(reinterpret_cast<char*>(out.data()), static_cast<std::streamsize>(n))) {
    throw DataError(std::string("idx: truncated ") + what);
  }
  return out;
}

std::string format_double(double v) {
  std::array<char, 32> buf{};
  std::snprintf(buf.data(), buf.size(), "%.17g", v);
  return buf.data();
}

}  // namespace

Dataset load_idx(std::istream& images, std::istream& labels) {
  if (read_be32(images, "image header") != kImageMagic) throw DataError("idx: bad image magic");
  if (read_be32(labels, "label header") != kLabelMagic) throw DataError("idx: bad label magic");
  const std::uint32_t n_images = read_be32(images, "image header");
  const std::uint32_t rows = read_be32(images, "image header");
  const std::uint32_t cols = read_be32(images, "image header");
  const std::uint32_t n_labels = read_be32(labels, "label header");
  if (n_images != n_labels) {
    throw DataError("idx: count mismatch, " + std::to_string(n_images) + " images vs " + std::to_string(n_labels) +
                    " labels");
  }
  if (rows == 0 || cols == 0 || rows > 4096 || cols > 4096) throw DataError("idx: implausible image size");
  const std::size_t px = static_cast<std::size_t>(rows) * cols;
  const auto label_bytes = read_bytes(labels, n_labels, "label data");

  Dataset out;
  out.reserve(n_images);
  for (std::uint32_t i = 0; i < n_images; ++i) {
    const auto pixels = read_bytes(images, px, "image data");
    Sample s;
    s.id = i;
    s.label = label_bytes[i];
    s.raster = RasterShape{static_cast<int>(rows), static_cast<int>(cols), 1};
    s.features.resize(static_cast<Eigen::Index>(px));
    for (std::size_t k = 0; k < px; ++k) s.features(static_cast<Eigen::Index>(k)) = pixels[k] / 255.0;
    out.push_back(std::move(s));
  }
  return out;
}

Dataset load_idx(const std::filesystem::path& images, const std::filesystem::path& labels) {
  std::ifstream img(images, std::ios::binary);
  if (!img) throw IoError("idx: cannot open " + images.string());
  std::ifstream lab(labels, std::ios::binary);
  if (!lab) throw IoError("idx: cannot open " + labels.string());
  return load_idx(img, lab);
}

void write_csv(std::ostream& out, const Dataset& data) {
  const Eigen::Index d = data.empty() ? 0 : data.front().features.size();
  out << "sample_id,label";
  for (Eigen::Index k = 0; k < d; ++k) out << ",f" << k;
  out << '\n';
  for (const Sample& s : data) {
    if (s.features.size() != d) throw ShapeError("write_csv: ragged feature widths");
    out << s.id << ',' << s.label;
    for (Eigen::Index k = 0; k < d; ++k) out << ',' << format_double(s.features(k));
    out << '\n';
  }
}

void write_csv(const std::filesystem::path& path, const Dataset& data) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("csv: cannot open " + path.string() + " for writing");
  write_csv(out, data);
  if (!out) throw IoError("csv: write failed for " + path.string());
}

Dataset read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw DataError("csv: missing header");
  if (line.rfind("sample_id,label", 0) != 0) throw DataError("csv: header must start with sample_id,label");
  const std::size_t width = static_cast<std::size_t>(std::count(line.begin(), line.end(), ',')) - 1;
  Dataset out;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != width + 2) throw DataError("csv: line " + std::to_string(line_no) + " has the wrong width");
    Sample s;
    try {
      s.id = std::stoll(cells[0]);
      s.label = std::stoi(cells[1]);
      s.features.resize(static_cast<Eigen::Index>(width));
      for (std::size_t k = 0; k < width; ++k) s.features(static_cast<Eigen::Index>(k)) = std::stod(cells[k + 2]);
    } catch (const std::logic_error&) {
      throw DataError("csv: line " + std::to_string(line_no) + " is not numeric");
    }
    out.push_back(std::move(s));
  }
  return out;
}

Dataset read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("csv: cannot open " + path.string());
  return read_csv(in);
}

}  // namespace c4il
