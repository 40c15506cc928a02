#pragma once

#include <filesystem>
#include <iosfwd>

#include "c4il/data/sample.hpp"

namespace c4il {

/// Reads an IDX image file (magic 0x00000803, u8 pixels, big-endian
/// n/rows/cols) and its IDX label file (magic 0x00000801). Pixels are scaled
/// to [0, 1] and stored as single-channel rasters; ids count from 0.
/// Throws DataError on bad magic, truncation, or a count mismatch, IoError
/// when a file cannot be opened.
Dataset load_idx(const std::filesystem::path& images, const std::filesystem::path& labels);
Dataset load_idx(std::istream& images, std::istream& labels);

/// CSV with header `sample_id,label,f0,...,f{d-1}`; values printed with
/// round-trip precision.
void write_csv(std::ostream& out, const Dataset& data);
void write_csv(const std::filesystem::path& path, const Dataset& data);
Dataset read_csv(std::istream& in);
Dataset read_csv(const std::filesystem::path& path);

}  // namespace c4il
