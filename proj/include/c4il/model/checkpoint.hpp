#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>

#include "c4il/model/encoder.hpp"
#include "c4il/model/heads.hpp"

namespace c4il {

/// Everything needed to resume or re-evaluate a run at a phase boundary.
///
/// On-disk layout (little-endian, version 1):
///   "C4ILCKPT" | u32 version | u64 config_hash | u32 phase_count
///   u32 activation | u32 n_dims | i32 dims[n_dims]
///   u32 n_params | { u64 rows | u64 cols | f64 data[rows*cols] }...
///   u32 n_heads  | { u32 k | i32 class_ids[k] | u64 rows | u64 cols | f64 data }...
///   u64 rng_len  | rng state text (std::mt19937_64 stream form)
/// Doubles are stored as raw IEEE-754 bits, so load(save(x)) == x exactly.
struct Checkpoint {
  EncoderModel encoder;
  ClassifierHeads heads;
  std::uint32_t phase_count = 0;
  std::uint64_t config_hash = 0;
  std::string rng_state;
};

void save_checkpoint(std::ostream& out, const Checkpoint& ckpt);
Checkpoint load_checkpoint(std::istream& in);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

bool operator==(const Checkpoint& a, const Checkpoint& b);

}  // namespace c4il
