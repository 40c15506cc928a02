#include "c4il/model/checkpoint.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

namespace c4il {

namespace {

constexpr std::array<char, 8> kMagic = {'C', '4', 'I', 'L', 'C', 'K', 'P', 'T'};
constexpr std::uint32_t kVersion = 1;
// Guards against allocating absurd sizes from a corrupt header.
constexpr std::uint64_t kMaxElements = std::uint64_t{1} << 32;

template <typename T>
void put(std::ostream& out, T v) {
  std::array<char, sizeof(T)> bytes;
  std::memcpy(bytes.data(), &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  out.write(bytes.data(), bytes.size());
}

template <typename T>
T get(std::istream& in) {
  std::array<char, sizeof(T)> bytes;
  if (!in.read(bytes.data(), bytes.size())) throw IoError("checkpoint: truncated file");
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  T v;
  std::memcpy(&v, bytes.data(), sizeof(T));
  return v;
}

void put_matrix(std::ostream& out, const Matrix& m) {
  put<std::uint64_t>(out, static_cast<std::uint64_t>(m.rows()));
  put<std::uint64_t>(out, static_cast<std::uint64_t>(m.cols()));
  for (Eigen::Index i = 0; i < m.size(); ++i) put<double>(out, m.data()[i]);
}

Matrix get_matrix(std::istream& in) {
  const auto rows = get<std::uint64_t>(in);
  const auto cols = get<std::uint64_t>(in);
  if (rows * cols > kMaxElements) throw IoError("checkpoint: implausible matrix size");
  Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = get<double>(in);
  return m;
}

}  // namespace

void save_checkpoint(std::ostream& out, const Checkpoint& ckpt) {
  out.write(kMagic.data(), kMagic.size());
  put<std::uint32_t>(out, kVersion);
  put<std::uint64_t>(out, ckpt.config_hash);
  put<std::uint32_t>(out, ckpt.phase_count);
  put<std::uint32_t>(out, ckpt.encoder.activation() == Activation::relu ? 0U : 1U);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(ckpt.encoder.dims().size()));
  for (int d : ckpt.encoder.dims()) put<std::int32_t>(out, d);
  const auto params = ckpt.encoder.parameters();
  put<std::uint32_t>(out, static_cast<std::uint32_t>(params.size()));
  for (const Matrix& p : params) put_matrix(out, p);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(ckpt.heads.head_count()));
  for (std::size_t t = 0; t < ckpt.heads.head_count(); ++t) {
    const auto classes = ckpt.heads.head_classes(t);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(classes.size()));
    for (int c : classes) put<std::int32_t>(out, c);
    put_matrix(out, ckpt.heads.head(t));
  }
  put<std::uint64_t>(out, ckpt.rng_state.size());
  out.write(ckpt.rng_state.data(), static_cast<std::streamsize>(ckpt.rng_state.size()));
  if (!out) throw IoError("checkpoint: write failed");
}

Checkpoint load_checkpoint(std::istream& in) {
  std::array<char, 8> magic{};
  if (!in.read(magic.data(), magic.size())) throw IoError("checkpoint: truncated file");
  if (magic != kMagic) throw IoError("checkpoint: bad magic");
  const auto version = get<std::uint32_t>(in);
  if (version != kVersion) throw IoError("checkpoint: unsupported version " + std::to_string(version));
  const auto config_hash = get<std::uint64_t>(in);
  const auto phase_count = get<std::uint32_t>(in);
  const auto act = get<std::uint32_t>(in);
  if (act > 1) throw IoError("checkpoint: unknown activation tag");
  const auto n_dims = get<std::uint32_t>(in);
  if (n_dims > 1024) throw IoError("checkpoint: implausible layer count");
  std::vector<int> dims;
  for (std::uint32_t i = 0; i < n_dims; ++i) dims.push_back(get<std::int32_t>(in));
  const auto n_params = get<std::uint32_t>(in);
  if (n_params > 2048) throw IoError("checkpoint: implausible parameter count");
  std::vector<Matrix> params;
  for (std::uint32_t i = 0; i < n_params; ++i) params.push_back(get_matrix(in));

  EncoderModel encoder(std::move(dims), std::move(params), act == 0 ? Activation::relu : Activation::identity);
  ClassifierHeads heads(encoder.output_dim());
  const auto n_heads = get<std::uint32_t>(in);
  for (std::uint32_t t = 0; t < n_heads; ++t) {
    const auto k = get<std::uint32_t>(in);
    if (k > kMaxElements) throw IoError("checkpoint: implausible head size");
    std::vector<int> classes;
    for (std::uint32_t j = 0; j < k; ++j) classes.push_back(get<std::int32_t>(in));
    heads.extend(classes, get_matrix(in));
  }
  const auto rng_len = get<std::uint64_t>(in);
  if (rng_len > (1U << 20)) throw IoError("checkpoint: implausible rng state length");
  std::string rng_state(rng_len, '\0');
  if (rng_len > 0 && !in.read(rng_state.data(), static_cast<std::streamsize>(rng_len))) {
    throw IoError("checkpoint: truncated file");
  }
  return Checkpoint{std::move(encoder), std::move(heads), phase_count, config_hash, std::move(rng_state)};
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("checkpoint: cannot open " + path.string() + " for writing");
  save_checkpoint(out, ckpt);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("checkpoint: cannot open " + path.string());
  return load_checkpoint(in);
}

bool operator==(const Checkpoint& a, const Checkpoint& b) {
  return a.encoder == b.encoder && a.heads == b.heads && a.phase_count == b.phase_count &&
         a.config_hash == b.config_hash && a.rng_state == b.rng_state;
}

}  // namespace c4il
