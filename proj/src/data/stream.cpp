#include "c4il/data/stream.hpp"

#include <algorithm>
#include <set>
#include <string>

#include "c4il/numerics/rng.hpp"

namespace c4il {

std::size_t CILStream::phase_of(int class_id) const {
  for (std::size_t t = 0; t < phases.size(); ++t) {
    if (std::binary_search(phases[t].classes.begin(), phases[t].classes.end(), class_id)) return t;
  }
  throw LabelError("stream: class " + std::to_string(class_id) + " belongs to no phase");
}

std::vector<int> CILStream::classes_before(std::size_t upto) const {
  std::vector<int> out;
  for (std::size_t t = 0; t < upto && t < phases.size(); ++t) {
    out.insert(out.end(), phases[t].classes.begin(), phases[t].classes.end());
  }
  return out;
}

namespace {

void check_unique_ids(const Dataset& dataset) {
  std::set<std::int64_t> ids;
  for (const Sample& s : dataset) {
    if (!ids.insert(s.id).second) throw DataError("stream: duplicate sample id " + std::to_string(s.id));
  }
}

CILStream assemble(const Dataset& dataset, std::vector<int> classes, int phases, std::uint64_t seed) {
  const std::size_t per_phase = classes.size() / static_cast<std::size_t>(phases);
  CILStream stream;
  stream.phases.resize(static_cast<std::size_t>(phases));
  std::map<int, std::size_t> owner;
  for (std::size_t i = 0; i < classes.size(); ++i) {
    const std::size_t t = i / per_phase;
    stream.phases[t].classes.push_back(classes[i]);
    owner[classes[i]] = t;
  }
  for (PhaseData& p : stream.phases) std::sort(p.classes.begin(), p.classes.end());
  for (const Sample& s : dataset) stream.phases[owner.at(s.label)].samples.push_back(s);
  for (std::size_t t = 0; t < stream.phases.size(); ++t) {
    Rng rng = make_rng(seed, {0x5354524541ULL, t});
    seeded_shuffle(stream.phases[t].samples, rng);
  }
  return stream;
}

}  // namespace

CILStream split_stream(const Dataset& dataset, int phases, std::uint64_t seed) {
  if (phases < 2) throw DataError("split_stream: class-incremental learning needs at least 2 phases");
  check_unique_ids(dataset);
  std::vector<int> classes = distinct_labels(dataset);
  if (classes.size() < static_cast<std::size_t>(phases)) {
    throw DataError("split_stream: " + std::to_string(classes.size()) + " classes cannot fill " +
                    std::to_string(phases) + " phases");
  }
  if (classes.size() % static_cast<std::size_t>(phases) != 0) {
    throw DataError("split_stream: " + std::to_string(classes.size()) + " classes are not divisible into " +
                    std::to_string(phases) + " phases");
  }
  Rng rng = make_rng(seed, {0x434c415353ULL});
  seeded_shuffle(classes, rng);
  return assemble(dataset, std::move(classes), phases, seed);
}

CILStream joint_stream(const Dataset& dataset, std::uint64_t seed) {
  check_unique_ids(dataset);
  std::vector<int> classes = distinct_labels(dataset);
  if (classes.empty()) throw DataError("joint_stream: empty dataset");
  return assemble(dataset, std::move(classes), 1, seed);
}

std::vector<Dataset> partition_like(const CILStream& stream, const Dataset& samples) {
  std::vector<Dataset> out(stream.phase_count());
  for (const Sample& s : samples) out[stream.phase_of(s.label)].push_back(s);
  return out;
}

}  // namespace c4il
