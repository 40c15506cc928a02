#include "c4il/core/memory.hpp"

#include <algorithm>

#include "c4il/numerics/rng.hpp"

namespace c4il {

MemoryBank::MemoryBank(std::size_t capacity) : capacity_(capacity) {
  if (capacity_ == 0) throw ConfigError("memory bank: capacity must be positive");
}

std::map<int, std::size_t> MemoryBank::quotas(std::size_t capacity, std::span<const int> classes) {
  std::vector<int> sorted(classes.begin(), classes.end());
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  std::map<int, std::size_t> out;
  if (sorted.empty()) return out;
  const std::size_t base = capacity / sorted.size();
  const std::size_t extra = capacity % sorted.size();
  for (std::size_t i = 0; i < sorted.size(); ++i) out[sorted[i]] = base + (i < extra ? 1 : 0);
  return out;
}

void MemoryBank::update(std::span<const Sample> phase_data, std::uint64_t seed) {
  std::map<int, std::vector<Sample>> incoming;
  for (const Sample& s : phase_data) incoming[s.label].push_back(s);

  for (const auto& [c, _] : incoming) seen_.insert(c);
  const std::vector<int> seen(seen_.begin(), seen_.end());
  const auto quota = quotas(capacity_, seen);

  for (auto& [c, kept] : store_) {
    const std::size_t q = quota.at(c);
    if (kept.size() > q) {
      Rng rng = make_rng(seed, {0x4b454550ULL, static_cast<std::uint64_t>(c)});
      seeded_shuffle(kept, rng);
      kept.resize(q);
      std::sort(kept.begin(), kept.end(), [](const Sample& a, const Sample& b) { return a.id < b.id; });
    }
  }
  for (auto& [c, pool] : incoming) {
    if (store_.contains(c)) {
      // A class seen again (not possible in a disjoint stream) only tops up.
      auto& kept = store_[c];
      for (Sample& s : pool) {
        if (kept.size() >= quota.at(c)) break;
        kept.push_back(std::move(s));
      }
      continue;
    }
    Rng rng = make_rng(seed, {0x4e4557ULL, static_cast<std::uint64_t>(c)});
    seeded_shuffle(pool, rng);
    pool.resize(std::min(pool.size(), quota.at(c)));
    std::sort(pool.begin(), pool.end(), [](const Sample& a, const Sample& b) { return a.id < b.id; });
    store_[c] = std::move(pool);
  }
  for (auto it = store_.begin(); it != store_.end();) {
    it = it->second.empty() ? store_.erase(it) : std::next(it);
  }
}

std::size_t MemoryBank::size() const {
  std::size_t n = 0;
  for (const auto& [_, v] : store_) n += v.size();
  return n;
}

std::map<int, std::size_t> MemoryBank::counts() const {
  std::map<int, std::size_t> out;
  for (int c : seen_) out[c] = 0;
  for (const auto& [c, v] : store_) out[c] = v.size();
  return out;
}

Dataset MemoryBank::samples() const {
  Dataset out;
  for (const auto& [_, v] : store_) out.insert(out.end(), v.begin(), v.end());
  return out;
}

std::set<std::int64_t> MemoryBank::ids() const {
  std::set<std::int64_t> out;
  for (const auto& [_, v] : store_) {
    for (const Sample& s : v) out.insert(s.id);
  }
  return out;
}

}  // namespace c4il
