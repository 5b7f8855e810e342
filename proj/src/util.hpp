#pragma once

#include <cstdint>
#include <cstring>
#include <functional>
#include <string>
#include <string_view>

namespace lglmf {

inline constexpr std::uint64_t kFnvOffset = 1469598103934665603ull;
inline constexpr std::uint64_t kFnvPrime = 1099511628211ull;

inline std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t h = kFnvOffset) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= kFnvPrime;
  }
  return h;
}

inline std::uint64_t fnv1a64_u64(std::uint64_t value, std::uint64_t h) {
  for (int i = 0; i < 8; ++i) {
    h ^= (value >> (8 * i)) & 0xffu;
    h *= kFnvPrime;
  }
  return h;
}

inline std::uint64_t fnv1a64_double(double value, std::uint64_t h) {
  std::uint64_t bits;
  std::memcpy(&bits, &value, sizeof bits);
  return fnv1a64_u64(bits, h);
}

// Per-stage seed streams derived from the single run seed. The splitmix-style
// finalizer keeps streams apart even for adjacent root seeds.
inline std::uint64_t derive_seed(std::uint64_t root, std::string_view stage) {
  std::uint64_t z = root + 0x9e3779b97f4a7c15ull + fnv1a64(stage);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

std::string hex64(std::uint64_t value);

// Content hash of a file, for manifests. Throws ErrorCode::io when unreadable.
std::uint64_t fnv1a64_file(const std::string& path);

// Runs fn(begin, end) over [0, count) split into contiguous chunks. Callers
// must write results into disjoint per-index slots so the outcome does not
// depend on the thread count. threads == 0 picks the hardware concurrency.
void parallel_for(std::size_t count, unsigned threads,
                  const std::function<void(std::size_t, std::size_t)>& fn);

unsigned resolve_threads(unsigned requested);

}  // namespace lglmf
