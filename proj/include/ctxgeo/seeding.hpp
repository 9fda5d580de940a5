#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <string_view>

namespace ctxgeo {

using Engine = std::mt19937_64;

/// 64-bit FNV-1a. Stable across platforms, unlike std::hash.
constexpr std::uint64_t fnv1a(std::string_view s) noexcept {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

/// Stream tags keep generators for different purposes decorrelated.
enum class Stream : std::uint32_t {
  cosine_baseline = 0xC05,
  mev_baseline = 0x3E7,
  occurrence_cap = 0x0CC,
  word_sample = 0x3D5,
  sentence_sample = 0x5E7,
  kmeans = 0x63A,
  synth = 0x5A7,
};

/// Engine seeded only from (seed, stream, extra...). Never shared.
inline Engine derive_engine(std::uint64_t seed, Stream stream,
                            std::initializer_list<std::uint64_t> extra = {}) {
  std::seed_seq::result_type words[16];
  std::size_t n = 0;
  auto push64 = [&](std::uint64_t v) {
    words[n++] = static_cast<std::seed_seq::result_type>(v & 0xffffffffU);
    words[n++] = static_cast<std::seed_seq::result_type>(v >> 32);
  };
  push64(seed);
  push64(static_cast<std::uint64_t>(stream));
  for (auto v : extra) {
    if (n + 2 > std::size(words)) break;
    push64(v);
  }
  std::seed_seq seq(words, words + n);
  return Engine(seq);
}

}  // namespace ctxgeo
