#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace tabinr::rng {

// splitmix64 finalizer; used to mix seed material into stream keys.
inline std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t hash_tag(std::string_view tag) {
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (char c : tag) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Master-seed fan-out: every consumer derives its stream from
// (seed, tag, a, b). Identical keys give identical streams.
inline std::uint64_t derive(std::uint64_t seed, std::string_view tag,
                            std::uint64_t a = 0, std::uint64_t b = 0) {
  std::uint64_t h = mix(seed ^ hash_tag(tag));
  h = mix(h ^ mix(a));
  h = mix(h ^ mix(b));
  return h;
}

inline std::mt19937_64 engine(std::uint64_t seed, std::string_view tag,
                              std::uint64_t a = 0, std::uint64_t b = 0) {
  return std::mt19937_64(derive(seed, tag, a, b));
}

// Keyed uniform in [0,1) without engine state; one value per key.
inline double uniform_at(std::uint64_t seed, std::string_view tag,
                         std::uint64_t a, std::uint64_t b) {
  return static_cast<double>(derive(seed, tag, a, b) >> 11) * 0x1.0p-53;
}

}  // namespace tabinr::rng
