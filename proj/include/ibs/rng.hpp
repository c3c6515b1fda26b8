#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace ibs {

// splitmix64 mixer; the basis for fanning one master seed out into
// decorrelated per-stage streams.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Seed for sub-stream `stream` of `master`. Stages (data, init, shuffle,
// pools, per-search streams) each get their own value so reordering one
// stage never perturbs another.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  return splitmix64(master ^ splitmix64(stream + 0x9e3779b97f4a7c15ULL));
}

// Bounded draw with a fixed arithmetic path. Modulo bias is negligible for
// the pool sizes used here, and unlike distribution objects the result does
// not depend on library internals.
inline std::size_t draw_index(std::mt19937_64& rng, std::size_t n) {
  return static_cast<std::size_t>(rng() % n);
}

}  // namespace ibs
