// Copyright 2026 The Slipway Project Authors. All rights reserved.
// Use of this source code is governed by the Apache License 2.0
// that can be found in the LICENSE file.

#ifndef SLIPWAY_RNG_HPP
#define SLIPWAY_RNG_HPP

#include <cstdint>
#include <random>
#include <string_view>

namespace slipway {

// splitmix64 step, used to derive independent substream seeds from one
// master seed so that every stochastic component of a run is reproducible.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Stable seed for a named substream. The label hash uses FNV-1a so the
// mapping does not depend on library hash implementations.
inline std::uint64_t derive_seed(std::uint64_t master, std::string_view label,
                                 std::uint64_t index = 0) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : label) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return splitmix64(splitmix64(master ^ h) + index);
}

inline std::mt19937_64 make_rng(std::uint64_t master, std::string_view label,
                                std::uint64_t index = 0) {
  return std::mt19937_64(derive_seed(master, label, index));
}

}  // namespace slipway

#endif  // SLIPWAY_RNG_HPP
