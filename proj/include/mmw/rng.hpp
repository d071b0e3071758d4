// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string_view>

namespace mmw {

// mt19937_64 output is pinned by the standard; the distributions below are
// hand-rolled because the std:: ones are implementation-defined and would
// break bitwise reproducibility across toolchains.

inline double uniform01(std::mt19937_64& g) {
  return static_cast<double>(g() >> 11) * 0x1.0p-53;  // [0, 1)
}

inline double uniform(std::mt19937_64& g, double lo, double hi) {
  return lo + (hi - lo) * uniform01(g);
}

// Box-Muller, cosine branch only. One value per two draws keeps the stream
// position independent of consumer parity.
inline double gaussian(std::mt19937_64& g) {
  double u1 = 1.0 - uniform01(g);  // (0, 1]
  double u2 = uniform01(g);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

inline uint64_t uniform_index(std::mt19937_64& g, uint64_t n) {
  auto i = static_cast<uint64_t>(uniform01(g) * static_cast<double>(n));
  return i < n ? i : n - 1;
}

inline uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

// Stable stream derivation: master seed + role tag + index. Separate streams
// keep optional loss terms and axes from perturbing each other's draws.
inline uint64_t derive_seed(uint64_t master, std::string_view tag, uint64_t index = 0) {
  uint64_t h = 0xcbf29ce484222325ull;
  for (char c : tag) h = (h ^ static_cast<unsigned char>(c)) * 0x100000001b3ull;
  return splitmix64(splitmix64(master ^ h) + index);
}

inline std::mt19937_64 make_rng(uint64_t master, std::string_view tag, uint64_t index = 0) {
  return std::mt19937_64(derive_seed(master, tag, index));
}

}  // namespace mmw
