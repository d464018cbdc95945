// Copyright 2026 The Groundcap Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef GROUNDCAP_COMMON_RANDOM_H_
#define GROUNDCAP_COMMON_RANDOM_H_

#include <cstdint>
#include <string_view>

namespace groundcap {

// Keyed hashing used to derive independent, order-free seeds from structured
// keys such as (scene seed, sentence index, slot). All randomness in the
// library is either drawn from std::mt19937_64 seeded through these helpers
// or read off them directly, so results depend only on the keys.

constexpr std::uint64_t Mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t HashCombine(std::uint64_t seed, std::uint64_t value) {
  return Mix64(seed ^ Mix64(value));
}

// FNV-1a, then mixed.
constexpr std::uint64_t HashString(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return Mix64(h);
}

template <typename... Ts>
constexpr std::uint64_t SeedFrom(std::uint64_t seed, Ts... values) {
  ((seed = HashCombine(seed, static_cast<std::uint64_t>(values))), ...);
  return seed;
}

// Uniform in [0, 1) with 53 bits of resolution.
constexpr double UnitUniform(std::uint64_t key) {
  return static_cast<double>(Mix64(key) >> 11) * 0x1.0p-53;
}

}  // namespace groundcap

#endif  // GROUNDCAP_COMMON_RANDOM_H_
