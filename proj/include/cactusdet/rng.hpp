// Copyright 2026 The cactusdet authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <utility>
#include <vector>

namespace cactusdet {

/// 64-bit FNV-1a. std::hash is implementation-defined, so anything seeded by
/// an image id goes through this instead.
inline std::uint64_t fnv1a64(std::string_view text) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

/// Seeded draws on top of mt19937_64. The standard distributions and
/// std::shuffle are implementation-defined, so sampling is done by hand here;
/// identical seeds give identical streams on every platform.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : engine_(seed) {}

  /// Stream keyed by several 64-bit values (e.g. a run seed and an id hash).
  static RngStream from_keys(std::initializer_list<std::uint64_t> keys) {
    std::vector<std::uint32_t> words;
    for (std::uint64_t k : keys) {
      words.push_back(static_cast<std::uint32_t>(k));
      words.push_back(static_cast<std::uint32_t>(k >> 32));
    }
    std::seed_seq seq(words.begin(), words.end());
    RngStream s(0);
    s.engine_.seed(seq);
    return s;
  }

  /// Uniform double in [0, 1).
  double uniform_unit() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  /// Uniform double in [lo, hi]; returns lo exactly when lo == hi.
  double uniform(double lo, double hi) {
    return lo + uniform_unit() * (hi - lo);
  }

  /// Uniform integer in [0, n). n must be >= 1. The modulo bias is
  /// negligible for the small n used here; determinism is what matters.
  std::uint64_t uniform_int(std::uint64_t n) { return engine_() % n; }

  /// Fisher-Yates with explicit draws (std::shuffle is not reproducible).
  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(uniform_int(i));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace cactusdet
