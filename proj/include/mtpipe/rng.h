//
// Copyright 2026 The mtpipe Authors
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
//

#pragma once

#include <algorithm>
#include <cstdint>
#include <random>
#include <vector>

#include "mtpipe/error.h"

namespace mtpipe {

// Seeded RNG with explicit draw arithmetic. std::mt19937_64 output is pinned
// by the standard, and the draws below avoid the implementation-defined
// std::*_distribution classes, so seeded runs are reproducible byte-for-byte
// across toolchains.
class Rng {
 public:
  explicit Rng(uint64_t seed) : gen_(seed) {}

  uint64_t next_u64() { return gen_(); }

  // Uniform in [0, 1) with 53 bits of precision.
  double next_double() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  // Uniform in [0, n), unbiased via rejection.
  uint64_t next_below(uint64_t n) {
    if (n == 0) throw InputError("next_below: n must be positive");
    uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    uint64_t x;
    do {
      x = gen_();
    } while (x >= limit);
    return x % n;
  }

 private:
  std::mt19937_64 gen_;
};

// Index drawn from normalized weights. Weights must be non-negative with a
// positive sum.
inline size_t weighted_pick(const std::vector<double>& weights, Rng& rng) {
  double total = 0.0;
  for (double w : weights) {
    if (w < 0.0) throw InputError("weighted_pick: negative weight");
    total += w;
  }
  if (total <= 0.0) throw InputError("weighted_pick: weights sum to zero");
  double x = rng.next_double() * total;
  double acc = 0.0;
  for (size_t i = 0; i < weights.size(); ++i) {
    acc += weights[i];
    if (x < acc) return i;
  }
  // x landed on the top edge from rounding; return the last positive weight.
  for (size_t i = weights.size(); i-- > 0;) {
    if (weights[i] > 0.0) return i;
  }
  return weights.size() - 1;
}

// k distinct indices from [0, population), uniform, returned in ascending
// order (partial Fisher-Yates).
inline std::vector<size_t> sample_without_replacement(size_t population,
                                                      size_t k, Rng& rng) {
  if (k > population) {
    throw ConfigError("sample size exceeds population size");
  }
  std::vector<size_t> pool(population);
  for (size_t i = 0; i < population; ++i) pool[i] = i;
  for (size_t i = 0; i < k; ++i) {
    size_t j = i + rng.next_below(population - i);
    std::swap(pool[i], pool[j]);
  }
  pool.resize(k);
  std::sort(pool.begin(), pool.end());
  return pool;
}

}  // namespace mtpipe
