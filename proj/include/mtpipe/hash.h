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

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>

namespace mtpipe {

// 64-bit FNV-1a.
inline uint64_t fnv1a64(std::string_view data) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// 128-bit FNV-1a digest, used for dedup keys and file/manifest digests.
struct Digest128 {
  uint64_t hi = 0;
  uint64_t lo = 0;

  friend bool operator==(const Digest128& a, const Digest128& b) {
    return a.hi == b.hi && a.lo == b.lo;
  }
  friend bool operator!=(const Digest128& a, const Digest128& b) {
    return !(a == b);
  }
};

struct Digest128Hash {
  size_t operator()(const Digest128& d) const {
    return static_cast<size_t>(d.hi ^ (d.lo * 0x9e3779b97f4a7c15ULL));
  }
};

// Incremental 128-bit FNV-1a (standard offset basis and prime).
class Fnv128 {
 public:
  void update(std::string_view data) {
    for (unsigned char c : data) {
      state_ ^= c;
      state_ *= kPrime;
    }
  }

  Digest128 digest() const {
    return Digest128{static_cast<uint64_t>(state_ >> 64),
                     static_cast<uint64_t>(state_)};
  }

 private:
  static constexpr unsigned __int128 kPrime =
      (static_cast<unsigned __int128>(0x0000000001000000ULL) << 64) |
      0x000000000000013bULL;
  unsigned __int128 state_ =
      (static_cast<unsigned __int128>(0x6c62272e07bb0142ULL) << 64) |
      0x62b821756295c58dULL;
};

inline Digest128 fnv1a128(std::string_view data) {
  Fnv128 h;
  h.update(data);
  return h.digest();
}

inline std::string to_hex(const Digest128& d) {
  static const char* kHex = "0123456789abcdef";
  std::string out(32, '0');
  uint64_t parts[2] = {d.hi, d.lo};
  for (int p = 0; p < 2; ++p) {
    for (int i = 0; i < 16; ++i) {
      out[p * 16 + i] = kHex[(parts[p] >> (60 - 4 * i)) & 0xF];
    }
  }
  return out;
}

inline uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Child seeds are keyed by label so that inserting a pipeline stage does not
// perturb the seeds of its siblings.
inline uint64_t derive_seed(uint64_t root, std::string_view label) {
  return splitmix64(root ^ fnv1a64(label));
}

inline uint64_t derive_seed(uint64_t root, uint64_t index) {
  return splitmix64(root ^ splitmix64(index + 0x51ed270b0a34c7b5ULL));
}

}  // namespace mtpipe
