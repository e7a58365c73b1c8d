// Copyright 2026 The APQ Search Authors.
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
//
// Counter-based deterministic randomness. Every sampled artifact in this
// project is a pure function of (seed, stream label, indices), so results are
// reproducible across platforms and safe to regenerate in parallel by index.
// std::random distributions are avoided on purpose: their output is not
// pinned by the standard.

#ifndef APQ_RNG_HPP_
#define APQ_RNG_HPP_

#include <cstdint>
#include <cstring>
#include <string_view>
#include <vector>

namespace apq {

inline std::uint64_t splitmix64_next(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// FNV-1a over raw bytes; used for stream derivation and file fingerprints.
inline std::uint64_t fnv1a64(const void* data, std::size_t size,
                             std::uint64_t hash = 0xcbf29ce484222325ULL) {
  const auto* bytes = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < size; ++i) {
    hash ^= bytes[i];
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

inline std::uint64_t fnv1a64(std::string_view text,
                             std::uint64_t hash = 0xcbf29ce484222325ULL) {
  return fnv1a64(text.data(), text.size(), hash);
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {
    // A couple of warm-up steps so that nearby seeds decorrelate.
    splitmix64_next(state_);
    splitmix64_next(state_);
  }

  std::uint64_t next_u64() { return splitmix64_next(state_); }

  // Uniform in [0, n). Lemire multiply-shift; bias is O(n / 2^64).
  std::uint64_t uniform_index(std::uint64_t n) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

  // Uniform in [0, 1) with 53 random mantissa bits.
  double uniform_real() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  bool bernoulli(double p) { return uniform_real() < p; }

  template <typename T>
  const T& pick(const std::vector<T>& choices) {
    return choices[uniform_index(choices.size())];
  }

 private:
  std::uint64_t state_;
};

// Derives an independent stream from (seed, label, a, b). Labels keep
// distinct purposes (e.g. dataset records vs. oracle coefficients) from
// colliding even when their numeric indices coincide.
inline std::uint64_t derive_seed(std::uint64_t seed, std::string_view label,
                                 std::uint64_t a = 0, std::uint64_t b = 0) {
  std::uint64_t h = fnv1a64(&seed, sizeof(seed));
  h = fnv1a64(label.data(), label.size(), h);
  h = fnv1a64(&a, sizeof(a), h);
  h = fnv1a64(&b, sizeof(b), h);
  return h;
}

inline Rng derive_rng(std::uint64_t seed, std::string_view label,
                      std::uint64_t a = 0, std::uint64_t b = 0) {
  return Rng(derive_seed(seed, label, a, b));
}

// One uniform real in [0,1) straight from a hash, for per-item jitter.
inline double hash_unit_real(std::uint64_t hash) {
  std::uint64_t state = hash;
  return static_cast<double>(splitmix64_next(state) >> 11) * 0x1.0p-53;
}

}  // namespace apq

#endif  // APQ_RNG_HPP_
