// Copyright 2026 The mtsim Authors
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

namespace mtsim {

// SplitMix64 finalizer (Steele, Lea & Flood 2014).
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Seed of the random stream owned by one mixture. Part of the output
// contract: changing it changes every generated mixture.
//   stream_seed = splitmix64(master_seed ^ splitmix64(mixture_index))
constexpr std::uint64_t mixture_stream_seed(std::uint64_t master_seed,
                                            std::uint64_t mixture_index) {
  return splitmix64(master_seed ^ splitmix64(mixture_index));
}

// Random stream with implementation-independent draws. The engine is
// std::mt19937_64, whose output sequence is fixed by the standard; the
// distributions below are spelled out instead of using <random>'s, whose
// algorithms are unspecified.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in the open interval (0, 1): (k + 0.5) / 2^53.
  double uniform01() {
    const std::uint64_t k = next_u64() >> 11;
    return (static_cast<double>(k) + 0.5) * 0x1.0p-53;
  }

  // Uniform in the open interval (lo, hi); requires lo < hi.
  double uniform_open(double lo, double hi) {
    for (;;) {
      const double x = lo + uniform01() * (hi - lo);
      if (x > lo && x < hi) return x;
    }
  }

  // Uniform in the closed interval [lo, hi]; lo == hi returns lo.
  double uniform_closed(double lo, double hi) {
    if (lo == hi) return lo;
    const double x = lo + uniform01() * (hi - lo);
    return x > hi ? hi : x;
  }

  // Uniform integer in [0, n) by rejection; requires n > 0.
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    for (;;) {
      const std::uint64_t x = next_u64();
      if (x < limit) return x % n;
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace mtsim
