// Copyright 2026 The filica Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef FILICA_RNG_HPP
#define FILICA_RNG_HPP

#include <array>
#include <cstdint>
#include <vector>

namespace filica {

// Philox4x64-10 counter-based generator. A block is a pure function of
// (counter, key), so any draw is addressable directly: substreams are
// encoded in the counter words and never collide. Matches the widely used
// reference outputs (see tests for frozen vectors).
std::array<std::uint64_t, 4> philox4x64(const std::array<std::uint64_t, 4>& ctr,
                                        const std::array<std::uint64_t, 2>& key);

// SplitMix64 finalizer, used to derive substream seeds from composite keys.
std::uint64_t mix64(std::uint64_t x);

// Deterministic seed derivation: fold v into h. Order matters.
std::uint64_t seed_combine(std::uint64_t h, std::uint64_t v);

// One random stream: key = seed, counter word 1 = stream id, word 0 = block
// index. Draws are consumed in block order; all state is explicit.
class Rng {
 public:
  Rng(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t next_u64();

  // Uniform in [0, 1), 53-bit resolution.
  double next_double();

  // Standard normal via Box-Muller; the second value of each pair is cached.
  double next_normal();

  // Uniform integer in [0, n) by rejection (exact, no modulo bias).
  std::uint64_t next_below(std::uint64_t n);

  // Fisher-Yates shuffle of indices 0..n-1; returns the permuted vector.
  std::vector<int> permutation(int n);

 private:
  std::array<std::uint64_t, 2> key_;
  std::array<std::uint64_t, 4> ctr_;
  std::array<std::uint64_t, 4> block_{};
  int pos_ = 4;
  bool has_cached_ = false;
  double cached_ = 0.0;
};

}  // namespace filica

#endif  // FILICA_RNG_HPP
