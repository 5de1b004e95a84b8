// Copyright 2026 The mgrind Authors. All Rights Reserved.
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
#include <initializer_list>
#include <random>
#include <string>

namespace mgrind {

/// Seedable generator with a platform-independent output sequence.
///
/// The engine is std::mt19937, whose recurrence is fixed by the standard.
/// The standard distributions are not (their algorithms vary by library), so
/// the transforms below are written out:
///   uniform01: 53-bit mantissa from two 32-bit draws (genrand_res53)
///   gaussian:  Box-Muller, one draw pair per sample, no caching
///   index(n):  rejection sampling on 32-bit draws
class Rng {
 public:
  explicit Rng(std::uint64_t seed);
  /// Seeds through std::seed_seq so independent streams can be derived from
  /// (seed, tag...) tuples.
  explicit Rng(std::initializer_list<std::uint32_t> seed_words);

  std::uint32_t next_u32() { return static_cast<std::uint32_t>(engine_()); }
  double uniform01();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }
  double gaussian(double mean, double stddev);
  /// Uniform integer in [0, n). n must be positive.
  std::uint32_t index(std::uint32_t n);

  /// Textual engine state as produced by operator<< on the engine.
  std::string state() const;
  void set_state(const std::string& state);

 private:
  std::mt19937 engine_;
};

/// Splits a 64-bit seed into seed_seq words.
inline std::uint32_t seed_lo(std::uint64_t seed) {
  return static_cast<std::uint32_t>(seed & 0xffffffffu);
}
inline std::uint32_t seed_hi(std::uint64_t seed) {
  return static_cast<std::uint32_t>(seed >> 32);
}

/// FNV-1a over a string, used to give named parameters their own stream.
std::uint32_t name_hash(const std::string& name);

}  // namespace mgrind
