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

#include "mgrind/tensor/rng.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <vector>

#include "mgrind/error.hpp"

namespace mgrind {

Rng::Rng(std::uint64_t seed) : Rng({seed_lo(seed), seed_hi(seed)}) {}

Rng::Rng(std::initializer_list<std::uint32_t> seed_words) {
  std::vector<std::uint32_t> words(seed_words);
  std::seed_seq seq(words.begin(), words.end());
  engine_.seed(seq);
}

double Rng::uniform01() {
  const std::uint32_t a = next_u32() >> 5;
  const std::uint32_t b = next_u32() >> 6;
  return (a * 67108864.0 + b) * (1.0 / 9007199254740992.0);
}

double Rng::gaussian(double mean, double stddev) {
  const double u1 = 1.0 - uniform01();  // (0, 1]
  const double u2 = uniform01();
  const double r = std::sqrt(-2.0 * std::log(u1));
  return mean + stddev * r * std::cos(2.0 * std::numbers::pi * u2);
}

std::uint32_t Rng::index(std::uint32_t n) {
  if (n == 0) throw ConfigError("Rng::index requires a positive bound");
  const std::uint32_t limit = 0xffffffffu - (0xffffffffu % n);
  std::uint32_t x;
  do {
    x = next_u32();
  } while (x >= limit);
  return x % n;
}

std::string Rng::state() const {
  std::ostringstream os;
  os << engine_;
  return os.str();
}

void Rng::set_state(const std::string& state) {
  std::istringstream is(state);
  std::mt19937 restored;
  is >> restored;
  if (!is) throw FormatError("malformed rng state");
  engine_ = restored;
}

std::uint32_t name_hash(const std::string& name) {
  std::uint32_t h = 2166136261u;
  for (unsigned char ch : name) {
    h ^= ch;
    h *= 16777619u;
  }
  return h;
}

}  // namespace mgrind
