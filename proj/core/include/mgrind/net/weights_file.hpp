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
#include <filesystem>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "mgrind/tensor/shape.hpp"

namespace mgrind {

/// One serialized parameter blob.
struct WeightsEntry {
  std::string layer;
  std::uint16_t index = 0;
  Shape4 shape;
  std::vector<float> values;

  friend bool operator==(const WeightsEntry&, const WeightsEntry&) = default;
};

/// Binary weights container:
///
///   "MGRNDWTS"                 8-byte magic
///   version                    u32 (currently 1)
///   entry count                u32
///   per entry:
///     name length              u16, then that many UTF-8 bytes
///     blob index               u16
///     num, channels, h, w      4 x u32
///     values                   count x f32
///
/// All integers and floats are little-endian.
struct WeightsFile {
  static constexpr std::string_view kMagic = "MGRNDWTS";
  static constexpr std::uint32_t kVersion = 1;

  std::vector<WeightsEntry> entries;

  const WeightsEntry* find(const std::string& layer, std::uint16_t index) const;

  void write(std::ostream& os) const;
  /// Reads exactly one weights payload, leaving the stream positioned after
  /// it. Throws FormatError on bad magic/version or truncation.
  static WeightsFile read(std::istream& is);

  void save(const std::filesystem::path& path) const;
  /// Reads the weights payload at the start of `path`; trailing sections
  /// (e.g. a snapshot's solver state) are ignored.
  static WeightsFile load(const std::filesystem::path& path);

  friend bool operator==(const WeightsFile&, const WeightsFile&) = default;
};

}  // namespace mgrind
