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

#include <bit>
#include <cstdint>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <utility>

#include "mgrind/error.hpp"

namespace mgrind {

/// Little-endian primitive writer used by the weights and snapshot formats.
class BinaryWriter {
 public:
  explicit BinaryWriter(std::ostream& os) : os_(os) {}

  void bytes(std::string_view raw) { os_.write(raw.data(), static_cast<std::streamsize>(raw.size())); }
  void u16(std::uint16_t v) { put_le(v, 2); }
  void u32(std::uint32_t v) { put_le(v, 4); }
  void u64(std::uint64_t v) { put_le(v, 8); }
  void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
  void f32s(std::span<const float> values);

  void check() const {
    if (!os_) throw IoError("write failed");
  }

 private:
  void put_le(std::uint64_t v, int width) {
    char buf[8];
    for (int i = 0; i < width; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    os_.write(buf, width);
  }
  std::ostream& os_;
};

/// Little-endian primitive reader; any short read throws FormatError naming
/// `what`.
class BinaryReader {
 public:
  explicit BinaryReader(std::istream& is, std::string what = "file")
      : is_(is), what_(std::move(what)) {}

  std::string bytes(std::size_t n);
  std::uint16_t u16() { return static_cast<std::uint16_t>(get_le(2)); }
  std::uint32_t u32() { return static_cast<std::uint32_t>(get_le(4)); }
  std::uint64_t u64() { return get_le(8); }
  float f32() { return std::bit_cast<float>(u32()); }
  void f32s(std::span<float> out);

 private:
  std::uint64_t get_le(int width);
  std::istream& is_;
  std::string what_;
};

}  // namespace mgrind
