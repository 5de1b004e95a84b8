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

#include "mgrind/net/weights_file.hpp"

#include <fstream>
#include <limits>

#include "mgrind/error.hpp"
#include "mgrind/net/binary_io.hpp"

namespace mgrind {

void BinaryWriter::f32s(std::span<const float> values) {
  if constexpr (std::endian::native == std::endian::little) {
    os_.write(reinterpret_cast<const char*>(values.data()),
              static_cast<std::streamsize>(values.size() * sizeof(float)));
  } else {
    for (float v : values) f32(v);
  }
}

std::string BinaryReader::bytes(std::size_t n) {
  std::string out(n, '\0');
  is_.read(out.data(), static_cast<std::streamsize>(n));
  if (static_cast<std::size_t>(is_.gcount()) != n) {
    throw FormatError("truncated " + what_);
  }
  return out;
}

void BinaryReader::f32s(std::span<float> out) {
  if constexpr (std::endian::native == std::endian::little) {
    const auto n = static_cast<std::streamsize>(out.size() * sizeof(float));
    is_.read(reinterpret_cast<char*>(out.data()), n);
    if (is_.gcount() != n) throw FormatError("truncated " + what_);
  } else {
    for (auto& v : out) v = f32();
  }
}

std::uint64_t BinaryReader::get_le(int width) {
  unsigned char buf[8];
  is_.read(reinterpret_cast<char*>(buf), width);
  if (is_.gcount() != width) throw FormatError("truncated " + what_);
  std::uint64_t v = 0;
  for (int i = width - 1; i >= 0; --i) v = (v << 8) | buf[i];
  return v;
}

const WeightsEntry* WeightsFile::find(const std::string& layer,
                                      std::uint16_t index) const {
  for (const auto& e : entries) {
    if (e.layer == layer && e.index == index) return &e;
  }
  return nullptr;
}

void WeightsFile::write(std::ostream& os) const {
  BinaryWriter out(os);
  out.bytes(kMagic);
  out.u32(kVersion);
  if (entries.size() > std::numeric_limits<std::uint32_t>::max()) {
    throw FormatError("too many weights entries");
  }
  out.u32(static_cast<std::uint32_t>(entries.size()));
  for (const auto& e : entries) {
    if (e.layer.size() > std::numeric_limits<std::uint16_t>::max()) {
      throw FormatError("layer name too long for weights file: " + e.layer);
    }
    if (e.values.size() != e.shape.count()) {
      throw FormatError("weights entry '" + e.layer + "' value count disagrees with shape");
    }
    out.u16(static_cast<std::uint16_t>(e.layer.size()));
    out.bytes(e.layer);
    out.u16(e.index);
    for (int d : e.shape.dims()) out.u32(static_cast<std::uint32_t>(d));
    out.f32s(e.values);
  }
  out.check();
}

WeightsFile WeightsFile::read(std::istream& is) {
  BinaryReader in(is, "weights file");
  if (in.bytes(kMagic.size()) != kMagic) {
    throw FormatError("not a weights file (bad magic)");
  }
  const std::uint32_t version = in.u32();
  if (version != kVersion) {
    throw FormatError("unsupported weights file version " + std::to_string(version));
  }
  const std::uint32_t count = in.u32();
  WeightsFile file;
  for (std::uint32_t i = 0; i < count; ++i) {
    WeightsEntry e;
    e.layer = in.bytes(in.u16());
    e.index = in.u16();
    std::uint32_t dims[4];
    for (auto& d : dims) d = in.u32();
    for (auto d : dims) {
      if (d > static_cast<std::uint32_t>(std::numeric_limits<int>::max())) {
        throw FormatError("weights entry '" + e.layer + "' has an oversized dimension");
      }
    }
    e.shape = {static_cast<int>(dims[0]), static_cast<int>(dims[1]),
               static_cast<int>(dims[2]), static_cast<int>(dims[3])};
    std::size_t n;
    try {
      n = e.shape.count();
    } catch (const Error&) {
      throw FormatError("weights entry '" + e.layer + "' has an unaddressable shape");
    }
    // Read in bounded chunks so a corrupt count cannot force a huge
    // allocation before the truncation is noticed.
    constexpr std::size_t kChunk = 1 << 20;
    e.values.reserve(std::min(n, kChunk));
    while (e.values.size() < n) {
      const std::size_t take = std::min(kChunk, n - e.values.size());
      const std::size_t at = e.values.size();
      e.values.resize(at + take);
      in.f32s(std::span<float>(e.values).subspan(at, take));
    }
    file.entries.push_back(std::move(e));
  }
  return file;
}

void WeightsFile::save(const std::filesystem::path& path) const {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open '" + path.string() + "' for writing");
  write(os);
}

WeightsFile WeightsFile::load(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open '" + path.string() + "'");
  return read(is);
}

}  // namespace mgrind
