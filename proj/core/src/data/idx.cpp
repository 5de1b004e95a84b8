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

#include "mgrind/data/idx.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <sstream>

#include "mgrind/error.hpp"

namespace mgrind {

namespace {

std::uint32_t read_be32(std::istream& is, const char* what) {
  unsigned char b[4];
  is.read(reinterpret_cast<char*>(b), 4);
  if (is.gcount() != 4) throw FormatError(std::string("truncated IDX header (") + what + ")");
  return (std::uint32_t{b[0]} << 24) | (std::uint32_t{b[1]} << 16) |
         (std::uint32_t{b[2]} << 8) | std::uint32_t{b[3]};
}

void write_be32(std::ostream& os, std::uint32_t v) {
  const char b[4] = {static_cast<char>(v >> 24), static_cast<char>(v >> 16),
                     static_cast<char>(v >> 8), static_cast<char>(v)};
  os.write(b, 4);
}

std::string magic_text(std::uint32_t magic) {
  std::ostringstream os;
  os << "0x" << std::hex;
  os.width(8);
  os.fill('0');
  os << magic;
  return os.str();
}

void check_magic(std::uint32_t got, std::uint32_t want, const char* kind) {
  if (got != want) {
    throw FormatError(std::string("bad IDX magic for ") + kind + ": got " +
                      magic_text(got) + ", expected " + magic_text(want));
  }
}

int checked_dim(std::uint32_t d, const char* what) {
  if (d > static_cast<std::uint32_t>(std::numeric_limits<int>::max())) {
    throw FormatError(std::string("IDX dimension overflow (") + what + ")");
  }
  return static_cast<int>(d);
}

void read_payload(std::istream& is, std::vector<std::uint8_t>& out, std::size_t n) {
  // Grow in chunks so a corrupt header cannot demand a huge allocation
  // before the short read is detected.
  constexpr std::size_t kChunk = std::size_t{1} << 24;
  out.clear();
  while (out.size() < n) {
    const std::size_t at = out.size();
    const std::size_t take = std::min(kChunk, n - at);
    out.resize(at + take);
    is.read(reinterpret_cast<char*>(out.data() + at), static_cast<std::streamsize>(take));
    if (static_cast<std::size_t>(is.gcount()) != take) {
      throw FormatError("truncated IDX payload: expected " + std::to_string(n) +
                        " bytes, got " + std::to_string(at + is.gcount()));
    }
  }
  if (is.peek() != std::char_traits<char>::eof()) {
    throw FormatError("IDX payload longer than its header declares");
  }
}

std::ifstream open(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open '" + path.string() + "'");
  return is;
}

}  // namespace

IdxImages read_idx_images(std::istream& is) {
  check_magic(read_be32(is, "magic"), kIdxImagesMagic, "images");
  IdxImages out;
  out.count = checked_dim(read_be32(is, "count"), "count");
  out.rows = checked_dim(read_be32(is, "rows"), "rows");
  out.cols = checked_dim(read_be32(is, "cols"), "cols");
  const std::size_t plane = static_cast<std::size_t>(out.rows) * out.cols;
  if (plane != 0 && static_cast<std::size_t>(out.count) >
                        std::numeric_limits<std::size_t>::max() / plane) {
    throw FormatError("IDX dimension overflow (payload size)");
  }
  read_payload(is, out.pixels, plane * out.count);
  return out;
}

IdxLabels read_idx_labels(std::istream& is) {
  check_magic(read_be32(is, "magic"), kIdxLabelsMagic, "labels");
  IdxLabels out;
  const int count = checked_dim(read_be32(is, "count"), "count");
  read_payload(is, out.labels, static_cast<std::size_t>(count));
  return out;
}

IdxImages read_idx_images(const std::filesystem::path& path) {
  auto is = open(path);
  try {
    return read_idx_images(is);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

IdxLabels read_idx_labels(const std::filesystem::path& path) {
  auto is = open(path);
  try {
    return read_idx_labels(is);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void write_idx_images(const std::filesystem::path& path, const IdxImages& images) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open '" + path.string() + "' for writing");
  write_be32(os, kIdxImagesMagic);
  write_be32(os, static_cast<std::uint32_t>(images.count));
  write_be32(os, static_cast<std::uint32_t>(images.rows));
  write_be32(os, static_cast<std::uint32_t>(images.cols));
  os.write(reinterpret_cast<const char*>(images.pixels.data()),
           static_cast<std::streamsize>(images.pixels.size()));
  if (!os) throw IoError("write failed: " + path.string());
}

void write_idx_labels(const std::filesystem::path& path, const IdxLabels& labels) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open '" + path.string() + "' for writing");
  write_be32(os, kIdxLabelsMagic);
  write_be32(os, static_cast<std::uint32_t>(labels.labels.size()));
  os.write(reinterpret_cast<const char*>(labels.labels.data()),
           static_cast<std::streamsize>(labels.labels.size()));
  if (!os) throw IoError("write failed: " + path.string());
}

}  // namespace mgrind
