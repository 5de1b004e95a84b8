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

#include <array>
#include <cstddef>
#include <ostream>
#include <string>

namespace mgrind {

/// Extents of a blob in (num, channels, height, width) order.
struct Shape4 {
  int num = 0;
  int channels = 0;
  int height = 0;
  int width = 0;

  /// Product of the four axes. Throws AllocationError when an axis is
  /// negative or the product does not fit in std::size_t.
  std::size_t count() const;

  /// Elements per item, i.e. count() / num, or channels*height*width when
  /// num is zero.
  std::size_t item_count() const;

  std::array<int, 4> dims() const { return {num, channels, height, width}; }

  std::string to_string() const;

  friend bool operator==(const Shape4&, const Shape4&) = default;
};

std::ostream& operator<<(std::ostream& os, const Shape4& shape);

/// Row-major NCHW offset of (n, c, h, w).
inline std::size_t flat_index(const Shape4& s, int n, int c, int h, int w) {
  return ((static_cast<std::size_t>(n) * s.channels + c) * s.height + h) *
             s.width +
         w;
}

struct Coord4 {
  int n = 0;
  int c = 0;
  int h = 0;
  int w = 0;
  friend bool operator==(const Coord4&, const Coord4&) = default;
};

/// Inverse of flat_index.
Coord4 unflatten(const Shape4& s, std::size_t index);

}  // namespace mgrind
