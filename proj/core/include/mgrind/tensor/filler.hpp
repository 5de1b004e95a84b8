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

#include "mgrind/tensor/blob.hpp"

namespace mgrind {

/// Parameter initializer.
struct FillerSpec {
  enum class Kind { constant, uniform, gaussian, xavier };

  Kind kind = Kind::constant;
  double value = 0.0;  // constant
  double min = 0.0;    // uniform
  double max = 1.0;
  double mean = 0.0;  // gaussian
  double std = 1.0;

  static FillerSpec constant(double v) { return {Kind::constant, v}; }
  static FillerSpec uniform(double lo, double hi) {
    FillerSpec f;
    f.kind = Kind::uniform;
    f.min = lo;
    f.max = hi;
    return f;
  }
  static FillerSpec gaussian(double mean, double stddev) {
    FillerSpec f;
    f.kind = Kind::gaussian;
    f.mean = mean;
    f.std = stddev;
    return f;
  }
  static FillerSpec xavier() {
    FillerSpec f;
    f.kind = Kind::xavier;
    return f;
  }

  /// Throws ConfigError for min > max or a negative std.
  void validate() const;

  friend bool operator==(const FillerSpec&, const FillerSpec&) = default;
};

const char* filler_kind_name(FillerSpec::Kind kind);

/// Fills the data plane. Values are drawn in double precision and rounded to
/// Dtype, so float and double blobs filled with one seed agree after
/// rounding. Xavier draws U[-sqrt(3/fan_in), +sqrt(3/fan_in)] with
/// fan_in = count / num.
template <typename Dtype>
void fill(Blob<Dtype>& blob, const FillerSpec& filler, std::uint64_t seed);

}  // namespace mgrind
