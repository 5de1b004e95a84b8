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

#include "mgrind/tensor/filler.hpp"

#include <cmath>

#include "mgrind/error.hpp"
#include "mgrind/tensor/rng.hpp"

namespace mgrind {

void FillerSpec::validate() const {
  if (kind == Kind::uniform && min > max) {
    throw ConfigError("uniform filler requires min <= max");
  }
  if (kind == Kind::gaussian && !(std >= 0.0)) {
    throw ConfigError("gaussian filler requires std >= 0");
  }
}

const char* filler_kind_name(FillerSpec::Kind kind) {
  switch (kind) {
    case FillerSpec::Kind::constant: return "constant";
    case FillerSpec::Kind::uniform: return "uniform";
    case FillerSpec::Kind::gaussian: return "gaussian";
    case FillerSpec::Kind::xavier: return "xavier";
  }
  return "?";
}

template <typename Dtype>
void fill(Blob<Dtype>& blob, const FillerSpec& filler, std::uint64_t seed) {
  filler.validate();
  if (blob.count() == 0) throw ShapeError("cannot fill an empty blob");
  auto out = blob.mutable_data();
  Rng rng(seed);
  switch (filler.kind) {
    case FillerSpec::Kind::constant:
      for (auto& v : out) v = static_cast<Dtype>(filler.value);
      break;
    case FillerSpec::Kind::uniform:
      for (auto& v : out) v = static_cast<Dtype>(rng.uniform(filler.min, filler.max));
      break;
    case FillerSpec::Kind::gaussian:
      for (auto& v : out) v = static_cast<Dtype>(rng.gaussian(filler.mean, filler.std));
      break;
    case FillerSpec::Kind::xavier: {
      const double fan_in = static_cast<double>(blob.count()) / blob.num();
      const double bound = std::sqrt(3.0 / fan_in);
      for (auto& v : out) {
        // Rounding to float can land a hair outside the bound.
        double x = rng.uniform(-bound, bound);
        Dtype y = static_cast<Dtype>(x);
        if (std::abs(static_cast<double>(y)) > bound) y = std::nextafter(y, Dtype(0));
        v = y;
      }
      break;
    }
  }
}

template void fill<float>(Blob<float>&, const FillerSpec&, std::uint64_t);
template void fill<double>(Blob<double>&, const FillerSpec&, std::uint64_t);

}  // namespace mgrind
