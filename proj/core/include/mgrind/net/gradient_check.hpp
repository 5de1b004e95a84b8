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

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "mgrind/net/net.hpp"

namespace mgrind {

struct GradCheckOptions {
  double step = 1e-3;
  double threshold = 1e-2;
  /// Coordinates per blob; larger blobs are subsampled with `seed`.
  std::size_t max_coords = 10000;
  std::uint64_t seed = 1;
  /// Skip coordinates whose +/-step forwards change any layer's kink
  /// signature (ReLU mask, max argmax, hinge active set).
  bool exclude_kinks = true;
  /// Substitutes layers in the 64-bit shadow net (e.g. a mutant under test).
  LayerFactory<double> layer_factory;
};

struct GradCheckEntry {
  std::string what;  // "conv1[0]", "bottom 0", "param 1"
  std::size_t checked = 0;
  std::size_t skipped = 0;
  double worst_error = 0.0;
  std::size_t worst_index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
};

struct GradCheckReport {
  std::vector<GradCheckEntry> entries;
  double worst_error = 0.0;
  bool passed = true;

  std::size_t checked() const;
  std::size_t skipped() const;
};

/// Relative error |a - n| / max(|a|, |n|, 1e-8).
double relative_error(double analytic, double numeric);

/// Central-difference check of every parameter of `net` against backward(),
/// run on a 64-bit shadow rebuilt from the same definition with the current
/// parameters and inputs. Data layers in the shadow replay the batch the
/// source net saw last (one forward is run first if needed).
template <typename Dtype>
GradCheckReport gradient_check_net(Net<Dtype>& net, const GradCheckOptions& options = {});

/// Checks one set-up layer on the objective sum_i r_i * top_i with fixed
/// random r, for every bottom that accepts a gradient and every parameter.
/// Works for in-place layers.
GradCheckReport gradient_check_layer(Layer<double>& layer,
                                     const std::vector<Blob<double>*>& bottom,
                                     const std::vector<Blob<double>*>& top,
                                     const GradCheckOptions& options = {});

}  // namespace mgrind
