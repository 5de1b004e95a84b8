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

#include <optional>
#include <string>
#include <string_view>
#include <type_traits>
#include <variant>
#include <vector>

#include "mgrind/error.hpp"
#include "mgrind/tensor/filler.hpp"

namespace mgrind {

enum class LayerKind {
  data,
  convolution,
  pooling,
  inner_product,
  relu,
  sigmoid,
  lrn,
  eltwise,
  softmax_loss,
  hinge_loss,
  accuracy,
};

/// Identifier used in definition files ("convolution", "softmax_loss", ...).
std::string_view layer_kind_name(LayerKind kind);
std::optional<LayerKind> layer_kind_from_name(std::string_view name);

struct ConvParam {
  int num_output = 0;
  int kernel_h = 0;
  int kernel_w = 0;
  int stride_h = 1;
  int stride_w = 1;
  int pad_h = 0;
  int pad_w = 0;
  bool bias_enabled = true;
  FillerSpec weight_filler = FillerSpec::xavier();
  FillerSpec bias_filler = FillerSpec::constant(0.0);

  friend bool operator==(const ConvParam&, const ConvParam&) = default;
};

struct PoolParam {
  enum class Method { max, average };
  Method method = Method::max;
  int kernel_h = 0;
  int kernel_w = 0;
  int stride_h = 1;
  int stride_w = 1;
  int pad_h = 0;
  int pad_w = 0;

  friend bool operator==(const PoolParam&, const PoolParam&) = default;
};

struct InnerProductParam {
  int num_output = 0;
  bool bias_enabled = true;
  FillerSpec weight_filler = FillerSpec::xavier();
  FillerSpec bias_filler = FillerSpec::constant(0.0);

  friend bool operator==(const InnerProductParam&, const InnerProductParam&) = default;
};

struct LRNParam {
  int local_size = 5;
  double alpha = 1e-4;
  double beta = 0.75;
  double k = 1.0;

  friend bool operator==(const LRNParam&, const LRNParam&) = default;
};

struct EltwiseParam {
  enum class Op { sum, product, max };
  Op op = Op::sum;
  std::vector<double> coeffs;  // sum only; empty means all 1.0

  friend bool operator==(const EltwiseParam&, const EltwiseParam&) = default;
};

/// Self-feeding MNIST-style source. Paths are resolved against the
/// directory of the definition file when relative.
struct DataParam {
  std::string source;        // IDX images
  std::string label_source;  // IDX labels
  int batch_size = 0;
  double scale = 1.0;
  std::string mean_file;  // optional, weights-format single entry
  bool shuffle = false;
  int prefetch = 0;  // queue capacity; 0 reads synchronously

  friend bool operator==(const DataParam&, const DataParam&) = default;
};

using LayerParams = std::variant<std::monostate, DataParam, ConvParam,
                                 PoolParam, InnerProductParam, LRNParam,
                                 EltwiseParam>;

/// Declarative configuration of one layer. The source positions are
/// diagnostic metadata and do not take part in equality.
struct LayerSpec {
  std::string name;
  LayerKind kind = LayerKind::relu;
  std::vector<std::string> bottoms;
  std::vector<std::string> tops;
  LayerParams params;

  SourcePos pos{};
  std::vector<SourcePos> bottom_pos;

  friend bool operator==(const LayerSpec& a, const LayerSpec& b) {
    return a.name == b.name && a.kind == b.kind && a.bottoms == b.bottoms &&
           a.tops == b.tops && a.params == b.params;
  }
};

/// Default parameter record for a kind (monostate for parameterless kinds).
LayerParams default_params(LayerKind kind);

struct Arity {
  int min_bottoms;
  int max_bottoms;  // -1 = unbounded
  int tops;
};
Arity layer_arity(LayerKind kind);

/// ReLU and sigmoid may write their top over their bottom.
bool supports_in_place(LayerKind kind);

bool is_loss(LayerKind kind);

/// Checks the arity table, in-place permission and parameter ranges. Throws
/// ConfigError naming the layer.
void validate_layer_spec(const LayerSpec& spec);

}  // namespace mgrind
