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

#include "mgrind/layers/layer_spec.hpp"

#include <array>
#include <utility>

namespace mgrind {

namespace {
constexpr std::array<std::pair<LayerKind, std::string_view>, 11> kKindNames{{
    {LayerKind::data, "data"},
    {LayerKind::convolution, "convolution"},
    {LayerKind::pooling, "pooling"},
    {LayerKind::inner_product, "inner_product"},
    {LayerKind::relu, "relu"},
    {LayerKind::sigmoid, "sigmoid"},
    {LayerKind::lrn, "lrn"},
    {LayerKind::eltwise, "eltwise"},
    {LayerKind::softmax_loss, "softmax_loss"},
    {LayerKind::hinge_loss, "hinge_loss"},
    {LayerKind::accuracy, "accuracy"},
}};

[[noreturn]] void fail(const LayerSpec& spec, const std::string& what) {
  throw ConfigError("layer '" + spec.name + "' (" +
                    std::string(layer_kind_name(spec.kind)) + "): " + what);
}
}  // namespace

std::string_view layer_kind_name(LayerKind kind) {
  for (const auto& [k, name] : kKindNames) {
    if (k == kind) return name;
  }
  return "?";
}

std::optional<LayerKind> layer_kind_from_name(std::string_view name) {
  for (const auto& [k, n] : kKindNames) {
    if (n == name) return k;
  }
  return std::nullopt;
}

LayerParams default_params(LayerKind kind) {
  switch (kind) {
    case LayerKind::data: return DataParam{};
    case LayerKind::convolution: return ConvParam{};
    case LayerKind::pooling: return PoolParam{};
    case LayerKind::inner_product: return InnerProductParam{};
    case LayerKind::lrn: return LRNParam{};
    case LayerKind::eltwise: return EltwiseParam{};
    default: return std::monostate{};
  }
}

Arity layer_arity(LayerKind kind) {
  switch (kind) {
    case LayerKind::data: return {0, 0, 2};
    case LayerKind::eltwise: return {2, -1, 1};
    case LayerKind::softmax_loss:
    case LayerKind::hinge_loss:
    case LayerKind::accuracy: return {2, 2, 1};
    default: return {1, 1, 1};
  }
}

bool supports_in_place(LayerKind kind) {
  return kind == LayerKind::relu || kind == LayerKind::sigmoid;
}

bool is_loss(LayerKind kind) {
  return kind == LayerKind::softmax_loss || kind == LayerKind::hinge_loss;
}

void validate_layer_spec(const LayerSpec& spec) {
  if (spec.name.empty()) throw ConfigError("layer with empty name");
  const Arity arity = layer_arity(spec.kind);
  const int nb = static_cast<int>(spec.bottoms.size());
  const int nt = static_cast<int>(spec.tops.size());
  if (nb < arity.min_bottoms || (arity.max_bottoms >= 0 && nb > arity.max_bottoms)) {
    fail(spec, "expects " +
                   (arity.max_bottoms < 0
                        ? "at least " + std::to_string(arity.min_bottoms)
                        : std::to_string(arity.min_bottoms)) +
                   " bottom(s), got " + std::to_string(nb));
  }
  if (nt != arity.tops) {
    fail(spec, "expects " + std::to_string(arity.tops) + " top(s), got " +
                   std::to_string(nt));
  }
  for (const auto& top : spec.tops) {
    for (const auto& bottom : spec.bottoms) {
      if (top == bottom && !supports_in_place(spec.kind)) {
        fail(spec, "in-place computation (top '" + top +
                       "' equals a bottom) is only allowed for relu and sigmoid");
      }
    }
  }
  if (spec.kind == LayerKind::data && spec.tops.size() == 2 &&
      spec.tops[0] == spec.tops[1]) {
    fail(spec, "data and label tops must differ");
  }

  auto positive = [&](int v, const char* what) {
    if (v <= 0) fail(spec, std::string(what) + " must be positive");
  };
  auto non_negative = [&](int v, const char* what) {
    if (v < 0) fail(spec, std::string(what) + " must be non-negative");
  };
  auto check_filler = [&](const FillerSpec& f, const char* what) {
    try {
      f.validate();
    } catch (const ConfigError& e) {
      fail(spec, std::string(what) + ": " + e.what());
    }
  };

  std::visit(
      [&](const auto& p) {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, ConvParam>) {
          positive(p.num_output, "num_output");
          positive(p.kernel_h, "kernel_h");
          positive(p.kernel_w, "kernel_w");
          positive(p.stride_h, "stride_h");
          positive(p.stride_w, "stride_w");
          non_negative(p.pad_h, "pad_h");
          non_negative(p.pad_w, "pad_w");
          check_filler(p.weight_filler, "weight_filler");
          check_filler(p.bias_filler, "bias_filler");
        } else if constexpr (std::is_same_v<P, PoolParam>) {
          positive(p.kernel_h, "kernel_h");
          positive(p.kernel_w, "kernel_w");
          positive(p.stride_h, "stride_h");
          positive(p.stride_w, "stride_w");
          non_negative(p.pad_h, "pad_h");
          non_negative(p.pad_w, "pad_w");
          if (p.pad_h >= p.kernel_h || p.pad_w >= p.kernel_w) {
            fail(spec, "pad must be smaller than kernel");
          }
        } else if constexpr (std::is_same_v<P, InnerProductParam>) {
          positive(p.num_output, "num_output");
          check_filler(p.weight_filler, "weight_filler");
          check_filler(p.bias_filler, "bias_filler");
        } else if constexpr (std::is_same_v<P, LRNParam>) {
          if (p.local_size <= 0 || p.local_size % 2 == 0) {
            fail(spec, "local_size must be an odd positive integer");
          }
          if (!(p.alpha >= 0)) fail(spec, "alpha must be >= 0");
          if (!(p.beta > 0)) fail(spec, "beta must be > 0");
          if (!(p.k > 0)) fail(spec, "k must be > 0");
        } else if constexpr (std::is_same_v<P, EltwiseParam>) {
          if (!p.coeffs.empty()) {
            if (p.op != EltwiseParam::Op::sum) {
              fail(spec, "coefficients are only valid for the sum operation");
            }
            if (p.coeffs.size() != spec.bottoms.size()) {
              fail(spec, "needs one coefficient per bottom");
            }
          }
        } else if constexpr (std::is_same_v<P, DataParam>) {
          positive(p.batch_size, "batch_size");
          if (p.source.empty() || p.label_source.empty()) {
            fail(spec, "source and label_source are required");
          }
          if (!(p.scale > 0)) fail(spec, "scale must be > 0");
          non_negative(p.prefetch, "prefetch");
        }
      },
      spec.params);

  const LayerParams expected = default_params(spec.kind);
  if (expected.index() != spec.params.index()) {
    fail(spec, "parameter block does not match the layer kind");
  }
}

}  // namespace mgrind
