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

#include <cmath>

#include "mgrind/error.hpp"
#include "mgrind/layers/kernels.hpp"

namespace mgrind {

template <typename Dtype>
void activation_forward(const Blob<Dtype>& input, Activation kind,
                        Blob<Dtype>& output) {
  if (&output != &input && output.shape() != input.shape()) {
    output.reshape(input.shape());
  }
  auto in = input.data();
  auto out = output.mutable_data();
  if (kind == Activation::relu) {
    for (std::size_t i = 0; i < out.size(); ++i) {
      out[i] = in[i] > Dtype(0) ? in[i] : Dtype(0);
    }
  } else {
    for (std::size_t i = 0; i < out.size(); ++i) {
      out[i] = Dtype(1) / (Dtype(1) + std::exp(-in[i]));
    }
  }
}

template <typename Dtype>
void activation_backward(const Blob<Dtype>& output, Activation kind,
                         Blob<Dtype>& input) {
  if (output.count() != input.count()) {
    throw ShapeError("activation backward: top and bottom counts differ");
  }
  const bool in_place = &output == &input;
  auto out = output.data();
  auto top = output.diff();
  std::span<Dtype> bottom = input.mutable_diff();
  for (std::size_t i = 0; i < bottom.size(); ++i) {
    Dtype g;
    if (kind == Activation::relu) {
      g = out[i] > Dtype(0) ? top[i] : Dtype(0);
    } else {
      g = top[i] * out[i] * (Dtype(1) - out[i]);
    }
    bottom[i] = in_place ? g : bottom[i] + g;
  }
}

template <typename Dtype>
void eltwise_forward(std::span<const Blob<Dtype>* const> inputs,
                     const EltwiseParam& p, Blob<Dtype>& output,
                     std::vector<std::int32_t>* argmax) {
  if (inputs.size() < 2) throw ShapeError("eltwise needs at least two inputs");
  const Shape4 shape = inputs[0]->shape();
  for (const auto* b : inputs) {
    if (b->shape() != shape) {
      throw ShapeError("eltwise inputs differ in shape: " + shape.to_string() +
                       " vs " + b->shape().to_string());
    }
  }
  if (!p.coeffs.empty() && p.coeffs.size() != inputs.size()) {
    throw ConfigError("eltwise needs one coefficient per input");
  }
  if (output.shape() != shape) output.reshape(shape);
  auto out = output.mutable_data();
  const std::size_t count = out.size();
  switch (p.op) {
    case EltwiseParam::Op::sum: {
      std::fill(out.begin(), out.end(), Dtype(0));
      for (std::size_t b = 0; b < inputs.size(); ++b) {
        const Dtype c = p.coeffs.empty() ? Dtype(1) : static_cast<Dtype>(p.coeffs[b]);
        auto in = inputs[b]->data();
        for (std::size_t i = 0; i < count; ++i) out[i] += c * in[i];
      }
      break;
    }
    case EltwiseParam::Op::product: {
      auto first = inputs[0]->data();
      std::copy(first.begin(), first.end(), out.begin());
      for (std::size_t b = 1; b < inputs.size(); ++b) {
        auto in = inputs[b]->data();
        for (std::size_t i = 0; i < count; ++i) out[i] *= in[i];
      }
      break;
    }
    case EltwiseParam::Op::max: {
      if (argmax == nullptr) throw ConfigError("eltwise max requires an argmax buffer");
      argmax->assign(count, 0);
      auto first = inputs[0]->data();
      std::copy(first.begin(), first.end(), out.begin());
      for (std::size_t b = 1; b < inputs.size(); ++b) {
        auto in = inputs[b]->data();
        for (std::size_t i = 0; i < count; ++i) {
          if (in[i] > out[i]) {  // strict: first input wins ties
            out[i] = in[i];
            (*argmax)[i] = static_cast<std::int32_t>(b);
          }
        }
      }
      break;
    }
  }
}

template <typename Dtype>
void eltwise_backward(const Blob<Dtype>& output,
                      const std::vector<std::int32_t>* argmax,
                      const EltwiseParam& p,
                      std::span<Blob<Dtype>* const> inputs,
                      const std::vector<bool>& propagate_down) {
  if (inputs.size() < 2) throw ShapeError("eltwise needs at least two inputs");
  for (const auto* b : inputs) {
    if (b->shape() != output.shape()) {
      throw ShapeError("eltwise backward: input shape differs from top");
    }
  }
  auto top = output.diff();
  const std::size_t count = top.size();
  for (std::size_t b = 0; b < inputs.size(); ++b) {
    if (b < propagate_down.size() && !propagate_down[b]) continue;
    auto diff = inputs[b]->mutable_diff();
    switch (p.op) {
      case EltwiseParam::Op::sum: {
        const Dtype c = p.coeffs.empty() ? Dtype(1) : static_cast<Dtype>(p.coeffs[b]);
        for (std::size_t i = 0; i < count; ++i) diff[i] += c * top[i];
        break;
      }
      case EltwiseParam::Op::product: {
        for (std::size_t i = 0; i < count; ++i) {
          Dtype prod = top[i];
          for (std::size_t j = 0; j < inputs.size(); ++j) {
            if (j != b) prod *= inputs[j]->data()[i];
          }
          diff[i] += prod;
        }
        break;
      }
      case EltwiseParam::Op::max: {
        if (argmax == nullptr || argmax->size() != count) {
          throw ConfigError("eltwise max backward requires the forward argmax map");
        }
        for (std::size_t i = 0; i < count; ++i) {
          if ((*argmax)[i] == static_cast<std::int32_t>(b)) diff[i] += top[i];
        }
        break;
      }
    }
  }
}

#define MGRIND_INSTANTIATE(T)                                                  \
  template void activation_forward<T>(const Blob<T>&, Activation, Blob<T>&);   \
  template void activation_backward<T>(const Blob<T>&, Activation, Blob<T>&);  \
  template void eltwise_forward<T>(std::span<const Blob<T>* const>,            \
                                   const EltwiseParam&, Blob<T>&,              \
                                   std::vector<std::int32_t>*);                \
  template void eltwise_backward<T>(const Blob<T>&,                            \
                                    const std::vector<std::int32_t>*,          \
                                    const EltwiseParam&,                       \
                                    std::span<Blob<T>* const>,                 \
                                    const std::vector<bool>&);
MGRIND_INSTANTIATE(float)
MGRIND_INSTANTIATE(double)
#undef MGRIND_INSTANTIATE

}  // namespace mgrind
