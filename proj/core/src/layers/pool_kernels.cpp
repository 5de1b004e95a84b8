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

#include <algorithm>
#include <vector>

#include "mgrind/error.hpp"
#include "mgrind/layers/kernels.hpp"

namespace mgrind {

namespace {

int pooled_extent(int in, int kernel, int stride, int pad) {
  const int span = in + 2 * pad - kernel;
  int out = (span + stride - 1) / stride + 1;  // ceil(span / stride) + 1
  // The last window must start inside the input or its leading padding.
  if (pad > 0 && (out - 1) * stride >= in + pad) --out;
  return out;
}

}  // namespace

Shape4 pool_output_shape(const PoolParam& p, const Shape4& input) {
  if (p.kernel_h <= 0 || p.kernel_w <= 0) {
    throw ShapeError("pooling window must be non-empty");
  }
  if (p.stride_h <= 0 || p.stride_w <= 0) {
    throw ShapeError("pooling stride must be positive");
  }
  if (p.kernel_h > input.height + 2 * p.pad_h ||
      p.kernel_w > input.width + 2 * p.pad_w) {
    throw ShapeError("pooling kernel " + std::to_string(p.kernel_h) + "x" +
                     std::to_string(p.kernel_w) + " exceeds padded input " +
                     std::to_string(input.height + 2 * p.pad_h) + "x" +
                     std::to_string(input.width + 2 * p.pad_w));
  }
  return {input.num, input.channels,
          pooled_extent(input.height, p.kernel_h, p.stride_h, p.pad_h),
          pooled_extent(input.width, p.kernel_w, p.stride_w, p.pad_w)};
}

template <typename Dtype>
void pool_forward(const Blob<Dtype>& input, const PoolParam& p,
                  Blob<Dtype>& output, std::vector<std::int32_t>* argmax) {
  const Shape4 out_shape = pool_output_shape(p, input.shape());
  if (output.shape() != out_shape) output.reshape(out_shape);
  const bool is_max = p.method == PoolParam::Method::max;
  if (is_max && argmax == nullptr) {
    throw ConfigError("max pooling requires an argmax buffer");
  }
  if (is_max) argmax->assign(out_shape.count(), -1);

  const int H = input.height(), W = input.width();
  const int OH = out_shape.height, OW = out_shape.width;
  const Dtype inv_area = Dtype(1) / static_cast<Dtype>(p.kernel_h * p.kernel_w);
  auto in = input.data();
  auto out = output.mutable_data();
  const int planes = input.num() * input.channels();
  for (int pc = 0; pc < planes; ++pc) {
    const Dtype* src = in.data() + static_cast<std::size_t>(pc) * H * W;
    Dtype* dst = out.data() + static_cast<std::size_t>(pc) * OH * OW;
    std::int32_t* arg =
        is_max ? argmax->data() + static_cast<std::size_t>(pc) * OH * OW : nullptr;
    for (int oy = 0; oy < OH; ++oy) {
      const int h0 = std::max(oy * p.stride_h - p.pad_h, 0);
      const int h1 = std::min(oy * p.stride_h - p.pad_h + p.kernel_h, H);
      for (int ox = 0; ox < OW; ++ox) {
        const int w0 = std::max(ox * p.stride_w - p.pad_w, 0);
        const int w1 = std::min(ox * p.stride_w - p.pad_w + p.kernel_w, W);
        const int o = oy * OW + ox;
        if (is_max) {
          if (h0 >= h1 || w0 >= w1) {
            dst[o] = Dtype(0);
            arg[o] = -1;
            continue;
          }
          std::int32_t best_idx = h0 * W + w0;
          Dtype best = src[best_idx];
          // Branch-free select; strict > keeps the first maximum.
          for (int h = h0; h < h1; ++h) {
            for (int w = w0; w < w1; ++w) {
              const std::int32_t idx = h * W + w;
              const Dtype v = src[idx];
              const bool gt = v > best;
              best = gt ? v : best;
              best_idx = gt ? idx : best_idx;
            }
          }
          dst[o] = best;
          arg[o] = best_idx;
        } else {
          Dtype sum = 0;
          for (int h = h0; h < h1; ++h) {
            for (int w = w0; w < w1; ++w) sum += src[h * W + w];
          }
          dst[o] = sum * inv_area;
        }
      }
    }
  }
}

template <typename Dtype>
void pool_backward(const Blob<Dtype>& output,
                   const std::vector<std::int32_t>* argmax, const PoolParam& p,
                   Blob<Dtype>& input) {
  const Shape4 out_shape = pool_output_shape(p, input.shape());
  if (output.shape() != out_shape) {
    throw ShapeError("pooling top " + output.shape().to_string() +
                     " inconsistent with expected " + out_shape.to_string());
  }
  const bool is_max = p.method == PoolParam::Method::max;
  if (is_max && (argmax == nullptr || argmax->size() != out_shape.count())) {
    throw ConfigError("max pooling backward requires the forward argmax map");
  }
  const int H = input.height(), W = input.width();
  const int OH = out_shape.height, OW = out_shape.width;
  const Dtype inv_area = Dtype(1) / static_cast<Dtype>(p.kernel_h * p.kernel_w);
  auto top = output.diff();
  auto bottom = input.mutable_diff();
  // Overlapping windows are summed per plane first and added once, so
  // repeated backward calls accumulate exactly.
  thread_local std::vector<Dtype> scratch;
  const std::size_t plane = static_cast<std::size_t>(H) * W;
  if (scratch.size() < plane) scratch.resize(plane);
  Dtype* acc = scratch.data();
  const int planes = input.num() * input.channels();
  for (int pc = 0; pc < planes; ++pc) {
    const Dtype* src = top.data() + static_cast<std::size_t>(pc) * OH * OW;
    Dtype* dst = bottom.data() + static_cast<std::size_t>(pc) * plane;
    std::fill(acc, acc + plane, Dtype(0));
    if (is_max) {
      const std::int32_t* arg =
          argmax->data() + static_cast<std::size_t>(pc) * OH * OW;
      for (int o = 0; o < OH * OW; ++o) {
        if (arg[o] >= 0) acc[arg[o]] += src[o];
      }
    } else {
      for (int oy = 0; oy < OH; ++oy) {
        const int h0 = std::max(oy * p.stride_h - p.pad_h, 0);
        const int h1 = std::min(oy * p.stride_h - p.pad_h + p.kernel_h, H);
        for (int ox = 0; ox < OW; ++ox) {
          const int w0 = std::max(ox * p.stride_w - p.pad_w, 0);
          const int w1 = std::min(ox * p.stride_w - p.pad_w + p.kernel_w, W);
          const Dtype g = src[oy * OW + ox] * inv_area;
          for (int h = h0; h < h1; ++h) {
            for (int w = w0; w < w1; ++w) acc[h * W + w] += g;
          }
        }
      }
    }
    for (std::size_t i = 0; i < plane; ++i) dst[i] += acc[i];
  }
}

#define MGRIND_INSTANTIATE(T)                                                  \
  template void pool_forward<T>(const Blob<T>&, const PoolParam&, Blob<T>&,   \
                                std::vector<std::int32_t>*);                   \
  template void pool_backward<T>(const Blob<T>&,                              \
                                 const std::vector<std::int32_t>*,             \
                                 const PoolParam&, Blob<T>&);
MGRIND_INSTANTIATE(float)
MGRIND_INSTANTIATE(double)
#undef MGRIND_INSTANTIATE

}  // namespace mgrind
