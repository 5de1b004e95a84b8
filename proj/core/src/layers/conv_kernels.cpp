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

#include "mgrind/error.hpp"
#include "mgrind/layers/kernels.hpp"

namespace mgrind {

Shape4 conv_output_shape(const ConvParam& p, const Shape4& input) {
  const int padded_h = input.height + 2 * p.pad_h;
  const int padded_w = input.width + 2 * p.pad_w;
  if (p.kernel_h > padded_h || p.kernel_w > padded_w) {
    throw ShapeError("convolution kernel " + std::to_string(p.kernel_h) + "x" +
                     std::to_string(p.kernel_w) + " exceeds padded input " +
                     std::to_string(padded_h) + "x" + std::to_string(padded_w));
  }
  if (p.stride_h <= 0 || p.stride_w <= 0) {
    throw ShapeError("convolution stride must be positive");
  }
  return {input.num, p.num_output, (padded_h - p.kernel_h) / p.stride_h + 1,
          (padded_w - p.kernel_w) / p.stride_w + 1};
}

Shape4 conv_weight_shape(const ConvParam& p, int in_channels) {
  return {p.num_output, in_channels, p.kernel_h, p.kernel_w};
}

template <typename Dtype>
void im2col(std::span<const Dtype> image, int channels, int height, int width,
            const ConvParam& p, int out_h, int out_w, std::span<Dtype> col) {
  std::size_t row = 0;
  const std::size_t plane = static_cast<std::size_t>(out_h) * out_w;
  for (int c = 0; c < channels; ++c) {
    const Dtype* src = image.data() + static_cast<std::size_t>(c) * height * width;
    for (int i = 0; i < p.kernel_h; ++i) {
      for (int j = 0; j < p.kernel_w; ++j, ++row) {
        Dtype* dst = col.data() + row * plane;
        for (int y = 0; y < out_h; ++y) {
          const int iy = y * p.stride_h - p.pad_h + i;
          Dtype* out_row = dst + static_cast<std::size_t>(y) * out_w;
          if (iy < 0 || iy >= height) {
            std::fill(out_row, out_row + out_w, Dtype(0));
            continue;
          }
          const Dtype* in_row = src + static_cast<std::size_t>(iy) * width;
          for (int x = 0; x < out_w; ++x) {
            const int ix = x * p.stride_w - p.pad_w + j;
            out_row[x] = (ix >= 0 && ix < width) ? in_row[ix] : Dtype(0);
          }
        }
      }
    }
  }
}

template <typename Dtype>
void col2im_add(std::span<const Dtype> col, int channels, int height,
                int width, const ConvParam& p, int out_h, int out_w,
                std::span<Dtype> image) {
  std::size_t row = 0;
  const std::size_t plane = static_cast<std::size_t>(out_h) * out_w;
  for (int c = 0; c < channels; ++c) {
    Dtype* dst = image.data() + static_cast<std::size_t>(c) * height * width;
    for (int i = 0; i < p.kernel_h; ++i) {
      for (int j = 0; j < p.kernel_w; ++j, ++row) {
        const Dtype* src = col.data() + row * plane;
        for (int y = 0; y < out_h; ++y) {
          const int iy = y * p.stride_h - p.pad_h + i;
          if (iy < 0 || iy >= height) continue;
          Dtype* in_row = dst + static_cast<std::size_t>(iy) * width;
          const Dtype* col_row = src + static_cast<std::size_t>(y) * out_w;
          for (int x = 0; x < out_w; ++x) {
            const int ix = x * p.stride_w - p.pad_w + j;
            if (ix >= 0 && ix < width) in_row[ix] += col_row[x];
          }
        }
      }
    }
  }
}

namespace {

template <typename Dtype>
void check_conv_operands(const Blob<Dtype>& input, const Blob<Dtype>& weights,
                         const Blob<Dtype>* bias, const ConvParam& p) {
  const Shape4 expect = conv_weight_shape(p, input.channels());
  if (weights.shape() != expect) {
    throw ShapeError("convolution weights " + weights.shape().to_string() +
                     " do not match expected " + expect.to_string() +
                     " (input channels " + std::to_string(input.channels()) + ")");
  }
  if (bias != nullptr && bias->count() != static_cast<std::size_t>(p.num_output)) {
    throw ShapeError("convolution bias must have num_output elements");
  }
}

}  // namespace

template <typename Dtype>
void conv_forward(const Backend& be, const Blob<Dtype>& input,
                  const Blob<Dtype>& weights, const Blob<Dtype>* bias,
                  const ConvParam& p, Blob<Dtype>& output,
                  std::vector<Dtype>& col) {
  check_conv_operands(input, weights, bias, p);
  const Shape4 out_shape = conv_output_shape(p, input.shape());
  if (output.shape() != out_shape) output.reshape(out_shape);

  const int out_h = out_shape.height;
  const int out_w = out_shape.width;
  const int spatial = out_h * out_w;
  const int patch = input.channels() * p.kernel_h * p.kernel_w;
  const std::size_t col_size = static_cast<std::size_t>(patch) * spatial;
  if (col.size() < col_size) col.resize(col_size);
  std::span<Dtype> col_span(col.data(), col_size);

  auto in = input.data();
  auto w = weights.data();
  auto out = output.mutable_data();
  const std::size_t in_item = input.shape().item_count();
  const std::size_t out_item = out_shape.item_count();
  for (int n = 0; n < input.num(); ++n) {
    im2col<Dtype>(in.subspan(n * in_item, in_item), input.channels(),
                  input.height(), input.width(), p, out_h, out_w, col_span);
    auto out_n = out.subspan(n * out_item, out_item);
    be.gemm(Transpose::no, Transpose::no, p.num_output, spatial, patch,
            Dtype(1), w, std::span<const Dtype>(col_span), Dtype(0), out_n);
    if (bias != nullptr) {
      auto b = bias->data();
      for (int o = 0; o < p.num_output; ++o) {
        Dtype* row = out_n.data() + static_cast<std::size_t>(o) * spatial;
        for (int s = 0; s < spatial; ++s) row[s] += b[o];
      }
    }
  }
}

template <typename Dtype>
void conv_backward(const Backend& be, Blob<Dtype>& input, bool propagate_down,
                   Blob<Dtype>& weights, Blob<Dtype>* bias,
                   const Blob<Dtype>& output, const ConvParam& p,
                   std::vector<Dtype>& col) {
  check_conv_operands(input, weights, bias, p);
  const Shape4 out_shape = conv_output_shape(p, input.shape());
  if (output.shape() != out_shape) {
    throw ShapeError("convolution top " + output.shape().to_string() +
                     " inconsistent with expected " + out_shape.to_string());
  }
  const int out_h = out_shape.height;
  const int out_w = out_shape.width;
  const int spatial = out_h * out_w;
  const int patch = input.channels() * p.kernel_h * p.kernel_w;
  const std::size_t col_size = static_cast<std::size_t>(patch) * spatial;
  const std::size_t w_size = weights.count();
  const std::size_t in_item = input.shape().item_count();
  const std::size_t out_item = out_shape.item_count();
  // Workspace: patch matrix, weight gradient, one image gradient. Gradients
  // are summed there first and added to the diff planes once, so repeated
  // backward calls accumulate exactly.
  const std::size_t need = col_size + w_size + in_item;
  if (col.size() < need) col.resize(need);
  std::span<Dtype> col_span(col.data(), col_size);
  std::span<Dtype> w_acc(col.data() + col_size, w_size);
  std::span<Dtype> img_acc(col.data() + col_size + w_size, in_item);

  auto top_diff = output.diff();
  auto in = input.data();
  auto w = weights.data();

  if (bias != nullptr) {
    auto b_diff = bias->mutable_diff();
    for (int o = 0; o < p.num_output; ++o) {
      Dtype sum = 0;
      for (int n = 0; n < input.num(); ++n) {
        const Dtype* row = top_diff.data() + n * out_item +
                           static_cast<std::size_t>(o) * spatial;
        for (int s = 0; s < spatial; ++s) sum += row[s];
      }
      b_diff[o] += sum;
    }
  }

  std::span<Dtype> in_diff;
  if (propagate_down) in_diff = input.mutable_diff();
  for (int n = 0; n < input.num(); ++n) {
    auto top_n = top_diff.subspan(n * out_item, out_item);
    // w_acc(O x patch) += top(O x spatial) * col^T(spatial x patch)
    im2col<Dtype>(in.subspan(n * in_item, in_item), input.channels(),
                  input.height(), input.width(), p, out_h, out_w, col_span);
    be.gemm(Transpose::no, Transpose::yes, p.num_output, patch, spatial,
            Dtype(1), top_n, std::span<const Dtype>(col_span),
            n == 0 ? Dtype(0) : Dtype(1), w_acc);
    if (propagate_down) {
      // col(patch x spatial) = W^T(patch x O) * top(O x spatial)
      be.gemm(Transpose::yes, Transpose::no, patch, spatial, p.num_output,
              Dtype(1), w, top_n, Dtype(0), col_span);
      std::fill(img_acc.begin(), img_acc.end(), Dtype(0));
      col2im_add<Dtype>(col_span, input.channels(), input.height(),
                        input.width(), p, out_h, out_w, img_acc);
      Dtype* dst = in_diff.data() + n * in_item;
      for (std::size_t i = 0; i < in_item; ++i) dst[i] += img_acc[i];
    }
  }
  if (input.num() > 0) {
    auto w_diff = weights.mutable_diff();
    for (std::size_t i = 0; i < w_size; ++i) w_diff[i] += w_acc[i];
  }
}

#define MGRIND_INSTANTIATE(T)                                                   \
  template void im2col<T>(std::span<const T>, int, int, int, const ConvParam&, \
                          int, int, std::span<T>);                              \
  template void col2im_add<T>(std::span<const T>, int, int, int,               \
                              const ConvParam&, int, int, std::span<T>);        \
  template void conv_forward<T>(const Backend&, const Blob<T>&, const Blob<T>&, \
                                const Blob<T>*, const ConvParam&, Blob<T>&,     \
                                std::vector<T>&);                               \
  template void conv_backward<T>(const Backend&, Blob<T>&, bool, Blob<T>&,     \
                                 Blob<T>*, const Blob<T>&, const ConvParam&,    \
                                 std::vector<T>&);
MGRIND_INSTANTIATE(float)
MGRIND_INSTANTIATE(double)
#undef MGRIND_INSTANTIATE

}  // namespace mgrind
