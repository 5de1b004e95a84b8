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

// Free-function forms of every layer computation. Layer classes wrap these;
// tests call them directly.
//
// Conventions shared by all backward kernels:
//  * gradients ACCUMULATE into the destination diff planes;
//  * an in-place activation (top and bottom are the same Blob) overwrites
//    the shared diff instead, since accumulation is meaningless there;
//  * loss kernels scale their gradient by `loss_weight` (the loss top's diff).

#include <cstdint>
#include <span>
#include <vector>

#include "mgrind/layers/layer_spec.hpp"
#include "mgrind/tensor/backend.hpp"
#include "mgrind/tensor/blob.hpp"

namespace mgrind {

// ---- convolution -----------------------------------------------------------

/// Output shape under floor sizing; throws ShapeError if the kernel exceeds
/// the padded input.
Shape4 conv_output_shape(const ConvParam& p, const Shape4& input);
Shape4 conv_weight_shape(const ConvParam& p, int in_channels);

/// Patch matrix for one image: rows (c, i, j), columns (y, x).
template <typename Dtype>
void im2col(std::span<const Dtype> image, int channels, int height, int width,
            const ConvParam& p, int out_h, int out_w, std::span<Dtype> col);

/// Inverse scatter of im2col; ADDS into image.
template <typename Dtype>
void col2im_add(std::span<const Dtype> col, int channels, int height,
                int width, const ConvParam& p, int out_h, int out_w,
                std::span<Dtype> image);

/// `col` is scratch of at least C*kh*kw*out_h*out_w elements. `output` is
/// reshaped as needed.
template <typename Dtype>
void conv_forward(const Backend& be, const Blob<Dtype>& input,
                  const Blob<Dtype>& weights, const Blob<Dtype>* bias,
                  const ConvParam& p, Blob<Dtype>& output,
                  std::vector<Dtype>& col);

/// Reads output.diff; accumulates into weights.diff, bias->diff and, when
/// propagate_down, input.diff.
template <typename Dtype>
void conv_backward(const Backend& be, Blob<Dtype>& input, bool propagate_down,
                   Blob<Dtype>& weights, Blob<Dtype>* bias,
                   const Blob<Dtype>& output, const ConvParam& p,
                   std::vector<Dtype>& col);

// ---- pooling ---------------------------------------------------------------

/// Ceiling sizing with the last window clipped to start inside the padded
/// input.
Shape4 pool_output_shape(const PoolParam& p, const Shape4& input);

/// For max pooling `argmax` receives, per output element, the index of the
/// winning input inside its (n, c) plane (first maximum wins). It may be null
/// for average pooling.
template <typename Dtype>
void pool_forward(const Blob<Dtype>& input, const PoolParam& p,
                  Blob<Dtype>& output, std::vector<std::int32_t>* argmax);

template <typename Dtype>
void pool_backward(const Blob<Dtype>& output,
                   const std::vector<std::int32_t>* argmax, const PoolParam& p,
                   Blob<Dtype>& input);

// ---- inner product ---------------------------------------------------------

Shape4 inner_product_weight_shape(const InnerProductParam& p, const Shape4& input);

template <typename Dtype>
void inner_product_forward(const Backend& be, const Blob<Dtype>& input,
                           const Blob<Dtype>& weights, const Blob<Dtype>* bias,
                           const InnerProductParam& p, Blob<Dtype>& output);

template <typename Dtype>
void inner_product_backward(const Backend& be, Blob<Dtype>& input,
                            bool propagate_down, Blob<Dtype>& weights,
                            Blob<Dtype>* bias, const Blob<Dtype>& output);

// ---- activations -----------------------------------------------------------

enum class Activation { relu, sigmoid };

template <typename Dtype>
void activation_forward(const Blob<Dtype>& input, Activation kind,
                        Blob<Dtype>& output);

/// Uses only the output plane (ReLU: output > 0 iff input > 0), so it works
/// when top and bottom are the same blob. ReLU's gradient at 0 is 0.
template <typename Dtype>
void activation_backward(const Blob<Dtype>& output, Activation kind,
                         Blob<Dtype>& input);

// ---- local response normalization -----------------------------------------

/// out = in / (k + alpha/n * sum_{window} in^2)^beta across channels.
/// `scale` receives the parenthesised denominator base.
template <typename Dtype>
void lrn_forward(const Blob<Dtype>& input, const LRNParam& p,
                 Blob<Dtype>& output, Blob<Dtype>& scale);

template <typename Dtype>
void lrn_backward(const Blob<Dtype>& output, const Blob<Dtype>& scale,
                  const LRNParam& p, Blob<Dtype>& input);

// ---- element-wise ----------------------------------------------------------

/// `argmax` (max op only) receives the winning bottom per element.
template <typename Dtype>
void eltwise_forward(std::span<const Blob<Dtype>* const> inputs,
                     const EltwiseParam& p, Blob<Dtype>& output,
                     std::vector<std::int32_t>* argmax);

template <typename Dtype>
void eltwise_backward(const Blob<Dtype>& output,
                      const std::vector<std::int32_t>* argmax,
                      const EltwiseParam& p,
                      std::span<Blob<Dtype>* const> inputs,
                      const std::vector<bool>& propagate_down);

// ---- losses and accuracy ---------------------------------------------------

/// Checks labels are integral classes in [0, K). Throws ValueError.
template <typename Dtype>
void check_labels(const Blob<Dtype>& scores, const Blob<Dtype>& labels);

/// Mean multinomial logistic loss of softmax(scores) (max-subtracted).
template <typename Dtype>
double softmax_loss_forward(const Blob<Dtype>& scores, const Blob<Dtype>& labels);

template <typename Dtype>
void softmax_loss_backward(Blob<Dtype>& scores, const Blob<Dtype>& labels,
                           Dtype loss_weight);

/// One-vs-all L1 hinge; returns the mean loss and, when `with_gradient`,
/// accumulates loss_weight * dloss/dscores into scores.diff.
template <typename Dtype>
double hinge_loss_forward_backward(Blob<Dtype>& scores, const Blob<Dtype>& labels,
                                   bool with_gradient, Dtype loss_weight);

/// Fraction of rows whose argmax (lowest index on ties) equals the label.
template <typename Dtype>
double accuracy(const Blob<Dtype>& scores, const Blob<Dtype>& labels);

}  // namespace mgrind
