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

#include <vector>

#include "mgrind/error.hpp"
#include "mgrind/layers/kernels.hpp"

namespace mgrind {

Shape4 inner_product_weight_shape(const InnerProductParam& p, const Shape4& input) {
  return {p.num_output, static_cast<int>(input.item_count()), 1, 1};
}

namespace {
template <typename Dtype>
void check_ip_operands(const Blob<Dtype>& input, const Blob<Dtype>& weights,
                       const Blob<Dtype>* bias) {
  const std::size_t fan_in = input.shape().item_count();
  if (weights.num() <= 0 || weights.shape().item_count() != fan_in) {
    throw ShapeError("inner product weights " + weights.shape().to_string() +
                     " do not match input fan-in " + std::to_string(fan_in));
  }
  if (bias != nullptr && bias->count() != static_cast<std::size_t>(weights.num())) {
    throw ShapeError("inner product bias must have num_output elements");
  }
}
}  // namespace

template <typename Dtype>
void inner_product_forward(const Backend& be, const Blob<Dtype>& input,
                           const Blob<Dtype>& weights, const Blob<Dtype>* bias,
                           const InnerProductParam& p, Blob<Dtype>& output) {
  check_ip_operands(input, weights, bias);
  const int N = input.num();
  const int K = weights.num();
  const int D = static_cast<int>(input.shape().item_count());
  if (K != p.num_output) {
    throw ShapeError("inner product weights have " + std::to_string(K) +
                     " rows, num_output is " + std::to_string(p.num_output));
  }
  const Shape4 out_shape{N, K, 1, 1};
  if (output.shape() != out_shape) output.reshape(out_shape);
  auto out = output.mutable_data();
  be.gemm(Transpose::no, Transpose::yes, N, K, D, Dtype(1), input.data(),
          weights.data(), Dtype(0), out);
  if (bias != nullptr) {
    auto b = bias->data();
    for (int n = 0; n < N; ++n) {
      for (int k = 0; k < K; ++k) out[static_cast<std::size_t>(n) * K + k] += b[k];
    }
  }
}

template <typename Dtype>
void inner_product_backward(const Backend& be, Blob<Dtype>& input,
                            bool propagate_down, Blob<Dtype>& weights,
                            Blob<Dtype>* bias, const Blob<Dtype>& output) {
  check_ip_operands(input, weights, bias);
  const int N = input.num();
  const int K = weights.num();
  const int D = static_cast<int>(input.shape().item_count());
  if (output.shape() != Shape4{N, K, 1, 1}) {
    throw ShapeError("inner product top " + output.shape().to_string() +
                     " inconsistent with weights " + weights.shape().to_string());
  }
  auto top = output.diff();
  // Products land in a scratch buffer and are added once, so repeated
  // backward calls accumulate exactly.
  thread_local std::vector<Dtype> scratch;
  auto add_product = [&](Transpose ta, int m, int n, int k, std::span<const Dtype> a,
                         std::span<const Dtype> b, std::span<Dtype> dst) {
    const std::size_t size = static_cast<std::size_t>(m) * n;
    if (scratch.size() < size) scratch.resize(size);
    std::span<Dtype> tmp(scratch.data(), size);
    be.gemm(ta, Transpose::no, m, n, k, Dtype(1), a, b, Dtype(0), tmp);
    for (std::size_t i = 0; i < size; ++i) dst[i] += tmp[i];
  };
  add_product(Transpose::yes, K, D, N, top, input.data(), weights.mutable_diff());
  if (bias != nullptr) {
    auto b = bias->mutable_diff();
    for (int k = 0; k < K; ++k) {
      Dtype sum = 0;
      for (int n = 0; n < N; ++n) sum += top[static_cast<std::size_t>(n) * K + k];
      b[k] += sum;
    }
  }
  if (propagate_down) {
    add_product(Transpose::no, N, D, K, top, weights.data(), input.mutable_diff());
  }
}

#define MGRIND_INSTANTIATE(T)                                                  \
  template void inner_product_forward<T>(const Backend&, const Blob<T>&,      \
                                         const Blob<T>&, const Blob<T>*,       \
                                         const InnerProductParam&, Blob<T>&);  \
  template void inner_product_backward<T>(const Backend&, Blob<T>&, bool,     \
                                          Blob<T>&, Blob<T>*, const Blob<T>&);
MGRIND_INSTANTIATE(float)
MGRIND_INSTANTIATE(double)
#undef MGRIND_INSTANTIATE

}  // namespace mgrind
