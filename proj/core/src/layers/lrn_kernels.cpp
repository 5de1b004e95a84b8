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
#include <cmath>

#include "mgrind/error.hpp"
#include "mgrind/layers/kernels.hpp"

namespace mgrind {

template <typename Dtype>
void lrn_forward(const Blob<Dtype>& input, const LRNParam& p,
                 Blob<Dtype>& output, Blob<Dtype>& scale) {
  if (p.local_size <= 0 || p.local_size % 2 == 0) {
    throw ConfigError("lrn local_size must be odd and positive");
  }
  if (output.shape() != input.shape()) output.reshape(input.shape());
  if (scale.shape() != input.shape()) scale.reshape(input.shape());
  const int C = input.channels();
  const std::size_t spatial = static_cast<std::size_t>(input.height()) * input.width();
  const int half = (p.local_size - 1) / 2;
  const Dtype alpha_over_n = static_cast<Dtype>(p.alpha / p.local_size);
  const Dtype k = static_cast<Dtype>(p.k);
  const Dtype beta = static_cast<Dtype>(p.beta);
  auto in = input.data();
  auto out = output.mutable_data();
  auto sc = scale.mutable_data();
  for (int n = 0; n < input.num(); ++n) {
    const std::size_t base = static_cast<std::size_t>(n) * C * spatial;
    for (int c = 0; c < C; ++c) {
      const int c0 = std::max(c - half, 0);
      const int c1 = std::min(c + half, C - 1);
      for (std::size_t s = 0; s < spatial; ++s) {
        Dtype sumsq = 0;
        for (int cc = c0; cc <= c1; ++cc) {
          const Dtype v = in[base + cc * spatial + s];
          sumsq += v * v;
        }
        const std::size_t i = base + c * spatial + s;
        sc[i] = k + alpha_over_n * sumsq;
        out[i] = in[i] * std::pow(sc[i], -beta);
      }
    }
  }
}

// d out_c / d in_j = delta_cj * s_c^-beta
//                    - 2 alpha beta / n * in_c * in_j * s_c^(-beta-1)  [j in window(c)]
// so bottom_diff_j = top_j * s_j^-beta
//                    - (2 alpha beta / n) * in_j * sum_{c: j in window(c)} top_c * out_c / s_c.
// Windows are symmetric, so {c : j in window(c)} = window(j).
template <typename Dtype>
void lrn_backward(const Blob<Dtype>& output, const Blob<Dtype>& scale,
                  const LRNParam& p, Blob<Dtype>& input) {
  if (output.shape() != input.shape() || scale.shape() != input.shape()) {
    throw ShapeError("lrn backward: top, scale and bottom shapes differ");
  }
  const int C = input.channels();
  const std::size_t spatial = static_cast<std::size_t>(input.height()) * input.width();
  const int half = (p.local_size - 1) / 2;
  const Dtype beta = static_cast<Dtype>(p.beta);
  const Dtype factor = static_cast<Dtype>(2.0 * p.alpha * p.beta / p.local_size);
  auto in = input.data();
  auto out = output.data();
  auto top = output.diff();
  auto sc = scale.data();
  auto bottom = input.mutable_diff();
  for (int n = 0; n < input.num(); ++n) {
    const std::size_t base = static_cast<std::size_t>(n) * C * spatial;
    for (int j = 0; j < C; ++j) {
      const int c0 = std::max(j - half, 0);
      const int c1 = std::min(j + half, C - 1);
      for (std::size_t s = 0; s < spatial; ++s) {
        Dtype acc = 0;
        for (int c = c0; c <= c1; ++c) {
          const std::size_t ic = base + c * spatial + s;
          acc += top[ic] * out[ic] / sc[ic];
        }
        const std::size_t ij = base + j * spatial + s;
        bottom[ij] += top[ij] * std::pow(sc[ij], -beta) - factor * in[ij] * acc;
      }
    }
  }
}

#define MGRIND_INSTANTIATE(T)                                                 \
  template void lrn_forward<T>(const Blob<T>&, const LRNParam&, Blob<T>&,    \
                               Blob<T>&);                                     \
  template void lrn_backward<T>(const Blob<T>&, const Blob<T>&,              \
                                const LRNParam&, Blob<T>&);
MGRIND_INSTANTIATE(float)
MGRIND_INSTANTIATE(double)
#undef MGRIND_INSTANTIATE

}  // namespace mgrind
