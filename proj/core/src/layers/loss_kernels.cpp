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
void check_labels(const Blob<Dtype>& scores, const Blob<Dtype>& labels) {
  if (labels.count() != static_cast<std::size_t>(scores.num())) {
    throw ShapeError("labels " + labels.shape().to_string() +
                     " need one entry per score row of " + scores.shape().to_string());
  }
  const double classes = static_cast<double>(scores.shape().item_count());
  auto l = labels.data();
  for (std::size_t n = 0; n < l.size(); ++n) {
    const double v = static_cast<double>(l[n]);
    if (!(v >= 0.0 && v < classes) || v != std::floor(v)) {
      throw ValueError("label " + std::to_string(v) + " at row " + std::to_string(n) +
                       " is not a class id in [0, " +
                       std::to_string(static_cast<long long>(classes)) + ")");
    }
  }
}

namespace {

// log(sum_k exp(s_k)) with the max subtracted.
template <typename Dtype>
double log_sum_exp(const Dtype* row, std::size_t K) {
  const double m = static_cast<double>(*std::max_element(row, row + K));
  double sum = 0;
  for (std::size_t k = 0; k < K; ++k) sum += std::exp(static_cast<double>(row[k]) - m);
  return m + std::log(sum);
}

}  // namespace

template <typename Dtype>
double softmax_loss_forward(const Blob<Dtype>& scores, const Blob<Dtype>& labels) {
  check_labels(scores, labels);
  const int N = scores.num();
  if (N == 0) return 0.0;
  const std::size_t K = scores.shape().item_count();
  auto s = scores.data();
  auto l = labels.data();
  double total = 0;
  for (int n = 0; n < N; ++n) {
    const Dtype* row = s.data() + n * K;
    const auto label = static_cast<std::size_t>(l[n]);
    total += log_sum_exp(row, K) - static_cast<double>(row[label]);
  }
  return total / N;
}

template <typename Dtype>
void softmax_loss_backward(Blob<Dtype>& scores, const Blob<Dtype>& labels,
                           Dtype loss_weight) {
  check_labels(scores, labels);
  const int N = scores.num();
  if (N == 0) return;
  const std::size_t K = scores.shape().item_count();
  auto s = scores.data();
  auto l = labels.data();
  auto d = scores.mutable_diff();
  const double w = static_cast<double>(loss_weight) / N;
  for (int n = 0; n < N; ++n) {
    const Dtype* row = s.data() + n * K;
    const double lse = log_sum_exp(row, K);
    const auto label = static_cast<std::size_t>(l[n]);
    for (std::size_t k = 0; k < K; ++k) {
      const double prob = std::exp(static_cast<double>(row[k]) - lse);
      const double g = prob - (k == label ? 1.0 : 0.0);
      d[n * K + k] += static_cast<Dtype>(w * g);
    }
  }
}

template <typename Dtype>
double hinge_loss_forward_backward(Blob<Dtype>& scores, const Blob<Dtype>& labels,
                                   bool with_gradient, Dtype loss_weight) {
  check_labels(scores, labels);
  const int N = scores.num();
  if (N == 0) return 0.0;
  const std::size_t K = scores.shape().item_count();
  auto s = scores.data();
  auto l = labels.data();
  std::span<Dtype> d;
  if (with_gradient) d = scores.mutable_diff();
  const double w = static_cast<double>(loss_weight) / N;
  double total = 0;
  for (int n = 0; n < N; ++n) {
    const auto label = static_cast<std::size_t>(l[n]);
    for (std::size_t k = 0; k < K; ++k) {
      const double y = k == label ? 1.0 : -1.0;
      const double margin = 1.0 - y * static_cast<double>(s[n * K + k]);
      if (margin > 0) {
        total += margin;
        if (with_gradient) d[n * K + k] += static_cast<Dtype>(-y * w);
      }
    }
  }
  return total / N;
}

template <typename Dtype>
double accuracy(const Blob<Dtype>& scores, const Blob<Dtype>& labels) {
  check_labels(scores, labels);
  const int N = scores.num();
  if (N == 0) return 0.0;
  const std::size_t K = scores.shape().item_count();
  auto s = scores.data();
  auto l = labels.data();
  int correct = 0;
  for (int n = 0; n < N; ++n) {
    const Dtype* row = s.data() + n * K;
    // max_element returns the first maximum.
    const auto best = static_cast<std::size_t>(std::max_element(row, row + K) - row);
    if (best == static_cast<std::size_t>(l[n])) ++correct;
  }
  return static_cast<double>(correct) / N;
}

#define MGRIND_INSTANTIATE(T)                                                 \
  template void check_labels<T>(const Blob<T>&, const Blob<T>&);             \
  template double softmax_loss_forward<T>(const Blob<T>&, const Blob<T>&);   \
  template void softmax_loss_backward<T>(Blob<T>&, const Blob<T>&, T);       \
  template double hinge_loss_forward_backward<T>(Blob<T>&, const Blob<T>&,   \
                                                 bool, T);                    \
  template double accuracy<T>(const Blob<T>&, const Blob<T>&);
MGRIND_INSTANTIATE(float)
MGRIND_INSTANTIATE(double)
#undef MGRIND_INSTANTIATE

}  // namespace mgrind
