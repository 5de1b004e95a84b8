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

#include <memory>

#include "mgrind/data/batch_source.hpp"
#include "mgrind/layers/kernels.hpp"
#include "mgrind/layers/layer.hpp"

namespace mgrind {

template <typename Dtype>
class ConvolutionLayer : public Layer<Dtype> {
 public:
  using typename Layer<Dtype>::Blobs;
  explicit ConvolutionLayer(LayerSpec spec);

  void setup(const Blobs& bottom, const Blobs& top) override;
  void forward(const Blobs& bottom, const Blobs& top) override;
  void backward(const Blobs& top, const std::vector<bool>& propagate_down,
                const Blobs& bottom) override;

  const ConvParam& param() const { return param_; }

 private:
  ConvParam param_;
  std::vector<Dtype> col_;
};

template <typename Dtype>
class PoolingLayer : public Layer<Dtype> {
 public:
  using typename Layer<Dtype>::Blobs;
  explicit PoolingLayer(LayerSpec spec);

  void setup(const Blobs& bottom, const Blobs& top) override;
  void forward(const Blobs& bottom, const Blobs& top) override;
  void backward(const Blobs& top, const std::vector<bool>& propagate_down,
                const Blobs& bottom) override;
  std::uint64_t kink_signature() const override;

 private:
  PoolParam param_;
  std::vector<std::int32_t> argmax_;
};

template <typename Dtype>
class InnerProductLayer : public Layer<Dtype> {
 public:
  using typename Layer<Dtype>::Blobs;
  explicit InnerProductLayer(LayerSpec spec);

  void setup(const Blobs& bottom, const Blobs& top) override;
  void forward(const Blobs& bottom, const Blobs& top) override;
  void backward(const Blobs& top, const std::vector<bool>& propagate_down,
                const Blobs& bottom) override;

 private:
  InnerProductParam param_;
};

/// ReLU or sigmoid; may run in place.
template <typename Dtype>
class ActivationLayer : public Layer<Dtype> {
 public:
  using typename Layer<Dtype>::Blobs;
  explicit ActivationLayer(LayerSpec spec);

  void setup(const Blobs& bottom, const Blobs& top) override;
  void forward(const Blobs& bottom, const Blobs& top) override;
  void backward(const Blobs& top, const std::vector<bool>& propagate_down,
                const Blobs& bottom) override;
  std::uint64_t kink_signature() const override { return signature_; }

 private:
  Activation activation_;
  std::uint64_t signature_ = 0;
};

template <typename Dtype>
class LRNLayer : public Layer<Dtype> {
 public:
  using typename Layer<Dtype>::Blobs;
  explicit LRNLayer(LayerSpec spec);

  void setup(const Blobs& bottom, const Blobs& top) override;
  void forward(const Blobs& bottom, const Blobs& top) override;
  void backward(const Blobs& top, const std::vector<bool>& propagate_down,
                const Blobs& bottom) override;

 private:
  LRNParam param_;
  Blob<Dtype> scale_;
};

template <typename Dtype>
class EltwiseLayer : public Layer<Dtype> {
 public:
  using typename Layer<Dtype>::Blobs;
  explicit EltwiseLayer(LayerSpec spec);

  void setup(const Blobs& bottom, const Blobs& top) override;
  void forward(const Blobs& bottom, const Blobs& top) override;
  void backward(const Blobs& top, const std::vector<bool>& propagate_down,
                const Blobs& bottom) override;
  std::uint64_t kink_signature() const override;

 private:
  EltwiseParam param_;
  std::vector<std::int32_t> argmax_;
};

/// Softmax or hinge loss. The top is a (1,1,1,1) blob holding the mean loss;
/// its diff is the loss weight applied in backward.
template <typename Dtype>
class LossLayer : public Layer<Dtype> {
 public:
  using typename Layer<Dtype>::Blobs;
  explicit LossLayer(LayerSpec spec);

  void setup(const Blobs& bottom, const Blobs& top) override;
  void forward(const Blobs& bottom, const Blobs& top) override;
  void backward(const Blobs& top, const std::vector<bool>& propagate_down,
                const Blobs& bottom) override;
  bool accepts_gradient(std::size_t bottom_index) const override {
    return bottom_index == 0;
  }
  std::uint64_t kink_signature() const override { return signature_; }

 private:
  std::uint64_t signature_ = 0;
};

template <typename Dtype>
class AccuracyLayer : public Layer<Dtype> {
 public:
  using typename Layer<Dtype>::Blobs;
  explicit AccuracyLayer(LayerSpec spec) : Layer<Dtype>(std::move(spec)) {}

  void setup(const Blobs& bottom, const Blobs& top) override;
  void forward(const Blobs& bottom, const Blobs& top) override;
  void backward(const Blobs&, const std::vector<bool>&, const Blobs&) override {}
  bool differentiable() const override { return false; }
};

/// Pulls batches from a BatchSource into its (data, label) tops. In hold
/// mode it replays the last batch instead of advancing, which keeps inputs
/// fixed across the repeated forwards of a gradient check.
template <typename Dtype>
class DataLayer : public Layer<Dtype> {
 public:
  using typename Layer<Dtype>::Blobs;
  DataLayer(LayerSpec spec, std::shared_ptr<BatchSource> source);

  void setup(const Blobs& bottom, const Blobs& top) override;
  void forward(const Blobs& bottom, const Blobs& top) override;
  void backward(const Blobs&, const std::vector<bool>&, const Blobs&) override {}
  bool differentiable() const override { return false; }

  void set_hold(bool hold) { hold_ = hold; }
  BatchSource& source() { return *source_; }

 private:
  std::shared_ptr<BatchSource> source_;
  Batch staging_;
  bool hold_ = false;
  bool have_batch_ = false;
};

}  // namespace mgrind
