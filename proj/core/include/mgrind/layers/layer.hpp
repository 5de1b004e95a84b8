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

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "mgrind/layers/layer_spec.hpp"
#include "mgrind/tensor/backend.hpp"
#include "mgrind/tensor/blob.hpp"

namespace mgrind {

class BatchSource;

/// A computation node. setup() shapes the tops and allocates parameters and
/// scratch; forward() maps bottoms to tops; backward() reads top diffs and
/// accumulates into bottom diffs (where propagate_down is set) and parameter
/// diffs.
template <typename Dtype>
class Layer {
 public:
  using Blobs = std::vector<Blob<Dtype>*>;

  explicit Layer(LayerSpec spec) : spec_(std::move(spec)) {}
  virtual ~Layer() = default;

  Layer(const Layer&) = delete;
  Layer& operator=(const Layer&) = delete;

  const LayerSpec& spec() const { return spec_; }
  const std::string& name() const { return spec_.name; }
  LayerKind kind() const { return spec_.kind; }

  virtual void setup(const Blobs& bottom, const Blobs& top) = 0;
  virtual void forward(const Blobs& bottom, const Blobs& top) = 0;
  virtual void backward(const Blobs& top, const std::vector<bool>& propagate_down,
                        const Blobs& bottom) = 0;

  /// False for layers without a gradient (data, accuracy).
  virtual bool differentiable() const { return true; }
  /// Whether bottom i can receive a gradient (labels never do).
  virtual bool accepts_gradient(std::size_t bottom_index) const {
    (void)bottom_index;
    return differentiable();
  }

  /// Digest of the piecewise-linear region selected by the last forward
  /// (ReLU sign mask, max-pool argmax, ...). Zero for smooth layers.
  virtual std::uint64_t kink_signature() const { return 0; }

  /// Learnable blobs, weights before bias.
  std::vector<Blob<Dtype>>& params() { return params_; }
  const std::vector<Blob<Dtype>>& params() const { return params_; }
  const std::vector<FillerSpec>& param_fillers() const { return fillers_; }

  void set_backend(const Backend& backend) { backend_ = &backend; }
  const Backend& backend() const { return *backend_; }

 protected:
  [[noreturn]] void fail_shape(const std::string& what) const;

  LayerSpec spec_;
  std::vector<Blob<Dtype>> params_;
  std::vector<FillerSpec> fillers_;
  const Backend* backend_ = &cpu_backend();
};

/// Resolves a Data layer's parameters into a batch stream.
using DataSourceFactory =
    std::function<std::shared_ptr<BatchSource>(const LayerSpec& spec)>;

template <typename Dtype>
std::unique_ptr<Layer<Dtype>> create_layer(const LayerSpec& spec,
                                           const DataSourceFactory& data_sources);

}  // namespace mgrind
