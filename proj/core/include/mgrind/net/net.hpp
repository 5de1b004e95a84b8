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
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "mgrind/layers/layer.hpp"
#include "mgrind/layers/layers.hpp"
#include "mgrind/net/weights_file.hpp"
#include "mgrind/netdef/graph.hpp"
#include "mgrind/netdef/netdef.hpp"

namespace mgrind {

struct BuildOptions {
  std::uint64_t seed = 1;
  /// Replaces the batch axis of every input declaration and data layer.
  std::optional<int> batch_hint;
  const Backend* backend = nullptr;  // null: CPU
  /// Base for relative paths inside data layers.
  std::filesystem::path base_dir;
  /// Overrides how data layers obtain batches; default reads IDX files.
  DataSourceFactory data_sources;
  /// Whether input declarations receive gradients in backward().
  bool input_gradients = false;
  /// Skip diff-plane reservation; backward() is then unavailable.
  bool forward_only = false;
};

/// Optional hook that can substitute a layer implementation; returning null
/// falls back to the built-in layer.
template <typename Dtype>
using LayerFactory = std::function<std::unique_ptr<Layer<Dtype>>(const LayerSpec&)>;

/// Default data-layer source: loads the IDX pair, applies scale/mean and
/// shuffles with a stream derived from (seed, layer name).
std::shared_ptr<BatchSource> make_data_source(const LayerSpec& spec,
                                              const std::filesystem::path& base_dir,
                                              std::uint64_t seed);

/// Seed for parameter blob `index` of layer `layer` under net seed `seed`.
std::uint64_t param_seed(std::uint64_t seed, const std::string& layer, int index);

struct FinetuneReport {
  std::vector<std::string> copied;
  std::vector<std::string> initialized;
  std::vector<std::string> skipped;  // shape conflicts under permissive mode
  std::vector<std::string> unused;   // file layers absent from the net
};

/// Executable DAG built from a NetDef.
///
/// Construction infers every shape, reserves all blob planes once and fills
/// parameters. forward() and backward() then run without blob allocation.
/// Blob storage is per name, so in-place layers share their blob.
template <typename Dtype>
class Net {
 public:
  struct ParamRef {
    std::string layer;
    int index;
    Blob<Dtype>* blob;
  };

  explicit Net(NetDef def, BuildOptions options = {}, LayerFactory<Dtype> factory = {});
  Net(const Net&) = delete;
  Net& operator=(const Net&) = delete;

  const NetDef& def() const { return def_; }
  const BuildOptions& options() const { return options_; }
  const std::string& name() const { return def_.name; }
  const Backend& backend() const { return *backend_; }

  /// Runs every layer; returns the summed value of the loss layers.
  double forward();
  /// Zeroes non-parameter diffs, seeds loss diffs with 1, runs layers in
  /// reverse. Parameter diffs accumulate; see zero_param_diffs().
  void backward();
  double forward_backward() {
    const double loss = forward();
    backward();
    return loss;
  }
  void zero_param_diffs();
  bool forwarded() const { return forwarded_; }

  // Single-step pieces, for per-layer timing. Running the last layer marks
  // the net as forwarded.
  void forward_layer(std::size_t i);
  void begin_backward();
  void backward_layer(std::size_t i);

  std::size_t num_layers() const { return layers_.size(); }
  /// Layers in execution order.
  Layer<Dtype>& layer(std::size_t i) { return *layers_[i]; }
  const Layer<Dtype>& layer(std::size_t i) const { return *layers_[i]; }
  std::optional<std::size_t> layer_index(const std::string& name) const;

  bool has_blob(const std::string& name) const { return blob_index_.count(name) != 0; }
  Blob<Dtype>& blob(const std::string& name);
  const Blob<Dtype>& blob(const std::string& name) const;
  /// Blob names in creation order.
  std::vector<std::string> blob_names() const;
  const std::vector<std::string>& input_names() const { return input_names_; }
  const std::vector<std::string>& output_names() const { return output_names_; }
  /// Tops of loss layers.
  const std::vector<std::string>& loss_names() const { return loss_names_; }
  /// Blob read by the first loss layer as scores, if any.
  std::optional<std::string> score_blob() const;
  std::optional<std::string> label_blob() const;

  const std::vector<Blob<Dtype>*>& layer_bottoms(std::size_t i) const { return bottoms_[i]; }
  const std::vector<Blob<Dtype>*>& layer_tops(std::size_t i) const { return tops_[i]; }

  /// Parameters in layer execution order, weights before bias.
  const std::vector<ParamRef>& params() const { return params_; }

  std::vector<DataLayer<Dtype>*> data_layers();
  void set_data_hold(bool hold);

  /// Combined kink signature of all layers after the last forward.
  std::uint64_t kink_signature() const;

  /// Detached copy of a blob's data plane. ConfigError lists valid names.
  Blob<Dtype> extract_features(const std::string& blob_name) const;

  WeightsFile weights() const;
  void save_weights(const std::filesystem::path& path) const;
  /// Strict: the file must hold exactly this net's parameters with matching
  /// shapes. On error the net is left unchanged.
  void load_weights(const WeightsFile& file);
  void load_weights(const std::filesystem::path& path);

  /// Copies parameters of layers whose names appear in `file`. Shape
  /// conflicts throw ShapeError unless `permissive`, in which case the layer
  /// keeps its initialization and is reported as skipped.
  FinetuneReport copy_trained_layers(const WeightsFile& file, bool permissive = false);

 private:
  void build(const LayerFactory<Dtype>& factory);
  Blob<Dtype>* storage_for(const std::string& name);

  NetDef def_;
  BuildOptions options_;
  const Backend* backend_;
  Wiring wiring_;

  std::vector<std::unique_ptr<Blob<Dtype>>> blobs_;
  std::vector<std::string> blob_names_;
  std::map<std::string, std::size_t> blob_index_;

  std::vector<std::unique_ptr<Layer<Dtype>>> layers_;
  std::vector<std::size_t> spec_index_;  // execution slot -> def_.layers index
  std::vector<std::vector<Blob<Dtype>*>> bottoms_;
  std::vector<std::vector<Blob<Dtype>*>> tops_;
  std::vector<std::vector<bool>> propagate_down_;
  std::vector<bool> need_backward_;
  std::vector<bool> is_loss_;

  std::vector<ParamRef> params_;
  std::vector<Blob<Dtype>*> gradient_blobs_;  // non-parameter blobs with diffs
  std::vector<std::string> input_names_;
  std::vector<std::string> output_names_;
  std::vector<std::string> loss_names_;
  bool forwarded_ = false;
};

extern template class Net<float>;
extern template class Net<double>;

}  // namespace mgrind
