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

#include "mgrind/net/net.hpp"

#include <algorithm>
#include <set>

#include "mgrind/data/batch_source.hpp"
#include "mgrind/error.hpp"
#include "mgrind/tensor/filler.hpp"
#include "mgrind/tensor/rng.hpp"

namespace mgrind {

std::uint64_t param_seed(std::uint64_t seed, const std::string& layer, int index) {
  Rng rng({seed_lo(seed), seed_hi(seed), name_hash(layer),
           static_cast<std::uint32_t>(index), 0x9a7au});
  const std::uint64_t hi = rng.next_u32();
  return (hi << 32) | rng.next_u32();
}

std::shared_ptr<BatchSource> make_data_source(const LayerSpec& spec,
                                              const std::filesystem::path& base_dir,
                                              std::uint64_t seed) {
  const auto& p = std::get<DataParam>(spec.params);
  auto resolve = [&](const std::string& path) {
    const std::filesystem::path fp(path);
    return fp.is_relative() && !base_dir.empty() ? base_dir / fp : fp;
  };
  auto dataset = std::make_shared<const Dataset>(
      Dataset::load(resolve(p.source), resolve(p.label_source)));
  if (static_cast<std::size_t>(p.batch_size) > dataset->size()) {
    throw ConfigError("data layer '" + spec.name + "': batch_size " +
                      std::to_string(p.batch_size) + " exceeds the " +
                      std::to_string(dataset->size()) + " items of " + p.source);
  }
  TransformParam transform;
  transform.scale = p.scale;
  if (!p.mean_file.empty()) {
    transform.mean = load_mean(resolve(p.mean_file), dataset->rows(), dataset->cols());
  }
  auto source = std::make_unique<DatasetSource>(std::move(dataset), p.batch_size,
                                                std::move(transform), p.shuffle,
                                                param_seed(seed, spec.name, -1));
  if (p.prefetch > 0) {
    return std::make_shared<PrefetchingSource>(std::move(source),
                                               static_cast<std::size_t>(p.prefetch));
  }
  return source;
}

template <typename Dtype>
Net<Dtype>::Net(NetDef def, BuildOptions options, LayerFactory<Dtype> factory)
    : def_(std::move(def)),
      options_(std::move(options)),
      backend_(options_.backend != nullptr ? options_.backend : &cpu_backend()) {
  if (options_.batch_hint) {
    const int batch = *options_.batch_hint;
    if (batch < 1) throw ConfigError("batch hint must be positive");
    for (auto& in : def_.inputs) in.shape.num = batch;
    for (auto& spec : def_.layers) {
      if (auto* p = std::get_if<DataParam>(&spec.params)) p->batch_size = batch;
    }
  }
  validate_netdef(def_);
  wiring_ = resolve_wiring(def_);
  build(factory);
}

template <typename Dtype>
Blob<Dtype>* Net<Dtype>::storage_for(const std::string& name) {
  if (const auto it = blob_index_.find(name); it != blob_index_.end()) {
    return blobs_[it->second].get();
  }
  blob_index_[name] = blobs_.size();
  blob_names_.push_back(name);
  blobs_.push_back(std::make_unique<Blob<Dtype>>());
  return blobs_.back().get();
}

template <typename Dtype>
void Net<Dtype>::build(const LayerFactory<Dtype>& factory) {
  for (const auto& in : def_.inputs) {
    if (in.shape.count() == 0) {
      throw ShapeError("input '" + in.name + "' has empty shape " + in.shape.to_string());
    }
    storage_for(in.name)->reshape(in.shape);
    input_names_.push_back(in.name);
  }

  DataSourceFactory sources = options_.data_sources;
  if (!sources) {
    sources = [dir = options_.base_dir, seed = options_.seed](const LayerSpec& spec) {
      return make_data_source(spec, dir, seed);
    };
  }

  const std::size_t n = wiring_.order.size();
  std::vector<bool> version_grad(wiring_.versions.size(), false);
  for (std::size_t v = 0; v < wiring_.versions.size(); ++v) {
    if (wiring_.versions[v].producer < 0) version_grad[v] = options_.input_gradients;
  }

  for (std::size_t slot = 0; slot < n; ++slot) {
    const std::size_t l = wiring_.order[slot];
    const LayerSpec& spec = def_.layers[l];
    std::unique_ptr<Layer<Dtype>> layer;
    if (factory) layer = factory(spec);
    if (!layer) layer = create_layer<Dtype>(spec, sources);
    layer->set_backend(*backend_);

    std::vector<Blob<Dtype>*> bottom;
    std::vector<Blob<Dtype>*> top;
    for (const auto& b : spec.bottoms) bottom.push_back(storage_for(b));
    for (const auto& t : spec.tops) top.push_back(storage_for(t));
    layer->setup(bottom, top);
    for (std::size_t t = 0; t < top.size(); ++t) {
      if (top[t]->count() == 0) {
        throw ShapeError("layer '" + spec.name + "' produces empty blob '" + spec.tops[t] +
                         "' " + top[t]->shape().to_string());
      }
    }
    auto& params = layer->params();
    const auto& fillers = layer->param_fillers();
    for (std::size_t i = 0; i < params.size(); ++i) {
      fill(params[i], fillers[i], param_seed(options_.seed, spec.name, static_cast<int>(i)));
      params_.push_back({spec.name, static_cast<int>(i), &params[i]});
    }

    std::vector<bool> down(bottom.size(), false);
    bool any_down = false;
    for (std::size_t b = 0; b < bottom.size(); ++b) {
      down[b] = layer->accepts_gradient(b) && version_grad[wiring_.bottoms[l][b]];
      any_down = any_down || down[b];
    }
    const bool needs = layer->differentiable() && (any_down || !params.empty());
    for (int v : wiring_.tops[l]) version_grad[v] = needs;

    spec_index_.push_back(l);
    bottoms_.push_back(std::move(bottom));
    tops_.push_back(std::move(top));
    propagate_down_.push_back(std::move(down));
    need_backward_.push_back(needs);
    is_loss_.push_back(is_loss(spec.kind));
    if (is_loss(spec.kind)) loss_names_.push_back(spec.tops[0]);
    layers_.push_back(std::move(layer));
  }

  for (int v : wiring_.outputs()) output_names_.push_back(wiring_.versions[v].name);

  // Reserve every plane now so forward/backward never allocate. Input data
  // planes stay unmaterialized until the caller writes them.
  std::set<std::string> inputs(input_names_.begin(), input_names_.end());
  for (std::size_t i = 0; i < blobs_.size(); ++i) {
    const bool is_input = inputs.count(blob_names_[i]) != 0;
    if (!is_input) blobs_[i]->zero_data();
    if (!options_.forward_only && (!is_input || options_.input_gradients)) {
      blobs_[i]->zero_diff();
      gradient_blobs_.push_back(blobs_[i].get());
    }
  }
  if (!options_.forward_only) {
    for (auto& p : params_) p.blob->zero_diff();
  }
}

template <typename Dtype>
double Net<Dtype>::forward() {
  for (std::size_t i = 0; i < layers_.size(); ++i) forward_layer(i);
  double loss = 0.0;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    if (is_loss_[i]) loss += static_cast<double>(tops_[i][0]->data()[0]);
  }
  return loss;
}

template <typename Dtype>
void Net<Dtype>::forward_layer(std::size_t i) {
  if (i == 0) {
    for (const auto& name : input_names_) {
      if (!blob(name).materialized(Plane::data)) {
        throw ConfigError("input '" + name + "' has not been populated");
      }
    }
  }
  layers_[i]->forward(bottoms_[i], tops_[i]);
  if (i + 1 == layers_.size()) forwarded_ = true;
}

template <typename Dtype>
void Net<Dtype>::begin_backward() {
  if (options_.forward_only) throw ConfigError("net was built forward-only");
  if (!forwarded_) throw ConfigError("backward() called before forward()");
  for (auto* b : gradient_blobs_) b->zero_diff();
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    if (is_loss_[i]) tops_[i][0]->mutable_diff()[0] = Dtype(1);
  }
}

template <typename Dtype>
void Net<Dtype>::backward_layer(std::size_t i) {
  if (need_backward_[i]) layers_[i]->backward(tops_[i], propagate_down_[i], bottoms_[i]);
}

template <typename Dtype>
void Net<Dtype>::backward() {
  begin_backward();
  for (std::size_t i = layers_.size(); i-- > 0;) backward_layer(i);
}

template <typename Dtype>
void Net<Dtype>::zero_param_diffs() {
  for (auto& p : params_) p.blob->zero_diff();
}

template <typename Dtype>
std::optional<std::size_t> Net<Dtype>::layer_index(const std::string& name) const {
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    if (layers_[i]->name() == name) return i;
  }
  return std::nullopt;
}

namespace {

std::string list_names(const std::vector<std::string>& names) {
  std::string out;
  for (const auto& n : names) out += (out.empty() ? "" : ", ") + n;
  return out;
}

}  // namespace

template <typename Dtype>
Blob<Dtype>& Net<Dtype>::blob(const std::string& name) {
  const auto it = blob_index_.find(name);
  if (it == blob_index_.end()) {
    throw ConfigError("unknown blob '" + name + "'; available: " + list_names(blob_names_));
  }
  return *blobs_[it->second];
}

template <typename Dtype>
const Blob<Dtype>& Net<Dtype>::blob(const std::string& name) const {
  return const_cast<Net*>(this)->blob(name);
}

template <typename Dtype>
std::vector<std::string> Net<Dtype>::blob_names() const {
  return blob_names_;
}

template <typename Dtype>
std::optional<std::string> Net<Dtype>::score_blob() const {
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    if (is_loss_[i]) return layers_[i]->spec().bottoms[0];
  }
  return std::nullopt;
}

template <typename Dtype>
std::optional<std::string> Net<Dtype>::label_blob() const {
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    if (is_loss_[i]) return layers_[i]->spec().bottoms[1];
  }
  return std::nullopt;
}

template <typename Dtype>
std::vector<DataLayer<Dtype>*> Net<Dtype>::data_layers() {
  std::vector<DataLayer<Dtype>*> out;
  for (auto& l : layers_) {
    if (auto* d = dynamic_cast<DataLayer<Dtype>*>(l.get())) out.push_back(d);
  }
  return out;
}

template <typename Dtype>
void Net<Dtype>::set_data_hold(bool hold) {
  for (auto* d : data_layers()) d->set_hold(hold);
}

template <typename Dtype>
std::uint64_t Net<Dtype>::kink_signature() const {
  std::uint64_t h = 14695981039346656037ull;
  for (const auto& l : layers_) {
    h ^= l->kink_signature();
    h *= 1099511628211ull;
    h ^= h >> 29;
  }
  return h;
}

template <typename Dtype>
Blob<Dtype> Net<Dtype>::extract_features(const std::string& blob_name) const {
  Blob<Dtype> out(blob(blob_name).shape());
  const auto src = blob(blob_name).data();
  std::copy(src.begin(), src.end(), out.mutable_data().begin());
  return out;
}

template <typename Dtype>
WeightsFile Net<Dtype>::weights() const {
  WeightsFile file;
  for (const auto& p : params_) {
    WeightsEntry e;
    e.layer = p.layer;
    e.index = static_cast<std::uint16_t>(p.index);
    e.shape = p.blob->shape();
    const auto data = p.blob->data();
    e.values.assign(data.begin(), data.end());
    file.entries.push_back(std::move(e));
  }
  return file;
}

template <typename Dtype>
void Net<Dtype>::save_weights(const std::filesystem::path& path) const {
  weights().save(path);
}

namespace {

template <typename Dtype>
void copy_values(const WeightsEntry& e, Blob<Dtype>& blob) {
  auto out = blob.mutable_data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = static_cast<Dtype>(e.values[i]);
}

std::string entry_name(const std::string& layer, int index) {
  return "layer '" + layer + "' blob " + std::to_string(index);
}

}  // namespace

template <typename Dtype>
void Net<Dtype>::load_weights(const WeightsFile& file) {
  std::vector<const WeightsEntry*> matched(params_.size(), nullptr);
  for (const auto& e : file.entries) {
    bool found = false;
    for (std::size_t i = 0; i < params_.size(); ++i) {
      if (params_[i].layer != e.layer || params_[i].index != e.index) continue;
      if (matched[i] != nullptr) {
        throw FormatError("weights file repeats " + entry_name(e.layer, e.index));
      }
      if (params_[i].blob->shape() != e.shape) {
        throw ShapeError(entry_name(e.layer, e.index) + ": weights have shape " +
                         e.shape.to_string() + " but the net expects " +
                         params_[i].blob->shape().to_string());
      }
      matched[i] = &e;
      found = true;
    }
    if (!found) {
      throw ConfigError("weights file has " + entry_name(e.layer, e.index) +
                        ", which the net does not have");
    }
  }
  for (std::size_t i = 0; i < params_.size(); ++i) {
    if (matched[i] == nullptr) {
      throw ConfigError("weights file lacks " + entry_name(params_[i].layer, params_[i].index));
    }
  }
  for (std::size_t i = 0; i < params_.size(); ++i) copy_values(*matched[i], *params_[i].blob);
}

template <typename Dtype>
void Net<Dtype>::load_weights(const std::filesystem::path& path) {
  load_weights(WeightsFile::load(path));
}

template <typename Dtype>
FinetuneReport Net<Dtype>::copy_trained_layers(const WeightsFile& file, bool permissive) {
  FinetuneReport report;
  std::vector<std::pair<Blob<Dtype>*, const WeightsEntry*>> copies;
  std::set<std::string> net_layers;
  for (std::size_t i = 0; i < params_.size();) {
    const std::string& layer = params_[i].layer;
    net_layers.insert(layer);
    std::size_t end = i;
    while (end < params_.size() && params_[end].layer == layer) ++end;

    bool present = false;
    std::size_t in_file = 0;
    for (const auto& e : file.entries) {
      if (e.layer == layer) {
        present = true;
        ++in_file;
      }
    }
    if (!present) {
      report.initialized.push_back(layer);
      i = end;
      continue;
    }
    std::string conflict;
    std::vector<std::pair<Blob<Dtype>*, const WeightsEntry*>> pending;
    if (in_file != end - i) {
      conflict = "layer '" + layer + "': weights hold " + std::to_string(in_file) +
                 " blob(s), the net expects " + std::to_string(end - i);
    }
    for (std::size_t k = i; k < end && conflict.empty(); ++k) {
      const WeightsEntry* e = file.find(layer, static_cast<std::uint16_t>(params_[k].index));
      if (e == nullptr) {
        conflict = entry_name(layer, params_[k].index) + " is missing from the weights";
      } else if (e->shape != params_[k].blob->shape()) {
        conflict = entry_name(layer, params_[k].index) + ": weights have shape " +
                   e->shape.to_string() + " but the net expects " +
                   params_[k].blob->shape().to_string();
      } else {
        pending.emplace_back(params_[k].blob, e);
      }
    }
    if (!conflict.empty()) {
      if (!permissive) throw ShapeError(conflict);
      report.skipped.push_back(layer);
    } else {
      report.copied.push_back(layer);
      copies.insert(copies.end(), pending.begin(), pending.end());
    }
    i = end;
  }
  std::set<std::string> seen;
  for (const auto& e : file.entries) {
    if (net_layers.count(e.layer) == 0 && seen.insert(e.layer).second) {
      report.unused.push_back(e.layer);
    }
  }
  for (auto& [blob, entry] : copies) copy_values(*entry, *blob);
  return report;
}

template class Net<float>;
template class Net<double>;

}  // namespace mgrind
