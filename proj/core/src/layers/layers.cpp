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

#include "mgrind/layers/layers.hpp"

#include "mgrind/error.hpp"

namespace mgrind {

namespace {

// 64-bit FNV-1a over a sequence of small integers.
class Digest {
 public:
  void add(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
      h_ ^= (v >> (8 * i)) & 0xff;
      h_ *= 1099511628211ull;
    }
  }
  std::uint64_t value() const { return h_; }

 private:
  std::uint64_t h_ = 14695981039346656037ull;
};

template <typename P>
const P& params_of(const LayerSpec& spec) {
  const P* p = std::get_if<P>(&spec.params);
  if (p == nullptr) {
    throw ConfigError("layer '" + spec.name + "' is missing its parameter block");
  }
  return *p;
}

template <typename Dtype>
void copy_cast(std::span<const float> src, std::span<Dtype> dst) {
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = static_cast<Dtype>(src[i]);
}

}  // namespace

template <typename Dtype>
void Layer<Dtype>::fail_shape(const std::string& what) const {
  throw ShapeError("layer '" + spec_.name + "' (" +
                   std::string(layer_kind_name(spec_.kind)) + "): " + what);
}

// ---- convolution -----------------------------------------------------------

template <typename Dtype>
ConvolutionLayer<Dtype>::ConvolutionLayer(LayerSpec spec)
    : Layer<Dtype>(std::move(spec)), param_(params_of<ConvParam>(this->spec_)) {}

template <typename Dtype>
void ConvolutionLayer<Dtype>::setup(const Blobs& bottom, const Blobs& top) {
  const Shape4 in = bottom[0]->shape();
  Shape4 out;
  try {
    out = conv_output_shape(param_, in);
  } catch (const ShapeError& e) {
    this->fail_shape(std::string(e.what()) + " (input " + in.to_string() + ")");
  }
  top[0]->reshape(out);
  this->params_.clear();
  this->fillers_.clear();
  this->params_.emplace_back(conv_weight_shape(param_, in.channels));
  this->fillers_.push_back(param_.weight_filler);
  if (param_.bias_enabled) {
    this->params_.emplace_back(Shape4{param_.num_output, 1, 1, 1});
    this->fillers_.push_back(param_.bias_filler);
  }
  col_.assign(static_cast<std::size_t>(in.channels) * param_.kernel_h *
                  param_.kernel_w * out.height * out.width,
              Dtype(0));
}

template <typename Dtype>
void ConvolutionLayer<Dtype>::forward(const Blobs& bottom, const Blobs& top) {
  const Blob<Dtype>* bias = param_.bias_enabled ? &this->params_[1] : nullptr;
  conv_forward(this->backend(), *bottom[0], this->params_[0], bias, param_,
               *top[0], col_);
}

template <typename Dtype>
void ConvolutionLayer<Dtype>::backward(const Blobs& top,
                                       const std::vector<bool>& propagate_down,
                                       const Blobs& bottom) {
  Blob<Dtype>* bias = param_.bias_enabled ? &this->params_[1] : nullptr;
  conv_backward(this->backend(), *bottom[0], propagate_down[0], this->params_[0],
                bias, *top[0], param_, col_);
}

// ---- pooling ---------------------------------------------------------------

template <typename Dtype>
PoolingLayer<Dtype>::PoolingLayer(LayerSpec spec)
    : Layer<Dtype>(std::move(spec)), param_(params_of<PoolParam>(this->spec_)) {}

template <typename Dtype>
void PoolingLayer<Dtype>::setup(const Blobs& bottom, const Blobs& top) {
  Shape4 out;
  try {
    out = pool_output_shape(param_, bottom[0]->shape());
  } catch (const ShapeError& e) {
    this->fail_shape(std::string(e.what()) + " (input " +
                     bottom[0]->shape().to_string() + ")");
  }
  top[0]->reshape(out);
  if (param_.method == PoolParam::Method::max) argmax_.assign(out.count(), -1);
}

template <typename Dtype>
void PoolingLayer<Dtype>::forward(const Blobs& bottom, const Blobs& top) {
  pool_forward(*bottom[0], param_, *top[0], &argmax_);
}

template <typename Dtype>
void PoolingLayer<Dtype>::backward(const Blobs& top,
                                   const std::vector<bool>& propagate_down,
                                   const Blobs& bottom) {
  if (!propagate_down[0]) return;
  pool_backward(*top[0], &argmax_, param_, *bottom[0]);
}

template <typename Dtype>
std::uint64_t PoolingLayer<Dtype>::kink_signature() const {
  if (param_.method != PoolParam::Method::max) return 0;
  Digest d;
  for (auto a : argmax_) d.add(static_cast<std::uint64_t>(a));
  return d.value();
}

// ---- inner product ---------------------------------------------------------

template <typename Dtype>
InnerProductLayer<Dtype>::InnerProductLayer(LayerSpec spec)
    : Layer<Dtype>(std::move(spec)),
      param_(params_of<InnerProductParam>(this->spec_)) {}

template <typename Dtype>
void InnerProductLayer<Dtype>::setup(const Blobs& bottom, const Blobs& top) {
  const Shape4 in = bottom[0]->shape();
  if (in.item_count() == 0) this->fail_shape("input has no features");
  top[0]->reshape({in.num, param_.num_output, 1, 1});
  this->params_.clear();
  this->fillers_.clear();
  this->params_.emplace_back(inner_product_weight_shape(param_, in));
  this->fillers_.push_back(param_.weight_filler);
  if (param_.bias_enabled) {
    this->params_.emplace_back(Shape4{param_.num_output, 1, 1, 1});
    this->fillers_.push_back(param_.bias_filler);
  }
}

template <typename Dtype>
void InnerProductLayer<Dtype>::forward(const Blobs& bottom, const Blobs& top) {
  const Blob<Dtype>* bias = param_.bias_enabled ? &this->params_[1] : nullptr;
  inner_product_forward(this->backend(), *bottom[0], this->params_[0], bias,
                        param_, *top[0]);
}

template <typename Dtype>
void InnerProductLayer<Dtype>::backward(const Blobs& top,
                                        const std::vector<bool>& propagate_down,
                                        const Blobs& bottom) {
  Blob<Dtype>* bias = param_.bias_enabled ? &this->params_[1] : nullptr;
  inner_product_backward(this->backend(), *bottom[0], propagate_down[0],
                         this->params_[0], bias, *top[0]);
}

// ---- activations -----------------------------------------------------------

template <typename Dtype>
ActivationLayer<Dtype>::ActivationLayer(LayerSpec spec)
    : Layer<Dtype>(std::move(spec)),
      activation_(this->spec_.kind == LayerKind::relu ? Activation::relu
                                                      : Activation::sigmoid) {}

template <typename Dtype>
void ActivationLayer<Dtype>::setup(const Blobs& bottom, const Blobs& top) {
  if (top[0] != bottom[0]) top[0]->reshape(bottom[0]->shape());
}

template <typename Dtype>
void ActivationLayer<Dtype>::forward(const Blobs& bottom, const Blobs& top) {
  activation_forward(*bottom[0], activation_, *top[0]);
  if (activation_ == Activation::relu) {
    Digest d;
    std::uint64_t word = 0;
    int bits = 0;
    for (Dtype v : top[0]->data()) {
      word = (word << 1) | (v > Dtype(0) ? 1u : 0u);
      if (++bits == 64) {
        d.add(word);
        word = 0;
        bits = 0;
      }
    }
    d.add(word);
    signature_ = d.value();
  }
}

template <typename Dtype>
void ActivationLayer<Dtype>::backward(const Blobs& top,
                                      const std::vector<bool>& propagate_down,
                                      const Blobs& bottom) {
  if (!propagate_down[0]) return;
  activation_backward(*top[0], activation_, *bottom[0]);
}

// ---- LRN -------------------------------------------------------------------

template <typename Dtype>
LRNLayer<Dtype>::LRNLayer(LayerSpec spec)
    : Layer<Dtype>(std::move(spec)), param_(params_of<LRNParam>(this->spec_)) {}

template <typename Dtype>
void LRNLayer<Dtype>::setup(const Blobs& bottom, const Blobs& top) {
  top[0]->reshape(bottom[0]->shape());
  scale_.reshape(bottom[0]->shape());
  scale_.zero_data();
}

template <typename Dtype>
void LRNLayer<Dtype>::forward(const Blobs& bottom, const Blobs& top) {
  lrn_forward(*bottom[0], param_, *top[0], scale_);
}

template <typename Dtype>
void LRNLayer<Dtype>::backward(const Blobs& top,
                               const std::vector<bool>& propagate_down,
                               const Blobs& bottom) {
  if (!propagate_down[0]) return;
  lrn_backward(*top[0], scale_, param_, *bottom[0]);
}

// ---- eltwise ---------------------------------------------------------------

template <typename Dtype>
EltwiseLayer<Dtype>::EltwiseLayer(LayerSpec spec)
    : Layer<Dtype>(std::move(spec)), param_(params_of<EltwiseParam>(this->spec_)) {}

template <typename Dtype>
void EltwiseLayer<Dtype>::setup(const Blobs& bottom, const Blobs& top) {
  const Shape4 shape = bottom[0]->shape();
  for (std::size_t i = 1; i < bottom.size(); ++i) {
    if (bottom[i]->shape() != shape) {
      this->fail_shape("bottom " + std::to_string(i) + " " +
                       bottom[i]->shape().to_string() + " differs from bottom 0 " +
                       shape.to_string());
    }
  }
  top[0]->reshape(shape);
  if (param_.op == EltwiseParam::Op::max) argmax_.assign(shape.count(), 0);
}

template <typename Dtype>
void EltwiseLayer<Dtype>::forward(const Blobs& bottom, const Blobs& top) {
  std::vector<const Blob<Dtype>*> inputs(bottom.begin(), bottom.end());
  eltwise_forward<Dtype>(inputs, param_, *top[0], &argmax_);
}

template <typename Dtype>
void EltwiseLayer<Dtype>::backward(const Blobs& top,
                                   const std::vector<bool>& propagate_down,
                                   const Blobs& bottom) {
  eltwise_backward<Dtype>(*top[0], &argmax_, param_, bottom, propagate_down);
}

template <typename Dtype>
std::uint64_t EltwiseLayer<Dtype>::kink_signature() const {
  if (param_.op != EltwiseParam::Op::max) return 0;
  Digest d;
  for (auto a : argmax_) d.add(static_cast<std::uint64_t>(a));
  return d.value();
}

// ---- losses ----------------------------------------------------------------

template <typename Dtype>
LossLayer<Dtype>::LossLayer(LayerSpec spec) : Layer<Dtype>(std::move(spec)) {}

template <typename Dtype>
void LossLayer<Dtype>::setup(const Blobs& bottom, const Blobs& top) {
  if (bottom[1]->count() != static_cast<std::size_t>(bottom[0]->num())) {
    this->fail_shape("labels " + bottom[1]->shape().to_string() +
                     " need one entry per row of scores " +
                     bottom[0]->shape().to_string());
  }
  top[0]->reshape({1, 1, 1, 1});
}

template <typename Dtype>
void LossLayer<Dtype>::forward(const Blobs& bottom, const Blobs& top) {
  double loss;
  if (this->kind() == LayerKind::softmax_loss) {
    loss = softmax_loss_forward(*bottom[0], *bottom[1]);
  } else {
    loss = hinge_loss_forward_backward(*bottom[0], *bottom[1], false, Dtype(0));
    // Active-margin set.
    Digest d;
    auto s = bottom[0]->data();
    auto l = bottom[1]->data();
    const std::size_t K = bottom[0]->shape().item_count();
    for (std::size_t i = 0; i < s.size(); ++i) {
      const double y = static_cast<std::size_t>(l[i / K]) == i % K ? 1.0 : -1.0;
      d.add(1.0 - y * static_cast<double>(s[i]) > 0 ? 1 : 0);
    }
    signature_ = d.value();
  }
  top[0]->mutable_data()[0] = static_cast<Dtype>(loss);
}

template <typename Dtype>
void LossLayer<Dtype>::backward(const Blobs& top,
                                const std::vector<bool>& propagate_down,
                                const Blobs& bottom) {
  if (!propagate_down[0]) return;
  const Dtype weight = top[0]->diff()[0];
  if (this->kind() == LayerKind::softmax_loss) {
    softmax_loss_backward(*bottom[0], *bottom[1], weight);
  } else {
    hinge_loss_forward_backward(*bottom[0], *bottom[1], true, weight);
  }
}

// ---- accuracy --------------------------------------------------------------

template <typename Dtype>
void AccuracyLayer<Dtype>::setup(const Blobs& bottom, const Blobs& top) {
  if (bottom[1]->count() != static_cast<std::size_t>(bottom[0]->num())) {
    this->fail_shape("labels need one entry per row of scores");
  }
  top[0]->reshape({1, 1, 1, 1});
}

template <typename Dtype>
void AccuracyLayer<Dtype>::forward(const Blobs& bottom, const Blobs& top) {
  top[0]->mutable_data()[0] = static_cast<Dtype>(accuracy(*bottom[0], *bottom[1]));
}

// ---- data ------------------------------------------------------------------

template <typename Dtype>
DataLayer<Dtype>::DataLayer(LayerSpec spec, std::shared_ptr<BatchSource> source)
    : Layer<Dtype>(std::move(spec)), source_(std::move(source)) {
  if (!source_) throw ConfigError("data layer '" + this->name() + "' has no source");
}

template <typename Dtype>
void DataLayer<Dtype>::setup(const Blobs&, const Blobs& top) {
  top[0]->reshape(source_->data_shape());
  top[1]->reshape(source_->label_shape());
  staging_.data.reshape(source_->data_shape());
  staging_.labels.reshape(source_->label_shape());
  staging_.data.zero_data();
  staging_.labels.zero_data();
}

template <typename Dtype>
void DataLayer<Dtype>::forward(const Blobs&, const Blobs& top) {
  if (!(hold_ && have_batch_)) {
    source_->next(staging_);
    have_batch_ = true;
  }
  copy_cast<Dtype>(staging_.data.data(), top[0]->mutable_data());
  copy_cast<Dtype>(staging_.labels.data(), top[1]->mutable_data());
}

// ---- factory ---------------------------------------------------------------

template <typename Dtype>
std::unique_ptr<Layer<Dtype>> create_layer(const LayerSpec& spec,
                                           const DataSourceFactory& data_sources) {
  switch (spec.kind) {
    case LayerKind::data: {
      if (!data_sources) {
        throw ConfigError("no data source available for data layer '" + spec.name + "'");
      }
      return std::make_unique<DataLayer<Dtype>>(spec, data_sources(spec));
    }
    case LayerKind::convolution: return std::make_unique<ConvolutionLayer<Dtype>>(spec);
    case LayerKind::pooling: return std::make_unique<PoolingLayer<Dtype>>(spec);
    case LayerKind::inner_product: return std::make_unique<InnerProductLayer<Dtype>>(spec);
    case LayerKind::relu:
    case LayerKind::sigmoid: return std::make_unique<ActivationLayer<Dtype>>(spec);
    case LayerKind::lrn: return std::make_unique<LRNLayer<Dtype>>(spec);
    case LayerKind::eltwise: return std::make_unique<EltwiseLayer<Dtype>>(spec);
    case LayerKind::softmax_loss:
    case LayerKind::hinge_loss: return std::make_unique<LossLayer<Dtype>>(spec);
    case LayerKind::accuracy: return std::make_unique<AccuracyLayer<Dtype>>(spec);
  }
  throw ConfigError("unknown layer kind for '" + spec.name + "'");
}

#define MGRIND_INSTANTIATE(T)                                                  \
  template class Layer<T>;                                                     \
  template class ConvolutionLayer<T>;                                          \
  template class PoolingLayer<T>;                                              \
  template class InnerProductLayer<T>;                                         \
  template class ActivationLayer<T>;                                           \
  template class LRNLayer<T>;                                                  \
  template class EltwiseLayer<T>;                                              \
  template class LossLayer<T>;                                                 \
  template class AccuracyLayer<T>;                                             \
  template class DataLayer<T>;                                                 \
  template std::unique_ptr<Layer<T>> create_layer<T>(const LayerSpec&,        \
                                                     const DataSourceFactory&);
MGRIND_INSTANTIATE(float)
MGRIND_INSTANTIATE(double)
#undef MGRIND_INSTANTIATE

}  // namespace mgrind
