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

#include "mgrind/data/dataset.hpp"

#include <numeric>

#include "mgrind/error.hpp"
#include "mgrind/net/weights_file.hpp"
#include "mgrind/tensor/rng.hpp"

namespace mgrind {

Dataset::Dataset(IdxImages images, IdxLabels labels, int num_classes)
    : images_(std::move(images)), labels_(std::move(labels)), num_classes_(num_classes) {
  if (labels_.labels.size() != static_cast<std::size_t>(images_.count)) {
    throw ValueError("dataset has " + std::to_string(images_.count) + " images but " +
                     std::to_string(labels_.labels.size()) + " labels");
  }
  if (num_classes_ <= 0) throw ValueError("dataset needs at least one class");
  for (std::size_t i = 0; i < labels_.labels.size(); ++i) {
    if (labels_.labels[i] >= num_classes_) {
      throw ValueError("label " + std::to_string(labels_.labels[i]) + " at item " +
                       std::to_string(i) + " is not below class count " +
                       std::to_string(num_classes_));
    }
  }
}

Dataset Dataset::unlabeled(IdxImages images) {
  IdxLabels labels;
  labels.labels.assign(static_cast<std::size_t>(images.count), 0);
  return Dataset(std::move(images), std::move(labels), 1);
}

Dataset Dataset::load(const std::filesystem::path& images,
                      const std::filesystem::path& labels, int num_classes) {
  return Dataset(read_idx_images(images), read_idx_labels(labels), num_classes);
}

BatchCursor::BatchCursor(std::size_t dataset_size, int batch_size, bool shuffle,
                         std::uint64_t seed)
    : size_(dataset_size), batch_size_(batch_size), shuffle_(shuffle), seed_(seed) {
  if (batch_size <= 0) throw ConfigError("batch size must be positive");
  if (static_cast<std::size_t>(batch_size) > dataset_size) {
    throw ConfigError("batch size " + std::to_string(batch_size) +
                      " exceeds dataset size " + std::to_string(dataset_size));
  }
  batch_.resize(static_cast<std::size_t>(batch_size));
}

std::vector<std::uint32_t> BatchCursor::epoch_permutation(std::size_t size,
                                                          bool shuffle,
                                                          std::uint64_t seed,
                                                          std::uint64_t epoch) {
  std::vector<std::uint32_t> perm(size);
  std::iota(perm.begin(), perm.end(), 0u);
  if (!shuffle || size < 2) return perm;
  Rng rng({seed_lo(seed), seed_hi(seed), seed_lo(epoch), seed_hi(epoch), 0x5eedu});
  for (std::size_t i = size - 1; i > 0; --i) {
    const std::uint32_t j = rng.index(static_cast<std::uint32_t>(i + 1));
    std::swap(perm[i], perm[j]);
  }
  return perm;
}

void BatchCursor::load_epoch() {
  if (loaded_epoch_ == state_.epoch) return;
  perm_ = epoch_permutation(size_, shuffle_, seed_, state_.epoch);
  loaded_epoch_ = state_.epoch;
}

std::span<const std::uint32_t> BatchCursor::next() {
  for (auto& slot : batch_) {
    if (state_.position >= size_) {
      ++state_.epoch;
      state_.position = 0;
    }
    load_epoch();
    slot = perm_[state_.position++];
  }
  return batch_;
}

void BatchCursor::restore(const CursorState& state) {
  if (state.position > size_) {
    throw FormatError("cursor position " + std::to_string(state.position) +
                      " beyond dataset size " + std::to_string(size_));
  }
  state_ = state;
}

template <typename Dtype>
void gather_batch(const Dataset& ds, std::span<const std::uint32_t> indices,
                  const TransformParam& transform, Blob<Dtype>& data,
                  Blob<Dtype>& labels) {
  const int B = static_cast<int>(indices.size());
  const Shape4 data_shape{B, 1, ds.rows(), ds.cols()};
  const Shape4 label_shape{B, 1, 1, 1};
  if (data.shape() != data_shape) data.reshape(data_shape);
  if (labels.shape() != label_shape) labels.reshape(label_shape);
  const std::size_t pixels = ds.image_bytes();
  if (!transform.mean.empty() && transform.mean.size() != pixels) {
    throw ShapeError("mean image has " + std::to_string(transform.mean.size()) +
                     " pixels, dataset images have " + std::to_string(pixels));
  }
  auto out = data.mutable_data();
  auto lab = labels.mutable_data();
  const Dtype scale = static_cast<Dtype>(transform.scale);
  for (int b = 0; b < B; ++b) {
    const auto img = ds.image(indices[b]);
    Dtype* dst = out.data() + static_cast<std::size_t>(b) * pixels;
    if (transform.mean.empty()) {
      for (std::size_t i = 0; i < pixels; ++i) dst[i] = scale * static_cast<Dtype>(img[i]);
    } else {
      for (std::size_t i = 0; i < pixels; ++i) {
        dst[i] = scale * (static_cast<Dtype>(img[i]) - static_cast<Dtype>(transform.mean[i]));
      }
    }
    lab[b] = static_cast<Dtype>(ds.label(indices[b]));
  }
}

template <typename Dtype>
void next_batch(const Dataset& ds, BatchCursor& cursor,
                const TransformParam& transform, Blob<Dtype>& data,
                Blob<Dtype>& labels) {
  if (cursor.dataset_size() != ds.size()) {
    throw ConfigError("batch cursor was built for a different dataset");
  }
  gather_batch(ds, cursor.next(), transform, data, labels);
}

std::vector<float> compute_mean(const Dataset& ds) {
  if (ds.empty()) throw ValueError("cannot compute the mean of an empty dataset");
  std::vector<double> sum(ds.image_bytes(), 0.0);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const auto img = ds.image(i);
    for (std::size_t p = 0; p < sum.size(); ++p) sum[p] += img[p];
  }
  std::vector<float> mean(sum.size());
  for (std::size_t p = 0; p < sum.size(); ++p) {
    mean[p] = static_cast<float>(sum[p] / static_cast<double>(ds.size()));
  }
  return mean;
}

void save_mean(const std::filesystem::path& path, std::span<const float> mean,
               int rows, int cols) {
  WeightsFile file;
  WeightsEntry entry;
  entry.layer = "mean";
  entry.shape = {1, 1, rows, cols};
  if (entry.shape.count() != mean.size()) {
    throw ShapeError("mean image size does not match rows*cols");
  }
  entry.values.assign(mean.begin(), mean.end());
  file.entries.push_back(std::move(entry));
  file.save(path);
}

std::vector<float> load_mean(const std::filesystem::path& path, int rows, int cols) {
  const WeightsFile file = WeightsFile::load(path);
  if (file.entries.size() != 1) {
    throw FormatError("mean file '" + path.string() + "' must hold exactly one entry");
  }
  const auto& e = file.entries.front();
  if (e.shape != Shape4{1, 1, rows, cols}) {
    throw ShapeError("mean image " + e.shape.to_string() + " does not match images (1,1," +
                     std::to_string(rows) + "," + std::to_string(cols) + ")");
  }
  return e.values;
}

#define MGRIND_INSTANTIATE(T)                                                    \
  template void gather_batch<T>(const Dataset&, std::span<const std::uint32_t>, \
                                const TransformParam&, Blob<T>&, Blob<T>&);     \
  template void next_batch<T>(const Dataset&, BatchCursor&,                     \
                              const TransformParam&, Blob<T>&, Blob<T>&);
MGRIND_INSTANTIATE(float)
MGRIND_INSTANTIATE(double)
#undef MGRIND_INSTANTIATE

}  // namespace mgrind
