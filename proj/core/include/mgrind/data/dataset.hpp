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
#include <span>
#include <vector>

#include "mgrind/data/idx.hpp"
#include "mgrind/tensor/blob.hpp"

namespace mgrind {

/// Labeled grayscale images held in memory. Immutable after construction
/// and safe to share between threads.
class Dataset {
 public:
  /// Throws ValueError when the counts differ or a label is >= num_classes.
  Dataset(IdxImages images, IdxLabels labels, int num_classes = 10);

  /// Images without labels (every label 0), for feature extraction.
  static Dataset unlabeled(IdxImages images);

  static Dataset load(const std::filesystem::path& images,
                      const std::filesystem::path& labels, int num_classes = 10);

  std::size_t size() const { return static_cast<std::size_t>(images_.count); }
  bool empty() const { return size() == 0; }
  int rows() const { return images_.rows; }
  int cols() const { return images_.cols; }
  int num_classes() const { return num_classes_; }
  std::size_t image_bytes() const {
    return static_cast<std::size_t>(images_.rows) * images_.cols;
  }

  std::span<const std::uint8_t> image(std::size_t i) const {
    return {images_.pixels.data() + i * image_bytes(), image_bytes()};
  }
  int label(std::size_t i) const { return labels_.labels[i]; }

 private:
  Dataset() = default;
  IdxImages images_;
  IdxLabels labels_;
  int num_classes_ = 10;
};

/// Pixel preprocessing: x' = scale * (x - mean). An empty mean means none.
struct TransformParam {
  double scale = 1.0;
  std::vector<float> mean;  // rows * cols when present
};

struct CursorState {
  std::uint64_t epoch = 0;
  std::uint64_t position = 0;  // next index within the epoch permutation

  friend bool operator==(const CursorState&, const CursorState&) = default;
};

/// Walks a dataset in fixed-size batches. Each epoch visits a permutation
/// that is a pure function of (seed, epoch), identity when not shuffling.
/// A batch that runs past the end of an epoch continues with the start of
/// the next epoch's permutation, so every batch has the same size.
class BatchCursor {
 public:
  BatchCursor(std::size_t dataset_size, int batch_size, bool shuffle,
              std::uint64_t seed);

  /// Indices of the next batch; valid until the following call.
  std::span<const std::uint32_t> next();

  CursorState state() const { return state_; }
  void restore(const CursorState& state);

  int batch_size() const { return batch_size_; }
  std::size_t dataset_size() const { return size_; }

  static std::vector<std::uint32_t> epoch_permutation(std::size_t size,
                                                      bool shuffle,
                                                      std::uint64_t seed,
                                                      std::uint64_t epoch);

 private:
  void load_epoch();

  std::size_t size_;
  int batch_size_;
  bool shuffle_;
  std::uint64_t seed_;
  CursorState state_;
  std::uint64_t loaded_epoch_ = ~std::uint64_t{0};
  std::vector<std::uint32_t> perm_;
  std::vector<std::uint32_t> batch_;
};

/// Fills data (B,1,rows,cols) and labels (B,1,1,1) with the cursor's next
/// batch, reshaping only if the shapes differ.
template <typename Dtype>
void next_batch(const Dataset& ds, BatchCursor& cursor,
                const TransformParam& transform, Blob<Dtype>& data,
                Blob<Dtype>& labels);

/// Copies arbitrary dataset items (in order) into a batch; used for
/// sequential passes such as feature extraction.
template <typename Dtype>
void gather_batch(const Dataset& ds, std::span<const std::uint32_t> indices,
                  const TransformParam& transform, Blob<Dtype>& data,
                  Blob<Dtype>& labels);

/// Per-pixel arithmetic mean (accumulated in double). Throws ValueError on
/// an empty dataset.
std::vector<float> compute_mean(const Dataset& ds);

/// Mean image persisted as a single-entry weights file (entry "mean",
/// shape (1,1,rows,cols)).
void save_mean(const std::filesystem::path& path, std::span<const float> mean,
               int rows, int cols);
std::vector<float> load_mean(const std::filesystem::path& path, int rows, int cols);

}  // namespace mgrind
