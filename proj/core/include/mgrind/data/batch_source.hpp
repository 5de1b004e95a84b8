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

#include <condition_variable>
#include <cstddef>
#include <deque>
#include <exception>
#include <memory>
#include <mutex>
#include <thread>

#include "mgrind/data/dataset.hpp"

namespace mgrind {

struct Batch {
  Blob<float> data;    // (B,1,H,W)
  Blob<float> labels;  // (B,1,1,1)
  CursorState after;   // cursor position once this batch is consumed
};

/// Ordered stream of mini-batches.
class BatchSource {
 public:
  virtual ~BatchSource() = default;

  virtual Shape4 data_shape() const = 0;
  Shape4 label_shape() const { return {data_shape().num, 1, 1, 1}; }

  /// Writes the next batch into `out`, reusing its storage.
  virtual void next(Batch& out) = 0;

  /// Cursor position after the last batch returned by next().
  virtual CursorState state() const = 0;
  /// Rewinds or fast-forwards; the following next() continues from `state`.
  virtual void restore(const CursorState& state) = 0;
};

/// Synchronous source over an in-memory dataset.
class DatasetSource final : public BatchSource {
 public:
  DatasetSource(std::shared_ptr<const Dataset> dataset, int batch_size,
                TransformParam transform, bool shuffle, std::uint64_t seed);

  Shape4 data_shape() const override;
  void next(Batch& out) override;
  CursorState state() const override { return cursor_.state(); }
  void restore(const CursorState& state) override { cursor_.restore(state); }

  const Dataset& dataset() const { return *dataset_; }

 private:
  std::shared_ptr<const Dataset> dataset_;
  TransformParam transform_;
  BatchCursor cursor_;
};

/// Serves one fixed batch forever; its cursor never moves.
class ReplaySource final : public BatchSource {
 public:
  explicit ReplaySource(Batch batch) : batch_(std::move(batch)) {}

  Shape4 data_shape() const override { return batch_.data.shape(); }
  void next(Batch& out) override {
    out.data.copy_from(batch_.data);
    out.labels.copy_from(batch_.labels);
    out.after = batch_.after;
  }
  CursorState state() const override { return batch_.after; }
  void restore(const CursorState&) override {}

 private:
  Batch batch_;
};

/// Runs an inner source on a producer thread, buffering at most `capacity`
/// ready batches. Delivery order is exactly the inner source's order. A
/// producer failure is rethrown from the next call to next(). Consumed
/// batches are recycled, so steady-state operation does not allocate.
class PrefetchingSource final : public BatchSource {
 public:
  PrefetchingSource(std::unique_ptr<BatchSource> inner, std::size_t capacity);
  ~PrefetchingSource() override;

  PrefetchingSource(const PrefetchingSource&) = delete;
  PrefetchingSource& operator=(const PrefetchingSource&) = delete;

  Shape4 data_shape() const override { return shape_; }
  void next(Batch& out) override;
  CursorState state() const override;
  void restore(const CursorState& state) override;

 private:
  void start();
  void stop();
  void produce(std::stop_token token);

  std::unique_ptr<BatchSource> inner_;
  const std::size_t capacity_;
  const Shape4 shape_;

  mutable std::mutex mu_;
  std::condition_variable_any cv_;
  std::deque<Batch> ready_;
  std::deque<Batch> free_;
  std::exception_ptr error_;
  CursorState consumed_;
  std::jthread worker_;
};

}  // namespace mgrind
