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

#include "mgrind/data/batch_source.hpp"

#include "mgrind/error.hpp"

namespace mgrind {

DatasetSource::DatasetSource(std::shared_ptr<const Dataset> dataset,
                             int batch_size, TransformParam transform,
                             bool shuffle, std::uint64_t seed)
    : dataset_(std::move(dataset)),
      transform_(std::move(transform)),
      cursor_(dataset_->size(), batch_size, shuffle, seed) {}

Shape4 DatasetSource::data_shape() const {
  return {cursor_.batch_size(), 1, dataset_->rows(), dataset_->cols()};
}

void DatasetSource::next(Batch& out) {
  next_batch(*dataset_, cursor_, transform_, out.data, out.labels);
  out.after = cursor_.state();
}

PrefetchingSource::PrefetchingSource(std::unique_ptr<BatchSource> inner,
                                     std::size_t capacity)
    : inner_(std::move(inner)),
      capacity_(capacity),
      shape_(inner_->data_shape()),
      consumed_(inner_->state()) {
  if (capacity_ == 0) throw ConfigError("prefetch capacity must be at least 1");
  start();
}

PrefetchingSource::~PrefetchingSource() { stop(); }

void PrefetchingSource::start() {
  worker_ = std::jthread([this](std::stop_token token) { produce(token); });
}

void PrefetchingSource::stop() {
  if (worker_.joinable()) {
    worker_.request_stop();
    cv_.notify_all();
    worker_.join();
  }
}

void PrefetchingSource::produce(std::stop_token token) {
  while (!token.stop_requested()) {
    Batch batch;
    {
      std::unique_lock lock(mu_);
      cv_.wait(lock, token, [&] { return ready_.size() < capacity_; });
      if (token.stop_requested()) return;
      if (!free_.empty()) {
        batch = std::move(free_.front());
        free_.pop_front();
      }
    }
    try {
      inner_->next(batch);
    } catch (...) {
      std::lock_guard lock(mu_);
      error_ = std::current_exception();
      cv_.notify_all();
      return;
    }
    std::lock_guard lock(mu_);
    ready_.push_back(std::move(batch));
    cv_.notify_all();
  }
}

void PrefetchingSource::next(Batch& out) {
  std::unique_lock lock(mu_);
  cv_.wait(lock, [&] { return !ready_.empty() || error_ != nullptr; });
  if (ready_.empty()) std::rethrow_exception(error_);
  Batch batch = std::move(ready_.front());
  ready_.pop_front();
  consumed_ = batch.after;
  // Hand the caller's previous storage back to the producer.
  std::swap(out, batch);
  if (batch.data.count() > 0) free_.push_back(std::move(batch));
  cv_.notify_all();
}

CursorState PrefetchingSource::state() const {
  std::lock_guard lock(mu_);
  return consumed_;
}

void PrefetchingSource::restore(const CursorState& state) {
  stop();
  {
    std::lock_guard lock(mu_);
    while (!ready_.empty()) {
      free_.push_back(std::move(ready_.front()));
      ready_.pop_front();
    }
    error_ = nullptr;
    inner_->restore(state);
    consumed_ = state;
  }
  start();
}

}  // namespace mgrind
