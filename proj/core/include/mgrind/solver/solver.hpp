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
#include <iosfwd>
#include <memory>
#include <optional>
#include <vector>

#include "mgrind/data/batch_source.hpp"
#include "mgrind/net/net.hpp"
#include "mgrind/netdef/solver_def.hpp"

namespace mgrind {

/// fixed: base; step: base * gamma^floor(iter/stepsize);
/// inv: base * (1 + gamma*iter)^-power. Evaluated in double.
double lr_at_iter(const SolverDef& def, std::uint64_t iter);

/// One heavy-ball update on a parameter with gradient in its diff plane:
/// g' = g + decay*w; v = momentum*v - lr*g'; w = w + v.
template <typename Dtype>
void sgd_update(Blob<Dtype>& param, Blob<Dtype>& history, Dtype lr, Dtype momentum,
                Dtype decay);

struct TestResult {
  double loss = 0.0;
  double accuracy = 0.0;
  std::size_t batches = 0;
};

/// Copies a batch into a net's (data, label) input blobs.
template <typename Dtype>
void feed_inputs(Net<Dtype>& net, const Batch& batch);

/// Runs `iterations` forward passes. With `source` the batches are fed into
/// the net's first two inputs; without, the net's data layers supply them.
/// Accuracy is recounted from the first loss layer's scores and labels.
template <typename Dtype>
TestResult test_eval(Net<Dtype>& net, BatchSource* source, int iterations);

struct SolverOptions {
  std::ostream* log = nullptr;  // null: no logging
  /// Replaces the definition read from net_path.
  std::optional<NetDef> net_def;
};

/// SGD driver over a float net.
///
/// Nets with input declarations are fed from the solver's train_images /
/// train_labels (first input: images, second: labels); nets with data
/// layers feed themselves. Testing uses test_images / test_labels on a copy
/// of the definition rebuilt with batch test_batch_size.
class Solver {
 public:
  explicit Solver(SolverDef def, SolverOptions options = {});
  ~Solver();
  Solver(const Solver&) = delete;
  Solver& operator=(const Solver&) = delete;

  const SolverDef& def() const { return def_; }
  Net<float>& net() { return *net_; }
  std::uint64_t iter() const { return iter_; }
  bool done() const { return iter_ >= static_cast<std::uint64_t>(def_.max_iter); }

  /// One SGD iteration; returns the batch loss. DivergenceError on a
  /// non-finite loss.
  double step_once();
  /// Up to k iterations, stopping at max_iter. step(1) k times equals step(k).
  std::vector<double> step(int k);
  /// Full loop: display logs, periodic tests and snapshots, and a final
  /// snapshot (also when max_iter is 0). Returns the last snapshot path.
  std::filesystem::path solve();

  bool has_test() const;
  TestResult test();

  std::filesystem::path snapshot_path(std::uint64_t iter) const;
  void snapshot(const std::filesystem::path& path) const;
  /// Restores weights, momentum, iteration and data cursor. The net must
  /// match the snapshot exactly.
  void restore(const std::filesystem::path& path);

  CursorState train_cursor() const;
  const std::vector<Blob<float>>& history() const { return history_; }

 private:
  void make_train_source(std::uint64_t seed);
  void log_line(const std::string& line) const;

  SolverDef def_;
  SolverOptions options_;
  NetDef net_def_;
  std::unique_ptr<Net<float>> net_;
  std::vector<Blob<float>> history_;
  std::uint64_t iter_ = 0;

  std::shared_ptr<const Dataset> train_set_;
  std::unique_ptr<BatchSource> train_source_;  // null for self-feeding nets
  std::uint64_t train_seed_ = 0;
  Batch batch_;

  std::shared_ptr<const Dataset> test_set_;
  std::unique_ptr<Net<float>> test_net_;
};

/// Snapshot layout: a weights payload followed by
///   "MGRNDSLV", version u32, iter u64, history count u32,
///   per history blob: 4 x u32 dims then f32 values,
///   data cursor: seed u64, epoch u64, position u64.
struct SnapshotState {
  static constexpr std::string_view kMagic = "MGRNDSLV";
  static constexpr std::uint32_t kVersion = 1;

  WeightsFile weights;
  std::uint64_t iter = 0;
  std::vector<Blob<float>> history;
  std::uint64_t seed = 0;
  CursorState cursor;

  void save(const std::filesystem::path& path) const;
  static SnapshotState load(const std::filesystem::path& path);
};

}  // namespace mgrind
