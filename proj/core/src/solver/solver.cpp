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

#include "mgrind/solver/solver.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <ostream>

#include "mgrind/error.hpp"
#include "mgrind/layers/kernels.hpp"
#include "mgrind/net/binary_io.hpp"

namespace mgrind {

double lr_at_iter(const SolverDef& def, std::uint64_t iter) {
  const double it = static_cast<double>(iter);
  switch (def.lr_policy) {
    case LrPolicy::fixed: return def.base_lr;
    case LrPolicy::step:
      return def.base_lr *
             std::pow(def.gamma, static_cast<double>(iter / static_cast<std::uint64_t>(
                                                                 def.stepsize)));
    case LrPolicy::inv: return def.base_lr * std::pow(1.0 + def.gamma * it, -def.power);
  }
  return def.base_lr;
}

template <typename Dtype>
void sgd_update(Blob<Dtype>& param, Blob<Dtype>& history, Dtype lr, Dtype momentum,
                Dtype decay) {
  if (param.count() != history.count()) {
    throw ShapeError("momentum buffer " + history.shape().to_string() +
                     " does not match parameter " + param.shape().to_string());
  }
  auto w = param.mutable_data();
  const auto g = param.diff();
  auto v = history.mutable_data();
  for (std::size_t i = 0; i < w.size(); ++i) {
    const Dtype grad = g[i] + decay * w[i];
    v[i] = momentum * v[i] - lr * grad;
    w[i] += v[i];
  }
}

template <typename Dtype>
void feed_inputs(Net<Dtype>& net, const Batch& batch) {
  const auto& names = net.input_names();
  if (names.size() < 2) {
    throw ConfigError("net '" + net.name() +
                      "' needs two input declarations (images, labels) to be fed");
  }
  auto copy = [&](const Blob<float>& src, const std::string& name) {
    Blob<Dtype>& dst = net.blob(name);
    if (dst.count() != src.count()) {
      throw ShapeError("input '" + name + "' has shape " + dst.shape().to_string() +
                       " but the batch provides " + src.shape().to_string());
    }
    const auto s = src.data();
    auto d = dst.mutable_data();
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = static_cast<Dtype>(s[i]);
  };
  copy(batch.data, names[0]);
  copy(batch.labels, names[1]);
}

template <typename Dtype>
TestResult test_eval(Net<Dtype>& net, BatchSource* source, int iterations) {
  TestResult result;
  if (iterations <= 0) return result;
  const auto scores = net.score_blob();
  const auto labels = net.label_blob();
  if (!scores || !labels) {
    throw ConfigError("net '" + net.name() + "' has no loss layer to evaluate");
  }
  Batch batch;
  double loss = 0.0;
  double acc = 0.0;
  for (int i = 0; i < iterations; ++i) {
    if (source != nullptr) {
      source->next(batch);
      feed_inputs(net, batch);
    }
    loss += net.forward();
    acc += accuracy(net.blob(*scores), net.blob(*labels));
  }
  result.batches = static_cast<std::size_t>(iterations);
  result.loss = loss / iterations;
  result.accuracy = acc / iterations;
  return result;
}

// ---- snapshot file ---------------------------------------------------------

void SnapshotState::save(const std::filesystem::path& path) const {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot write " + path.string());
  weights.write(os);
  BinaryWriter w(os);
  w.bytes(kMagic);
  w.u32(kVersion);
  w.u64(iter);
  w.u32(static_cast<std::uint32_t>(history.size()));
  for (const auto& h : history) {
    for (int d : h.shape().dims()) w.u32(static_cast<std::uint32_t>(d));
    w.f32s(h.data());
  }
  w.u64(seed);
  w.u64(cursor.epoch);
  w.u64(cursor.position);
  os.flush();
  w.check();
}

SnapshotState SnapshotState::load(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path.string());
  SnapshotState s;
  try {
    s.weights = WeightsFile::read(is);
    BinaryReader r(is, "snapshot solver section");
    if (r.bytes(kMagic.size()) != kMagic) throw FormatError("missing solver section magic");
    const std::uint32_t version = r.u32();
    if (version != kVersion) {
      throw FormatError("unsupported solver section version " + std::to_string(version));
    }
    s.iter = r.u64();
    const std::uint32_t count = r.u32();
    for (std::uint32_t i = 0; i < count; ++i) {
      std::uint32_t dims[4];
      for (auto& d : dims) d = r.u32();
      for (auto d : dims) {
        if (d > 0x7fffffffu) throw FormatError("momentum dimension out of range");
      }
      Shape4 shape{static_cast<int>(dims[0]), static_cast<int>(dims[1]),
                   static_cast<int>(dims[2]), static_cast<int>(dims[3])};
      Blob<float> h(shape);
      r.f32s(h.mutable_data());
      s.history.push_back(std::move(h));
    }
    s.seed = r.u64();
    s.cursor.epoch = r.u64();
    s.cursor.position = r.u64();
    if (is.peek() != std::char_traits<char>::eof()) {
      throw FormatError("trailing bytes after solver section");
    }
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  } catch (const AllocationError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  return s;
}

// ---- solver ----------------------------------------------------------------

namespace {

std::string format_double(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

std::string format_float(float v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

TransformParam make_transform(const SolverDef& def, const Dataset& ds) {
  TransformParam t;
  t.scale = def.scale;
  if (!def.mean_file.empty()) t.mean = load_mean(def.mean_file, ds.rows(), ds.cols());
  return t;
}

}  // namespace

Solver::Solver(SolverDef def, SolverOptions options)
    : def_(std::move(def)), options_(std::move(options)) {
  const std::filesystem::path net_path(def_.net_path);
  net_def_ = options_.net_def ? *options_.net_def : load_netdef(net_path);

  BuildOptions build;
  build.seed = def_.seed;
  build.base_dir = net_path.parent_path();
  net_ = std::make_unique<Net<float>>(net_def_, build);
  if (net_->loss_names().empty()) {
    throw ConfigError("net '" + net_->name() + "' has no loss layer to train");
  }
  for (const auto& p : net_->params()) {
    Blob<float> h(p.blob->shape());
    h.zero_data();
    history_.push_back(std::move(h));
  }

  if (net_->data_layers().empty()) {
    if (def_.train_images.empty()) {
      throw ConfigError("net '" + net_->name() +
                        "' has no data layer, so the solver needs train_images and "
                        "train_labels");
    }
    train_set_ = std::make_shared<const Dataset>(
        Dataset::load(def_.train_images, def_.train_labels));
    make_train_source(def_.seed);
  }
  if (!def_.test_images.empty()) {
    test_set_ = std::make_shared<const Dataset>(
        Dataset::load(def_.test_images, def_.test_labels));
  }
}

Solver::~Solver() = default;

void Solver::make_train_source(std::uint64_t seed) {
  const int batch = net_->blob(net_->input_names().at(0)).num();
  if (static_cast<std::size_t>(batch) > train_set_->size()) {
    throw ConfigError("batch size " + std::to_string(batch) + " exceeds the training set");
  }
  train_source_.reset();
  std::unique_ptr<BatchSource> src = std::make_unique<DatasetSource>(
      train_set_, batch, make_transform(def_, *train_set_), def_.shuffle, seed);
  if (def_.prefetch > 0) {
    src = std::make_unique<PrefetchingSource>(std::move(src),
                                              static_cast<std::size_t>(def_.prefetch));
  }
  train_source_ = std::move(src);
  train_seed_ = seed;
}

void Solver::log_line(const std::string& line) const {
  if (options_.log != nullptr) *options_.log << line << '\n';
}

double Solver::step_once() {
  const double lr = lr_at_iter(def_, iter_);
  net_->zero_param_diffs();
  if (train_source_) {
    train_source_->next(batch_);
    feed_inputs(*net_, batch_);
  }
  const double loss = net_->forward();
  if (!std::isfinite(loss)) {
    throw DivergenceError("loss became " + format_double(loss) + " at iteration " +
                          std::to_string(iter_));
  }
  net_->backward();
  const auto& params = net_->params();
  for (std::size_t i = 0; i < params.size(); ++i) {
    sgd_update(*params[i].blob, history_[i], static_cast<float>(lr),
               static_cast<float>(def_.momentum), static_cast<float>(def_.weight_decay));
  }
  ++iter_;
  return loss;
}

std::vector<double> Solver::step(int k) {
  std::vector<double> losses;
  for (int i = 0; i < k && !done(); ++i) losses.push_back(step_once());
  return losses;
}

bool Solver::has_test() const { return test_set_ != nullptr && def_.test_iter > 0; }

TestResult Solver::test() {
  if (test_set_ == nullptr) throw ConfigError("solver has no test_images/test_labels");
  auto source = std::make_shared<DatasetSource>(test_set_, def_.test_batch_size,
                                                make_transform(def_, *test_set_), false,
                                                def_.seed);
  if (!test_net_) {
    BuildOptions build;
    build.seed = def_.seed;
    build.batch_hint = def_.test_batch_size;
    build.forward_only = true;
    build.base_dir = std::filesystem::path(def_.net_path).parent_path();
    build.data_sources = [this](const LayerSpec&) -> std::shared_ptr<BatchSource> {
      return std::make_shared<DatasetSource>(test_set_, def_.test_batch_size,
                                             make_transform(def_, *test_set_), false,
                                             def_.seed);
    };
    test_net_ = std::make_unique<Net<float>>(net_def_, build);
  }
  for (std::size_t i = 0; i < net_->params().size(); ++i) {
    test_net_->params()[i].blob->copy_from(*net_->params()[i].blob);
  }
  if (!test_net_->data_layers().empty()) {
    for (auto* d : test_net_->data_layers()) d->source().restore({});
    return test_eval(*test_net_, nullptr, def_.test_iter);
  }
  return test_eval(*test_net_, source.get(), def_.test_iter);
}

std::filesystem::path Solver::snapshot_path(std::uint64_t iter) const {
  return def_.snapshot_prefix + "_iter_" + std::to_string(iter) + ".snapshot";
}

CursorState Solver::train_cursor() const {
  if (train_source_) return train_source_->state();
  return net_->data_layers().front()->source().state();
}

void Solver::snapshot(const std::filesystem::path& path) const {
  SnapshotState s;
  s.weights = net_->weights();
  s.iter = iter_;
  s.history = history_;
  s.seed = train_source_ ? train_seed_ : def_.seed;
  s.cursor = train_cursor();
  s.save(path);
}

void Solver::restore(const std::filesystem::path& path) {
  SnapshotState s = SnapshotState::load(path);
  const auto& params = net_->params();
  if (s.history.size() != params.size()) {
    throw ShapeError(path.string() + ": snapshot holds " + std::to_string(s.history.size()) +
                     " momentum blobs, the net has " + std::to_string(params.size()) +
                     " parameters");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (s.history[i].shape() != params[i].blob->shape()) {
      throw ShapeError(path.string() + ": momentum for layer '" + params[i].layer +
                       "' blob " + std::to_string(params[i].index) + " has shape " +
                       s.history[i].shape().to_string() + ", the net expects " +
                       params[i].blob->shape().to_string());
    }
  }
  if (!train_source_ && s.seed != def_.seed) {
    throw ConfigError(path.string() + ": snapshot was taken with seed " +
                      std::to_string(s.seed) + ", the solver uses " +
                      std::to_string(def_.seed));
  }
  net_->load_weights(s.weights);
  history_ = std::move(s.history);
  iter_ = s.iter;
  if (train_source_) {
    if (s.seed != train_seed_) make_train_source(s.seed);
    train_source_->restore(s.cursor);
  } else {
    net_->data_layers().front()->source().restore(s.cursor);
  }
}

std::filesystem::path Solver::solve() {
  std::uint64_t last_snapshot = ~std::uint64_t{0};
  std::uint64_t last_test = ~std::uint64_t{0};
  auto run_test = [&] {
    const TestResult r = test();
    log_line("T" + std::to_string(iter_) + " loss=" + format_double(r.loss) +
             " accuracy=" + format_double(r.accuracy));
    last_test = iter_;
  };
  auto take_snapshot = [&] {
    snapshot(snapshot_path(iter_));
    log_line("S" + std::to_string(iter_));
    last_snapshot = iter_;
  };
  while (!done()) {
    const std::uint64_t it = iter_;
    const double lr = lr_at_iter(def_, it);
    const double loss = step_once();
    if (def_.display > 0 && it % static_cast<std::uint64_t>(def_.display) == 0) {
      log_line("I" + std::to_string(it) + " lr=" + format_double(lr) +
               " loss=" + format_float(static_cast<float>(loss)));
    }
    if (has_test() && def_.test_interval > 0 &&
        iter_ % static_cast<std::uint64_t>(def_.test_interval) == 0) {
      run_test();
    }
    if (def_.snapshot_interval > 0 &&
        iter_ % static_cast<std::uint64_t>(def_.snapshot_interval) == 0) {
      take_snapshot();
    }
  }
  if (has_test() && last_test != iter_ && iter_ > 0) run_test();
  if (last_snapshot != iter_) take_snapshot();
  return snapshot_path(iter_);
}

#define MGRIND_INSTANTIATE(T)                                                        \
  template void sgd_update<T>(Blob<T>&, Blob<T>&, T, T, T);                          \
  template void feed_inputs<T>(Net<T>&, const Batch&);                               \
  template TestResult test_eval<T>(Net<T>&, BatchSource*, int);
MGRIND_INSTANTIATE(float)
MGRIND_INSTANTIATE(double)
#undef MGRIND_INSTANTIATE

}  // namespace mgrind
