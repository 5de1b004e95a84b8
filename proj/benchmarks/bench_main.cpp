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

// Microbenchmarks for the hot paths: gemm, convolution, the data epoch and a
// full LeNet SGD iteration. Each runs 5 repetitions and reports mean and
// stddev; one untimed call precedes the timed loop.

#include <benchmark/benchmark.h>

#include <cstdlib>
#include <filesystem>
#include <memory>
#include <vector>

#include "mgrind/data/batch_source.hpp"
#include "mgrind/layers/kernels.hpp"
#include "mgrind/netdef/solver_def.hpp"
#include "mgrind/solver/solver.hpp"
#include "mgrind/tensor/backend.hpp"
#include "mgrind/tensor/filler.hpp"

namespace {

namespace fs = std::filesystem;
using namespace mgrind;

fs::path mnist_dir() {
  if (const char* env = std::getenv("MGRIND_MNIST_DIR"); env && *env) return env;
  return MGRIND_BENCH_MNIST_DIR;
}

bool have_mnist(benchmark::State& state) {
  if (fs::exists(mnist_dir() / "train-images-idx3-ubyte")) return true;
  state.SkipWithError("MNIST not found");
  return false;
}

void BM_Gemm(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  Blob<float> a(n, n, 1, 1), b(n, n, 1, 1), c(n, n, 1, 1);
  fill(a, FillerSpec::uniform(-1, 1), 1);
  fill(b, FillerSpec::uniform(-1, 1), 2);
  const Backend& be = cpu_backend();
  auto run = [&] {
    be.gemm(Transpose::no, Transpose::no, n, n, n, 1.0f, a.data(), b.data(), 0.0f,
            c.mutable_data());
  };
  run();
  for (auto _ : state) {
    run();
    benchmark::DoNotOptimize(c.data().data());
  }
  state.SetItemsProcessed(state.iterations() * 2LL * n * n * n);
}
BENCHMARK(BM_Gemm)->Arg(64)->Arg(256)->Arg(512)->Repetitions(5)->ReportAggregatesOnly(true);

// LeNet conv1 and conv2 at batch 64: {channels, size, num_output}.
void BM_ConvForward(benchmark::State& state) {
  const int channels = static_cast<int>(state.range(0));
  const int size = static_cast<int>(state.range(1));
  ConvParam p;
  p.num_output = static_cast<int>(state.range(2));
  p.kernel_h = p.kernel_w = 5;
  Blob<float> input(64, channels, size, size);
  Blob<float> weights(Shape4{p.num_output, channels, 5, 5});
  Blob<float> bias(Shape4{p.num_output, 1, 1, 1});
  Blob<float> output;
  fill(input, FillerSpec::uniform(0, 1), 3);
  fill(weights, FillerSpec::xavier(), 4);
  bias.zero_data();
  std::vector<float> col;
  const Backend& be = cpu_backend();
  conv_forward(be, input, weights, &bias, p, output, col);
  for (auto _ : state) {
    conv_forward(be, input, weights, &bias, p, output, col);
    benchmark::DoNotOptimize(output.data().data());
  }
}
BENCHMARK(BM_ConvForward)
    ->Args({1, 28, 20})
    ->Args({20, 12, 50})
    ->Unit(benchmark::kMillisecond)
    ->Repetitions(5)
    ->ReportAggregatesOnly(true);

void BM_ConvBackward(benchmark::State& state) {
  ConvParam p;
  p.num_output = 50;
  p.kernel_h = p.kernel_w = 5;
  Blob<float> input(64, 20, 12, 12);
  Blob<float> weights(Shape4{50, 20, 5, 5});
  Blob<float> bias(Shape4{50, 1, 1, 1});
  Blob<float> output;
  fill(input, FillerSpec::uniform(0, 1), 3);
  fill(weights, FillerSpec::xavier(), 4);
  bias.zero_data();
  std::vector<float> col;
  const Backend& be = cpu_backend();
  conv_forward(be, input, weights, &bias, p, output, col);
  fill(output, FillerSpec::uniform(-1, 1), 5);
  auto run = [&] {
    input.zero_diff();
    weights.zero_diff();
    bias.zero_diff();
    conv_backward(be, input, true, weights, &bias, output, p, col);
  };
  run();
  for (auto _ : state) {
    run();
    benchmark::DoNotOptimize(input.diff().data());
  }
}
BENCHMARK(BM_ConvBackward)->Unit(benchmark::kMillisecond)->Repetitions(5)->ReportAggregatesOnly(true);

// Load plus transform of the full MNIST training epoch.
void BM_DataEpoch(benchmark::State& state) {
  if (!have_mnist(state)) return;
  const fs::path images = mnist_dir() / "train-images-idx3-ubyte";
  const fs::path labels = mnist_dir() / "train-labels-idx1-ubyte";
  TransformParam t;
  t.scale = 1.0 / 256;
  auto epoch = [&] {
    auto ds = std::make_shared<const Dataset>(Dataset::load(images, labels));
    DatasetSource source(ds, 64, t, false, 1);
    Batch batch;
    for (std::size_t b = 0; b < (ds->size() + 63) / 64; ++b) source.next(batch);
    benchmark::DoNotOptimize(batch.data.data().data());
  };
  epoch();
  for (auto _ : state) epoch();
  state.SetBytesProcessed(state.iterations() *
                          static_cast<std::int64_t>(fs::file_size(images) + fs::file_size(labels)));
}
BENCHMARK(BM_DataEpoch)->Unit(benchmark::kMillisecond)->Repetitions(5)->ReportAggregatesOnly(true);

void BM_LenetIteration(benchmark::State& state) {
  if (!have_mnist(state)) return;
  SolverDef def = load_solverdef(fs::path(MGRIND_BENCH_SOURCE_DIR) / "models" / "lenet_solver.solver");
  def.train_images = (mnist_dir() / "train-images-idx3-ubyte").string();
  def.train_labels = (mnist_dir() / "train-labels-idx1-ubyte").string();
  def.test_interval = 0;
  def.display = 0;
  def.max_iter = 1 << 30;
  Solver solver(def);
  solver.step_once();
  for (auto _ : state) benchmark::DoNotOptimize(solver.step_once());
  state.SetItemsProcessed(state.iterations() * 64);
}
BENCHMARK(BM_LenetIteration)->Unit(benchmark::kMillisecond)->Repetitions(5)->ReportAggregatesOnly(true);

}  // namespace

BENCHMARK_MAIN();
