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

#include "mgrind/c_api.h"

#include <algorithm>
#include <cstring>
#include <memory>
#include <string>

#include "mgrind/error.hpp"
#include "mgrind/net/net.hpp"
#include "mgrind/netdef/netdef.hpp"
#include "mgrind/netdef/solver_def.hpp"
#include "mgrind/solver/solver.hpp"

struct mgrind_net {
  std::unique_ptr<mgrind::Net<float>> net;
};

struct mgrind_solver {
  std::unique_ptr<mgrind::Solver> solver;
};

namespace {

thread_local std::string g_last_error;

template <typename F>
mgrind_status guarded(F&& f) {
  g_last_error.clear();
  try {
    f();
    return MGRIND_OK;
  } catch (const mgrind::UsageError& e) {
    g_last_error = e.what();
    return MGRIND_ERR_USAGE;
  } catch (const mgrind::IoError& e) {
    g_last_error = e.what();
    return MGRIND_ERR_IO;
  } catch (const mgrind::ParseError& e) {
    g_last_error = e.what();
    return MGRIND_ERR_PARSE;
  } catch (const mgrind::FormatError& e) {
    g_last_error = e.what();
    return MGRIND_ERR_FORMAT;
  } catch (const mgrind::ShapeError& e) {
    g_last_error = e.what();
    return MGRIND_ERR_SHAPE;
  } catch (const mgrind::ConfigError& e) {
    g_last_error = e.what();
    return MGRIND_ERR_CONFIG;
  } catch (const mgrind::ValueError& e) {
    g_last_error = e.what();
    return MGRIND_ERR_VALUE;
  } catch (const mgrind::DivergenceError& e) {
    g_last_error = e.what();
    return MGRIND_ERR_DIVERGENCE;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return MGRIND_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown failure";
    return MGRIND_ERR_INTERNAL;
  }
}

void require(const void* p, const char* what) {
  if (p == nullptr) throw mgrind::UsageError(std::string(what) + " is null");
}

mgrind::Net<float>& live(mgrind_net* h) {
  require(h, "net handle");
  if (!h->net) throw mgrind::UsageError("net handle is closed");
  return *h->net;
}

mgrind::Solver& live(mgrind_solver* h) {
  require(h, "solver handle");
  return *h->solver;
}

void write_shape(const mgrind::Shape4& s, int shape[4]) {
  shape[0] = s.num;
  shape[1] = s.channels;
  shape[2] = s.height;
  shape[3] = s.width;
}

void run_forward(mgrind::Net<float>& net, const float* data, const int shape[4]) {
  require(shape, "shape");
  if (net.input_names().empty()) throw mgrind::UsageError("net has no inputs");
  auto& in = net.blob(net.input_names()[0]);
  const mgrind::Shape4 given{shape[0], shape[1], shape[2], shape[3]};
  if (given != in.shape()) {
    throw mgrind::ShapeError("input shape " + given.to_string() + " does not match '" +
                             net.input_names()[0] + "' " + in.shape().to_string());
  }
  if (in.count() > 0) require(data, "input data");
  auto dst = in.mutable_data();
  std::copy(data, data + dst.size(), dst.begin());
  for (std::size_t i = 1; i < net.input_names().size(); ++i) {
    auto& other = net.blob(net.input_names()[i]);
    if (!other.materialized(mgrind::Plane::data)) other.mutable_data();
  }
  net.forward();
}

void copy_blob(mgrind::Net<float>& net, const char* blob, float* out, size_t capacity) {
  require(blob, "blob name");
  const std::string name(blob);
  if (!net.has_blob(name)) net.extract_features(name);  // throws with valid names
  auto values = net.blob(name).data();
  if (capacity < values.size()) {
    throw mgrind::UsageError("buffer holds " + std::to_string(capacity) + " floats, blob '" +
                             name + "' needs " + std::to_string(values.size()));
  }
  if (!values.empty()) require(out, "output buffer");
  std::copy(values.begin(), values.end(), out);
}

}  // namespace

extern "C" {

const char* mgrind_last_error(void) { return g_last_error.c_str(); }

mgrind_status mgrind_net_load(const char* model_path, const char* weights_path, int batch,
                              mgrind_net** out) {
  return guarded([&] {
    require(model_path, "model path");
    require(out, "output handle");
    *out = nullptr;
    mgrind::BuildOptions opts;
    opts.forward_only = true;
    opts.base_dir = std::filesystem::path(model_path).parent_path();
    if (batch > 0) opts.batch_hint = batch;
    if (batch < 0) throw mgrind::UsageError("batch must be >= 0");
    auto net = std::make_unique<mgrind::Net<float>>(mgrind::load_netdef(model_path), opts);
    if (weights_path != nullptr) net->load_weights(std::filesystem::path(weights_path));
    *out = new mgrind_net{std::move(net)};
  });
}

mgrind_status mgrind_net_close(mgrind_net* h) {
  return guarded([&] {
    live(h);
    h->net.reset();
  });
}

void mgrind_net_free(mgrind_net* h) { delete h; }

mgrind_status mgrind_net_num_inputs(mgrind_net* h, int* count) {
  return guarded([&] {
    auto& net = live(h);
    require(count, "count");
    *count = static_cast<int>(net.input_names().size());
  });
}

mgrind_status mgrind_net_input_shape(mgrind_net* h, int index, int shape[4]) {
  return guarded([&] {
    auto& net = live(h);
    require(shape, "shape");
    if (index < 0 || static_cast<std::size_t>(index) >= net.input_names().size()) {
      throw mgrind::UsageError("input index " + std::to_string(index) + " out of range");
    }
    write_shape(net.blob(net.input_names()[index]).shape(), shape);
  });
}

mgrind_status mgrind_net_forward(mgrind_net* h, const float* data, const int shape[4]) {
  return guarded([&] { run_forward(live(h), data, shape); });
}

mgrind_status mgrind_net_blob_shape(mgrind_net* h, const char* blob, int shape[4]) {
  return guarded([&] {
    auto& net = live(h);
    require(blob, "blob name");
    require(shape, "shape");
    if (!net.has_blob(blob)) net.extract_features(blob);
    write_shape(net.blob(blob).shape(), shape);
  });
}

mgrind_status mgrind_net_blob_data(mgrind_net* h, const char* blob, float* out,
                                   size_t capacity) {
  return guarded([&] { copy_blob(live(h), blob, out, capacity); });
}

mgrind_status mgrind_net_extract(mgrind_net* h, const float* data, const int shape[4],
                                 const char* blob, float* out, size_t capacity) {
  return guarded([&] {
    auto& net = live(h);
    require(blob, "blob name");
    if (!net.has_blob(blob)) net.extract_features(blob);
    run_forward(net, data, shape);
    copy_blob(net, blob, out, capacity);
  });
}

mgrind_status mgrind_solver_create(const char* solver_path, mgrind_solver** out) {
  return guarded([&] {
    require(solver_path, "solver path");
    require(out, "output handle");
    *out = nullptr;
    mgrind::SolverDef def = mgrind::load_solverdef(solver_path);
    if (auto seed = mgrind::seed_from_env()) def.seed = *seed;
    *out = new mgrind_solver{std::make_unique<mgrind::Solver>(std::move(def))};
  });
}

void mgrind_solver_free(mgrind_solver* h) { delete h; }

mgrind_status mgrind_solver_step(mgrind_solver* h, int k, double* losses, int* count) {
  return guarded([&] {
    auto& solver = live(h);
    require(count, "count");
    *count = 0;
    if (k < 0) throw mgrind::UsageError("k must be >= 0");
    if (k > 0) require(losses, "loss buffer");
    for (int i = 0; i < k && !solver.done(); ++i) {
      losses[i] = solver.step_once();
      ++*count;
    }
  });
}

mgrind_status mgrind_solver_iter(mgrind_solver* h, uint64_t* iter) {
  return guarded([&] {
    auto& solver = live(h);
    require(iter, "iter");
    *iter = solver.iter();
  });
}

mgrind_status mgrind_solver_done(mgrind_solver* h, int* done) {
  return guarded([&] {
    auto& solver = live(h);
    require(done, "done");
    *done = solver.done() ? 1 : 0;
  });
}

mgrind_status mgrind_solver_snapshot(mgrind_solver* h, const char* path) {
  return guarded([&] {
    auto& solver = live(h);
    require(path, "path");
    solver.snapshot(path);
  });
}

mgrind_status mgrind_solver_restore(mgrind_solver* h, const char* path) {
  return guarded([&] {
    auto& solver = live(h);
    require(path, "path");
    solver.restore(path);
  });
}

}  // extern "C"
