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

#include "mgrind/net/gradient_check.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "mgrind/data/batch_source.hpp"
#include "mgrind/tensor/rng.hpp"

namespace mgrind {

std::size_t GradCheckReport::checked() const {
  std::size_t n = 0;
  for (const auto& e : entries) n += e.checked;
  return n;
}

std::size_t GradCheckReport::skipped() const {
  std::size_t n = 0;
  for (const auto& e : entries) n += e.skipped;
  return n;
}

double relative_error(double analytic, double numeric) {
  const double scale = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
  return std::abs(analytic - numeric) / scale;
}

namespace {

std::vector<std::size_t> pick_coords(std::size_t count, std::size_t cap, std::uint64_t seed,
                                     std::uint32_t tag) {
  std::vector<std::size_t> idx(count);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  if (count <= cap) return idx;
  Rng rng({seed_lo(seed), seed_hi(seed), tag, 0x6c3au});
  for (std::size_t i = 0; i < cap; ++i) {
    const std::size_t j = i + rng.index(static_cast<std::uint32_t>(count - i));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(cap);
  std::sort(idx.begin(), idx.end());
  return idx;
}

// Perturbs coordinate k of `values` by +/-h and evaluates `objective`, which
// must also report the kink signature of that evaluation.
template <typename Eval>
void check_coords(std::span<double> values, std::span<const double> analytic,
                  std::uint64_t base_signature, const std::vector<std::size_t>& coords,
                  const GradCheckOptions& opt, Eval&& objective, GradCheckEntry& entry) {
  for (std::size_t k : coords) {
    const double w0 = values[k];
    values[k] = w0 + opt.step;
    const auto [plus, sig_plus] = objective();
    values[k] = w0 - opt.step;
    const auto [minus, sig_minus] = objective();
    values[k] = w0;
    if (opt.exclude_kinks && (sig_plus != base_signature || sig_minus != base_signature)) {
      ++entry.skipped;
      continue;
    }
    const double numeric = (plus - minus) / (2.0 * opt.step);
    double err = relative_error(analytic[k], numeric);
    if (std::isnan(err)) err = std::numeric_limits<double>::infinity();
    ++entry.checked;
    if (entry.checked == 1 || err > entry.worst_error) {
      entry.worst_error = err;
      entry.worst_index = k;
      entry.analytic = analytic[k];
      entry.numeric = numeric;
    }
  }
}

void finish(GradCheckReport& report, const GradCheckOptions& opt) {
  report.worst_error = 0.0;
  for (const auto& e : report.entries) report.worst_error = std::max(report.worst_error, e.worst_error);
  report.passed = report.worst_error < opt.threshold;
}

}  // namespace

template <typename Dtype>
GradCheckReport gradient_check_net(Net<Dtype>& net, const GradCheckOptions& opt) {
  if (!net.forwarded() && !net.data_layers().empty()) net.forward();

  BuildOptions shadow_opts = net.options();
  shadow_opts.batch_hint.reset();
  shadow_opts.forward_only = false;
  shadow_opts.input_gradients = false;
  std::map<std::string, Batch> replay;
  for (std::size_t i = 0; i < net.num_layers(); ++i) {
    if (net.layer(i).kind() != LayerKind::data) continue;
    Batch b;
    const auto& tops = net.layer_tops(i);
    b.data.reshape(tops[0]->shape());
    b.labels.reshape(tops[1]->shape());
    auto d = b.data.mutable_data();
    auto l = b.labels.mutable_data();
    for (std::size_t k = 0; k < d.size(); ++k) d[k] = static_cast<float>(tops[0]->data()[k]);
    for (std::size_t k = 0; k < l.size(); ++k) l[k] = static_cast<float>(tops[1]->data()[k]);
    replay.emplace(net.layer(i).name(), std::move(b));
  }
  shadow_opts.data_sources = [&replay](const LayerSpec& spec) -> std::shared_ptr<BatchSource> {
    return std::make_shared<ReplaySource>(replay.at(spec.name));
  };
  Net<double> shadow(net.def(), shadow_opts, opt.layer_factory);

  for (std::size_t i = 0; i < net.params().size(); ++i) {
    const auto src = net.params()[i].blob->data();
    auto dst = shadow.params()[i].blob->mutable_data();
    for (std::size_t k = 0; k < dst.size(); ++k) dst[k] = static_cast<double>(src[k]);
  }
  for (const auto& name : net.input_names()) {
    const auto src = net.blob(name).data();
    auto dst = shadow.blob(name).mutable_data();
    for (std::size_t k = 0; k < dst.size(); ++k) dst[k] = static_cast<double>(src[k]);
  }

  shadow.zero_param_diffs();
  shadow.forward();
  const std::uint64_t base_sig = shadow.kink_signature();
  shadow.backward();

  auto objective = [&shadow]() {
    const double loss = shadow.forward();
    return std::pair<double, std::uint64_t>{loss, shadow.kink_signature()};
  };

  GradCheckReport report;
  for (std::size_t i = 0; i < shadow.params().size(); ++i) {
    const auto& p = shadow.params()[i];
    const auto d = p.blob->diff();
    const std::vector<double> analytic(d.begin(), d.end());
    GradCheckEntry entry;
    entry.what = p.layer + "[" + std::to_string(p.index) + "]";
    const auto coords = pick_coords(p.blob->count(), opt.max_coords, opt.seed,
                                    static_cast<std::uint32_t>(i));
    check_coords(p.blob->mutable_data(), analytic, base_sig, coords, opt, objective, entry);
    report.entries.push_back(std::move(entry));
  }
  finish(report, opt);
  return report;
}

GradCheckReport gradient_check_layer(Layer<double>& layer,
                                     const std::vector<Blob<double>*>& bottom,
                                     const std::vector<Blob<double>*>& top,
                                     const GradCheckOptions& opt) {
  GradCheckReport report;
  if (!layer.differentiable()) return report;

  // Snapshot inputs; every evaluation restores them first so in-place layers
  // see the same bottom.
  std::vector<std::vector<double>> inputs;
  for (auto* b : bottom) {
    const auto d = b->data();
    inputs.emplace_back(d.begin(), d.end());
  }
  auto restore = [&] {
    for (std::size_t i = 0; i < bottom.size(); ++i) {
      std::copy(inputs[i].begin(), inputs[i].end(), bottom[i]->mutable_data().begin());
    }
  };

  // Objective weights, drawn once.
  Rng rng({seed_lo(opt.seed), seed_hi(opt.seed), 0x0b7eu});
  std::vector<std::vector<double>> weights;
  restore();
  layer.forward(bottom, top);
  for (auto* t : top) {
    std::vector<double> w(t->count());
    for (auto& v : w) v = rng.uniform(-1.0, 1.0);
    weights.push_back(std::move(w));
  }
  auto objective = [&]() {
    restore();
    layer.forward(bottom, top);
    double sum = 0.0;
    for (std::size_t t = 0; t < top.size(); ++t) {
      const auto d = top[t]->data();
      for (std::size_t k = 0; k < d.size(); ++k) sum += weights[t][k] * d[k];
    }
    return std::pair<double, std::uint64_t>{sum, layer.kink_signature()};
  };

  // Analytic pass.
  objective();
  const std::uint64_t base_sig = layer.kink_signature();
  for (auto* b : bottom) b->zero_diff();
  for (auto& p : layer.params()) p.zero_diff();
  for (std::size_t t = 0; t < top.size(); ++t) {
    std::copy(weights[t].begin(), weights[t].end(), top[t]->mutable_diff().begin());
  }
  std::vector<bool> down(bottom.size());
  for (std::size_t i = 0; i < bottom.size(); ++i) down[i] = layer.accepts_gradient(i);
  layer.backward(top, down, bottom);

  std::vector<std::vector<double>> bottom_grads;
  for (auto* b : bottom) {
    const auto d = b->diff();
    bottom_grads.emplace_back(d.begin(), d.end());
  }
  std::vector<std::vector<double>> param_grads;
  for (auto& p : layer.params()) {
    const auto d = p.diff();
    param_grads.emplace_back(d.begin(), d.end());
  }

  for (std::size_t i = 0; i < bottom.size(); ++i) {
    if (!down[i]) continue;
    GradCheckEntry entry;
    entry.what = "bottom " + std::to_string(i);
    const auto coords =
        pick_coords(inputs[i].size(), opt.max_coords, opt.seed, static_cast<std::uint32_t>(i));
    check_coords(std::span<double>(inputs[i]), bottom_grads[i], base_sig, coords, opt,
                 objective, entry);
    report.entries.push_back(std::move(entry));
  }
  for (std::size_t i = 0; i < layer.params().size(); ++i) {
    GradCheckEntry entry;
    entry.what = "param " + std::to_string(i);
    auto& p = layer.params()[i];
    const auto coords = pick_coords(p.count(), opt.max_coords, opt.seed,
                                    static_cast<std::uint32_t>(100 + i));
    check_coords(p.mutable_data(), param_grads[i], base_sig, coords, opt, objective, entry);
    report.entries.push_back(std::move(entry));
  }
  restore();
  layer.forward(bottom, top);
  finish(report, opt);
  return report;
}

template GradCheckReport gradient_check_net<float>(Net<float>&, const GradCheckOptions&);
template GradCheckReport gradient_check_net<double>(Net<double>&, const GradCheckOptions&);

}  // namespace mgrind
