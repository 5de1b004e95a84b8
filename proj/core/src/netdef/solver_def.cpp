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

#include "mgrind/netdef/solver_def.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "mgrind/error.hpp"
#include "syntax.hpp"

namespace mgrind {

using syntax::BlockReader;
using syntax::Node;

std::string_view lr_policy_name(LrPolicy policy) {
  switch (policy) {
    case LrPolicy::fixed: return "fixed";
    case LrPolicy::step: return "step";
    case LrPolicy::inv: return "inv";
  }
  return "?";
}

namespace {

void require_range(BlockReader& r, std::string_view key, bool ok, const std::string& rule) {
  if (!ok) throw ParseError(r.field(key)->values[0].pos, std::string(key) + " " + rule);
}

SourcePos key_pos(BlockReader& r, std::string_view key, const std::vector<Node>& nodes) {
  if (const Node* n = r.field(key)) return n->pos;
  return nodes.empty() ? SourcePos{1, 1} : nodes.front().pos;
}

}  // namespace

SolverDef parse_solverdef(std::string_view text) {
  const std::vector<Node> nodes = syntax::parse_tree(text);
  BlockReader r(nodes, "solver definition");
  SolverDef d;
  if (!r.read_string("net_path", d.net_path)) {
    throw ParseError({1, 1}, "solver definition needs 'net_path'");
  }
  if (!r.read_real("base_lr", d.base_lr)) {
    throw ParseError({1, 1}, "solver definition needs 'base_lr'");
  }
  require_range(r, "base_lr", d.base_lr > 0.0, "must be positive");

  std::string policy = "fixed";
  r.read_ident("lr_policy", policy);
  const bool have_gamma = r.read_real("gamma", d.gamma);
  const bool have_step = r.read_int("stepsize", d.stepsize, 1);
  const bool have_power = r.read_real("power", d.power);
  if (policy == "fixed") {
    d.lr_policy = LrPolicy::fixed;
  } else if (policy == "step") {
    d.lr_policy = LrPolicy::step;
    if (!have_step) {
      throw ParseError(key_pos(r, "lr_policy", nodes), "step policy needs 'stepsize'");
    }
    if (!have_gamma) throw ParseError(key_pos(r, "lr_policy", nodes), "step policy needs 'gamma'");
  } else if (policy == "inv") {
    d.lr_policy = LrPolicy::inv;
    if (!have_gamma) throw ParseError(key_pos(r, "lr_policy", nodes), "inv policy needs 'gamma'");
    if (!have_power) throw ParseError(key_pos(r, "lr_policy", nodes), "inv policy needs 'power'");
    require_range(r, "power", d.power > 0.0, "must be positive for the inv policy");
  } else {
    throw ParseError(r.field("lr_policy")->values[0].pos,
                     "unknown lr_policy '" + policy + "' (fixed, step, inv)");
  }
  if (have_gamma) require_range(r, "gamma", d.gamma >= 0.0, "must be non-negative");

  if (r.read_real("momentum", d.momentum)) {
    require_range(r, "momentum", d.momentum >= 0.0 && d.momentum < 1.0, "must lie in [0, 1)");
  }
  if (r.read_real("weight_decay", d.weight_decay)) {
    require_range(r, "weight_decay", d.weight_decay >= 0.0, "must be non-negative");
  }
  r.read_int("max_iter", d.max_iter, 0);
  r.read_int("snapshot_interval", d.snapshot_interval, 0);
  r.read_string("snapshot_prefix", d.snapshot_prefix);
  r.read_int("test_interval", d.test_interval, 0);
  r.read_int("test_iter", d.test_iter, 0);
  r.read_int("display", d.display, 0);
  r.read_u64("seed", d.seed);

  r.read_string("train_images", d.train_images);
  r.read_string("train_labels", d.train_labels);
  r.read_string("test_images", d.test_images);
  r.read_string("test_labels", d.test_labels);
  if (r.read_real("scale", d.scale)) {
    require_range(r, "scale", d.scale > 0.0, "must be positive");
  }
  r.read_string("mean_file", d.mean_file);
  r.read_int("test_batch_size", d.test_batch_size, 1);
  r.read_bool("shuffle", d.shuffle);
  r.read_int("prefetch", d.prefetch, 0);
  r.finish();
  if (d.train_images.empty() != d.train_labels.empty()) {
    throw ParseError({1, 1}, "train_images and train_labels must be given together");
  }
  if (d.test_images.empty() != d.test_labels.empty()) {
    throw ParseError({1, 1}, "test_images and test_labels must be given together");
  }
  return d;
}

SolverDef load_solverdef(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  SolverDef d;
  try {
    d = parse_solverdef(buf.str());
  } catch (const ParseError& e) {
    throw ParseError(e.pos(), path.string() + ": " + e.message());
  }
  const std::filesystem::path dir = path.parent_path();
  auto resolve = [&](std::string& p) {
    if (!p.empty() && std::filesystem::path(p).is_relative()) p = (dir / p).string();
  };
  if (d.snapshot_prefix.empty()) d.snapshot_prefix = path.stem().string();
  resolve(d.net_path);
  resolve(d.snapshot_prefix);
  resolve(d.train_images);
  resolve(d.train_labels);
  resolve(d.test_images);
  resolve(d.test_labels);
  resolve(d.mean_file);
  return d;
}

std::optional<std::uint64_t> seed_from_env() {
  const char* env = std::getenv("MGRIND_SEED");
  if (env == nullptr || *env == '\0') return std::nullopt;
  std::uint64_t v = 0;
  const std::string_view s(env);
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc{} || r.ptr != s.data() + s.size()) {
    throw ConfigError("MGRIND_SEED must be an unsigned integer, got '" + std::string(s) + "'");
  }
  return v;
}

}  // namespace mgrind
