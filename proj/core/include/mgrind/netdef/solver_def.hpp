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
#include <optional>
#include <string>
#include <string_view>

namespace mgrind {

enum class LrPolicy { fixed, step, inv };

/// Training hyperparameters plus the data sources that feed a net's input
/// declarations. Relative paths are kept verbatim by parse_solverdef and
/// resolved against the solver file's directory by load_solverdef.
struct SolverDef {
  std::string net_path;
  double base_lr = 0.0;
  LrPolicy lr_policy = LrPolicy::fixed;
  double gamma = 0.0;
  int stepsize = 0;
  double power = 0.0;
  double momentum = 0.0;
  double weight_decay = 0.0;
  int max_iter = 0;
  int snapshot_interval = 0;  // 0: only the final snapshot
  std::string snapshot_prefix;
  int test_interval = 500;
  int test_iter = 100;
  int display = 100;
  std::uint64_t seed = 1;

  // Data feeding the "data"/"label" inputs of a net without a Data layer.
  std::string train_images;
  std::string train_labels;
  std::string test_images;
  std::string test_labels;
  double scale = 0.00390625;
  std::string mean_file;
  int test_batch_size = 100;
  bool shuffle = true;
  int prefetch = 0;

  friend bool operator==(const SolverDef&, const SolverDef&) = default;
};

std::string_view lr_policy_name(LrPolicy policy);

/// Flat `key: value` text; throws ParseError (with position) for syntax,
/// unknown keys, missing net_path/base_lr and out-of-range values.
SolverDef parse_solverdef(std::string_view text);

/// Parses a file and makes every relative path absolute against its
/// directory. A missing snapshot_prefix defaults to the file's stem.
SolverDef load_solverdef(const std::filesystem::path& path);

/// Value of MGRIND_SEED when set. Throws ConfigError if it is not an
/// unsigned integer.
std::optional<std::uint64_t> seed_from_env();

}  // namespace mgrind
