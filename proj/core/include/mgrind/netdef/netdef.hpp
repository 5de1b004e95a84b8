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

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "mgrind/error.hpp"
#include "mgrind/layers/layer_spec.hpp"
#include "mgrind/tensor/shape.hpp"

namespace mgrind {

/// A blob fed by the caller rather than by a layer.
struct InputDecl {
  std::string name;
  Shape4 shape;
  SourcePos pos{};

  friend bool operator==(const InputDecl& a, const InputDecl& b) {
    return a.name == b.name && a.shape == b.shape;
  }
};

struct NetDef {
  std::string name;
  std::vector<InputDecl> inputs;
  std::vector<LayerSpec> layers;

  friend bool operator==(const NetDef&, const NetDef&) = default;
};

/// Parses and fully validates a definition. Every failure is a ParseError
/// carrying the line and column of the offending construct.
NetDef parse_netdef(std::string_view text);

/// Reads and parses a file. IoError if unreadable; ParseError messages are
/// prefixed with the path.
NetDef load_netdef(const std::filesystem::path& path);

/// Canonical text: two-space indentation, LF endings, fields in declaration
/// order, defaults omitted.
std::string serialize_netdef(const NetDef& def);

/// Re-runs the semantic checks of parse_netdef on a programmatically built
/// definition.
void validate_netdef(const NetDef& def);

}  // namespace mgrind
