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

#include <cstddef>
#include <string>
#include <vector>

#include "mgrind/netdef/netdef.hpp"

namespace mgrind {

/// One value of a named blob. An in-place layer starts a new version of the
/// name it rewrites; storage is still shared per name.
struct BlobVersion {
  std::string name;
  int producer = -1;  // layer index, or -1 for an input declaration
};

/// Resolved data flow of a NetDef.
///
/// A bottom refers to the newest in-place rewrite of its name that appears
/// earlier in the file, or else to the name's unique plain producer, which
/// may appear anywhere. The layer that rewrites a version in place must be
/// its only reader.
struct Wiring {
  std::vector<BlobVersion> versions;
  std::vector<std::vector<int>> bottoms;    // per layer, version ids
  std::vector<std::vector<int>> tops;       // per layer, version ids
  std::vector<std::vector<int>> consumers;  // per version, layer indices
  std::vector<std::size_t> order;           // topological, file order on ties

  /// Versions nobody reads, in execution order of their producers.
  std::vector<int> outputs() const;
};

/// Throws ParseError for duplicate producers, dangling references, in-place
/// conflicts and cycles (the diagnostic lists the blob chain).
Wiring resolve_wiring(const NetDef& def);

/// Stable topological order of def.layers (indices).
std::vector<std::size_t> toposort(const NetDef& def);

}  // namespace mgrind
