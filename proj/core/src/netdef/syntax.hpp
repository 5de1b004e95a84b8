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

// Generic key/value tree shared by the .net and .solver readers.

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "mgrind/error.hpp"

namespace mgrind::syntax {

struct Value {
  enum class Type { string, ident, number };
  Type type = Type::ident;
  std::string text;
  SourcePos pos;
};

struct Node {
  std::string key;
  SourcePos pos;
  bool block = false;
  std::vector<Value> values;  // scalar field: one value, or a run of numbers
  std::vector<Node> children;
};

inline constexpr int kMaxDepth = 16;

/// Parses `key: value` fields and `key { ... }` blocks. Throws ParseError.
std::vector<Node> parse_tree(std::string_view text);

/// Reads the fields of one block, rejecting unknown and duplicated keys.
class BlockReader {
 public:
  BlockReader(const std::vector<Node>& nodes, std::string context)
      : nodes_(nodes), used_(nodes.size(), false), context_(std::move(context)) {}

  const Node* field(std::string_view key);
  const Node* block(std::string_view key);
  std::vector<const Node*> repeated(std::string_view key);

  bool read_string(std::string_view key, std::string& out);
  bool read_ident(std::string_view key, std::string& out);
  bool read_int(std::string_view key, int& out, int min_value);
  bool read_u64(std::string_view key, std::uint64_t& out);
  bool read_real(std::string_view key, double& out);
  bool read_bool(std::string_view key, bool& out);

  /// Throws on the first node nobody asked for.
  void finish() const;

  const std::string& context() const { return context_; }

 private:
  const Node* take(std::string_view key, bool want_block);

  const std::vector<Node>& nodes_;
  std::vector<bool> used_;
  std::string context_;
};

const Value& single_value(const Node& node, Value::Type type, const char* what);
int to_int(const Value& v, int min_value);
std::uint64_t to_u64(const Value& v);
double to_real(const Value& v);

/// Double-quoted literal with \" \\ \n \t escapes.
std::string quote(std::string_view s);
/// Shortest decimal string that reads back to the same double.
std::string format_real(double v);

}  // namespace mgrind::syntax
