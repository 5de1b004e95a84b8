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

#include "mgrind/netdef/netdef.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "mgrind/netdef/graph.hpp"
#include "syntax.hpp"

namespace mgrind {

using syntax::BlockReader;
using syntax::Node;
using syntax::Value;

namespace {

// ---- reading ---------------------------------------------------------------

FillerSpec read_filler(const Node& node, const std::string& context) {
  BlockReader r(node.children, context);
  std::string kind;
  if (!r.read_ident("kind", kind)) {
    throw ParseError(node.pos, context + " needs a 'kind'");
  }
  FillerSpec f;
  if (kind == "constant") {
    f = FillerSpec::constant(0.0);
    r.read_real("value", f.value);
  } else if (kind == "uniform") {
    f = FillerSpec::uniform(0.0, 1.0);
    r.read_real("min", f.min);
    r.read_real("max", f.max);
  } else if (kind == "gaussian") {
    f = FillerSpec::gaussian(0.0, 1.0);
    r.read_real("mean", f.mean);
    r.read_real("std", f.std);
  } else if (kind == "xavier") {
    f = FillerSpec::xavier();
  } else {
    throw ParseError(r.field("kind")->values[0].pos,
                     "unknown filler kind '" + kind + "'");
  }
  r.finish();
  try {
    f.validate();
  } catch (const ConfigError& e) {
    throw ParseError(node.pos, context + ": " + e.what());
  }
  return f;
}

void read_filler_field(BlockReader& r, std::string_view key, FillerSpec& out) {
  if (const Node* n = r.block(key)) {
    out = read_filler(*n, std::string(key) + " block");
  }
}

// `kernel` sets both axes; `kernel_h`/`kernel_w` set one each.
void read_pair(BlockReader& r, const std::string& base, int& h, int& w, int min_value) {
  const Node* both = r.field(base);
  const Node* nh = r.field(base + "_h");
  const Node* nw = r.field(base + "_w");
  if (both != nullptr) {
    if (nh != nullptr || nw != nullptr) {
      throw ParseError(both->pos, "'" + base + "' conflicts with '" + base + "_h'/'" +
                                      base + "_w'");
    }
    h = w = syntax::to_int(single_value(*both, Value::Type::number, "an integer"), min_value);
  }
  if (nh != nullptr) {
    h = syntax::to_int(single_value(*nh, Value::Type::number, "an integer"), min_value);
  }
  if (nw != nullptr) {
    w = syntax::to_int(single_value(*nw, Value::Type::number, "an integer"), min_value);
  }
}

ConvParam read_conv(const Node& node) {
  BlockReader r(node.children, "conv block");
  ConvParam p;
  r.read_int("num_output", p.num_output, 1);
  read_pair(r, "kernel", p.kernel_h, p.kernel_w, 1);
  read_pair(r, "stride", p.stride_h, p.stride_w, 1);
  read_pair(r, "pad", p.pad_h, p.pad_w, 0);
  r.read_bool("bias_term", p.bias_enabled);
  read_filler_field(r, "weight_filler", p.weight_filler);
  read_filler_field(r, "bias_filler", p.bias_filler);
  r.finish();
  return p;
}

PoolParam read_pool(const Node& node) {
  BlockReader r(node.children, "pool block");
  PoolParam p;
  std::string method;
  if (r.read_ident("method", method)) {
    if (method == "max") {
      p.method = PoolParam::Method::max;
    } else if (method == "average") {
      p.method = PoolParam::Method::average;
    } else {
      throw ParseError(r.field("method")->values[0].pos,
                       "unknown pooling method '" + method + "' (max, average)");
    }
  }
  read_pair(r, "kernel", p.kernel_h, p.kernel_w, 1);
  read_pair(r, "stride", p.stride_h, p.stride_w, 1);
  read_pair(r, "pad", p.pad_h, p.pad_w, 0);
  r.finish();
  return p;
}

InnerProductParam read_ip(const Node& node) {
  BlockReader r(node.children, "inner_product block");
  InnerProductParam p;
  r.read_int("num_output", p.num_output, 1);
  r.read_bool("bias_term", p.bias_enabled);
  read_filler_field(r, "weight_filler", p.weight_filler);
  read_filler_field(r, "bias_filler", p.bias_filler);
  r.finish();
  return p;
}

LRNParam read_lrn(const Node& node) {
  BlockReader r(node.children, "lrn block");
  LRNParam p;
  r.read_int("local_size", p.local_size, 1);
  r.read_real("alpha", p.alpha);
  r.read_real("beta", p.beta);
  r.read_real("k", p.k);
  r.finish();
  return p;
}

EltwiseParam read_eltwise(const Node& node) {
  BlockReader r(node.children, "eltwise block");
  EltwiseParam p;
  std::string op;
  if (r.read_ident("op", op)) {
    if (op == "sum") {
      p.op = EltwiseParam::Op::sum;
    } else if (op == "product") {
      p.op = EltwiseParam::Op::product;
    } else if (op == "max") {
      p.op = EltwiseParam::Op::max;
    } else {
      throw ParseError(r.field("op")->values[0].pos,
                       "unknown eltwise op '" + op + "' (sum, product, max)");
    }
  }
  for (const Node* n : r.repeated("coeff")) {
    for (const Value& v : n->values) {
      if (v.type != Value::Type::number) {
        throw ParseError(v.pos, "'coeff' expects a number");
      }
      p.coeffs.push_back(syntax::to_real(v));
    }
  }
  r.finish();
  return p;
}

DataParam read_data(const Node& node) {
  BlockReader r(node.children, "data block");
  DataParam p;
  r.read_string("source", p.source);
  r.read_string("label_source", p.label_source);
  r.read_int("batch_size", p.batch_size, 1);
  r.read_real("scale", p.scale);
  r.read_string("mean_file", p.mean_file);
  r.read_bool("shuffle", p.shuffle);
  r.read_int("prefetch", p.prefetch, 0);
  r.finish();
  return p;
}

const char* param_block_name(LayerKind kind) {
  switch (kind) {
    case LayerKind::data: return "data";
    case LayerKind::convolution: return "conv";
    case LayerKind::pooling: return "pool";
    case LayerKind::inner_product: return "inner_product";
    case LayerKind::lrn: return "lrn";
    case LayerKind::eltwise: return "eltwise";
    default: return nullptr;
  }
}

LayerSpec read_layer(const Node& node) {
  BlockReader r(node.children, "layer block");
  LayerSpec spec;
  spec.pos = node.pos;
  if (!r.read_string("name", spec.name)) {
    throw ParseError(node.pos, "layer needs a 'name'");
  }
  if (spec.name.empty()) throw ParseError(r.field("name")->pos, "layer name is empty");
  const std::string ctx = "layer '" + spec.name + "'";
  std::string kind;
  if (!r.read_ident("kind", kind)) throw ParseError(node.pos, ctx + " needs a 'kind'");
  const auto k = layer_kind_from_name(kind);
  if (!k) {
    throw ParseError(r.field("kind")->values[0].pos, "unknown layer kind '" + kind + "'");
  }
  spec.kind = *k;
  for (const Node* n : r.repeated("bottom")) {
    const Value& v = single_value(*n, Value::Type::string, "a quoted blob name");
    if (v.text.empty()) throw ParseError(v.pos, "empty blob name");
    spec.bottoms.push_back(v.text);
    spec.bottom_pos.push_back(v.pos);
  }
  for (const Node* n : r.repeated("top")) {
    const Value& v = single_value(*n, Value::Type::string, "a quoted blob name");
    if (v.text.empty()) throw ParseError(v.pos, "empty blob name");
    spec.tops.push_back(v.text);
  }
  spec.params = default_params(spec.kind);
  if (const char* block = param_block_name(spec.kind)) {
    if (const Node* n = r.block(block)) {
      switch (spec.kind) {
        case LayerKind::data: spec.params = read_data(*n); break;
        case LayerKind::convolution: spec.params = read_conv(*n); break;
        case LayerKind::pooling: spec.params = read_pool(*n); break;
        case LayerKind::inner_product: spec.params = read_ip(*n); break;
        case LayerKind::lrn: spec.params = read_lrn(*n); break;
        case LayerKind::eltwise: spec.params = read_eltwise(*n); break;
        default: break;
      }
    }
  }
  r.finish();
  return spec;
}

InputDecl read_input(const Node& node) {
  BlockReader r(node.children, "input block");
  InputDecl d;
  d.pos = node.pos;
  if (!r.read_string("name", d.name)) throw ParseError(node.pos, "input needs a 'name'");
  if (d.name.empty()) throw ParseError(r.field("name")->pos, "input name is empty");
  const Node* shape = r.field("shape");
  if (shape == nullptr) throw ParseError(node.pos, "input '" + d.name + "' needs a 'shape'");
  if (shape->values.size() != 4 || shape->values[0].type != Value::Type::number) {
    throw ParseError(shape->pos, "'shape' takes four integers (num channels height width)");
  }
  d.shape = {syntax::to_int(shape->values[0], 0), syntax::to_int(shape->values[1], 0),
             syntax::to_int(shape->values[2], 0), syntax::to_int(shape->values[3], 0)};
  r.finish();
  return d;
}

// ---- writing ---------------------------------------------------------------

class Writer {
 public:
  void open(std::string_view key) {
    line(std::string(key) + " {");
    ++depth_;
  }
  void close() {
    --depth_;
    line("}");
  }
  void raw(std::string_view key, std::string_view value) {
    line(std::string(key) + ": " + std::string(value));
  }
  void str(std::string_view key, std::string_view v) { raw(key, syntax::quote(v)); }
  void integer(std::string_view key, long long v) { raw(key, std::to_string(v)); }
  void real(std::string_view key, double v) { raw(key, syntax::format_real(v)); }
  void boolean(std::string_view key, bool v) { raw(key, v ? "true" : "false"); }

  void pair(const std::string& base, int h, int w, int dflt) {
    if (h == w) {
      if (h != dflt) integer(base, h);
      return;
    }
    integer(base + "_h", h);
    integer(base + "_w", w);
  }

  void filler(std::string_view key, const FillerSpec& f, const FillerSpec& dflt) {
    if (f == dflt) return;
    open(key);
    raw("kind", filler_kind_name(f.kind));
    switch (f.kind) {
      case FillerSpec::Kind::constant: real("value", f.value); break;
      case FillerSpec::Kind::uniform:
        real("min", f.min);
        real("max", f.max);
        break;
      case FillerSpec::Kind::gaussian:
        real("mean", f.mean);
        real("std", f.std);
        break;
      case FillerSpec::Kind::xavier: break;
    }
    close();
  }

  // Emits `key { ... }` only if body writes something.
  template <typename Fn>
  void block(std::string_view key, Fn&& body) {
    const std::size_t mark = lines_.size();
    open(key);
    body();
    if (lines_.size() == mark + 1) {
      lines_.pop_back();
      --depth_;
      return;
    }
    close();
  }

  std::string text() const {
    std::string out;
    for (const auto& l : lines_) {
      out += l;
      out += '\n';
    }
    return out;
  }

 private:
  void line(const std::string& s) { lines_.push_back(std::string(2 * depth_, ' ') + s); }

  std::vector<std::string> lines_;
  int depth_ = 0;
};

void write_params(Writer& w, const LayerSpec& spec) {
  const ConvParam conv_default;
  const PoolParam pool_default;
  const LRNParam lrn_default;
  std::visit(
      [&](const auto& p) {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, DataParam>) {
          w.block("data", [&] {
            w.str("source", p.source);
            w.str("label_source", p.label_source);
            w.integer("batch_size", p.batch_size);
            if (p.scale != 1.0) w.real("scale", p.scale);
            if (!p.mean_file.empty()) w.str("mean_file", p.mean_file);
            if (p.shuffle) w.boolean("shuffle", true);
            if (p.prefetch != 0) w.integer("prefetch", p.prefetch);
          });
        } else if constexpr (std::is_same_v<P, ConvParam>) {
          w.block("conv", [&] {
            w.integer("num_output", p.num_output);
            w.pair("kernel", p.kernel_h, p.kernel_w, -1);
            w.pair("stride", p.stride_h, p.stride_w, 1);
            w.pair("pad", p.pad_h, p.pad_w, 0);
            if (!p.bias_enabled) w.boolean("bias_term", false);
            w.filler("weight_filler", p.weight_filler, conv_default.weight_filler);
            w.filler("bias_filler", p.bias_filler, conv_default.bias_filler);
          });
        } else if constexpr (std::is_same_v<P, PoolParam>) {
          w.block("pool", [&] {
            if (p.method != pool_default.method) w.raw("method", "average");
            w.pair("kernel", p.kernel_h, p.kernel_w, -1);
            w.pair("stride", p.stride_h, p.stride_w, 1);
            w.pair("pad", p.pad_h, p.pad_w, 0);
          });
        } else if constexpr (std::is_same_v<P, InnerProductParam>) {
          w.block("inner_product", [&] {
            w.integer("num_output", p.num_output);
            if (!p.bias_enabled) w.boolean("bias_term", false);
            w.filler("weight_filler", p.weight_filler, conv_default.weight_filler);
            w.filler("bias_filler", p.bias_filler, conv_default.bias_filler);
          });
        } else if constexpr (std::is_same_v<P, LRNParam>) {
          w.block("lrn", [&] {
            if (p.local_size != lrn_default.local_size) w.integer("local_size", p.local_size);
            if (p.alpha != lrn_default.alpha) w.real("alpha", p.alpha);
            if (p.beta != lrn_default.beta) w.real("beta", p.beta);
            if (p.k != lrn_default.k) w.real("k", p.k);
          });
        } else if constexpr (std::is_same_v<P, EltwiseParam>) {
          w.block("eltwise", [&] {
            if (p.op == EltwiseParam::Op::product) w.raw("op", "product");
            if (p.op == EltwiseParam::Op::max) w.raw("op", "max");
            for (double c : p.coeffs) w.real("coeff", c);
          });
        }
      },
      spec.params);
}

void rethrow_at(const SourcePos& pos, const ConfigError& e) {
  throw ParseError(pos, e.what());
}

}  // namespace

void validate_netdef(const NetDef& def) {
  std::set<std::string> inputs;
  for (const auto& in : def.inputs) {
    if (in.name.empty()) throw ParseError(in.pos, "input name is empty");
    if (!inputs.insert(in.name).second) {
      throw ParseError(in.pos, "input '" + in.name + "' is declared twice");
    }
  }
  std::set<std::string> names;
  for (const auto& spec : def.layers) {
    try {
      validate_layer_spec(spec);
    } catch (const ConfigError& e) {
      rethrow_at(spec.pos, e);
    }
    if (!names.insert(spec.name).second) {
      throw ParseError(spec.pos, "duplicate layer name '" + spec.name + "'");
    }
  }
  resolve_wiring(def);
}

NetDef parse_netdef(std::string_view text) {
  const std::vector<Node> nodes = syntax::parse_tree(text);
  NetDef def;
  bool have_name = false;
  for (const Node& n : nodes) {
    if (n.key == "name" && !n.block) {
      if (have_name) throw ParseError(n.pos, "duplicate 'name' at top level");
      def.name = single_value(n, Value::Type::string, "a quoted string").text;
      have_name = true;
    } else if (n.key == "input" && n.block) {
      def.inputs.push_back(read_input(n));
    } else if (n.key == "layer" && n.block) {
      def.layers.push_back(read_layer(n));
    } else {
      throw ParseError(n.pos, "unknown top-level key '" + n.key +
                                  "' (expected name, input or layer)");
    }
  }
  validate_netdef(def);
  return def;
}

NetDef load_netdef(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_netdef(buf.str());
  } catch (const ParseError& e) {
    throw ParseError(e.pos(), path.string() + ": " + e.message());
  }
}

std::string serialize_netdef(const NetDef& def) {
  Writer w;
  w.str("name", def.name);
  for (const auto& in : def.inputs) {
    w.open("input");
    w.str("name", in.name);
    w.raw("shape", std::to_string(in.shape.num) + " " + std::to_string(in.shape.channels) +
                       " " + std::to_string(in.shape.height) + " " +
                       std::to_string(in.shape.width));
    w.close();
  }
  for (const auto& spec : def.layers) {
    w.open("layer");
    w.str("name", spec.name);
    w.raw("kind", layer_kind_name(spec.kind));
    for (const auto& b : spec.bottoms) w.str("bottom", b);
    for (const auto& t : spec.tops) w.str("top", t);
    write_params(w, spec);
    w.close();
  }
  return w.text();
}

}  // namespace mgrind
