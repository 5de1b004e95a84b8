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

#include "syntax.hpp"

#include <charconv>
#include <cmath>
#include <limits>

namespace mgrind::syntax {

namespace {

enum class Tok { ident, string, number, lbrace, rbrace, colon, end };

struct Token {
  Tok kind = Tok::end;
  std::string text;
  SourcePos pos;
};

bool ident_start(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_';
}
bool ident_char(char c) { return ident_start(c) || (c >= '0' && c <= '9'); }
bool digit(char c) { return c >= '0' && c <= '9'; }

std::string describe(char c) {
  const auto u = static_cast<unsigned char>(c);
  if (u >= 0x20 && u < 0x7f) return std::string("'") + c + "'";
  static const char* hex = "0123456789abcdef";
  return std::string("byte 0x") + hex[u >> 4] + hex[u & 15];
}

class Lexer {
 public:
  explicit Lexer(std::string_view text) : text_(text) {}

  Token next() {
    skip_space();
    Token t;
    t.pos = {line_, col_};
    if (i_ >= text_.size()) return t;
    const char c = text_[i_];
    if (c == '{' || c == '}' || c == ':') {
      advance();
      t.kind = c == '{' ? Tok::lbrace : c == '}' ? Tok::rbrace : Tok::colon;
      t.text = std::string(1, c);
      return t;
    }
    if (c == '"') return lex_string(t);
    if (ident_start(c)) {
      t.kind = Tok::ident;
      while (i_ < text_.size() && ident_char(text_[i_])) t.text += advance();
      return t;
    }
    if (digit(c) || c == '-' || c == '+' || c == '.') return lex_number(t);
    throw ParseError(t.pos, "unexpected " + describe(c));
  }

 private:
  char advance() {
    const char c = text_[i_++];
    if (c == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    return c;
  }

  void skip_space() {
    while (i_ < text_.size()) {
      const char c = text_[i_];
      if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
        advance();
      } else if (c == '#') {
        while (i_ < text_.size() && text_[i_] != '\n') advance();
      } else {
        break;
      }
    }
  }

  Token lex_string(Token t) {
    t.kind = Tok::string;
    advance();
    while (true) {
      if (i_ >= text_.size()) throw ParseError(t.pos, "unterminated string");
      const char c = text_[i_];
      if (c == '"') {
        advance();
        return t;
      }
      if (c == '\n') throw ParseError(t.pos, "newline inside string");
      if (c == '\\') {
        const SourcePos esc{line_, col_};
        advance();
        if (i_ >= text_.size()) throw ParseError(t.pos, "unterminated string");
        const char e = advance();
        switch (e) {
          case '"': t.text += '"'; break;
          case '\\': t.text += '\\'; break;
          case 'n': t.text += '\n'; break;
          case 't': t.text += '\t'; break;
          default: throw ParseError(esc, "unknown escape \\" + describe(e));
        }
        continue;
      }
      t.text += advance();
    }
  }

  Token lex_number(Token t) {
    t.kind = Tok::number;
    if (text_[i_] == '-' || text_[i_] == '+') t.text += advance();
    while (i_ < text_.size()) {
      const char c = text_[i_];
      if (digit(c) || c == '.') {
        t.text += advance();
      } else if ((c == 'e' || c == 'E')) {
        t.text += advance();
        if (i_ < text_.size() && (text_[i_] == '-' || text_[i_] == '+')) {
          t.text += advance();
        }
      } else {
        break;
      }
    }
    if (i_ < text_.size() && ident_char(text_[i_])) {
      throw ParseError(t.pos, "malformed number '" + t.text + text_[i_] + "'");
    }
    std::string_view body = t.text;
    if (!body.empty() && body.front() == '+') body.remove_prefix(1);
    double v = 0;
    const auto r = std::from_chars(body.data(), body.data() + body.size(), v,
                                   std::chars_format::general);
    if (body.empty() || r.ec == std::errc::invalid_argument ||
        r.ptr != body.data() + body.size()) {
      throw ParseError(t.pos, "malformed number '" + t.text + "'");
    }
    if (r.ec == std::errc::result_out_of_range && std::abs(v) > 1.0) {
      throw ParseError(t.pos, "number out of range '" + t.text + "'");
    }
    return t;
  }

  std::string_view text_;
  std::size_t i_ = 0;
  int line_ = 1;
  int col_ = 1;
};

class TreeParser {
 public:
  explicit TreeParser(std::string_view text) : lex_(text) { bump(); }

  std::vector<Node> parse() {
    auto nodes = parse_items(0);
    if (tok_.kind != Tok::end) throw ParseError(tok_.pos, "unmatched '}'");
    return nodes;
  }

 private:
  void bump() { tok_ = lex_.next(); }

  std::vector<Node> parse_items(int depth) {
    std::vector<Node> nodes;
    while (tok_.kind != Tok::end && tok_.kind != Tok::rbrace) {
      if (tok_.kind != Tok::ident) {
        throw ParseError(tok_.pos, "expected a key, found " + spelling(tok_));
      }
      Node node;
      node.key = tok_.text;
      node.pos = tok_.pos;
      bump();
      if (tok_.kind == Tok::lbrace) {
        if (depth + 1 >= kMaxDepth) throw ParseError(tok_.pos, "blocks nested too deeply");
        const SourcePos open = tok_.pos;
        bump();
        node.block = true;
        node.children = parse_items(depth + 1);
        if (tok_.kind != Tok::rbrace) {
          throw ParseError(open, "block '" + node.key + "' is not closed");
        }
        bump();
      } else if (tok_.kind == Tok::colon) {
        bump();
        if (tok_.kind != Tok::ident && tok_.kind != Tok::string &&
            tok_.kind != Tok::number) {
          throw ParseError(tok_.pos, "expected a value for '" + node.key +
                                         "', found " + spelling(tok_));
        }
        const bool numeric = tok_.kind == Tok::number;
        node.values.push_back(to_value(tok_));
        bump();
        while (numeric && tok_.kind == Tok::number) {
          node.values.push_back(to_value(tok_));
          bump();
        }
      } else {
        throw ParseError(tok_.pos, "expected ':' or '{' after '" + node.key +
                                       "', found " + spelling(tok_));
      }
      nodes.push_back(std::move(node));
    }
    return nodes;
  }

  static Value to_value(const Token& t) {
    Value v;
    v.type = t.kind == Tok::string  ? Value::Type::string
             : t.kind == Tok::ident ? Value::Type::ident
                                    : Value::Type::number;
    v.text = t.text;
    v.pos = t.pos;
    return v;
  }

  static std::string spelling(const Token& t) {
    switch (t.kind) {
      case Tok::end: return "end of input";
      case Tok::string: return "string " + quote(t.text);
      default: return "'" + t.text + "'";
    }
  }

  Lexer lex_;
  Token tok_;
};

const char* type_name(Value::Type t) {
  switch (t) {
    case Value::Type::string: return "a quoted string";
    case Value::Type::ident: return "an identifier";
    case Value::Type::number: return "a number";
  }
  return "?";
}

}  // namespace

std::vector<Node> parse_tree(std::string_view text) { return TreeParser(text).parse(); }

const Value& single_value(const Node& node, Value::Type type, const char* what) {
  if (node.block) throw ParseError(node.pos, "'" + node.key + "' must be a field, not a block");
  if (node.values.size() != 1) {
    throw ParseError(node.values[1].pos, "'" + node.key + "' takes a single value");
  }
  const Value& v = node.values[0];
  if (v.type != type) {
    throw ParseError(v.pos, "'" + node.key + "' expects " + what + ", found " +
                                type_name(v.type));
  }
  return v;
}

int to_int(const Value& v, int min_value) {
  int out = 0;
  const char* b = v.text.data();
  const char* e = b + v.text.size();
  if (b != e && *b == '+') ++b;
  const auto r = std::from_chars(b, e, out);
  if (r.ec == std::errc::result_out_of_range) {
    throw ParseError(v.pos, "integer out of range: " + v.text);
  }
  if (r.ec != std::errc{} || r.ptr != e) {
    throw ParseError(v.pos, "expected an integer, found " + v.text);
  }
  if (out < min_value) {
    throw ParseError(v.pos, "value " + v.text + " is below the minimum " +
                                std::to_string(min_value));
  }
  return out;
}

std::uint64_t to_u64(const Value& v) {
  std::uint64_t out = 0;
  const char* b = v.text.data();
  const char* e = b + v.text.size();
  if (b != e && *b == '+') ++b;
  const auto r = std::from_chars(b, e, out);
  if (r.ec == std::errc::result_out_of_range) {
    throw ParseError(v.pos, "integer out of range: " + v.text);
  }
  if (r.ec != std::errc{} || r.ptr != e) {
    throw ParseError(v.pos, "expected a non-negative integer, found " + v.text);
  }
  return out;
}

double to_real(const Value& v) {
  double out = 0;
  const char* b = v.text.data();
  const char* e = b + v.text.size();
  if (b != e && *b == '+') ++b;
  const auto r = std::from_chars(b, e, out, std::chars_format::general);
  if (r.ptr != e || (r.ec != std::errc{} && r.ec != std::errc::result_out_of_range)) {
    throw ParseError(v.pos, "expected a number, found " + v.text);
  }
  if (!std::isfinite(out)) throw ParseError(v.pos, "number out of range: " + v.text);
  return out;
}

const Node* BlockReader::take(std::string_view key, bool want_block) {
  const Node* found = nullptr;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (nodes_[i].key != key) continue;
    if (found != nullptr) {
      throw ParseError(nodes_[i].pos, "duplicate '" + std::string(key) + "' in " + context_);
    }
    found = &nodes_[i];
    used_[i] = true;
  }
  if (found != nullptr && found->block != want_block) {
    throw ParseError(found->pos, "'" + found->key + "' must be " +
                                     (want_block ? "a block" : "a field") + " in " +
                                     context_);
  }
  return found;
}

const Node* BlockReader::field(std::string_view key) { return take(key, false); }
const Node* BlockReader::block(std::string_view key) { return take(key, true); }

std::vector<const Node*> BlockReader::repeated(std::string_view key) {
  std::vector<const Node*> out;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (nodes_[i].key != key) continue;
    if (nodes_[i].block) {
      throw ParseError(nodes_[i].pos, "'" + nodes_[i].key + "' must be a field in " + context_);
    }
    used_[i] = true;
    out.push_back(&nodes_[i]);
  }
  return out;
}

bool BlockReader::read_string(std::string_view key, std::string& out) {
  const Node* n = field(key);
  if (n == nullptr) return false;
  out = single_value(*n, Value::Type::string, "a quoted string").text;
  return true;
}

bool BlockReader::read_ident(std::string_view key, std::string& out) {
  const Node* n = field(key);
  if (n == nullptr) return false;
  out = single_value(*n, Value::Type::ident, "an identifier").text;
  return true;
}

bool BlockReader::read_int(std::string_view key, int& out, int min_value) {
  const Node* n = field(key);
  if (n == nullptr) return false;
  out = to_int(single_value(*n, Value::Type::number, "an integer"), min_value);
  return true;
}

bool BlockReader::read_u64(std::string_view key, std::uint64_t& out) {
  const Node* n = field(key);
  if (n == nullptr) return false;
  out = to_u64(single_value(*n, Value::Type::number, "an integer"));
  return true;
}

bool BlockReader::read_real(std::string_view key, double& out) {
  const Node* n = field(key);
  if (n == nullptr) return false;
  out = to_real(single_value(*n, Value::Type::number, "a number"));
  return true;
}

bool BlockReader::read_bool(std::string_view key, bool& out) {
  const Node* n = field(key);
  if (n == nullptr) return false;
  const Value& v = single_value(*n, Value::Type::ident, "true or false");
  if (v.text == "true") {
    out = true;
  } else if (v.text == "false") {
    out = false;
  } else {
    throw ParseError(v.pos, "'" + n->key + "' expects true or false, found " + v.text);
  }
  return true;
}

void BlockReader::finish() const {
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (!used_[i]) {
      throw ParseError(nodes_[i].pos, "unknown key '" + nodes_[i].key + "' in " + context_);
    }
  }
}

std::string quote(std::string_view s) {
  std::string out = "\"";
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      default: out += c;
    }
  }
  out += '"';
  return out;
}

std::string format_real(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

}  // namespace mgrind::syntax
