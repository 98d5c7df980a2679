/*
 * Copyright 2026 The Tessera Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "tessera/predicate.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <compare>
#include <optional>
#include <vector>

namespace tessera {

struct Predicate::Node {
  enum class Kind { Constant, Compare, And, Or, Not, Callable } kind;
  bool constant = false;
  size_t column = 0;
  CompareOp op = CompareOp::Eq;
  Value literal;
  std::shared_ptr<const Node> lhs;
  std::shared_ptr<const Node> rhs;
  Callable fn;
};

std::string_view compare_op_symbol(CompareOp op) {
  switch (op) {
    case CompareOp::Eq:
      return "==";
    case CompareOp::Ne:
      return "!=";
    case CompareOp::Lt:
      return "<";
    case CompareOp::Le:
      return "<=";
    case CompareOp::Gt:
      return ">";
    case CompareOp::Ge:
      return ">=";
  }
  return "?";
}

Predicate Predicate::constant(bool value) {
  auto n = std::make_shared<Node>();
  n->kind = Node::Kind::Constant;
  n->constant = value;
  return Predicate(std::move(n));
}

Predicate Predicate::compare(size_t column, CompareOp op, Value literal) {
  if (is_null(literal)) throw InvalidArgument("predicate literal cannot be null");
  auto n = std::make_shared<Node>();
  n->kind = Node::Kind::Compare;
  n->column = column;
  n->op = op;
  n->literal = std::move(literal);
  return Predicate(std::move(n));
}

Predicate Predicate::callable(Callable fn) {
  if (!fn) throw InvalidArgument("empty predicate callable");
  auto n = std::make_shared<Node>();
  n->kind = Node::Kind::Callable;
  n->fn = std::move(fn);
  return Predicate(std::move(n));
}

Predicate operator&&(Predicate a, Predicate b) {
  auto n = std::make_shared<Predicate::Node>();
  n->kind = Predicate::Node::Kind::And;
  n->lhs = std::move(a.node_);
  n->rhs = std::move(b.node_);
  return Predicate(std::move(n));
}

Predicate operator||(Predicate a, Predicate b) {
  auto n = std::make_shared<Predicate::Node>();
  n->kind = Predicate::Node::Kind::Or;
  n->lhs = std::move(a.node_);
  n->rhs = std::move(b.node_);
  return Predicate(std::move(n));
}

Predicate operator!(Predicate a) {
  auto n = std::make_shared<Predicate::Node>();
  n->kind = Predicate::Node::Kind::Not;
  n->lhs = std::move(a.node_);
  return Predicate(std::move(n));
}

namespace {

using Node = Predicate::Node;

bool literal_fits(DType dtype, const Value& lit) {
  switch (dtype) {
    case DType::Int64:
    case DType::Float64:
      return std::holds_alternative<int64_t>(lit) || std::holds_alternative<double>(lit);
    case DType::Utf8:
      return std::holds_alternative<std::string>(lit);
    case DType::Bool:
      return std::holds_alternative<bool>(lit);
  }
  return false;
}

void validate_node(const Node& n, const Schema& schema) {
  switch (n.kind) {
    case Node::Kind::Compare: {
      if (n.column >= schema.num_fields()) {
        throw IndexOutOfRange("predicate references column " + std::to_string(n.column) + " of a " +
                              std::to_string(schema.num_fields()) + "-column table");
      }
      const DType dt = schema.field(n.column).dtype;
      if (!literal_fits(dt, n.literal)) {
        throw SchemaMismatch("predicate literal " + format_value(n.literal) + " not comparable with " +
                             std::string(dtype_name(dt)) + " column " + std::to_string(n.column));
      }
      break;
    }
    case Node::Kind::And:
    case Node::Kind::Or:
      validate_node(*n.lhs, schema);
      validate_node(*n.rhs, schema);
      break;
    case Node::Kind::Not:
      validate_node(*n.lhs, schema);
      break;
    case Node::Kind::Constant:
    case Node::Kind::Callable:
      break;
  }
}

std::weak_ordering order_doubles(double x, double y) {
  const bool xn = std::isnan(x);
  const bool yn = std::isnan(y);
  if (xn || yn) {
    if (xn && yn) return std::weak_ordering::equivalent;
    return xn ? std::weak_ordering::greater : std::weak_ordering::less;
  }
  if (x < y) return std::weak_ordering::less;
  if (y < x) return std::weak_ordering::greater;
  return std::weak_ordering::equivalent;
}

// Int64 cell against a double literal without losing precision for large values.
std::weak_ordering order_int_double(int64_t x, double y) {
  if (std::isnan(y)) return std::weak_ordering::less;
  if (y >= 9223372036854775808.0) return std::weak_ordering::less;
  if (y < -9223372036854775808.0) return std::weak_ordering::greater;
  const double fl = std::floor(y);
  const auto yi = static_cast<int64_t>(fl);
  if (x < yi) return std::weak_ordering::less;
  if (x > yi) return std::weak_ordering::greater;
  return fl == y ? std::weak_ordering::equivalent : std::weak_ordering::less;
}

std::weak_ordering order_cell(const Column& c, size_t row, const Value& lit) {
  switch (c.dtype()) {
    case DType::Int64: {
      const int64_t x = c.int64_at(row);
      if (const auto* li = std::get_if<int64_t>(&lit)) return x <=> *li;
      return order_int_double(x, std::get<double>(lit));
    }
    case DType::Float64: {
      const double x = c.float64_at(row);
      if (const auto* li = std::get_if<int64_t>(&lit)) {
        auto r = order_int_double(*li, x);
        return 0 <=> r;
      }
      return order_doubles(x, std::get<double>(lit));
    }
    case DType::Utf8: {
      const int r = c.utf8_at(row).compare(std::get<std::string>(lit));
      return r < 0 ? std::weak_ordering::less : (r > 0 ? std::weak_ordering::greater : std::weak_ordering::equivalent);
    }
    case DType::Bool:
      return c.bool_at(row) <=> std::get<bool>(lit);
  }
  return std::weak_ordering::equivalent;
}

bool apply(CompareOp op, std::weak_ordering o) {
  switch (op) {
    case CompareOp::Eq:
      return o == 0;
    case CompareOp::Ne:
      return o != 0;
    case CompareOp::Lt:
      return o < 0;
    case CompareOp::Le:
      return o <= 0;
    case CompareOp::Gt:
      return o > 0;
    case CompareOp::Ge:
      return o >= 0;
  }
  return false;
}

bool eval_node(const Node& n, const Table& table, size_t row) {
  switch (n.kind) {
    case Node::Kind::Constant:
      return n.constant;
    case Node::Kind::Compare: {
      const Column& c = table.column(n.column);
      if (!c.is_valid(row)) return false;
      return apply(n.op, order_cell(c, row, n.literal));
    }
    case Node::Kind::And:
      return eval_node(*n.lhs, table, row) && eval_node(*n.rhs, table, row);
    case Node::Kind::Or:
      return eval_node(*n.lhs, table, row) || eval_node(*n.rhs, table, row);
    case Node::Kind::Not:
      return !eval_node(*n.lhs, table, row);
    case Node::Kind::Callable:
      return n.fn(RowView(table, row));
  }
  return false;
}

int64_t max_col(const Node& n) {
  switch (n.kind) {
    case Node::Kind::Compare:
      return static_cast<int64_t>(n.column);
    case Node::Kind::And:
    case Node::Kind::Or:
      return std::max(max_col(*n.lhs), max_col(*n.rhs));
    case Node::Kind::Not:
      return max_col(*n.lhs);
    default:
      return -1;
  }
}

bool any_callable(const Node& n) {
  switch (n.kind) {
    case Node::Kind::Callable:
      return true;
    case Node::Kind::And:
    case Node::Kind::Or:
      return any_callable(*n.lhs) || any_callable(*n.rhs);
    case Node::Kind::Not:
      return any_callable(*n.lhs);
    default:
      return false;
  }
}

std::string literal_text(const Value& v) {
  if (const auto* s = std::get_if<std::string>(&v)) {
    std::string out = "\"";
    for (char ch : *s) {
      if (ch == '"' || ch == '\\') out.push_back('\\');
      out.push_back(ch);
    }
    return out + "\"";
  }
  if (const auto* d = std::get_if<double>(&v)) {
    std::string s = format_value(v);
    // Keep the literal a double when re-parsed.
    if (std::isfinite(*d) && s.find_first_of(".eE") == std::string::npos) s += ".0";
    return s;
  }
  return format_value(v);
}

std::string node_text(const Node& n) {
  switch (n.kind) {
    case Node::Kind::Constant:
      return n.constant ? "true" : "false";
    case Node::Kind::Compare:
      return "c" + std::to_string(n.column) + " " + std::string(compare_op_symbol(n.op)) + " " +
             literal_text(n.literal);
    case Node::Kind::And:
      return "(" + node_text(*n.lhs) + " and " + node_text(*n.rhs) + ")";
    case Node::Kind::Or:
      return "(" + node_text(*n.lhs) + " or " + node_text(*n.rhs) + ")";
    case Node::Kind::Not:
      return "not " + node_text(*n.lhs);
    case Node::Kind::Callable:
      return "<callable>";
  }
  return "";
}

}  // namespace

void Predicate::validate(const Schema& schema) const { validate_node(*node_, schema); }

bool Predicate::evaluate(const Table& table, size_t row) const { return eval_node(*node_, table, row); }

int64_t Predicate::max_column() const { return max_col(*node_); }

bool Predicate::has_callable() const { return any_callable(*node_); }

std::string Predicate::to_string() const { return node_text(*node_); }

// -- parser -----------------------------------------------------------------

namespace {

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  Predicate parse() {
    Predicate p = parse_or();
    skip_ws();
    if (pos_ != text_.size()) fail("unexpected trailing input");
    return p;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw InvalidArgument("predicate parse error at offset " + std::to_string(pos_) + ": " + msg + " in '" +
                          std::string(text_) + "'");
  }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool keyword(std::string_view kw) {
    skip_ws();
    if (text_.substr(pos_, kw.size()) != kw) return false;
    const size_t end = pos_ + kw.size();
    if (end < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[end])) || text_[end] == '_')) {
      return false;
    }
    pos_ = end;
    return true;
  }

  bool symbol(std::string_view s) {
    skip_ws();
    if (text_.substr(pos_, s.size()) != s) return false;
    pos_ += s.size();
    return true;
  }

  Predicate parse_or() {
    Predicate p = parse_and();
    while (keyword("or") || symbol("||")) p = std::move(p) || parse_and();
    return p;
  }

  Predicate parse_and() {
    Predicate p = parse_unary();
    while (keyword("and") || symbol("&&")) p = std::move(p) && parse_unary();
    return p;
  }

  Predicate parse_unary() {
    if (keyword("not") || (peek_bang() && symbol("!"))) return !parse_unary();
    if (symbol("(")) {
      Predicate p = parse_or();
      if (!symbol(")")) fail("expected ')'");
      return p;
    }
    if (keyword("true")) return Predicate::constant(true);
    if (keyword("false")) return Predicate::constant(false);
    return parse_comparison();
  }

  bool peek_bang() {
    skip_ws();
    return pos_ + 1 <= text_.size() && text_.substr(pos_, 1) == "!" && text_.substr(pos_, 2) != "!=";
  }

  Predicate parse_comparison() {
    skip_ws();
    if (pos_ >= text_.size() || (text_[pos_] != 'c' && text_[pos_] != 'C')) fail("expected column reference c<N>");
    ++pos_;
    size_t col = 0;
    auto [ptr, ec] = std::from_chars(text_.data() + pos_, text_.data() + text_.size(), col);
    if (ec != std::errc()) fail("expected column index");
    pos_ = static_cast<size_t>(ptr - text_.data());
    CompareOp op;
    if (symbol("==")) {
      op = CompareOp::Eq;
    } else if (symbol("!=")) {
      op = CompareOp::Ne;
    } else if (symbol("<=")) {
      op = CompareOp::Le;
    } else if (symbol(">=")) {
      op = CompareOp::Ge;
    } else if (symbol("<")) {
      op = CompareOp::Lt;
    } else if (symbol(">")) {
      op = CompareOp::Gt;
    } else if (symbol("=")) {
      op = CompareOp::Eq;
    } else {
      fail("expected comparison operator");
    }
    return Predicate::compare(col, op, parse_literal());
  }

  Value parse_literal() {
    skip_ws();
    if (keyword("true")) return true;
    if (keyword("false")) return false;
    if (pos_ < text_.size() && text_[pos_] == '"') {
      ++pos_;
      std::string s;
      while (pos_ < text_.size() && text_[pos_] != '"') {
        if (text_[pos_] == '\\' && pos_ + 1 < text_.size()) ++pos_;
        s.push_back(text_[pos_++]);
      }
      if (pos_ >= text_.size()) fail("unterminated string literal");
      ++pos_;
      return s;
    }
    const size_t start = pos_;
    while (pos_ < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.' ||
                                   text_[pos_] == '-' || text_[pos_] == '+')) {
      ++pos_;
    }
    std::string_view tok = text_.substr(start, pos_ - start);
    if (tok.empty()) fail("expected literal");
    int64_t i = 0;
    auto ri = std::from_chars(tok.data(), tok.data() + tok.size(), i);
    if (ri.ec == std::errc() && ri.ptr == tok.data() + tok.size()) return i;
    double d = 0;
    auto rd = std::from_chars(tok.data(), tok.data() + tok.size(), d);
    if (rd.ec == std::errc() && rd.ptr == tok.data() + tok.size()) return d;
    fail("bad literal '" + std::string(tok) + "'");
  }

  std::string_view text_;
  size_t pos_ = 0;
};

}  // namespace

Predicate parse_predicate(std::string_view text) { return Parser(text).parse(); }

}  // namespace tessera
