#include "symgen/expr.hpp"

#include <algorithm>
#include <cctype>
#include <functional>
#include <stdexcept>

#include "symgen/errors.hpp"

namespace symgen {

namespace {

constexpr std::array<std::string_view, 20> kOpTokens = {
    "+",   "-",   "*",    "/",    "pow",  "exp",  "log",  "sqrt",  "sin",   "cos",
    "tan", "asin", "acos", "atan", "sinh", "cosh", "tanh", "asinh", "acosh", "atanh"};

constexpr std::array<std::string_view, 10> kSymbolTokens = {"x", "y",  "z", "y'", "y''",
                                                            "e", "pi", "c", "c1", "c2"};

std::size_t mix(std::size_t seed, std::size_t v) {
  return seed ^ (v + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2));
}

bool is_digit_token(std::string_view t) { return t.size() == 1 && t[0] >= '0' && t[0] <= '9'; }

}  // namespace

std::string_view token(Op op) { return kOpTokens[static_cast<std::size_t>(op)]; }

std::optional<Op> op_from_token(std::string_view tok) {
  for (std::size_t i = 0; i < kOpTokens.size(); ++i) {
    if (kOpTokens[i] == tok) return static_cast<Op>(i);
  }
  return std::nullopt;
}

std::string_view token(Symbol s) { return kSymbolTokens[static_cast<std::size_t>(s)]; }

std::optional<Symbol> symbol_from_token(std::string_view tok) {
  for (std::size_t i = 0; i < kSymbolTokens.size(); ++i) {
    if (kSymbolTokens[i] == tok) return static_cast<Symbol>(i);
  }
  return std::nullopt;
}

struct Expression::Node {
  Kind kind = Kind::Integer;
  Op op = Op::Add;
  Symbol sym = Symbol::X;
  BigInt value;
  std::vector<Expression> children;
  std::size_t hash = 0;
  std::size_t nodes = 1;
  std::size_t internal = 0;
  std::size_t tokens = 1;
  std::uint32_t mask = 0;
};

Expression::Expression() {
  static const Expression zero = integer(0);
  node_ = zero.node_;
}

Expression::Expression(std::shared_ptr<const Node> node) : node_(std::move(node)) {}

Expression Expression::integer(BigInt value) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Integer;
  const bool negative = value < 0;
  const std::string digits = negative ? BigInt(-value).str() : value.str();
  n->tokens = 1 + digits.size();
  n->hash = mix(0x1234, std::hash<std::string>{}(digits));
  n->hash = mix(n->hash, negative ? 1 : 0);
  n->value = std::move(value);
  return Expression(std::move(n));
}

Expression Expression::symbol(Symbol s) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Symbol;
  n->sym = s;
  n->mask = 1U << static_cast<int>(s);
  n->hash = mix(0x5678, static_cast<std::size_t>(s));
  return Expression(std::move(n));
}

Expression Expression::unary(Op op, Expression arg) {
  if (symgen::arity(op) != 1) throw std::invalid_argument("unary(): operator is binary");
  auto n = std::make_shared<Node>();
  n->kind = Kind::Unary;
  n->op = op;
  n->hash = mix(mix(0x9abc, static_cast<std::size_t>(op)), arg.hash());
  n->nodes = 1 + arg.node_count();
  n->internal = 1 + arg.internal_nodes();
  n->tokens = 1 + arg.token_length();
  n->mask = arg.symbol_mask();
  n->children.push_back(std::move(arg));
  return Expression(std::move(n));
}

Expression Expression::binary(Op op, Expression lhs, Expression rhs) {
  if (symgen::arity(op) != 2) throw std::invalid_argument("binary(): operator is unary");
  auto n = std::make_shared<Node>();
  n->kind = Kind::Binary;
  n->op = op;
  n->hash = mix(mix(mix(0xdef0, static_cast<std::size_t>(op)), lhs.hash()), rhs.hash());
  n->nodes = 1 + lhs.node_count() + rhs.node_count();
  n->internal = 1 + lhs.internal_nodes() + rhs.internal_nodes();
  n->tokens = 1 + lhs.token_length() + rhs.token_length();
  n->mask = lhs.symbol_mask() | rhs.symbol_mask();
  n->children.reserve(2);
  n->children.push_back(std::move(lhs));
  n->children.push_back(std::move(rhs));
  return Expression(std::move(n));
}

Expression Expression::make(Op op, std::span<const Expression> children) {
  if (symgen::arity(op) == 1) return unary(op, children[0]);
  return binary(op, children[0], children[1]);
}

Expression::Kind Expression::kind() const { return node_->kind; }
bool Expression::is_integer(long long v) const { return is_integer() && node_->value == v; }
Op Expression::op() const { return node_->op; }
Symbol Expression::symbol() const { return node_->sym; }
const BigInt& Expression::value() const { return node_->value; }
std::size_t Expression::arity() const { return node_->children.size(); }
const Expression& Expression::child(std::size_t i) const { return node_->children[i]; }
std::size_t Expression::hash() const { return node_->hash; }
std::size_t Expression::node_count() const { return node_->nodes; }
std::size_t Expression::internal_nodes() const { return node_->internal; }
std::size_t Expression::token_length() const { return node_->tokens; }
std::uint32_t Expression::symbol_mask() const { return node_->mask; }

bool operator==(const Expression& a, const Expression& b) {
  if (a.node_ == b.node_) return true;
  const auto& na = *a.node_;
  const auto& nb = *b.node_;
  if (na.hash != nb.hash || na.kind != nb.kind || na.nodes != nb.nodes) return false;
  switch (na.kind) {
    case Expression::Kind::Integer:
      return na.value == nb.value;
    case Expression::Kind::Symbol:
      return na.sym == nb.sym;
    default:
      if (na.op != nb.op) return false;
      for (std::size_t i = 0; i < na.children.size(); ++i) {
        if (!(na.children[i] == nb.children[i])) return false;
      }
      return true;
  }
}

int compare(const Expression& a, const Expression& b) {
  if (a.same_node(b)) return 0;
  if (a.kind() != b.kind()) return a.kind() < b.kind() ? -1 : 1;
  switch (a.kind()) {
    case Expression::Kind::Integer:
      if (a.value() == b.value()) return 0;
      return a.value() < b.value() ? -1 : 1;
    case Expression::Kind::Symbol:
      if (a.symbol() == b.symbol()) return 0;
      return a.symbol() < b.symbol() ? -1 : 1;
    default:
      if (a.op() != b.op()) return a.op() < b.op() ? -1 : 1;
      for (std::size_t i = 0; i < a.arity(); ++i) {
        if (int c = compare(a.child(i), b.child(i)); c != 0) return c;
      }
      return 0;
  }
}

// ---------------------------------------------------------------------------
// Prefix encoding

namespace {

void emit_prefix(const Expression& e, TokenSequence& out) {
  switch (e.kind()) {
    case Expression::Kind::Integer: {
      const BigInt& v = e.value();
      out.emplace_back(v < 0 ? "-" : "+");
      const std::string digits = v < 0 ? BigInt(-v).str() : v.str();
      for (char d : digits) out.emplace_back(1, d);
      break;
    }
    case Expression::Kind::Symbol:
      out.emplace_back(token(e.symbol()));
      break;
    default:
      out.emplace_back(token(e.op()));
      for (std::size_t i = 0; i < e.arity(); ++i) emit_prefix(e.child(i), out);
  }
}

}  // namespace

TokenSequence to_prefix(const Expression& e) {
  TokenSequence out;
  out.reserve(e.token_length());
  emit_prefix(e, out);
  return out;
}

std::string to_prefix_string(const Expression& e) {
  std::string s;
  for (const auto& t : to_prefix(e)) {
    if (!s.empty()) s.push_back(' ');
    s += t;
  }
  return s;
}

TokenSequence split_tokens(std::string_view text) {
  TokenSequence out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t j = i;
    while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j]))) ++j;
    if (j > i) out.emplace_back(text.substr(i, j - i));
    i = j;
  }
  return out;
}

Expression parse_prefix(std::span<const std::string> tokens) {
  struct Frame {
    Op op;
    std::vector<Expression> args;
  };
  std::vector<Frame> stack;
  std::size_t i = 0;
  const std::size_t n = tokens.size();
  if (n == 0) throw MalformedSequence("empty token sequence");

  while (i < n) {
    const std::string& t = tokens[i];
    Expression leaf;
    if ((t == "+" || t == "-") && i + 1 < n && is_digit_token(tokens[i + 1])) {
      std::string digits;
      ++i;
      while (i < n && is_digit_token(tokens[i])) digits += tokens[i++];
      if (digits.size() > 1 && digits[0] == '0') {
        throw MalformedSequence("integer with leading zero at token " + std::to_string(i));
      }
      if (digits == "0" && t == "-") throw MalformedSequence("non-canonical zero '- 0'");
      BigInt v(digits);
      leaf = Expression::integer(t == "-" ? BigInt(-v) : v);
    } else if (auto op = op_from_token(t)) {
      stack.push_back(Frame{*op, {}});
      ++i;
      continue;
    } else if (auto s = symbol_from_token(t)) {
      leaf = Expression::symbol(*s);
      ++i;
    } else if (is_digit_token(t)) {
      throw MalformedSequence("digit without sign at token " + std::to_string(i));
    } else {
      throw MalformedSequence("unknown token '" + t + "' at position " + std::to_string(i));
    }

    // Attach the completed subtree, collapsing every frame it completes.
    for (;;) {
      if (stack.empty()) {
        if (i != n) {
          throw MalformedSequence("dangling tokens after position " + std::to_string(i));
        }
        return leaf;
      }
      Frame& top = stack.back();
      top.args.push_back(std::move(leaf));
      if (static_cast<int>(top.args.size()) < arity(top.op)) break;
      leaf = Expression::make(top.op, top.args);
      stack.pop_back();
    }
  }
  throw MalformedSequence("truncated sequence: operator is missing operands");
}

Expression parse_prefix(std::string_view text) {
  const auto tokens = split_tokens(text);
  return parse_prefix(std::span<const std::string>(tokens));
}

namespace {

std::string_view infix_symbol(Op op) {
  switch (op) {
    case Op::Add: return "+";
    case Op::Sub: return "-";
    case Op::Mul: return "*";
    case Op::Div: return "/";
    case Op::Pow: return "^";
    default: return token(op);
  }
}

void emit_infix(const Expression& e, std::string& out) {
  switch (e.kind()) {
    case Expression::Kind::Integer:
      out += e.value().str();
      break;
    case Expression::Kind::Symbol:
      out += token(e.symbol());
      break;
    case Expression::Kind::Unary:
      out += token(e.op());
      out += '(';
      emit_infix(e.arg(), out);
      out += ')';
      break;
    case Expression::Kind::Binary:
      out += '(';
      emit_infix(e.lhs(), out);
      out += ' ';
      out += infix_symbol(e.op());
      out += ' ';
      emit_infix(e.rhs(), out);
      out += ')';
      break;
  }
}

}  // namespace

std::string to_infix(const Expression& e) {
  std::string out;
  emit_infix(e, out);
  return out;
}

const std::vector<std::string>& vocabulary() {
  static const std::vector<std::string> vocab = [] {
    std::vector<std::string> v;
    for (auto t : kOpTokens) v.emplace_back(t);
    for (auto t : kSymbolTokens) v.emplace_back(t);
    for (char d = '0'; d <= '9'; ++d) v.emplace_back(1, d);
    return v;
  }();
  return vocab;
}

// ---------------------------------------------------------------------------
// Structural queries

std::size_t count_internal_nodes(const Expression& e) { return e.internal_nodes(); }

std::set<Symbol> free_variables(const Expression& e) {
  std::set<Symbol> out;
  for (Symbol s : kAllSymbols) {
    if (is_variable(s) && e.contains(s)) out.insert(s);
  }
  return out;
}

std::set<Symbol> constants_of(const Expression& e) {
  std::set<Symbol> out;
  for (Symbol s : kAllSymbols) {
    if (!is_variable(s) && e.contains(s)) out.insert(s);
  }
  return out;
}

std::size_t count_occurrences(const Expression& e, Symbol s) {
  if (!e.contains(s)) return 0;
  if (e.is_symbol()) return 1;
  std::size_t total = 0;
  for (std::size_t i = 0; i < e.arity(); ++i) total += count_occurrences(e.child(i), s);
  return total;
}

bool depends_on_variables(const Expression& e) {
  constexpr std::uint32_t kVariableMask = (1U << static_cast<int>(Symbol::X)) |
                                          (1U << static_cast<int>(Symbol::Y)) |
                                          (1U << static_cast<int>(Symbol::Z)) |
                                          (1U << static_cast<int>(Symbol::Dy)) |
                                          (1U << static_cast<int>(Symbol::D2y));
  return (e.symbol_mask() & kVariableMask) != 0;
}

Expression subtree_at(const Expression& e, std::span<const int> path) {
  const Expression* cur = &e;
  for (std::size_t depth = 0; depth < path.size(); ++depth) {
    const int idx = path[depth];
    if (idx < 0 || static_cast<std::size_t>(idx) >= cur->arity()) {
      throw PathOutOfRange("path index " + std::to_string(idx) + " out of range at depth " +
                           std::to_string(depth));
    }
    cur = &cur->child(static_cast<std::size_t>(idx));
  }
  return *cur;
}

Expression replace_at(const Expression& e, std::span<const int> path, const Expression& replacement) {
  if (path.empty()) return replacement;
  const int idx = path[0];
  if (idx < 0 || static_cast<std::size_t>(idx) >= e.arity()) {
    throw PathOutOfRange("path index " + std::to_string(idx) + " out of range");
  }
  std::vector<Expression> kids;
  for (std::size_t i = 0; i < e.arity(); ++i) kids.push_back(e.child(i));
  kids[static_cast<std::size_t>(idx)] = replace_at(kids[static_cast<std::size_t>(idx)], path.subspan(1), replacement);
  return Expression::make(e.op(), kids);
}

namespace {

void collect_leaf_paths(const Expression& e, std::vector<int>& cur, std::vector<std::vector<int>>& out) {
  if (e.is_leaf()) {
    out.push_back(cur);
    return;
  }
  for (std::size_t i = 0; i < e.arity(); ++i) {
    cur.push_back(static_cast<int>(i));
    collect_leaf_paths(e.child(i), cur, out);
    cur.pop_back();
  }
}

}  // namespace

std::vector<std::vector<int>> leaf_paths(const Expression& e) {
  std::vector<std::vector<int>> out;
  std::vector<int> cur;
  collect_leaf_paths(e, cur, out);
  return out;
}

std::optional<std::vector<int>> path_to_symbol(const Expression& e, Symbol s) {
  if (!e.contains(s)) return std::nullopt;
  std::vector<int> path;
  const Expression* cur = &e;
  while (!cur->is_leaf()) {
    bool found = false;
    for (std::size_t i = 0; i < cur->arity(); ++i) {
      if (cur->child(i).contains(s)) {
        path.push_back(static_cast<int>(i));
        cur = &cur->child(i);
        found = true;
        break;
      }
    }
    if (!found) return std::nullopt;
  }
  return path;
}

Expression substitute(const Expression& e, Symbol s, const Expression& replacement) {
  if (!e.contains(s)) return e;
  if (e.is_symbol()) return replacement;
  std::vector<Expression> kids;
  kids.reserve(e.arity());
  for (std::size_t i = 0; i < e.arity(); ++i) kids.push_back(substitute(e.child(i), s, replacement));
  return Expression::make(e.op(), kids);
}

}  // namespace symgen
