#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "symgen/bigint.hpp"

namespace symgen {

// Binary operators come first; arity() relies on the ordering.
enum class Op : std::uint8_t {
  Add, Sub, Mul, Div, Pow,
  Exp, Log, Sqrt, Sin, Cos, Tan, Asin, Acos, Atan,
  Sinh, Cosh, Tanh, Asinh, Acosh, Atanh,
};

inline constexpr std::array<Op, 5> kBinaryOps = {Op::Add, Op::Sub, Op::Mul, Op::Div, Op::Pow};
inline constexpr std::array<Op, 15> kUnaryOps = {
    Op::Exp,  Op::Log,  Op::Sqrt, Op::Sin,   Op::Cos,   Op::Tan,   Op::Asin, Op::Acos,
    Op::Atan, Op::Sinh, Op::Cosh, Op::Tanh, Op::Asinh, Op::Acosh, Op::Atanh};

constexpr int arity(Op op) { return op <= Op::Pow ? 2 : 1; }
std::string_view token(Op op);
std::optional<Op> op_from_token(std::string_view tok);

// x, y, z are free variables; y' and y'' stand for derivatives of y(x) inside
// differential equations. e and pi are mathematical constants, c/c1/c2 are
// integration constants.
enum class Symbol : std::uint8_t { X, Y, Z, Dy, D2y, E, Pi, C, C1, C2 };

inline constexpr std::array<Symbol, 10> kAllSymbols = {
    Symbol::X, Symbol::Y,  Symbol::Z, Symbol::Dy, Symbol::D2y,
    Symbol::E, Symbol::Pi, Symbol::C, Symbol::C1, Symbol::C2};

constexpr bool is_variable(Symbol s) { return s <= Symbol::D2y; }
constexpr bool is_integration_constant(Symbol s) { return s >= Symbol::C; }
std::string_view token(Symbol s);
std::optional<Symbol> symbol_from_token(std::string_view tok);

/// Immutable expression tree with structural sharing. Copies are cheap and
/// safe to hand to other threads. Equality is structural.
class Expression {
 public:
  enum class Kind : std::uint8_t { Integer, Symbol, Unary, Binary };

  /// The integer 0.
  Expression();

  static Expression integer(BigInt value);
  static Expression integer(long long value) { return integer(BigInt(value)); }
  static Expression symbol(Symbol s);
  static Expression unary(Op op, Expression arg);
  static Expression binary(Op op, Expression lhs, Expression rhs);
  static Expression make(Op op, std::span<const Expression> children);

  Kind kind() const;
  bool is_leaf() const { return kind() == Kind::Integer || kind() == Kind::Symbol; }
  bool is_integer() const { return kind() == Kind::Integer; }
  bool is_integer(long long v) const;
  bool is_symbol() const { return kind() == Kind::Symbol; }
  bool is_symbol(Symbol s) const { return is_symbol() && symbol() == s; }
  bool is_op(Op op) const { return !is_leaf() && this->op() == op; }

  Op op() const;
  Symbol symbol() const;
  const BigInt& value() const;

  std::size_t arity() const;
  const Expression& child(std::size_t i) const;
  const Expression& arg() const { return child(0); }
  const Expression& lhs() const { return child(0); }
  const Expression& rhs() const { return child(1); }

  std::size_t hash() const;
  std::size_t node_count() const;
  std::size_t internal_nodes() const;
  /// Number of tokens in the prefix encoding, computed without building it.
  std::size_t token_length() const;
  /// Bitmask over Symbol values occurring in the tree.
  std::uint32_t symbol_mask() const;
  bool contains(Symbol s) const { return (symbol_mask() >> static_cast<int>(s)) & 1U; }

  bool same_node(const Expression& other) const { return node_ == other.node_; }

  friend bool operator==(const Expression& a, const Expression& b);
  friend bool operator!=(const Expression& a, const Expression& b) { return !(a == b); }

 private:
  struct Node;
  explicit Expression(std::shared_ptr<const Node> node);
  std::shared_ptr<const Node> node_;
};

/// Total order used for canonical sorting of commutative chains:
/// integers < symbols < unary < binary, then by payload, then children.
int compare(const Expression& a, const Expression& b);
inline bool canonical_less(const Expression& a, const Expression& b) { return compare(a, b) < 0; }

struct ExpressionHash {
  std::size_t operator()(const Expression& e) const { return e.hash(); }
};

// ---------------------------------------------------------------------------
// Prefix encoding

using TokenSequence = std::vector<std::string>;

TokenSequence to_prefix(const Expression& e);
std::string to_prefix_string(const Expression& e);
/// Inverse of to_prefix. Throws MalformedSequence unless the tokens form
/// exactly one well-formed expression.
Expression parse_prefix(std::span<const std::string> tokens);
Expression parse_prefix(std::string_view text);
TokenSequence split_tokens(std::string_view text);

/// Fully parenthesized infix rendering.
std::string to_infix(const Expression& e);

/// Closed token alphabet, in vocabulary-id order.
const std::vector<std::string>& vocabulary();
inline constexpr int kVocabularyVersion = 1;

// ---------------------------------------------------------------------------
// Structural queries

std::size_t count_internal_nodes(const Expression& e);
/// Variables (x, y, z, y', y'') occurring in e.
std::set<Symbol> free_variables(const Expression& e);
/// Non-variable symbols (e, pi, c, c1, c2) occurring in e.
std::set<Symbol> constants_of(const Expression& e);
std::size_t count_occurrences(const Expression& e, Symbol s);
bool depends_on_variables(const Expression& e);

/// Child-index path from the root. Throws PathOutOfRange.
Expression subtree_at(const Expression& e, std::span<const int> path);
Expression replace_at(const Expression& e, std::span<const int> path, const Expression& replacement);
/// Paths of all leaves, in prefix order.
std::vector<std::vector<int>> leaf_paths(const Expression& e);
std::optional<std::vector<int>> path_to_symbol(const Expression& e, Symbol s);

Expression substitute(const Expression& e, Symbol s, const Expression& replacement);

// ---------------------------------------------------------------------------
// Construction helpers (no simplification is applied).

namespace build {

inline Expression num(long long v) { return Expression::integer(v); }
inline Expression sym(Symbol s) { return Expression::symbol(s); }
inline Expression x() { return sym(Symbol::X); }
inline Expression y() { return sym(Symbol::Y); }
inline Expression dy() { return sym(Symbol::Dy); }
inline Expression d2y() { return sym(Symbol::D2y); }
inline Expression c() { return sym(Symbol::C); }
inline Expression c1() { return sym(Symbol::C1); }
inline Expression c2() { return sym(Symbol::C2); }

inline Expression operator+(Expression a, Expression b) { return Expression::binary(Op::Add, std::move(a), std::move(b)); }
inline Expression operator-(Expression a, Expression b) { return Expression::binary(Op::Sub, std::move(a), std::move(b)); }
inline Expression operator*(Expression a, Expression b) { return Expression::binary(Op::Mul, std::move(a), std::move(b)); }
inline Expression operator/(Expression a, Expression b) { return Expression::binary(Op::Div, std::move(a), std::move(b)); }
inline Expression operator+(Expression a, long long b) { return std::move(a) + num(b); }
inline Expression operator+(long long a, Expression b) { return num(a) + std::move(b); }
inline Expression operator-(Expression a, long long b) { return std::move(a) - num(b); }
inline Expression operator-(long long a, Expression b) { return num(a) - std::move(b); }
inline Expression operator*(long long a, Expression b) { return num(a) * std::move(b); }
inline Expression operator*(Expression a, long long b) { return std::move(a) * num(b); }
inline Expression operator/(Expression a, long long b) { return std::move(a) / num(b); }
inline Expression operator/(long long a, Expression b) { return num(a) / std::move(b); }
inline Expression neg(Expression a) { return num(-1) * std::move(a); }
inline Expression pow(Expression a, Expression b) { return Expression::binary(Op::Pow, std::move(a), std::move(b)); }
inline Expression pow(Expression a, long long k) { return pow(std::move(a), num(k)); }
inline Expression fn(Op op, Expression a) { return Expression::unary(op, std::move(a)); }

#define SYMGEN_UNARY_BUILDER(name, OP) \
  inline Expression name(Expression a) { return fn(Op::OP, std::move(a)); }
SYMGEN_UNARY_BUILDER(exp, Exp)
SYMGEN_UNARY_BUILDER(log, Log)
SYMGEN_UNARY_BUILDER(sqrt, Sqrt)
SYMGEN_UNARY_BUILDER(sin, Sin)
SYMGEN_UNARY_BUILDER(cos, Cos)
SYMGEN_UNARY_BUILDER(tan, Tan)
SYMGEN_UNARY_BUILDER(asin, Asin)
SYMGEN_UNARY_BUILDER(acos, Acos)
SYMGEN_UNARY_BUILDER(atan, Atan)
SYMGEN_UNARY_BUILDER(sinh, Sinh)
SYMGEN_UNARY_BUILDER(cosh, Cosh)
SYMGEN_UNARY_BUILDER(tanh, Tanh)
SYMGEN_UNARY_BUILDER(asinh, Asinh)
SYMGEN_UNARY_BUILDER(acosh, Acosh)
SYMGEN_UNARY_BUILDER(atanh, Atanh)
#undef SYMGEN_UNARY_BUILDER

}  // namespace build

}  // namespace symgen
