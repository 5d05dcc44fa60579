#include "symgen/grammar.hpp"

#include <algorithm>
#include <cmath>

#include "symgen/errors.hpp"

namespace symgen {

namespace {

void check_weights(const std::vector<double>& w, std::size_t expected, const char* what) {
  if (w.empty()) return;
  if (w.size() != expected) {
    throw InvalidConfig(std::string(what) + " weights: expected " + std::to_string(expected) +
                        " entries, got " + std::to_string(w.size()));
  }
  for (double v : w) {
    if (!(v > 0.0) || !std::isfinite(v)) throw InvalidConfig(std::string(what) + " weights must be positive");
  }
}

}  // namespace

void GrammarConfig::validate() const {
  if (binary_ops.empty()) throw InvalidConfig("at least one binary operator is required");
  if (leaves.empty()) throw InvalidConfig("at least one leaf value is required");
  if (max_internal_nodes < 1) throw InvalidConfig("max_internal_nodes must be >= 1");
  for (Op op : unary_ops) {
    if (arity(op) != 1) throw InvalidConfig("binary operator listed as unary: " + std::string(token(op)));
  }
  for (Op op : binary_ops) {
    if (arity(op) != 2) throw InvalidConfig("unary operator listed as binary: " + std::string(token(op)));
  }
  for (const auto& leaf : leaves) {
    if (!leaf.is_leaf()) throw InvalidConfig("leaf alphabet entries must be leaves");
  }
  check_weights(unary_weights, unary_ops.size(), "unary");
  check_weights(binary_weights, binary_ops.size(), "binary");
  check_weights(leaf_weights, leaves.size(), "leaf");
}

std::vector<Expression> make_leaves(const std::vector<Symbol>& symbols, long long int_min,
                                    long long int_max, bool exclude_zero) {
  std::vector<Expression> out;
  for (Symbol s : symbols) out.push_back(Expression::symbol(s));
  for (long long v = int_min; v <= int_max; ++v) {
    if (v == 0 && exclude_zero) continue;
    out.push_back(Expression::integer(v));
  }
  return out;
}

GrammarConfig GrammarConfig::dataset_default() {
  GrammarConfig cfg;
  cfg.unary_ops.assign(kUnaryOps.begin(), kUnaryOps.end());
  cfg.binary_ops = {Op::Add, Op::Sub, Op::Mul, Op::Div};
  cfg.leaves = make_leaves({Symbol::X}, -5, 5, true);
  cfg.max_internal_nodes = 15;
  return cfg;
}

}  // namespace symgen
