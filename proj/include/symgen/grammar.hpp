#pragma once

#include <string>
#include <vector>

#include "symgen/expr.hpp"

namespace symgen {

/// Operator and leaf alphabet used to sample expressions.
struct GrammarConfig {
  std::vector<Op> unary_ops;
  std::vector<Op> binary_ops;
  std::vector<Expression> leaves;
  int max_internal_nodes = 15;

  // Integer leaf range the leaves were built from (informational, for manifests).
  long long int_min = -5;
  long long int_max = 5;
  bool exclude_zero = true;

  // Optional priors; empty means uniform.
  std::vector<double> unary_weights;
  std::vector<double> binary_weights;
  std::vector<double> leaf_weights;

  std::size_t p1() const { return unary_ops.size(); }
  std::size_t p2() const { return binary_ops.size(); }
  std::size_t leaf_count() const { return leaves.size(); }

  /// Throws InvalidConfig.
  void validate() const;

  /// 15 unary operators, {+,-,*,/}, leaves {x} U {-5..5}\{0}, n <= 15.
  static GrammarConfig dataset_default();
};

std::vector<Expression> make_leaves(const std::vector<Symbol>& symbols, long long int_min,
                                    long long int_max, bool exclude_zero);

}  // namespace symgen
