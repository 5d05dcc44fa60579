#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "symgen/bigint.hpp"
#include "symgen/expr.hpp"
#include "symgen/grammar.hpp"

namespace symgen {

using Rng = std::mt19937_64;

enum class TreeMode {
  Binary,       // uniform over binary tree shapes
  UnaryBinary,  // uniform over unary-binary tree shapes
  Weighted,     // uniform over decorated expressions (equiprobable alphabet)
};

std::string to_string(TreeMode mode);
TreeMode tree_mode_from_string(const std::string& s);

/// D(e, n): number of ways to complete e empty slots with n internal nodes.
///   Binary:      D(e,n) = D(e-1,n) + D(e+1,n-1)
///   UnaryBinary: D(e,n) = D(e-1,n) + D(e,n-1) + D(e+1,n-1)
///   Weighted:    D(e,n) = L D(e-1,n) + p1 D(e,n-1) + p2 D(e+1,n-1), D(e,0) = L^e
/// with D(0,n>0) = 0 and D(e,0) = 1 otherwise. Immutable once built.
class SubtreeTable {
 public:
  SubtreeTable(TreeMode mode, int n_max, unsigned long long p1 = 1, unsigned long long p2 = 1,
               unsigned long long leaves = 1);

  TreeMode mode() const { return mode_; }
  int n_max() const { return n_max_; }
  /// Largest e for which D(e, n_max) is stored; smaller n store more.
  int e_max() const { return e_limit_ - n_max_; }
  const BigInt& at(int e, int n) const;

  unsigned long long p1() const { return p1_; }
  unsigned long long p2() const { return p2_; }
  unsigned long long leaves() const { return leaves_; }

  /// Count of completions that put the next internal node at position k with
  /// the given arity; P = weight / D(e, n).
  BigInt placement_weight(int e, int n, int k, int arity) const;

 private:
  TreeMode mode_;
  int n_max_;
  int e_limit_;
  unsigned long long p1_, p2_, leaves_;
  std::vector<std::vector<BigInt>> d_;  // d_[n][e]
};

SubtreeTable build_tables(TreeMode mode, int n_max);
/// Weighted tables take (p1, p2, L) from the grammar.
SubtreeTable build_tables(TreeMode mode, int n_max, const GrammarConfig& grammar);

/// Undecorated tree as the prefix-order list of node arities (0 = leaf slot).
struct TreeSkeleton {
  std::vector<std::uint8_t> arities;

  int internal_nodes() const;
  std::string to_string() const;
  friend bool operator==(const TreeSkeleton&, const TreeSkeleton&) = default;
  friend auto operator<=>(const TreeSkeleton&, const TreeSkeleton&) = default;
};

TreeSkeleton skeleton_of(const Expression& e);

/// Draws k with P(k) = D(e-k+1, n-1) / D(e, n) using an exact big-integer draw.
int sample_position_binary(int e, int n, const SubtreeTable& table, Rng& rng);

struct Placement {
  int position = 0;
  int arity = 2;
};

/// Joint draw of position and arity of the next internal node.
Placement sample_position_arity(int e, int n, const SubtreeTable& table, Rng& rng);

TreeSkeleton sample_tree(int n, const SubtreeTable& table, Rng& rng);

/// Assigns operators and leaf values, i.i.d. per the grammar's priors.
/// Throws ConfigMismatch when the skeleton needs an arity the grammar lacks.
Expression decorate(const TreeSkeleton& skeleton, const GrammarConfig& grammar, Rng& rng);

Expression sample_expression(int n, const GrammarConfig& grammar, const SubtreeTable& table, Rng& rng);

/// A random function of x for the generators: n uniform in
/// [1, min(grammar.max_internal_nodes, table.n_max())], redrawn until x occurs.
Expression sample_function(const GrammarConfig& grammar, const SubtreeTable& table, Rng& rng);

/// All skeletons with n internal nodes (n <= 8, TooLarge otherwise).
std::vector<TreeSkeleton> enumerate_trees(int n, TreeMode mode);

/// Deterministic per-shard seed.
inline std::uint64_t shard_seed(std::uint64_t base_seed, int shard) { return base_seed + static_cast<std::uint64_t>(shard); }

}  // namespace symgen
