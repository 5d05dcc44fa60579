#include "symgen/sampler.hpp"

#include <boost/random/discrete_distribution.hpp>
#include <boost/random/uniform_int_distribution.hpp>

#include "symgen/errors.hpp"

namespace symgen {

std::string to_string(TreeMode mode) {
  switch (mode) {
    case TreeMode::Binary: return "binary";
    case TreeMode::UnaryBinary: return "unary-binary";
    case TreeMode::Weighted: return "weighted";
  }
  return "unknown";
}

TreeMode tree_mode_from_string(const std::string& s) {
  if (s == "binary") return TreeMode::Binary;
  if (s == "unary-binary") return TreeMode::UnaryBinary;
  if (s == "weighted") return TreeMode::Weighted;
  throw InvalidConfig("unknown tree mode '" + s + "'");
}

SubtreeTable::SubtreeTable(TreeMode mode, int n_max, unsigned long long p1, unsigned long long p2,
                           unsigned long long leaves)
    : mode_(mode), n_max_(n_max), e_limit_(2 * n_max + 2), p1_(p1), p2_(p2), leaves_(leaves) {
  if (n_max < 1) throw InvalidConfig("n_max must be >= 1");
  if (mode == TreeMode::Binary) p1_ = 0;
  if (mode != TreeMode::Weighted) {
    leaves_ = 1;
    p2_ = 1;
    if (mode == TreeMode::UnaryBinary) p1_ = 1;
  }
  // Row n holds e in [0, e_limit_ - n]; D(e+1, n-1) is then always in range.
  d_.resize(static_cast<std::size_t>(n_max) + 1);
  for (int n = 0; n <= n_max; ++n) {
    auto& row = d_[static_cast<std::size_t>(n)];
    row.resize(static_cast<std::size_t>(e_limit_ - n) + 1);
    for (int e = 0; e <= e_limit_ - n; ++e) {
      BigInt v;
      if (n == 0) {
        v = mode_ == TreeMode::Weighted ? boost::multiprecision::pow(BigInt(leaves_), static_cast<unsigned>(e))
                                        : BigInt(1);
      } else if (e == 0) {
        v = 0;
      } else {
        const auto& prev = d_[static_cast<std::size_t>(n - 1)];
        const BigInt& leaf_first = row[static_cast<std::size_t>(e - 1)];
        const BigInt& binary_first = prev[static_cast<std::size_t>(e + 1)];
        switch (mode_) {
          case TreeMode::Binary:
            v = leaf_first + binary_first;
            break;
          case TreeMode::UnaryBinary:
            v = leaf_first + prev[static_cast<std::size_t>(e)] + binary_first;
            break;
          case TreeMode::Weighted:
            v = leaf_first * leaves_ + prev[static_cast<std::size_t>(e)] * p1_ + binary_first * p2_;
            break;
        }
      }
      row[static_cast<std::size_t>(e)] = std::move(v);
    }
  }
}

const BigInt& SubtreeTable::at(int e, int n) const {
  if (n < 0 || n > n_max_ || e < 0 || e > e_limit_ - n) {
    throw std::out_of_range("SubtreeTable::at(" + std::to_string(e) + ", " + std::to_string(n) + ")");
  }
  return d_[static_cast<std::size_t>(n)][static_cast<std::size_t>(e)];
}

BigInt SubtreeTable::placement_weight(int e, int n, int k, int arity) const {
  if (k < 0 || k >= e || n < 1) return 0;
  switch (mode_) {
    case TreeMode::Binary:
      return arity == 2 ? at(e - k + 1, n - 1) : BigInt(0);
    case TreeMode::UnaryBinary:
      return arity == 1 ? at(e - k, n - 1) : at(e - k + 1, n - 1);
    case TreeMode::Weighted: {
      const BigInt leaf_part = boost::multiprecision::pow(BigInt(leaves_), static_cast<unsigned>(k));
      return arity == 1 ? leaf_part * p1_ * at(e - k, n - 1) : leaf_part * p2_ * at(e - k + 1, n - 1);
    }
  }
  return 0;
}

SubtreeTable build_tables(TreeMode mode, int n_max) { return SubtreeTable(mode, n_max); }

SubtreeTable build_tables(TreeMode mode, int n_max, const GrammarConfig& grammar) {
  return SubtreeTable(mode, n_max, grammar.p1(), grammar.p2(), grammar.leaf_count());
}

int TreeSkeleton::internal_nodes() const {
  int n = 0;
  for (auto a : arities) n += a > 0 ? 1 : 0;
  return n;
}

std::string TreeSkeleton::to_string() const {
  std::string s;
  for (auto a : arities) s.push_back(static_cast<char>('0' + a));
  return s;
}

TreeSkeleton skeleton_of(const Expression& e) {
  TreeSkeleton s;
  std::vector<const Expression*> stack{&e};
  while (!stack.empty()) {
    const Expression* cur = stack.back();
    stack.pop_back();
    s.arities.push_back(static_cast<std::uint8_t>(cur->arity()));
    for (std::size_t i = cur->arity(); i-- > 0;) stack.push_back(&cur->child(i));
  }
  return s;
}

namespace {

BigInt uniform_below(const BigInt& bound, Rng& rng) {
  boost::random::uniform_int_distribution<BigInt> dist(0, bound - 1);
  return dist(rng);
}

}  // namespace

int sample_position_binary(int e, int n, const SubtreeTable& table, Rng& rng) {
  BigInt r = uniform_below(table.at(e, n), rng);
  for (int k = 0; k < e; ++k) {
    const BigInt& w = table.at(e - k + 1, n - 1);
    if (r < w) return k;
    r -= w;
  }
  throw std::logic_error("sample_position_binary: weights do not sum to D(e,n)");
}

Placement sample_position_arity(int e, int n, const SubtreeTable& table, Rng& rng) {
  if (table.mode() == TreeMode::Binary) return Placement{sample_position_binary(e, n, table, rng), 2};
  BigInt r = uniform_below(table.at(e, n), rng);
  for (int k = 0; k < e; ++k) {
    for (int a = 1; a <= 2; ++a) {
      const BigInt w = table.placement_weight(e, n, k, a);
      if (r < w) return Placement{k, a};
      r -= w;
    }
  }
  throw std::logic_error("sample_position_arity: weights do not sum to D(e,n)");
}

TreeSkeleton sample_tree(int n, const SubtreeTable& table, Rng& rng) {
  if (n < 0 || n > table.n_max()) throw InvalidConfig("sample_tree: n outside table range");
  struct Slot {
    std::uint8_t arity = 0;
    std::uint32_t first_child = 0;
  };
  std::vector<Slot> nodes(1);
  std::vector<std::uint32_t> empty{0};  // pending slots, in prefix order
  std::size_t head = 0;                 // empty[head..] are still pending
  int e = 1;
  for (int remaining = n; remaining > 0; --remaining) {
    const Placement p = sample_position_arity(e, remaining, table, rng);
    head += static_cast<std::size_t>(p.position);  // the first k slots become leaves
    const std::uint32_t target = empty[head];
    ++head;
    const auto first = static_cast<std::uint32_t>(nodes.size());
    nodes[target].arity = static_cast<std::uint8_t>(p.arity);
    nodes[target].first_child = first;
    nodes.resize(nodes.size() + static_cast<std::size_t>(p.arity));
    // Children precede the remaining slots in prefix order.
    std::vector<std::uint32_t> next;
    next.reserve(empty.size() - head + static_cast<std::size_t>(p.arity));
    for (int c = 0; c < p.arity; ++c) next.push_back(first + static_cast<std::uint32_t>(c));
    next.insert(next.end(), empty.begin() + static_cast<std::ptrdiff_t>(head), empty.end());
    empty = std::move(next);
    head = 0;
    e = e - p.position - 1 + p.arity;
  }

  TreeSkeleton out;
  out.arities.reserve(nodes.size());
  std::vector<std::uint32_t> stack{0};
  while (!stack.empty()) {
    const std::uint32_t id = stack.back();
    stack.pop_back();
    out.arities.push_back(nodes[id].arity);
    for (int c = nodes[id].arity; c-- > 0;) stack.push_back(nodes[id].first_child + static_cast<std::uint32_t>(c));
  }
  return out;
}

namespace {

std::size_t pick_index(std::size_t count, const std::vector<double>& weights, Rng& rng) {
  if (weights.empty()) {
    boost::random::uniform_int_distribution<std::size_t> dist(0, count - 1);
    return dist(rng);
  }
  boost::random::discrete_distribution<std::size_t, double> dist(weights.begin(), weights.end());
  return dist(rng);
}

}  // namespace

Expression decorate(const TreeSkeleton& skeleton, const GrammarConfig& grammar, Rng& rng) {
  if (skeleton.arities.empty()) throw InvalidConfig("decorate: empty skeleton");
  // Draw decorations in prefix order, then assemble bottom-up.
  std::vector<Expression> stack;
  struct Choice {
    std::uint8_t arity;
    Op op;
    std::size_t leaf;
  };
  std::vector<Choice> choices;
  choices.reserve(skeleton.arities.size());
  for (auto a : skeleton.arities) {
    if (a == 0) {
      choices.push_back({0, Op::Add, pick_index(grammar.leaves.size(), grammar.leaf_weights, rng)});
    } else if (a == 1) {
      if (grammar.unary_ops.empty()) throw ConfigMismatch("skeleton has unary nodes but p1 = 0");
      choices.push_back({1, grammar.unary_ops[pick_index(grammar.unary_ops.size(), grammar.unary_weights, rng)], 0});
    } else {
      if (grammar.binary_ops.empty()) throw ConfigMismatch("skeleton has binary nodes but p2 = 0");
      choices.push_back({2, grammar.binary_ops[pick_index(grammar.binary_ops.size(), grammar.binary_weights, rng)], 0});
    }
  }
  for (std::size_t i = choices.size(); i-- > 0;) {
    const Choice& ch = choices[i];
    if (ch.arity == 0) {
      stack.push_back(grammar.leaves[ch.leaf]);
    } else if (ch.arity == 1) {
      Expression a = std::move(stack.back());
      stack.pop_back();
      stack.push_back(Expression::unary(ch.op, std::move(a)));
    } else {
      Expression lhs = std::move(stack.back());
      stack.pop_back();
      Expression rhs = std::move(stack.back());
      stack.pop_back();
      stack.push_back(Expression::binary(ch.op, std::move(lhs), std::move(rhs)));
    }
  }
  if (stack.size() != 1) throw InvalidConfig("decorate: malformed skeleton");
  return stack.back();
}

Expression sample_expression(int n, const GrammarConfig& grammar, const SubtreeTable& table, Rng& rng) {
  return decorate(sample_tree(n, table, rng), grammar, rng);
}

Expression sample_function(const GrammarConfig& grammar, const SubtreeTable& table, Rng& rng) {
  const int n_max = std::min(grammar.max_internal_nodes, table.n_max());
  if (n_max < 1) throw InvalidConfig("sampling a function needs at least one internal node");
  boost::random::uniform_int_distribution<int> pick(1, n_max);
  for (int attempt = 0; attempt < 10000; ++attempt) {
    Expression f = sample_expression(pick(rng), grammar, table, rng);
    if (f.contains(Symbol::X)) return f;
  }
  throw RetriesExhausted("grammar never produced a function of x");
}

namespace {

using ShapeMemo = std::vector<std::vector<std::vector<std::uint8_t>>>;

void enumerate_into(int n, bool unary, ShapeMemo& memo) {
  if (!memo[static_cast<std::size_t>(n)].empty()) return;
  auto& out = memo[static_cast<std::size_t>(n)];
  if (n == 0) {
    out.push_back({0});
    return;
  }
  if (unary) {
    enumerate_into(n - 1, unary, memo);
    for (const auto& t : memo[static_cast<std::size_t>(n - 1)]) {
      std::vector<std::uint8_t> s{1};
      s.insert(s.end(), t.begin(), t.end());
      out.push_back(std::move(s));
    }
  }
  for (int k = 0; k <= n - 1; ++k) {
    enumerate_into(k, unary, memo);
    enumerate_into(n - 1 - k, unary, memo);
    for (const auto& l : memo[static_cast<std::size_t>(k)]) {
      for (const auto& r : memo[static_cast<std::size_t>(n - 1 - k)]) {
        std::vector<std::uint8_t> s{2};
        s.insert(s.end(), l.begin(), l.end());
        s.insert(s.end(), r.begin(), r.end());
        out.push_back(std::move(s));
      }
    }
  }
}

}  // namespace

std::vector<TreeSkeleton> enumerate_trees(int n, TreeMode mode) {
  if (n < 0) throw InvalidConfig("enumerate_trees: n must be nonnegative");
  if (n > 8) throw TooLarge("enumerate_trees is limited to n <= 8");
  ShapeMemo memo(static_cast<std::size_t>(n) + 1);
  enumerate_into(n, mode != TreeMode::Binary, memo);
  std::vector<TreeSkeleton> out;
  out.reserve(memo[static_cast<std::size_t>(n)].size());
  for (auto& s : memo[static_cast<std::size_t>(n)]) out.push_back(TreeSkeleton{std::move(s)});
  return out;
}

}  // namespace symgen
