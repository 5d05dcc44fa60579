#include "symgen/simplify.hpp"

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <unordered_map>

#include "json.hpp"

#include "symgen/errors.hpp"

namespace symgen {

namespace {

namespace mp = boost::multiprecision;

struct Factor {
  Expression base;
  BigInt exponent;
};

struct Term {
  Rational coef{1};
  std::vector<Factor> factors;  // sorted by base, distinct, nonzero exponents
};

using Poly = std::vector<Term>;

struct ExpansionTooLarge {};

struct Ctx {
  bool expand = false;
  std::size_t max_terms = 400;
  std::set<std::string>* fired = nullptr;
  // Term products formed so far while expanding; capped at kWorkFactor * max_terms.
  mutable std::size_t work = 0;
  mutable std::unordered_map<Expression, std::vector<Term>, ExpressionHash> poly_cache;

  void fire(const char* rule) const {
    if (fired) fired->insert(rule);
  }
};

constexpr unsigned kMaxCoefBits = 512;
constexpr std::size_t kWorkFactor = 50;
constexpr long long kMaxFoldExponent = 64;

bool is_sum(const Expression& e) { return e.is_op(Op::Add) || e.is_op(Op::Sub); }

int compare_factor(const Factor& a, const Factor& b) {
  if (int c = compare(a.base, b.base)) return c;
  if (a.exponent != b.exponent) return a.exponent < b.exponent ? -1 : 1;
  return 0;
}

// Terms order by their non-numeric part; the constant term goes last.
int compare_key(const Term& a, const Term& b) {
  if (a.factors.empty() != b.factors.empty()) return a.factors.empty() ? 1 : -1;
  const std::size_t n = std::min(a.factors.size(), b.factors.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (int c = compare_factor(a.factors[i], b.factors[i])) return c;
  }
  if (a.factors.size() != b.factors.size()) return a.factors.size() < b.factors.size() ? -1 : 1;
  return 0;
}

bool same_key(const Term& a, const Term& b) { return compare_key(a, b) == 0; }

bool coef_fits(const Rational& r) {
  return mp::msb(mp::abs(numerator_of(r)) + 1) < kMaxCoefBits && mp::msb(denominator_of(r)) < kMaxCoefBits;
}

Expression rational_expr(const Rational& r) {
  const BigInt n = numerator_of(r), d = denominator_of(r);
  if (d == 1) return Expression::integer(n);
  return Expression::binary(Op::Div, Expression::integer(n), Expression::integer(d));
}

Term atom(const Expression& e) { return Term{Rational(1), {Factor{e, 1}}}; }

// Forward declarations: the normal form is mutually recursive.
Expression simplify_node(const Expression& e, const Ctx& ctx);
Poly to_poly(const Expression& e, const Ctx& ctx);
Term to_term(const Expression& e, const Ctx& ctx);
Expression build_poly(const Poly& p);
Poly collect(Poly p, const Ctx& ctx);
void normalize_term(Term& t, const Ctx& ctx);

Term term_mul(Term a, const Term& b, const Ctx& ctx) {
  a.coef *= b.coef;
  a.factors.insert(a.factors.end(), b.factors.begin(), b.factors.end());
  normalize_term(a, ctx);
  return a;
}

std::optional<Term> term_pow(const Term& t, const BigInt& k, const Ctx& ctx) {
  if (k == 0) return Term{};
  if (t.coef == 0) {
    if (k < 0) return std::nullopt;
    return Term{Rational(0), {}};
  }
  if (mp::abs(k) > kMaxFoldExponent) return std::nullopt;
  const long long kk = k.convert_to<long long>();
  Rational base = kk < 0 ? Rational(1) / t.coef : t.coef;
  Rational c = 1;
  for (long long i = 0; i < std::llabs(kk); ++i) {
    c *= base;
    if (!coef_fits(c)) return std::nullopt;
  }
  Term out{c, t.factors};
  for (auto& f : out.factors) f.exponent *= k;
  normalize_term(out, ctx);
  return out;
}

std::optional<Term> term_inverse(const Term& t, const Ctx& ctx) { return term_pow(t, -1, ctx); }

Poly poly_scale(Poly p, const Term& t, const Ctx& ctx) {
  for (auto& term : p) term = term_mul(term, t, ctx);
  return p;
}

Poly poly_negate(Poly p) {
  for (auto& t : p) t.coef = -t.coef;
  return p;
}

Poly poly_mul(const Poly& a, const Poly& b, const Ctx& ctx) {
  if (a.size() * b.size() > ctx.max_terms) throw ExpansionTooLarge{};
  ctx.work += a.size() * b.size();
  if (ctx.expand && ctx.work > kWorkFactor * ctx.max_terms) throw ExpansionTooLarge{};
  Poly out;
  out.reserve(a.size() * b.size());
  for (const auto& x : a) {
    for (const auto& y : b) out.push_back(term_mul(x, y, ctx));
  }
  return collect(std::move(out), ctx);
}

bool leading_negative(const Poly& p) { return !p.empty() && p.front().coef < 0; }

Term poly_as_term(const Poly& p) {
  if (p.empty()) return Term{Rational(0), {}};
  if (p.size() == 1) return p.front();
  return atom(build_poly(p));
}

// Merges exp(u)^a * exp(v)^b into exp(a u + b v).
void merge_exponentials(Term& t, const Ctx& ctx) {
  Poly arg;
  std::vector<Factor> rest;
  int count = 0;
  for (auto& f : t.factors) {
    if (f.base.is_op(Op::Exp)) {
      ++count;
      Poly p = to_poly(f.base.arg(), ctx);
      Poly scaled = poly_scale(std::move(p), Term{Rational(f.exponent), {}}, ctx);
      arg.insert(arg.end(), scaled.begin(), scaled.end());
    } else {
      rest.push_back(std::move(f));
    }
  }
  if (count == 0) {
    t.factors = std::move(rest);
    return;
  }
  arg = collect(std::move(arg), ctx);
  if (count > 1) ctx.fire("merge-exponentials");
  if (!arg.empty()) {
    Expression e = Expression::unary(Op::Exp, build_poly(arg));
    rest.push_back(Factor{simplify_node(e, ctx), 1});
  }
  t.factors = std::move(rest);
}

bool sort_and_merge(Term& t) {
  std::sort(t.factors.begin(), t.factors.end(),
            [](const Factor& a, const Factor& b) { return compare(a.base, b.base) < 0; });
  std::vector<Factor> merged;
  bool changed = false;
  for (auto& f : t.factors) {
    if (!merged.empty() && merged.back().base == f.base) {
      merged.back().exponent += f.exponent;
      changed = true;
    } else {
      merged.push_back(std::move(f));
    }
  }
  std::erase_if(merged, [](const Factor& f) { return f.exponent == 0; });
  t.factors = std::move(merged);
  return changed;
}

void normalize_term(Term& t, const Ctx& ctx) {
  if (t.coef == 0) {
    t.factors.clear();
    return;
  }
  if (sort_and_merge(t)) ctx.fire("merge-powers");
  bool has_exp = false;
  int exp_count = 0;
  for (const auto& f : t.factors) {
    if (f.base.is_op(Op::Exp)) {
      ++exp_count;
      if (f.exponent != 1) has_exp = true;
    }
  }
  if (exp_count > 1 || has_exp) {
    merge_exponentials(t, ctx);
    sort_and_merge(t);
  }
  // sqrt(u)^(2q + r) -> u^q sqrt(u)^r; sums with a negative lead flip sign.
  for (int guard = 0; guard < 8; ++guard) {
    bool changed = false;
    std::vector<Factor> out;
    Term extra{Rational(1), {}};
    for (auto& f : t.factors) {
      if (f.base.is_op(Op::Sqrt) && mp::abs(f.exponent) >= 2) {
        const BigInt q = f.exponent / 2;
        const BigInt r = f.exponent - 2 * q;
        auto inner = term_pow(to_term(f.base.arg(), ctx), q, ctx);
        if (inner) {
          ctx.fire("sqrt-square");
          extra.coef *= inner->coef;
          extra.factors.insert(extra.factors.end(), inner->factors.begin(), inner->factors.end());
          if (r != 0) out.push_back(Factor{f.base, r});
          changed = true;
          continue;
        }
      }
      if (is_sum(f.base)) {
        Poly p = to_poly(f.base, ctx);
        if (leading_negative(p)) {
          ctx.fire("sum-sign");
          Expression flipped = build_poly(poly_negate(std::move(p)));
          if (mp::bit_test(mp::abs(f.exponent), 0)) t.coef = -t.coef;
          out.push_back(Factor{flipped, f.exponent});
          changed = true;
          continue;
        }
      }
      out.push_back(std::move(f));
    }
    t.factors = std::move(out);
    if (!changed) break;
    t.coef *= extra.coef;
    t.factors.insert(t.factors.end(), extra.factors.begin(), extra.factors.end());
    sort_and_merge(t);
    if (t.coef == 0) {
      t.factors.clear();
      return;
    }
  }
}

Term to_term(const Expression& e, const Ctx& ctx) {
  switch (e.kind()) {
    case Expression::Kind::Integer: return Term{Rational(e.value()), {}};
    case Expression::Kind::Symbol:
    case Expression::Kind::Unary: return atom(e);
    case Expression::Kind::Binary: break;
  }
  switch (e.op()) {
    case Op::Mul: return term_mul(to_term(e.lhs(), ctx), to_term(e.rhs(), ctx), ctx);
    case Op::Div: {
      auto inv = term_inverse(to_term(e.rhs(), ctx), ctx);
      if (!inv) return atom(e);
      return term_mul(to_term(e.lhs(), ctx), *inv, ctx);
    }
    case Op::Pow: {
      if (!e.rhs().is_integer()) return atom(e);
      auto p = term_pow(to_term(e.lhs(), ctx), e.rhs().value(), ctx);
      if (!p) return atom(e);
      return *p;
    }
    case Op::Add:
    case Op::Sub: {
      Poly p = to_poly(e, ctx);
      if (p.empty()) return Term{Rational(0), {}};
      if (p.size() == 1) return p.front();
      Term t = atom(build_poly(p));
      normalize_term(t, ctx);
      return t;
    }
    default: return atom(e);
  }
}

Poly to_poly_uncached(const Expression& e, const Ctx& ctx);

Poly to_poly(const Expression& e, const Ctx& ctx) {
  if (e.is_leaf()) return to_poly_uncached(e, ctx);
  if (auto it = ctx.poly_cache.find(e); it != ctx.poly_cache.end()) return it->second;
  Poly p = to_poly_uncached(e, ctx);
  ctx.poly_cache.emplace(e, p);
  return p;
}

Poly to_poly_uncached(const Expression& e, const Ctx& ctx) {
  Poly out;
  if (e.is_op(Op::Add) || e.is_op(Op::Sub)) {
    Poly l = to_poly(e.lhs(), ctx);
    Poly r = to_poly(e.rhs(), ctx);
    if (e.is_op(Op::Sub)) r = poly_negate(std::move(r));
    out = std::move(l);
    out.insert(out.end(), r.begin(), r.end());
    return collect(std::move(out), ctx);
  }
  Term t = to_term(e, ctx);
  if (t.coef != 0) out.push_back(std::move(t));
  return collect(std::move(out), ctx);
}

// Finds sin^2/cos^2 (and cosh^2/sinh^2) pairs sharing the rest of the term.
bool apply_pythagorean(Poly& p, const Ctx& ctx) {
  for (std::size_t i = 0; i < p.size(); ++i) {
    for (std::size_t fi = 0; fi < p[i].factors.size(); ++fi) {
      const Factor& f = p[i].factors[fi];
      if (f.exponent != 2) continue;
      Op partner;
      bool hyperbolic;
      if (f.base.is_op(Op::Cos)) {
        partner = Op::Sin;
        hyperbolic = false;
      } else if (f.base.is_op(Op::Cosh)) {
        partner = Op::Sinh;
        hyperbolic = true;
      } else {
        continue;
      }
      Term rest = p[i];
      rest.factors.erase(rest.factors.begin() + static_cast<long>(fi));
      Term want = rest;
      want.coef = hyperbolic ? -p[i].coef : p[i].coef;
      want.factors.push_back(Factor{Expression::unary(partner, f.base.arg()), 2});
      sort_and_merge(want);
      for (std::size_t j = 0; j < p.size(); ++j) {
        if (j == i || !same_key(p[j], want) || p[j].coef != want.coef) continue;
        ctx.fire(hyperbolic ? "hyperbolic-pythagorean" : "pythagorean");
        p[i] = rest;
        p.erase(p.begin() + static_cast<long>(j));
        return true;
      }
    }
  }
  return false;
}

Poly collect(Poly p, const Ctx& ctx) {
  for (int guard = 0; guard < 16; ++guard) {
    // A term that is just k * (sum) is flattened into the sum.
    bool flattened = false;
    Poly next;
    for (auto& t : p) {
      if (t.coef == 0) continue;
      if (t.factors.size() == 1 && t.factors[0].exponent == 1 && is_sum(t.factors[0].base)) {
        Poly inner = to_poly(t.factors[0].base, ctx);
        for (auto& it : inner) {
          it.coef *= t.coef;
          next.push_back(std::move(it));
        }
        flattened = true;
        ctx.fire("distribute-numeric");
      } else {
        next.push_back(std::move(t));
      }
    }
    p = std::move(next);
    std::stable_sort(p.begin(), p.end(), [](const Term& a, const Term& b) { return compare_key(a, b) < 0; });
    Poly merged;
    for (auto& t : p) {
      if (!merged.empty() && same_key(merged.back(), t)) {
        merged.back().coef += t.coef;
        ctx.fire("combine-like-terms");
      } else {
        merged.push_back(std::move(t));
      }
    }
    std::erase_if(merged, [](const Term& t) { return t.coef == 0; });
    p = std::move(merged);
    if (apply_pythagorean(p, ctx)) continue;
    if (!flattened) break;
  }
  if (p.size() > ctx.max_terms && ctx.expand) throw ExpansionTooLarge{};
  return p;
}

Expression chain(const std::vector<Expression>& items) {
  Expression out = items.front();
  for (std::size_t i = 1; i < items.size(); ++i) out = Expression::binary(Op::Mul, out, items[i]);
  return out;
}

Expression factor_expr(const Factor& f, bool invert) {
  const BigInt k = invert ? BigInt(-f.exponent) : f.exponent;
  if (k == 1) return f.base;
  return Expression::binary(Op::Pow, f.base, Expression::integer(k));
}

Expression build_term(const Term& t, bool drop_sign) {
  Rational c = drop_sign ? Rational(mp::abs(t.coef)) : t.coef;
  const BigInt num = numerator_of(c), den = denominator_of(c);
  std::vector<Expression> top, bottom;
  for (const auto& f : t.factors) {
    if (f.exponent > 0) top.push_back(factor_expr(f, false));
  }
  for (const auto& f : t.factors) {
    if (f.exponent < 0) bottom.push_back(factor_expr(f, true));
  }
  if (num != 1 || top.empty()) top.insert(top.begin(), Expression::integer(num));
  if (den != 1) bottom.insert(bottom.begin(), Expression::integer(den));
  Expression out = chain(top);
  if (!bottom.empty()) out = Expression::binary(Op::Div, out, chain(bottom));
  return out;
}

Expression build_poly(const Poly& p) {
  if (p.empty()) return Expression::integer(0);
  Expression out = build_term(p.front(), false);
  for (std::size_t i = 1; i < p.size(); ++i) {
    const Op op = p[i].coef < 0 ? Op::Sub : Op::Add;
    out = Expression::binary(op, out, build_term(p[i], true));
  }
  return out;
}

std::optional<BigInt> exact_isqrt(const BigInt& v) {
  if (v < 0) return std::nullopt;
  BigInt r = mp::sqrt(v);
  if (r * r != v) return std::nullopt;
  return r;
}

bool is_odd_function(Op op) {
  switch (op) {
    case Op::Sin: case Op::Tan: case Op::Asin: case Op::Atan:
    case Op::Sinh: case Op::Tanh: case Op::Asinh: case Op::Atanh: return true;
    default: return false;
  }
}

bool is_even_function(Op op) { return op == Op::Cos || op == Op::Cosh; }

std::optional<Expression> special_value(Op op, const Expression& u) {
  using build::num;
  if (u.is_integer(0)) {
    switch (op) {
      case Op::Exp: case Op::Cos: case Op::Cosh: return num(1);
      case Op::Sin: case Op::Tan: case Op::Asin: case Op::Atan:
      case Op::Sinh: case Op::Tanh: case Op::Asinh: case Op::Atanh: case Op::Sqrt: return num(0);
      default: return std::nullopt;
    }
  }
  if (u.is_integer(1)) {
    switch (op) {
      case Op::Log: case Op::Acosh: case Op::Acos: return num(0);
      case Op::Sqrt: return num(1);
      default: return std::nullopt;
    }
  }
  if (u.is_symbol(Symbol::E) && op == Op::Log) return num(1);
  if (u.is_symbol(Symbol::Pi)) {
    if (op == Op::Sin || op == Op::Tan) return num(0);
    if (op == Op::Cos) return num(-1);
  }
  return std::nullopt;
}

Expression simplify_unary(Op op, const Expression& u, const Ctx& ctx) {
  if (auto v = special_value(op, u)) {
    ctx.fire("special-values");
    return *v;
  }
  if (op == Op::Log && u.is_op(Op::Exp)) {
    ctx.fire("log-of-exp");
    return u.arg();
  }
  if (op == Op::Sqrt) {
    Term t = to_term(u, ctx);
    if (t.factors.empty() && t.coef > 0) {
      auto n = exact_isqrt(numerator_of(t.coef));
      auto d = exact_isqrt(denominator_of(t.coef));
      if (n && d) {
        ctx.fire("perfect-square-root");
        return rational_expr(Rational(*n, *d));
      }
    }
  }
  if (is_odd_function(op) || is_even_function(op)) {
    Poly p = to_poly(u, ctx);
    if (leading_negative(p)) {
      Expression flipped = build_poly(poly_negate(std::move(p)));
      Expression inner = simplify_unary(op, flipped, ctx);
      if (is_even_function(op)) {
        ctx.fire("even-function-sign");
        return inner;
      }
      ctx.fire("odd-function-sign");
      return build_poly(poly_negate(to_poly(inner, ctx)));
    }
  }
  return Expression::unary(op, u);
}

bool is_number(const Poly& p) { return p.size() == 1 && p.front().factors.empty(); }

Expression simplify_binary(Op op, const Expression& a, const Expression& b, const Ctx& ctx) {
  switch (op) {
    case Op::Add:
    case Op::Sub: {
      Poly pa = to_poly(a, ctx);
      Poly pb = to_poly(b, ctx);
      if (op == Op::Sub) pb = poly_negate(std::move(pb));
      pa.insert(pa.end(), pb.begin(), pb.end());
      return build_poly(collect(std::move(pa), ctx));
    }
    case Op::Mul: {
      Poly pa = to_poly(a, ctx);
      Poly pb = to_poly(b, ctx);
      if (pa.empty() || pb.empty()) {
        ctx.fire("mul-zero");
        return Expression::integer(0);
      }
      if (ctx.expand || is_number(pa) || is_number(pb)) {
        if (pa.size() > 1 || pb.size() > 1) ctx.fire(ctx.expand ? "distribute-product" : "distribute-numeric");
        return build_poly(poly_mul(pa, pb, ctx));
      }
      return build_poly(collect({term_mul(poly_as_term(pa), poly_as_term(pb), ctx)}, ctx));
    }
    case Op::Div: {
      Poly pa = to_poly(a, ctx);
      Poly pb = to_poly(b, ctx);
      if (pb.empty()) return Expression::binary(Op::Div, build_poly(pa), build_poly(pb));
      if (pa.empty()) return Expression::integer(0);
      auto inv = term_inverse(poly_as_term(pb), ctx);
      if (!inv) return Expression::binary(Op::Div, build_poly(pa), build_poly(pb));
      if (ctx.expand || is_number(pb)) return build_poly(collect(poly_scale(pa, *inv, ctx), ctx));
      return build_poly(collect({term_mul(poly_as_term(pa), *inv, ctx)}, ctx));
    }
    case Op::Pow: {
      if (!b.is_integer()) {
        if (a.is_integer(1)) return Expression::integer(1);
        return Expression::binary(Op::Pow, a, b);
      }
      const BigInt& k = b.value();
      if (k == 0) return Expression::integer(1);
      if (k == 1) return a;
      Poly pa = to_poly(a, ctx);
      if (ctx.expand && pa.size() > 1 && k >= 2 && k <= 6) {
        Poly acc = pa;
        for (int i = 1; i < k; ++i) acc = poly_mul(acc, pa, ctx);
        ctx.fire("distribute-product");
        return build_poly(acc);
      }
      auto t = term_pow(poly_as_term(pa), k, ctx);
      if (!t) return Expression::binary(Op::Pow, build_poly(pa), b);
      if (pa.size() <= 1) ctx.fire("fold-pow");
      return build_poly(collect({*t}, ctx));
    }
    default: break;
  }
  return Expression::binary(op, a, b);
}

Expression simplify_node(const Expression& e, const Ctx& ctx) {
  switch (e.kind()) {
    case Expression::Kind::Integer:
    case Expression::Kind::Symbol: return e;
    case Expression::Kind::Unary: return simplify_unary(e.op(), simplify_node(e.arg(), ctx), ctx);
    case Expression::Kind::Binary:
      return simplify_binary(e.op(), simplify_node(e.lhs(), ctx), simplify_node(e.rhs(), ctx), ctx);
  }
  return e;
}

SimplifyReport run_simplify(const Expression& e, bool expand, std::size_t max_terms) {
  std::set<std::string> fired;
  Ctx ctx;
  ctx.expand = expand;
  ctx.max_terms = max_terms;
  ctx.fired = &fired;
  SimplifyReport rep;
  Expression cur = e;
  for (int pass = 1; pass <= 50; ++pass) {
    Expression next = simplify_node(cur, ctx);
    rep.passes = pass;
    if (next == cur) break;
    cur = std::move(next);
  }
  rep.result = cur;
  rep.rules_fired.assign(fired.begin(), fired.end());
  return rep;
}


// ---------------------------------------------------------------------------
// Sign provers

bool positive_rec(const Expression& e);

bool nonnegative_rec(const Expression& e) {
  if (positive_rec(e)) return true;
  switch (e.kind()) {
    case Expression::Kind::Integer: return e.value() >= 0;
    case Expression::Kind::Symbol: return false;
    case Expression::Kind::Unary:
      switch (e.op()) {
        case Op::Sqrt: case Op::Acos: case Op::Acosh: return true;
        case Op::Sinh: case Op::Tanh: case Op::Asinh: case Op::Atan: case Op::Asin: case Op::Atanh:
          return nonnegative_rec(e.arg());
        default: return false;
      }
    case Expression::Kind::Binary: break;
  }
  const Expression& a = e.lhs();
  const Expression& b = e.rhs();
  switch (e.op()) {
    case Op::Add: return nonnegative_rec(a) && nonnegative_rec(b);
    case Op::Mul: return nonnegative_rec(a) && nonnegative_rec(b);
    case Op::Div: return nonnegative_rec(a) && positive_rec(b);
    case Op::Pow:
      if (b.is_integer() && b.value() > 0 && !mp::bit_test(b.value(), 0)) return true;
      return nonnegative_rec(a) && b.is_integer() && b.value() > 0;
    default: return false;
  }
}

bool positive_rec(const Expression& e) {
  switch (e.kind()) {
    case Expression::Kind::Integer: return e.value() > 0;
    case Expression::Kind::Symbol: return e.symbol() == Symbol::E || e.symbol() == Symbol::Pi;
    case Expression::Kind::Unary:
      switch (e.op()) {
        case Op::Exp: case Op::Cosh: return true;
        case Op::Sqrt: case Op::Sinh: case Op::Tanh: case Op::Asinh: case Op::Atan: return positive_rec(e.arg());
        default: return false;
      }
    case Expression::Kind::Binary: break;
  }
  const Expression& a = e.lhs();
  const Expression& b = e.rhs();
  switch (e.op()) {
    case Op::Add:
      return (positive_rec(a) && nonnegative_rec(b)) || (nonnegative_rec(a) && positive_rec(b));
    case Op::Mul:
    case Op::Div: return positive_rec(a) && positive_rec(b);
    case Op::Pow: return positive_rec(a);
    default: return false;
  }
}

// ---------------------------------------------------------------------------
// Constant reduction

bool has_other_constant(const Expression& e, Symbol c) {
  for (Symbol s : {Symbol::C, Symbol::C1, Symbol::C2}) {
    if (s != c && e.contains(s)) return true;
  }
  return false;
}

// Whether u -> g(u) along the path to c maps the reals onto the reals.
bool surjective_in(const Expression& e, Symbol c) {
  if (e.is_symbol(c)) return true;
  if (e.kind() == Expression::Kind::Unary) {
    switch (e.op()) {
      case Op::Sinh: case Op::Asinh: return surjective_in(e.arg(), c);
      default: return false;
    }
  }
  if (e.kind() != Expression::Kind::Binary) return false;
  const bool left = e.lhs().contains(c);
  const Expression& inner = left ? e.lhs() : e.rhs();
  const Expression& other = left ? e.rhs() : e.lhs();
  switch (e.op()) {
    case Op::Add: case Op::Sub: return surjective_in(inner, c);
    case Op::Mul: return !other.is_integer(0) && surjective_in(inner, c);
    case Op::Div: return left && !other.is_integer(0) && surjective_in(inner, c);
    case Op::Pow:
      return left && other.is_integer() && other.value() > 0 && mp::bit_test(other.value(), 0) &&
             surjective_in(inner, c);
    default: return false;
  }
}

struct Reducer {
  ConstantReduction out;
  std::set<std::string> assumptions;
  Ctx ctx{};

  void witness(Symbol c, const Expression& fwd, const char* rule) {
    out.witnesses.push_back(Witness{c, fwd, rule});
  }

  // Largest variable-free subtree containing c that is not c itself.
  std::optional<std::vector<int>> collapse_target(const Expression& e, Symbol c, std::vector<int>& path) {
    if (!e.contains(c)) return std::nullopt;
    if (!depends_on_variables(e)) {
      if (e.is_symbol(c) || has_other_constant(e, c)) return std::nullopt;
      return path;
    }
    for (std::size_t i = 0; i < e.arity(); ++i) {
      path.push_back(static_cast<int>(i));
      auto r = collapse_target(e.child(i), c, path);
      path.pop_back();
      if (r) return r;
    }
    return std::nullopt;
  }

  bool collapse(Expression& e, Symbol c) {
    std::vector<int> path;
    auto target = collapse_target(e, c, path);
    if (!target) return false;
    const Expression sub = subtree_at(e, *target);
    witness(c, sub, "collapse-constant-subtree");
    if (!surjective_in(sub, c)) assumptions.insert("constant-range-widening");
    e = replace_at(e, *target, Expression::symbol(c));
    return true;
  }

  static bool var_free(const Factor& f) { return !depends_on_variables(f.base); }

  // Groups terms by their variable-dependent part and merges the group that
  // carries c into a single c * part.
  bool absorb(Expression& e, Symbol c) {
    Poly p = to_poly(e, ctx);
    struct Split {
      Term key;
      Term coef;
    };
    std::vector<Split> parts;
    for (const auto& t : p) {
      Split s{Term{Rational(1), {}}, Term{t.coef, {}}};
      for (const auto& f : t.factors) (var_free(f) ? s.coef : s.key).factors.push_back(f);
      parts.push_back(std::move(s));
    }
    std::optional<std::size_t> carrier;
    for (std::size_t i = 0; i < parts.size(); ++i) {
      const Expression ce = build_poly({parts[i].coef});
      if (ce.contains(c)) {
        carrier = i;
        break;
      }
    }
    if (!carrier) return false;
    const Term key = parts[*carrier].key;
    Poly group;
    Poly rest;
    for (std::size_t i = 0; i < parts.size(); ++i) {
      if (same_key(parts[i].key, key)) {
        group.push_back(parts[i].coef);
      } else {
        rest.push_back(p[i]);
      }
    }
    group = collect(std::move(group), ctx);
    const Expression g = build_poly(group);
    if (g.is_symbol(c) || has_other_constant(g, c) || count_occurrences(g, c) != 1) return false;
    witness(c, g, group.size() > 1 ? "absorb-summand" : "absorb-coefficient");
    if (!surjective_in(g, c)) assumptions.insert("constant-range-widening");
    Term merged = key;
    merged.coef = 1;
    merged.factors.push_back(Factor{Expression::symbol(c), 1});
    normalize_term(merged, ctx);
    rest.push_back(std::move(merged));
    e = build_poly(collect(std::move(rest), ctx));
    return true;
  }
};

// log(u^k) -> k log(u) and log(q u) -> log(q) + log(u) for rational q > 0.
Expression split_logs(const Expression& e, std::set<std::string>& assumptions, bool& changed) {
  if (e.is_leaf()) return e;
  std::vector<Expression> kids;
  for (std::size_t i = 0; i < e.arity(); ++i) kids.push_back(split_logs(e.child(i), assumptions, changed));
  Expression rebuilt = Expression::make(e.op(), kids);
  if (!rebuilt.is_op(Op::Log)) return rebuilt;
  Ctx ctx{};
  Term t = to_term(rebuilt.arg(), ctx);
  if (t.coef <= 0 || t.factors.empty()) return rebuilt;
  if (t.coef == 1 && t.factors.size() == 1 && t.factors[0].exponent == 1) return rebuilt;
  Poly sum;
  if (t.coef != 1) sum.push_back(atom(Expression::unary(Op::Log, rational_expr(t.coef))));
  for (const auto& f : t.factors) {
    Term piece = atom(Expression::unary(Op::Log, f.base));
    piece.coef = Rational(f.exponent);
    sum.push_back(piece);
    if (mp::bit_test(mp::abs(f.exponent), 0) == false) assumptions.insert("log-power");
  }
  if (t.factors.size() > 1 || t.coef != 1) assumptions.insert("log-product-split");
  changed = true;
  return build_poly(collect(std::move(sum), ctx));
}

}  // namespace

// ---------------------------------------------------------------------------
// Public API

std::string to_string(RuleClass cls) {
  switch (cls) {
    case RuleClass::Strict: return "strict";
    case RuleClass::Reparametrize: return "reparametrize";
    case RuleClass::Assumption: return "assumption";
    case RuleClass::Normalization: return "normalization";
  }
  return "strict";
}

const std::vector<RewriteRule>& rule_registry() {
  static const std::vector<RewriteRule> rules = {
      {"fold-add", RuleClass::Strict, "+ n m", "", ""},
      {"fold-mul", RuleClass::Strict, "* n m", "", ""},
      {"fold-div", RuleClass::Strict, "/ n m", "", ""},
      {"fold-pow", RuleClass::Strict, "pow n k", "", ""},
      {"add-zero", RuleClass::Strict, "+ u + 0", "u", ""},
      {"mul-one", RuleClass::Strict, "* + 1 u", "u", ""},
      {"mul-zero", RuleClass::Strict, "* + 0 u", "+ 0", ""},
      {"div-one", RuleClass::Strict, "/ u + 1", "u", ""},
      {"sub-self", RuleClass::Strict, "- u u", "+ 0", ""},
      {"div-self", RuleClass::Strict, "/ u u", "+ 1", "u nonzero"},
      {"double-negation", RuleClass::Strict, "* - 1 * - 1 u", "u", ""},
      {"combine-like-terms", RuleClass::Strict, "+ * n u * m u", "", ""},
      {"merge-powers", RuleClass::Strict, "* pow u k pow u k", "pow u * + 2 k", ""},
      {"merge-exponentials", RuleClass::Strict, "* exp u exp v", "exp + u v", ""},
      {"log-of-exp", RuleClass::Strict, "log exp u", "u", ""},
      {"pythagorean", RuleClass::Strict, "+ pow cos u + 2 pow sin u + 2", "+ 1", ""},
      {"hyperbolic-pythagorean", RuleClass::Strict, "- pow cosh u + 2 pow sinh u + 2", "+ 1", ""},
      {"sqrt-square", RuleClass::Strict, "pow sqrt u + 2", "u", "u in the domain of sqrt"},
      {"odd-function-sign", RuleClass::Strict, "sin * - 1 u", "* - 1 sin u", ""},
      {"even-function-sign", RuleClass::Strict, "cos * - 1 u", "cos u", ""},
      {"special-values", RuleClass::Strict, "cos + 0", "+ 1", ""},
      {"perfect-square-root", RuleClass::Strict, "sqrt * n n", "", ""},
      {"distribute-numeric", RuleClass::Strict, "* n + u v", "+ * n u * n v", ""},
      {"sum-sign", RuleClass::Strict, "pow - u v + 2", "pow - v u + 2", ""},
      {"distribute-product", RuleClass::Strict, "* u + v + 1", "+ * u v u", "expansion only"},
      {"collapse-constant-subtree", RuleClass::Reparametrize, "exp + c + 3", "c", ""},
      {"absorb-coefficient", RuleClass::Reparametrize, "* + 2 * c x", "* c x", ""},
      {"absorb-summand", RuleClass::Reparametrize, "+ + c + 3 x", "+ c x", ""},
      {"log-power", RuleClass::Assumption, "log pow x + 2", "* + 2 log x", "base positive"},
      {"log-product-split", RuleClass::Assumption, "log * + 2 x", "+ log + 2 log x", "factors positive"},
      {"constant-range-widening", RuleClass::Assumption, "sqrt c", "c", "constant may take any real value"},
      {"drop-positive-factor", RuleClass::Normalization, "* exp x u", "u", ""},
      {"drop-nonzero-denominator", RuleClass::Normalization, "/ u v", "u", "v nonzero where defined"},
      {"clear-x-denominator", RuleClass::Normalization, "+ / u x v", "+ u * x v", ""},
      {"extract-content", RuleClass::Normalization, "+ * + 2 u * + 4 v", "+ u * + 2 v", ""},
      {"sign-normalize", RuleClass::Normalization, "* - 1 u", "u", ""},
  };
  return rules;
}

std::string rule_manifest() {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : rule_registry()) {
    arr.push_back({{"name", r.name},
                   {"class", to_string(r.cls)},
                   {"pattern", r.pattern},
                   {"replacement", r.replacement},
                   {"assumption", r.assumption}});
  }
  return nlohmann::json{{"rules", arr}}.dump(2);
}

SimplifyReport simplify_with_report(const Expression& e) { return run_simplify(e, false, 400); }

Expression simplify(const Expression& e) { return run_simplify(e, false, 400).result; }

Expression expand(const Expression& e, std::size_t max_terms) {
  try {
    return run_simplify(e, true, max_terms).result;
  } catch (const ExpansionTooLarge&) {
    return simplify(e);
  }
}

std::optional<LinearForm> linear_in(const Expression& e, Symbol s) {
  Ctx ctx{};
  Poly p = to_poly(expand(e), ctx);
  Poly coef, rest;
  for (const auto& t : p) {
    Term stripped{t.coef, {}};
    int hits = 0;
    bool nonlinear = false;
    for (const auto& f : t.factors) {
      if (f.base.is_symbol(s)) {
        ++hits;
        if (f.exponent != 1) nonlinear = true;
      } else {
        if (f.base.contains(s)) nonlinear = true;
        stripped.factors.push_back(f);
      }
    }
    if (nonlinear) return std::nullopt;
    (hits ? coef : rest).push_back(stripped);
  }
  coef = collect(std::move(coef), ctx);
  if (coef.empty()) return std::nullopt;
  return LinearForm{build_poly(coef), build_poly(collect(std::move(rest), ctx))};
}

bool is_provably_positive(const Expression& e) { return positive_rec(e); }
bool is_provably_nonnegative(const Expression& e) { return nonnegative_rec(e); }

ConstantReduction reduce_constants_with_witness(const Expression& e, const std::vector<Symbol>& constants) {
  Reducer r;
  Expression cur = simplify(e);
  for (int round = 0; round < 12; ++round) {
    bool changed = false;
    Expression split = split_logs(cur, r.assumptions, changed);
    if (changed) cur = simplify(split);
    for (Symbol c : constants) {
      if (count_occurrences(cur, c) != 1) continue;
      if (r.collapse(cur, c)) {
        cur = simplify(cur);
        changed = true;
      }
      if (count_occurrences(cur, c) == 1 && r.absorb(cur, c)) {
        cur = simplify(cur);
        changed = true;
      }
    }
    if (!changed) break;
  }
  r.out.result = cur;
  r.out.assumptions.assign(r.assumptions.begin(), r.assumptions.end());
  return r.out;
}

Expression reduce_constants(const Expression& e, const std::vector<Symbol>& constants) {
  return reduce_constants_with_witness(e, constants).result;
}

Expression apply_witnesses(const Expression& reduced, const std::vector<Witness>& witnesses) {
  Expression cur = reduced;
  for (auto it = witnesses.rbegin(); it != witnesses.rend(); ++it) cur = substitute(cur, it->constant, it->forward);
  return cur;
}

Expression normalize_equation(const Expression& e) {
  Ctx ctx{};
  Poly p = to_poly(expand(simplify(e)), ctx);
  if (p.empty()) throw NoFactorRemains("equation is identically zero");

  // Numeric content.
  BigInt g = 0, l = 1;
  for (const auto& t : p) {
    g = mp::gcd(g, numerator_of(t.coef));
    l = mp::lcm(l, denominator_of(t.coef));
  }
  const Term content_inv{Rational(l, mp::abs(g)), {}};
  p = poly_scale(std::move(p), content_inv, ctx);

  // Bases present in every term.
  std::vector<Factor> common;
  for (const auto& f : p.front().factors) {
    BigInt lo = f.exponent, hi = f.exponent;
    bool everywhere = true;
    for (const auto& t : p) {
      auto it = std::find_if(t.factors.begin(), t.factors.end(), [&](const Factor& o) { return o.base == f.base; });
      if (it == t.factors.end()) {
        everywhere = false;
        break;
      }
      lo = std::min(lo, it->exponent);
      hi = std::max(hi, it->exponent);
    }
    if (!everywhere) continue;
    if (lo > 0) common.push_back(Factor{f.base, lo});
    else if (hi < 0) common.push_back(Factor{f.base, hi});
  }
  for (const auto& f : common) p = poly_scale(std::move(p), Term{Rational(1), {Factor{f.base, -f.exponent}}}, ctx);
  p = collect(std::move(p), ctx);

  // Divide by an exponential when every term carries one.
  const bool all_exp = std::all_of(p.begin(), p.end(), [](const Term& t) {
    return std::any_of(t.factors.begin(), t.factors.end(), [](const Factor& f) { return f.base.is_op(Op::Exp); });
  });
  if (all_exp && p.size() > 1) {
    std::size_t best_size = build_poly(p).node_count();
    std::optional<Poly> best;
    for (const auto& t : p) {
      for (const auto& f : t.factors) {
        if (!f.base.is_op(Op::Exp)) continue;
        Poly cand = collect(poly_scale(p, Term{Rational(1), {Factor{f.base, -1}}}, ctx), ctx);
        const std::size_t sz = build_poly(cand).node_count();
        if (sz < best_size) {
          best_size = sz;
          best = std::move(cand);
        }
      }
    }
    if (best) p = std::move(*best);
  }

  // Clear powers of x in denominators.
  BigInt x_shift = 0;
  for (const auto& t : p) {
    for (const auto& f : t.factors) {
      if (f.base.is_symbol(Symbol::X) && f.exponent < 0) x_shift = std::max(x_shift, BigInt(-f.exponent));
    }
  }
  if (x_shift > 0) p = collect(poly_scale(std::move(p), Term{Rational(1), {Factor{Expression::symbol(Symbol::X), x_shift}}}, ctx), ctx);

  // Single remaining term: its factors are the equation.
  if (p.size() == 1) {
    Term t = p.front();
    t.coef = 1;
    for (auto& f : t.factors) common.push_back(f);
    p = {Term{Rational(1), {}}};
  }

  Term kept{Rational(1), {}};
  for (const auto& f : common) {
    if (f.exponent < 0) continue;
    if (is_provably_positive(f.base)) continue;
    kept.factors.push_back(f);
  }
  const bool rest_constant = p.size() == 1 && p.front().factors.empty();
  if (rest_constant && kept.factors.empty()) throw NoFactorRemains("only positive factors remain");

  Expression result;
  if (rest_constant) {
    result = simplify(build_poly({kept}));
  } else {
    const Expression rest = build_poly(p);
    result = kept.factors.empty() ? simplify(rest) : simplify(Expression::binary(Op::Mul, build_poly({kept}), rest));
  }
  Poly final_poly = to_poly(result, ctx);
  auto lead = final_poly.begin();
  for (Symbol s : {Symbol::D2y, Symbol::Dy}) {
    auto it = std::find_if(final_poly.begin(), final_poly.end(), [&](const Term& t) {
      return std::any_of(t.factors.begin(), t.factors.end(), [&](const Factor& f) { return f.base.contains(s); });
    });
    if (it != final_poly.end()) {
      lead = it;
      break;
    }
  }
  if (lead != final_poly.end() && lead->coef < 0) result = simplify(build_poly(poly_negate(std::move(final_poly))));
  return result;
}

}  // namespace symgen
