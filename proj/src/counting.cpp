#include "symgen/counting.hpp"

#include <cmath>
#include <numbers>
#include <vector>

#include "symgen/errors.hpp"

namespace symgen::counting {

namespace {

BigInt exact_div(const BigInt& num, const BigInt& den, int n) {
  BigInt q, r;
  boost::multiprecision::divide_qr(num, den, q, r);
  if (r != 0) {
    throw InternalInexactDivision("recurrence division left a remainder at n=" + std::to_string(n));
  }
  return q;
}

BigInt factorial(int n) {
  BigInt f = 1;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

void require_nonnegative(int n) {
  if (n < 0) throw DomainError("n must be nonnegative");
}

}  // namespace

BigInt catalan(int n) {
  require_nonnegative(n);
  return exact_div(factorial(2 * n), factorial(n + 1) * factorial(n), n);
}

BigInt schroeder(int n) {
  require_nonnegative(n);
  if (n == 0) return 1;
  BigInt prev2 = 1, prev1 = 2;
  for (int k = 2; k <= n; ++k) {
    BigInt next = exact_div(BigInt(3 * (2 * k - 1)) * prev1 - BigInt(k - 2) * prev2, BigInt(k + 1), k);
    prev2 = std::move(prev1);
    prev1 = std::move(next);
  }
  return prev1;
}

BigInt expression_count(const CountQuery& q) {
  require_nonnegative(q.n);
  const BigInt p1 = q.p1, p2 = q.p2, leaves = q.leaves;
  if (q.n == 0) return leaves;
  BigInt prev2 = leaves;
  BigInt prev1 = (p1 + p2 * leaves) * leaves;
  const BigInt a = p1 + 2 * leaves * p2;
  const BigInt p1_sq = p1 * p1;
  for (int k = 2; k <= q.n; ++k) {
    BigInt next = exact_div(a * (2 * k - 1) * prev1 - p1_sq * (k - 2) * prev2, BigInt(k + 1), k);
    prev2 = std::move(prev1);
    prev1 = std::move(next);
  }
  return prev1;
}

BigInt binary_expression_count(int n, unsigned long long p2, unsigned long long leaves) {
  require_nonnegative(n);
  return catalan(n) * boost::multiprecision::pow(BigInt(p2), static_cast<unsigned>(n)) *
         boost::multiprecision::pow(BigInt(leaves), static_cast<unsigned>(n + 1));
}

double log_of(const BigInt& v) {
  if (v <= 0) return -std::numeric_limits<double>::infinity();
  const unsigned bits = boost::multiprecision::msb(v);
  if (bits < 1000) return std::log(v.convert_to<double>());
  const unsigned shift = bits - 60;
  const BigInt top = v >> shift;
  return std::log(top.convert_to<double>()) + shift * std::numbers::ln2;
}

double log_catalan_approx(int n) {
  const double dn = n;
  return dn * std::log(4.0) - std::log(dn) - 0.5 * std::log(std::numbers::pi * dn);
}

double log_schroeder_approx(int n) {
  const double dn = n;
  return (2 * dn + 1) * std::log(1 + std::numbers::sqrt2) - 0.75 * std::numbers::ln2 -
         0.5 * std::log(std::numbers::pi * dn * dn * dn);
}

double log_expression_approx(const CountQuery& q) {
  const double dn = q.n;
  const double p1 = static_cast<double>(q.p1);
  const double p2 = static_cast<double>(q.p2);
  const double leaves = static_cast<double>(q.leaves);
  // Dominant singularity of the generating function is 1/(a + delta) where
  // 1 - 2 a z + p1^2 z^2 = 0.
  const double a = p1 + 2 * p2 * leaves;
  const double delta = std::sqrt(4 * p2 * p2 * leaves * leaves + 4 * p1 * p2 * leaves);
  return 0.5 * std::log(2 * delta) + (dn + 0.5) * std::log(a + delta) - std::log(4 * p2) -
         0.5 * std::log(std::numbers::pi * dn * dn * dn);
}

double binary_expression_approx(int n, unsigned long long p2, unsigned long long leaves) {
  if (n < 1) throw DomainError("asymptotic estimates need n >= 1");
  const double dn = n;
  return std::exp(log_catalan_approx(n) + dn * std::log(static_cast<double>(p2)) +
                  (dn + 1) * std::log(static_cast<double>(leaves)));
}

AsymptoticEstimates asymptotic_counts(const CountQuery& q) {
  if (q.n < 1) throw DomainError("asymptotic estimates need n >= 1");
  if (q.p1 == 0) throw DomainError("general estimate needs p1 > 0; use binary_expression_approx");
  if (q.p2 == 0 || q.leaves == 0) throw DomainError("p2 and L must be positive");
  return AsymptoticEstimates{std::exp(log_catalan_approx(q.n)), std::exp(log_schroeder_approx(q.n)),
                             std::exp(log_expression_approx(q))};
}

}  // namespace symgen::counting
