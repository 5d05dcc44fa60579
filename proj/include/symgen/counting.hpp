#pragma once

#include "symgen/bigint.hpp"

namespace symgen::counting {

struct CountQuery {
  int n = 0;
  unsigned long long p1 = 0;
  unsigned long long p2 = 1;
  unsigned long long leaves = 1;
};

/// Number of binary trees with n internal nodes, (2n)! / ((n+1)! n!).
BigInt catalan(int n);

/// Large Schroeder numbers: unary-binary trees with n internal nodes,
/// (n+1) S_n = 3(2n-1) S_{n-1} - (n-2) S_{n-2}, S_0 = 1, S_1 = 2.
BigInt schroeder(int n);

/// Number of expressions with n internal nodes over p1 unary operators,
/// p2 binary operators and L leaf values:
///   (n+1) E_n = (p1 + 2 L p2)(2n-1) E_{n-1} - p1^2 (n-2) E_{n-2},
///   E_0 = L, E_1 = (p1 + p2 L) L.
/// Every division is checked to be exact (InternalInexactDivision otherwise).
BigInt expression_count(const CountQuery& q);

/// Binary-only closed form C_n p2^n L^{n+1}.
BigInt binary_expression_count(int n, unsigned long long p2, unsigned long long leaves);

struct AsymptoticEstimates {
  double catalan_approx = 0;
  double schroeder_approx = 0;
  double expression_approx = 0;
};

/// Leading-order estimates, computed in log space so large n does not
/// overflow before the final exponentiation (values beyond double range
/// come back as +inf). Throws DomainError for n < 1 or p1 == 0; use
/// binary_expression_approx for the binary case.
AsymptoticEstimates asymptotic_counts(const CountQuery& q);

double log_catalan_approx(int n);
double log_schroeder_approx(int n);
double log_expression_approx(const CountQuery& q);
/// (4 p2)^n L^{n+1} / (n sqrt(pi n)).
double binary_expression_approx(int n, unsigned long long p2, unsigned long long leaves);

/// log of an exact count, for comparing with the log-domain estimates.
double log_of(const BigInt& v);

}  // namespace symgen::counting
