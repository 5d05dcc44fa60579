#include <cmath>

#include "doctest.h"
#include "symgen/counting.hpp"
#include "symgen/errors.hpp"
#include "symgen/sampler.hpp"

using namespace symgen;
using namespace symgen::counting;

TEST_CASE("small Catalan and Schroeder numbers") {
  const long long cat[] = {1, 1, 2, 5, 14, 42, 132, 429, 1430, 4862};
  const long long sch[] = {1, 2, 6, 22, 90, 394, 1806, 8558, 41586, 206098};
  for (int n = 0; n < 10; ++n) {
    CHECK(catalan(n) == cat[n]);
    CHECK(schroeder(n) == sch[n]);
  }
}

TEST_CASE("counts match brute-force enumeration") {
  for (int n = 0; n <= 6; ++n) {
    CAPTURE(n);
    CHECK(BigInt(enumerate_trees(n, TreeMode::Binary).size()) == catalan(n));
    CHECK(BigInt(enumerate_trees(n, TreeMode::UnaryBinary).size()) == schroeder(n));
  }
  CHECK_THROWS_AS(enumerate_trees(9, TreeMode::Binary), TooLarge);
}

TEST_CASE("expression count reduces to tree counts") {
  for (int n = 0; n <= 30; ++n) CHECK(expression_count({n, 1, 1, 1}) == schroeder(n));
  for (int n = 0; n <= 20; ++n) {
    CHECK(expression_count({n, 0, 1, 1}) == catalan(n));
    CHECK(expression_count({n, 0, 4, 11}) == binary_expression_count(n, 4, 11));
  }
}

TEST_CASE("expression count agrees with a direct sum over tree shapes") {
  // sum over skeletons of p1^unary * p2^binary * L^leaves
  const unsigned long long p1 = 3, p2 = 2, L = 5;
  for (int n = 0; n <= 6; ++n) {
    BigInt total = 0;
    for (const auto& t : enumerate_trees(n, TreeMode::UnaryBinary)) {
      BigInt w = 1;
      for (auto a : t.arities) w *= a == 0 ? L : a == 1 ? p1 : p2;
      total += w;
    }
    CAPTURE(n);
    CHECK(expression_count({n, p1, p2, L}) == total);
  }
}

TEST_CASE("expression counts for the dataset alphabet are integral and growing") {
  BigInt prev = 0;
  for (int n = 0; n <= 40; ++n) {
    const BigInt v = expression_count({n, 15, 4, 11});
    CHECK(v > prev);
    prev = v;
  }
  CHECK(expression_count({1, 15, 4, 11}) == BigInt((15 + 4 * 11) * 11));
}

TEST_CASE("asymptotic estimates") {
  const CountQuery q{50, 15, 4, 11};
  const auto est = asymptotic_counts(q);
  CHECK(std::abs(log_of(catalan(50)) - std::log(est.catalan_approx)) < std::log(1.1));
  CHECK(std::abs(log_of(schroeder(50)) - std::log(est.schroeder_approx)) < std::log(1.1));
  CHECK(std::abs(log_of(expression_count(q)) - log_expression_approx(q)) < std::log(1.1));
  CHECK_THROWS_AS(asymptotic_counts({0, 15, 4, 11}), DomainError);
  CHECK_THROWS_AS(asymptotic_counts({5, 0, 4, 11}), DomainError);
  const double ratio = std::exp(log_of(binary_expression_count(40, 4, 11)) - std::log(binary_expression_approx(40, 4, 11)));
  CHECK(ratio == doctest::Approx(1.0).epsilon(0.1));
}

TEST_CASE("huge n stays finite in log space") {
  const CountQuery q{5000, 15, 4, 11};
  CHECK(std::isfinite(log_expression_approx(q)));
  CHECK(std::isinf(asymptotic_counts(q).expression_approx));
}
