#include <cmath>
#include <random>

#include "doctest.h"
#include "sosexit/common.hpp"
#include "sosexit/polynomial.hpp"

using namespace sosexit;

namespace {

// Random sparse polynomial for property tests.
Polynomial random_poly(std::mt19937_64& rng, int dimension, int degree, int terms) {
  std::uniform_int_distribution<int> exp_dist(0, degree);
  std::uniform_real_distribution<double> coeff_dist(-2.0, 2.0);
  Polynomial p(dimension);
  for (int t = 0; t < terms; ++t) {
    MultiIndex alpha(dimension, 0);
    int budget = degree;
    for (int i = 0; i < dimension; ++i) {
      alpha[i] = std::min(budget, exp_dist(rng));
      budget -= alpha[i];
    }
    p.add_term(alpha, coeff_dist(rng));
  }
  return p;
}

}  // namespace

TEST_CASE("graded basis enumeration") {
  const MonomialBasis b12(1, 2);
  REQUIRE(b12.size() == 3);
  CHECK(b12[0] == MultiIndex{0});
  CHECK(b12[1] == MultiIndex{1});
  CHECK(b12[2] == MultiIndex{2});

  CHECK(MonomialBasis(2, 2).size() == 6);
  CHECK(MonomialBasis(2, 8).size() == binomial(10, 2));

  // Graded order within a layer: x1^2, x1*x2, x2^2.
  const MonomialBasis b22(2, 2);
  CHECK(b22[3] == MultiIndex{2, 0});
  CHECK(b22[4] == MultiIndex{1, 1});
  CHECK(b22[5] == MultiIndex{0, 2});
}

TEST_CASE("basis(n,d) is a prefix of basis(n,d+1)") {
  for (int n = 1; n <= 4; ++n) {
    for (int d = 0; d <= 5; ++d) {
      const MonomialBasis small(n, d);
      const MonomialBasis large(n, d + 1);
      REQUIRE(small.size() <= large.size());
      for (int i = 0; i < small.size(); ++i) CHECK(small[i] == large[i]);
    }
  }
}

TEST_CASE("basis position lookup") {
  const MonomialBasis b(3, 4);
  for (int i = 0; i < b.size(); ++i) CHECK(b.position(b[i]) == i);
  CHECK(b.position(MultiIndex{5, 0, 0}) == -1);
}

TEST_CASE("arithmetic on named examples") {
  const Polynomial z = Polynomial::variable(1, 0);
  const Polynomial one = Polynomial::constant(1, 1.0);

  const Polynomial diff_of_squares = (z + one) * (z - one);
  CHECK(diff_of_squares.coefficient(MultiIndex{2}) == 1.0);
  CHECK(diff_of_squares.coefficient(MultiIndex{0}) == -1.0);
  CHECK(diff_of_squares.term_count() == 2);

  const Polynomial p = one + z.scaled(2.0);
  CHECK(p + Polynomial(1) == p);

  const Polynomial q = p * z.scaled(2.0);  // (1+2z)*2z = 2z + 4z^2
  CHECK(q.coefficient(MultiIndex{1}) == 2.0);
  CHECK(q.coefficient(MultiIndex{2}) == 4.0);
  CHECK(q.term_count() == 2);
}

TEST_CASE("dimension mismatch is an error") {
  CHECK_THROWS_AS(Polynomial::variable(1, 0) + Polynomial::variable(2, 0), Error);
  CHECK_THROWS_AS(Polynomial::variable(2, 0).evaluate(std::vector<double>{1.0}), Error);
}

TEST_CASE("partial derivatives") {
  // d/dz1 (z1^2 z2) = 2 z1 z2
  const Polynomial p = Polynomial::monomial(MultiIndex{2, 1});
  const Polynomial dp = p.partial(0);
  CHECK(dp.coefficient(MultiIndex{1, 1}) == 2.0);
  CHECK(dp.term_count() == 1);

  CHECK(Polynomial::constant(2, 5.0).partial(0).is_zero());

  const Polynomial z4 = Polynomial::monomial(MultiIndex{4});
  CHECK(z4.partial(0).coefficient(MultiIndex{3}) == 4.0);

  CHECK_THROWS_AS(p.partial(2), Error);
}

TEST_CASE("partials commute exactly") {
  std::mt19937_64 rng(123);
  for (int trial = 0; trial < 20; ++trial) {
    const Polynomial p = random_poly(rng, 3, 5, 8);
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        CHECK(p.partial(i).partial(j) == p.partial(j).partial(i));
      }
    }
  }
}

TEST_CASE("evaluation") {
  const Polynomial z2 = Polynomial::monomial(MultiIndex{2});
  CHECK(z2.evaluate(std::vector<double>{0.5}) == doctest::Approx(0.25));
  CHECK(Polynomial(1).evaluate(std::vector<double>{3.7}) == 0.0);
  const Polynomial p = parse_polynomial("1 + 2*x1", 1);
  CHECK(p.evaluate(std::vector<double>{0.5}) == doctest::Approx(2.0));
}

TEST_CASE("product evaluation and degree properties") {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> point_dist(-1.5, 1.5);
  for (int trial = 0; trial < 40; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 3);
    const Polynomial p = random_poly(rng, n, 4, 5);
    const Polynomial q = random_poly(rng, n, 4, 5);
    const Polynomial pq = p * q;
    std::vector<double> x(n);
    for (int i = 0; i < n; ++i) x[i] = point_dist(rng);
    const double direct = p.evaluate(x) * q.evaluate(x);
    const double through = pq.evaluate(x);
    CHECK(std::abs(through - direct) <= 1e-12 * (1.0 + std::abs(direct)));
    if (!p.is_zero() && !q.is_zero()) {
      CHECK(pq.degree() == p.degree() + q.degree());
    }
  }
}

TEST_CASE("zero coefficients are pruned") {
  std::mt19937_64 rng(7);
  const Polynomial p = random_poly(rng, 2, 3, 6);
  const Polynomial zero = p - p;
  CHECK(zero.is_zero());
  CHECK(zero.degree() == 0);
  for (const auto& [alpha, coeff] : (p + p.scaled(-0.5)).terms()) CHECK(coeff != 0.0);
}

TEST_CASE("parser handles the documented grammar") {
  const Polynomial p = parse_polynomial("1 + 2*x1 - 0.5*x1^2*x2", 2);
  CHECK(p.coefficient(MultiIndex{0, 0}) == 1.0);
  CHECK(p.coefficient(MultiIndex{1, 0}) == 2.0);
  CHECK(p.coefficient(MultiIndex{2, 1}) == -0.5);

  // Parenthesized products, as used by the bundled problem files.
  const Polynomial q = parse_polynomial("x1*(1-x1)", 1);
  CHECK(q.coefficient(MultiIndex{1}) == 1.0);
  CHECK(q.coefficient(MultiIndex{2}) == -1.0);

  const Polynomial r = parse_polynomial("(x1 - 0.5)^2", 1);
  CHECK(r.coefficient(MultiIndex{0}) == 0.25);
  CHECK(r.coefficient(MultiIndex{1}) == -1.0);
  CHECK(r.coefficient(MultiIndex{2}) == 1.0);

  CHECK(parse_polynomial("1e-3*x2", 2).coefficient(MultiIndex{0, 1}) ==
        doctest::Approx(1e-3));
  CHECK(parse_polynomial("-x1 + 3", 1).coefficient(MultiIndex{1}) == -1.0);
}

TEST_CASE("parser rejects malformed input") {
  CHECK_THROWS_AS(parse_polynomial("x3", 2), Error);        // variable out of range
  CHECK_THROWS_AS(parse_polynomial("x0", 2), Error);        // 1-based indices
  CHECK_THROWS_AS(parse_polynomial("1 + ", 1), Error);
  CHECK_THROWS_AS(parse_polynomial("2*x1)", 1), Error);     // trailing junk
  CHECK_THROWS_AS(parse_polynomial("y1", 1), Error);
}

TEST_CASE("string round-trip") {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 25; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 3);
    const Polynomial p = random_poly(rng, n, 5, 6);
    const Polynomial back = parse_polynomial(p.str(), n);
    CHECK(back == p);
  }
  CHECK(parse_polynomial(Polynomial(2).str(), 2).is_zero());
}
