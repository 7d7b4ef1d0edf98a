#pragma once

#include <map>
#include <span>
#include <string>
#include <string_view>

#include "sosexit/multiindex.hpp"

namespace sosexit {

// Sparse multivariate polynomial with double coefficients. Terms map a
// multi-index to its coefficient; exact zeros are pruned on construction
// and after every operation (no epsilon pruning, so problem data is never
// silently altered). Immutable in spirit: all operations return new values.
class Polynomial {
 public:
  using TermMap = std::map<MultiIndex, double, GradedLexLess>;

  Polynomial() = default;
  explicit Polynomial(int dimension);

  static Polynomial constant(int dimension, double value);
  static Polynomial monomial(const MultiIndex& alpha, double coeff = 1.0);
  // x_var (0-based variable index).
  static Polynomial variable(int dimension, int var);

  int dimension() const { return dimension_; }
  // Degree of the zero polynomial is defined as 0.
  int degree() const;
  bool is_zero() const { return terms_.empty(); }
  int term_count() const { return static_cast<int>(terms_.size()); }
  const TermMap& terms() const { return terms_; }
  double coefficient(const MultiIndex& alpha) const;

  // Accumulates coeff onto the term alpha, pruning exact zeros.
  Polynomial& add_term(const MultiIndex& alpha, double coeff);

  Polynomial operator+(const Polynomial& rhs) const;
  Polynomial operator-(const Polynomial& rhs) const;
  Polynomial operator*(const Polynomial& rhs) const;
  Polynomial operator-() const;
  Polynomial scaled(double factor) const;

  bool operator==(const Polynomial& rhs) const;

  // Formal partial derivative with respect to variable var (0-based).
  Polynomial partial(int var) const;

  double evaluate(std::span<const double> point) const;

  // Renders in the problem-file grammar, e.g. "1 + 2*x1 - 0.5*x1^2*x2".
  std::string str() const;

 private:
  void check_dimension(const Polynomial& rhs) const;

  int dimension_ = 0;
  TermMap terms_;
};

inline Polynomial operator*(double factor, const Polynomial& p) {
  return p.scaled(factor);
}

// Parses the problem-file grammar: terms joined by +/-, each term a product
// of numeric coefficients, variables x<i> (1-based in the text), powers
// x<i>^k, and parenthesized subexpressions. Scientific notation allowed.
// Throws Error with a position message on malformed input.
Polynomial parse_polynomial(std::string_view text, int dimension);

}  // namespace sosexit
