#pragma once

#include <cstdint>
#include <map>
#include <vector>

namespace sosexit {

// Exponent vector of a monomial; length equals the ambient dimension.
using MultiIndex = std::vector<int>;

int total_degree(const MultiIndex& alpha);
MultiIndex add(const MultiIndex& a, const MultiIndex& b);

// Graded order: lower total degree first; ties broken lexicographically
// with the *larger* leading exponent first, so for n=2 the degree-2 layer
// reads x1^2, x1*x2, x2^2. Deterministic and stable across runs.
struct GradedLexLess {
  bool operator()(const MultiIndex& a, const MultiIndex& b) const;
};

// binom(n, k) in exact integer arithmetic.
long long binomial(int n, int k);

// All multi-indices of dimension n with total degree <= d, in graded order.
// basis(n, d) is a prefix of basis(n, d + 1).
class MonomialBasis {
 public:
  MonomialBasis() = default;
  MonomialBasis(int dimension, int degree);

  int dimension() const { return dimension_; }
  int degree() const { return degree_; }
  int size() const { return static_cast<int>(members_.size()); }
  const MultiIndex& operator[](int i) const { return members_[i]; }
  const std::vector<MultiIndex>& members() const { return members_; }

  // Position of alpha in the enumeration; -1 if |alpha| > degree.
  int position(const MultiIndex& alpha) const;

 private:
  int dimension_ = 0;
  int degree_ = 0;
  std::vector<MultiIndex> members_;
  std::map<MultiIndex, int, GradedLexLess> positions_;
};

}  // namespace sosexit
