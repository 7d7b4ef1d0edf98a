#include "sosexit/multiindex.hpp"

#include "sosexit/common.hpp"

namespace sosexit {

int total_degree(const MultiIndex& alpha) {
  int d = 0;
  for (int e : alpha) d += e;
  return d;
}

MultiIndex add(const MultiIndex& a, const MultiIndex& b) {
  if (a.size() != b.size()) throw Error("multi-index dimension mismatch");
  MultiIndex r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
  return r;
}

bool GradedLexLess::operator()(const MultiIndex& a, const MultiIndex& b) const {
  const int da = total_degree(a);
  const int db = total_degree(b);
  if (da != db) return da < db;
  // Within a degree layer, larger leading exponents come first.
  for (std::size_t i = 0; i < a.size() && i < b.size(); ++i) {
    if (a[i] != b[i]) return a[i] > b[i];
  }
  return a.size() < b.size();
}

long long binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  if (k > n - k) k = n - k;
  long long r = 1;
  for (int i = 1; i <= k; ++i) {
    r = r * (n - k + i) / i;
  }
  return r;
}

namespace {

void enumerate(int dimension, int var, int remaining, MultiIndex& current,
               std::vector<MultiIndex>& out) {
  if (var == dimension - 1) {
    current[var] = remaining;
    out.push_back(current);
    current[var] = 0;
    return;
  }
  // Descend on the leading exponent to match GradedLexLess within a layer.
  for (int e = remaining; e >= 0; --e) {
    current[var] = e;
    enumerate(dimension, var + 1, remaining - e, current, out);
  }
  current[var] = 0;
}

}  // namespace

MonomialBasis::MonomialBasis(int dimension, int degree)
    : dimension_(dimension), degree_(degree) {
  if (dimension < 1) throw Error("monomial basis needs dimension >= 1");
  if (degree < 0) throw Error("monomial basis needs degree >= 0");
  members_.reserve(static_cast<std::size_t>(binomial(dimension + degree, dimension)));
  MultiIndex current(dimension, 0);
  for (int d = 0; d <= degree; ++d) {
    enumerate(dimension, 0, d, current, members_);
  }
  for (int i = 0; i < static_cast<int>(members_.size()); ++i) {
    positions_.emplace(members_[i], i);
  }
}

int MonomialBasis::position(const MultiIndex& alpha) const {
  auto it = positions_.find(alpha);
  return it == positions_.end() ? -1 : it->second;
}

}  // namespace sosexit
