#include "sosexit/polynomial.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <sstream>

#include "sosexit/common.hpp"

namespace sosexit {

Polynomial::Polynomial(int dimension) : dimension_(dimension) {
  if (dimension < 1) throw Error("polynomial needs dimension >= 1");
}

Polynomial Polynomial::constant(int dimension, double value) {
  Polynomial p(dimension);
  p.add_term(MultiIndex(dimension, 0), value);
  return p;
}

Polynomial Polynomial::monomial(const MultiIndex& alpha, double coeff) {
  Polynomial p(static_cast<int>(alpha.size()));
  for (int e : alpha) {
    if (e < 0) throw Error("monomial exponents must be nonnegative");
  }
  p.add_term(alpha, coeff);
  return p;
}

Polynomial Polynomial::variable(int dimension, int var) {
  if (var < 0 || var >= dimension) throw Error("variable index out of range");
  MultiIndex alpha(dimension, 0);
  alpha[var] = 1;
  return monomial(alpha, 1.0);
}

int Polynomial::degree() const {
  int d = 0;
  for (const auto& [alpha, coeff] : terms_) d = std::max(d, total_degree(alpha));
  return d;
}

double Polynomial::coefficient(const MultiIndex& alpha) const {
  auto it = terms_.find(alpha);
  return it == terms_.end() ? 0.0 : it->second;
}

Polynomial& Polynomial::add_term(const MultiIndex& alpha, double coeff) {
  if (static_cast<int>(alpha.size()) != dimension_) {
    throw Error("term dimension mismatch");
  }
  auto it = terms_.find(alpha);
  if (it == terms_.end()) {
    if (coeff != 0.0) terms_.emplace(alpha, coeff);
  } else {
    it->second += coeff;
    if (it->second == 0.0) terms_.erase(it);
  }
  return *this;
}

void Polynomial::check_dimension(const Polynomial& rhs) const {
  if (dimension_ != rhs.dimension_) {
    throw Error("polynomial dimension mismatch: " + std::to_string(dimension_) +
                " vs " + std::to_string(rhs.dimension_));
  }
}

Polynomial Polynomial::operator+(const Polynomial& rhs) const {
  check_dimension(rhs);
  Polynomial out = *this;
  for (const auto& [alpha, coeff] : rhs.terms_) out.add_term(alpha, coeff);
  return out;
}

Polynomial Polynomial::operator-(const Polynomial& rhs) const {
  check_dimension(rhs);
  Polynomial out = *this;
  for (const auto& [alpha, coeff] : rhs.terms_) out.add_term(alpha, -coeff);
  return out;
}

Polynomial Polynomial::operator*(const Polynomial& rhs) const {
  check_dimension(rhs);
  Polynomial out(dimension_);
  for (const auto& [a, ca] : terms_) {
    for (const auto& [b, cb] : rhs.terms_) {
      out.add_term(add(a, b), ca * cb);
    }
  }
  return out;
}

Polynomial Polynomial::operator-() const { return scaled(-1.0); }

Polynomial Polynomial::scaled(double factor) const {
  Polynomial out(dimension_);
  if (factor == 0.0) return out;
  for (const auto& [alpha, coeff] : terms_) out.add_term(alpha, factor * coeff);
  return out;
}

bool Polynomial::operator==(const Polynomial& rhs) const {
  return dimension_ == rhs.dimension_ && terms_ == rhs.terms_;
}

Polynomial Polynomial::partial(int var) const {
  if (var < 0 || var >= dimension_) throw Error("derivative variable index out of range");
  Polynomial out(dimension_);
  for (const auto& [alpha, coeff] : terms_) {
    if (alpha[var] == 0) continue;
    MultiIndex beta = alpha;
    beta[var] -= 1;
    out.add_term(beta, coeff * alpha[var]);
  }
  return out;
}

double Polynomial::evaluate(std::span<const double> point) const {
  if (static_cast<int>(point.size()) != dimension_) {
    throw Error("evaluation point dimension mismatch");
  }
  double sum = 0.0;
  for (const auto& [alpha, coeff] : terms_) {
    double term = coeff;
    for (int i = 0; i < dimension_; ++i) {
      for (int e = 0; e < alpha[i]; ++e) term *= point[i];
    }
    sum += term;
  }
  return sum;
}

namespace {

std::string format_coefficient(double value) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  // Trim to the shortest representation that round-trips.
  for (int prec = 1; prec < 17; ++prec) {
    char shorter[32];
    std::snprintf(shorter, sizeof(shorter), "%.*g", prec, value);
    if (std::strtod(shorter, nullptr) == value) return shorter;
  }
  return buf;
}

}  // namespace

std::string Polynomial::str() const {
  if (terms_.empty()) return "0";
  std::ostringstream out;
  bool first = true;
  for (const auto& [alpha, coeff] : terms_) {
    const double magnitude = std::abs(coeff);
    if (first) {
      if (coeff < 0) out << "-";
      first = false;
    } else {
      out << (coeff < 0 ? " - " : " + ");
    }
    const bool is_constant = total_degree(alpha) == 0;
    const bool unit = magnitude == 1.0;
    if (!unit || is_constant) out << format_coefficient(magnitude);
    bool printed_var = false;
    for (int i = 0; i < dimension_; ++i) {
      if (alpha[i] == 0) continue;
      if (printed_var || !unit || is_constant) out << "*";
      out << "x" << (i + 1);
      if (alpha[i] > 1) out << "^" << alpha[i];
      printed_var = true;
    }
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// Text grammar parser.
//
//   expr   := ['+'|'-'] term (('+'|'-') term)*
//   term   := factor ('*' factor)*
//   factor := base ('^' uint)?
//   base   := number | 'x' uint | '(' expr ')'
// ---------------------------------------------------------------------------

namespace {

class PolyParser {
 public:
  PolyParser(std::string_view text, int dimension)
      : text_(text), dimension_(dimension) {}

  Polynomial parse() {
    Polynomial result = parse_expr();
    skip_ws();
    if (pos_ != text_.size()) fail("unexpected trailing input");
    return result;
  }

 private:
  [[noreturn]] void fail(const std::string& message) const {
    throw Error("polynomial parse error at position " + std::to_string(pos_) +
                ": " + message + " in \"" + std::string(text_) + "\"");
  }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) {
      ++pos_;
    }
  }

  bool peek_is(char c) {
    skip_ws();
    return pos_ < text_.size() && text_[pos_] == c;
  }

  bool consume(char c) {
    if (peek_is(c)) {
      ++pos_;
      return true;
    }
    return false;
  }

  Polynomial parse_expr() {
    skip_ws();
    double sign = 1.0;
    if (consume('-')) sign = -1.0;
    else consume('+');
    Polynomial result = parse_term().scaled(sign);
    for (;;) {
      skip_ws();
      if (consume('+')) {
        result = result + parse_term();
      } else if (consume('-')) {
        result = result - parse_term();
      } else {
        break;
      }
    }
    return result;
  }

  Polynomial parse_term() {
    Polynomial result = parse_factor();
    while (consume('*')) result = result * parse_factor();
    return result;
  }

  Polynomial parse_factor() {
    Polynomial base = parse_base();
    skip_ws();
    if (consume('^')) {
      const int exponent = parse_uint("exponent");
      Polynomial power = Polynomial::constant(dimension_, 1.0);
      for (int i = 0; i < exponent; ++i) power = power * base;
      return power;
    }
    return base;
  }

  Polynomial parse_base() {
    skip_ws();
    if (pos_ >= text_.size()) fail("unexpected end of input");
    const char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      Polynomial inner = parse_expr();
      if (!consume(')')) fail("expected ')'");
      return inner;
    }
    if (c == 'x' || c == 'X') {
      ++pos_;
      const int index = parse_uint("variable index");
      if (index < 1 || index > dimension_) {
        fail("variable x" + std::to_string(index) + " outside dimension " +
             std::to_string(dimension_));
      }
      return Polynomial::variable(dimension_, index - 1);
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      return Polynomial::constant(dimension_, parse_number());
    }
    fail(std::string("unexpected character '") + c + "'");
  }

  int parse_uint(const std::string& what) {
    skip_ws();
    std::size_t start = pos_;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
      ++pos_;
    }
    if (pos_ == start) fail("expected " + what);
    int value = 0;
    std::from_chars(text_.data() + start, text_.data() + pos_, value);
    return value;
  }

  double parse_number() {
    // strtod accepts a superset (leading signs, inf/nan); we start at a
    // digit or '.', so only plain and scientific literals reach it.
    const char* begin = text_.data() + pos_;
    char* end = nullptr;
    const double value = std::strtod(begin, &end);
    if (end == begin) fail("expected number");
    pos_ += static_cast<std::size_t>(end - begin);
    return value;
  }

  std::string_view text_;
  int dimension_;
  std::size_t pos_ = 0;
};

}  // namespace

Polynomial parse_polynomial(std::string_view text, int dimension) {
  if (dimension < 1) throw Error("polynomial needs dimension >= 1");
  return PolyParser(text, dimension).parse();
}

}  // namespace sosexit
