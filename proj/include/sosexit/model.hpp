#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sosexit/polynomial.hpp"

namespace sosexit {

using PolynomialMatrix = std::vector<std::vector<Polynomial>>;

// Polynomial diffusion dX = drift(X) dt + diffusion(X) dW. second_order is
// the derived matrix (1/2) * diffusion * diffusion^T appearing in the
// generator; it is maintained as an identity on polynomials, symmetric by
// construction.
struct SdeModel {
  int state_dim = 0;  // n
  int noise_dim = 0;  // m
  std::vector<Polynomial> drift;  // n entries
  PolynomialMatrix diffusion;     // n x m
  PolynomialMatrix second_order;  // n x n, symmetric
};

// (1/2) B B^T with exact polynomial products and sums.
PolynomialMatrix second_order_matrix(const PolynomialMatrix& diffusion);

// Builds an SdeModel, deriving second_order and validating shapes.
SdeModel make_sde(std::vector<Polynomial> drift, PolynomialMatrix diffusion);

// Applies the generator L of the diffusion to f. Sign convention:
//   -L f = sum_ij a_ij d_i d_j f + sum_i b_i d_i f,
// so the returned polynomial is the negative of the elliptic form. This is
// the orientation used throughout the relaxation and certificate modules.
Polynomial apply_generator(const SdeModel& sde, const Polynomial& f);

// max(0, deg a - 2, deg b - 1): how much applying L can raise a degree.
int generator_degree_gain(const SdeModel& sde);

// Basic closed set {p >= 0 for all inequalities, p = 0 for all equalities}.
struct SemialgebraicPiece {
  std::vector<Polynomial> inequalities;
  std::vector<Polynomial> equalities;
  std::string label;
};

// State domain: one basic closed interior piece whose description must
// include a ball constraint R^2 - sum z_k^2 >= 0, plus an explicit
// decomposition of the boundary into basic closed pieces.
struct Domain {
  SemialgebraicPiece interior;
  std::vector<SemialgebraicPiece> boundary;
};

// Scans a piece's inequalities for a positive multiple of R^2 - sum z_k^2
// and returns R if found.
std::optional<double> ball_radius(const SemialgebraicPiece& piece, int dimension);

// Law of the initial state: a point mass or a table of moments up to a
// declared degree (entry for the zero index must equal 1).
class InitialLaw {
 public:
  static InitialLaw dirac(std::vector<double> point);
  static InitialLaw moments(int dimension, int degree, Polynomial::TermMap values);

  bool is_dirac() const { return is_dirac_; }
  int dimension() const { return dimension_; }
  const std::vector<double>& point() const;
  int moment_degree() const;
  const Polynomial::TermMap& moment_table() const;

  // <z^alpha, law>: the point evaluated at alpha for a dirac law, the stored
  // entry otherwise. Throws if alpha exceeds the declared moment degree.
  double moment(const MultiIndex& alpha) const;
  // <p, law> by linearity.
  double pairing(const Polynomial& p) const;

 private:
  InitialLaw() = default;
  bool is_dirac_ = true;
  int dimension_ = 0;
  std::vector<double> point_;
  int moment_degree_ = 0;
  Polynomial::TermMap values_;
};

// Exit problem data: diffusion, domain, boundary functional, initial law.
struct ExitProblem {
  SdeModel sde;
  Domain domain;
  Polynomial functional;  // evaluated at the exit location
  InitialLaw initial = InitialLaw::dirac({0.0});
};

enum class Severity { Warning, Error };

struct Diagnostic {
  Severity severity;
  std::string code;
  std::string message;
};

bool has_errors(const std::vector<Diagnostic>& diagnostics);
std::string format_diagnostics(const std::vector<Diagnostic>& diagnostics);

struct ValidateSettings {
  int ellipticity_samples = 200;
  std::uint64_t seed = 0;
};

// Structural and numerical sanity checks: shape consistency, ball-constraint
// presence, positive definiteness of the second-order matrix at sampled
// interior points, strict interiority of a dirac initial point, and
// reachability of each boundary piece. Hard failures come back with
// Severity::Error and abort downstream assembly.
std::vector<Diagnostic> validate(const ExitProblem& problem,
                                 const ValidateSettings& settings = {});

}  // namespace sosexit
