#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "sosexit/conic.hpp"
#include "sosexit/model.hpp"
#include "sosexit/relaxation.hpp"

namespace sosexit {

// Dual certificate recovered from a solved relaxation: a polynomial v whose
// pairing with the initial law is the claimed bound, together with one Gram
// matrix per moment/localizing block representing the matched sum-of-squares
// multiplier. For a min-sense relaxation v is a subsolution certificate
// (-Lv on the interior and g - v on each boundary piece decompose over the
// respective truncated quadratic modules); for max-sense the signs flip and
// v is a supersolution certificate.
struct SosCertificate {
  ConicProgram::Sense sense = ConicProgram::Sense::Min;
  int order = 0;
  Polynomial value_polynomial;  // v
  double bound = 0.0;           // <v, initial law>

  struct Multiplier {
    int measure;                // 0 interior, 1.. boundary pieces
    Polynomial constraint;      // the localized polynomial (1 for moment blocks)
    MonomialBasis basis;        // Gram basis
    Eigen::MatrixXd gram;
    std::string label;
  };
  std::vector<Multiplier> multipliers;
};

// Rebuilds the certificate from the solver's dual solution. Refuses (throws)
// unless the solution status is Optimal or NearOptimal.
SosCertificate extract(const Relaxation& relaxation, const Solution& solution,
                       const ExitProblem& problem);

struct CheckSettings {
  int samples = 10000;
  std::uint64_t seed = 0;
  double gram_tol = 1e-7;       // eigenvalues of Gram matrices >= -gram_tol
  double identity_tol = 1e-6;   // relative coefficient residual of the module identity
  double sample_tol = 1e-6;     // pointwise slack at sampled points
};

struct CertificateReport {
  double min_gram_eigenvalue = 0.0;
  double max_identity_residual = 0.0;     // relative to 1 + data magnitude
  double worst_interior_violation = 0.0;  // most negative sampled value, 0 if none
  double worst_boundary_violation = 0.0;
  int interior_samples = 0;
  int boundary_samples = 0;
  bool pass = false;
  std::string detail;
};

// Four checks: Gram eigenvalues, coefficient identity residual per measure,
// sampled interior inequality (-Lv >= 0 resp. Lv >= 0), sampled boundary
// inequality (g - v >= 0 resp. v - g >= 0). Boundary points are found by
// Gauss-Newton projection onto the piece equalities followed by inequality
// filtering. Sampling runs in seeded batches and merges by worst violation,
// so results do not depend on thread count.
CertificateReport check(const SosCertificate& certificate, const ExitProblem& problem,
                        const CheckSettings& settings = {});

// JSON export: v keyed by exponent tuples, Gram matrices as dense row-major
// arrays, plus order/sense/bound metadata.
void write_certificate_json(const SosCertificate& certificate, std::ostream& out);
SosCertificate read_certificate_json(std::istream& in);

}  // namespace sosexit
