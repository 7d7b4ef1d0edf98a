#include "sosexit/model.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "sosexit/common.hpp"

namespace sosexit {

PolynomialMatrix second_order_matrix(const PolynomialMatrix& diffusion) {
  const int n = static_cast<int>(diffusion.size());
  if (n == 0) throw Error("diffusion matrix is empty");
  const int m = static_cast<int>(diffusion[0].size());
  for (const auto& row : diffusion) {
    if (static_cast<int>(row.size()) != m) throw Error("diffusion matrix is ragged");
  }
  const int dim = diffusion[0][0].dimension();
  PolynomialMatrix a(n, std::vector<Polynomial>(n, Polynomial(dim)));
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      Polynomial sum(dim);
      for (int k = 0; k < m; ++k) {
        sum = sum + diffusion[i][k] * diffusion[j][k];
      }
      a[i][j] = sum.scaled(0.5);
      a[j][i] = a[i][j];
    }
  }
  return a;
}

SdeModel make_sde(std::vector<Polynomial> drift, PolynomialMatrix diffusion) {
  SdeModel sde;
  sde.state_dim = static_cast<int>(drift.size());
  if (sde.state_dim == 0) throw Error("drift vector is empty");
  if (static_cast<int>(diffusion.size()) != sde.state_dim) {
    throw Error("diffusion row count does not match state dimension");
  }
  sde.noise_dim = static_cast<int>(diffusion[0].size());
  if (sde.noise_dim == 0) throw Error("diffusion has no columns");
  const int dim = drift[0].dimension();
  for (const auto& p : drift) {
    if (p.dimension() != dim) throw Error("drift entries disagree on dimension");
  }
  for (const auto& row : diffusion) {
    if (static_cast<int>(row.size()) != sde.noise_dim) throw Error("diffusion matrix is ragged");
    for (const auto& p : row) {
      if (p.dimension() != dim) throw Error("diffusion entries disagree on dimension");
    }
  }
  if (dim != sde.state_dim) {
    throw Error("coefficient polynomials must have one variable per state component");
  }
  sde.drift = std::move(drift);
  sde.diffusion = std::move(diffusion);
  sde.second_order = second_order_matrix(sde.diffusion);
  return sde;
}

Polynomial apply_generator(const SdeModel& sde, const Polynomial& f) {
  if (f.dimension() != sde.state_dim) {
    throw Error("generator argument has wrong dimension");
  }
  const int n = sde.state_dim;
  Polynomial elliptic(n);
  for (int i = 0; i < n; ++i) {
    const Polynomial di = f.partial(i);
    elliptic = elliptic + sde.drift[i] * di;
    for (int j = 0; j < n; ++j) {
      elliptic = elliptic + sde.second_order[i][j] * di.partial(j);
    }
  }
  return -elliptic;
}

int generator_degree_gain(const SdeModel& sde) {
  int deg_a = 0;
  for (const auto& row : sde.second_order) {
    for (const auto& p : row) {
      if (!p.is_zero()) deg_a = std::max(deg_a, p.degree());
    }
  }
  int deg_b = 0;
  for (const auto& p : sde.drift) {
    if (!p.is_zero()) deg_b = std::max(deg_b, p.degree());
  }
  return std::max({0, deg_a - 2, deg_b - 1});
}

std::optional<double> ball_radius(const SemialgebraicPiece& piece, int dimension) {
  for (const auto& p : piece.inequalities) {
    if (p.term_count() != dimension + 1) continue;
    const double constant = p.coefficient(MultiIndex(dimension, 0));
    if (constant <= 0.0) continue;
    double square_coeff = 0.0;
    bool ok = true;
    for (int k = 0; k < dimension && ok; ++k) {
      MultiIndex alpha(dimension, 0);
      alpha[k] = 2;
      const double c = p.coefficient(alpha);
      if (c >= 0.0) {
        ok = false;
      } else if (k == 0) {
        square_coeff = c;
      } else if (c != square_coeff) {
        ok = false;
      }
    }
    if (ok) return std::sqrt(constant / -square_coeff);
  }
  return std::nullopt;
}

InitialLaw InitialLaw::dirac(std::vector<double> point) {
  if (point.empty()) throw Error("dirac initial law needs a point");
  InitialLaw law;
  law.is_dirac_ = true;
  law.dimension_ = static_cast<int>(point.size());
  law.point_ = std::move(point);
  return law;
}

InitialLaw InitialLaw::moments(int dimension, int degree, Polynomial::TermMap values) {
  if (dimension < 1) throw Error("moment law needs dimension >= 1");
  if (degree < 0) throw Error("moment law needs degree >= 0");
  InitialLaw law;
  law.is_dirac_ = false;
  law.dimension_ = dimension;
  law.moment_degree_ = degree;
  for (const auto& [alpha, value] : values) {
    if (static_cast<int>(alpha.size()) != dimension) {
      throw Error("moment law entry dimension mismatch");
    }
    if (total_degree(alpha) > degree) {
      throw Error("moment law entry exceeds declared degree");
    }
  }
  law.values_ = std::move(values);
  return law;
}

const std::vector<double>& InitialLaw::point() const {
  if (!is_dirac_) throw Error("initial law is not a point mass");
  return point_;
}

int InitialLaw::moment_degree() const {
  if (is_dirac_) throw Error("initial law is a point mass");
  return moment_degree_;
}

const Polynomial::TermMap& InitialLaw::moment_table() const {
  if (is_dirac_) throw Error("initial law is a point mass");
  return values_;
}

double InitialLaw::moment(const MultiIndex& alpha) const {
  if (static_cast<int>(alpha.size()) != dimension_) {
    throw Error("initial moment index dimension mismatch");
  }
  if (is_dirac_) {
    double v = 1.0;
    for (int i = 0; i < dimension_; ++i) {
      for (int e = 0; e < alpha[i]; ++e) v *= point_[i];
    }
    return v;
  }
  if (total_degree(alpha) > moment_degree_) {
    throw Error("initial moment of degree " + std::to_string(total_degree(alpha)) +
                " requested, law declared up to degree " + std::to_string(moment_degree_));
  }
  auto it = values_.find(alpha);
  return it == values_.end() ? 0.0 : it->second;
}

double InitialLaw::pairing(const Polynomial& p) const {
  double sum = 0.0;
  for (const auto& [alpha, coeff] : p.terms()) sum += coeff * moment(alpha);
  return sum;
}

bool has_errors(const std::vector<Diagnostic>& diagnostics) {
  return std::any_of(diagnostics.begin(), diagnostics.end(),
                     [](const Diagnostic& d) { return d.severity == Severity::Error; });
}

std::string format_diagnostics(const std::vector<Diagnostic>& diagnostics) {
  std::ostringstream out;
  for (const auto& d : diagnostics) {
    out << (d.severity == Severity::Error ? "error" : "warning") << " [" << d.code
        << "]: " << d.message << "\n";
  }
  return out.str();
}

namespace {

bool satisfies(const SemialgebraicPiece& piece, std::span<const double> x, double eq_tol) {
  for (const auto& p : piece.inequalities) {
    if (p.evaluate(x) < 0.0) return false;
  }
  for (const auto& p : piece.equalities) {
    if (std::abs(p.evaluate(x)) > eq_tol) return false;
  }
  return true;
}

// Gauss-Newton projection onto the zero set of the piece equalities.
bool project_to_equalities(const SemialgebraicPiece& piece, std::vector<double>& x) {
  const int m = static_cast<int>(piece.equalities.size());
  if (m == 0) return true;
  const int n = static_cast<int>(x.size());
  std::vector<std::vector<Polynomial>> jacobians(m);
  for (int r = 0; r < m; ++r) {
    for (int i = 0; i < n; ++i) jacobians[r].push_back(piece.equalities[r].partial(i));
  }
  for (int iter = 0; iter < 60; ++iter) {
    Eigen::VectorXd residual(m);
    double norm = 0.0;
    for (int r = 0; r < m; ++r) {
      residual(r) = piece.equalities[r].evaluate(x);
      norm = std::max(norm, std::abs(residual(r)));
    }
    if (norm <= 1e-12) return true;
    Eigen::MatrixXd jac(m, n);
    for (int r = 0; r < m; ++r) {
      for (int i = 0; i < n; ++i) jac(r, i) = jacobians[r][i].evaluate(x);
    }
    Eigen::VectorXd step =
        jac.completeOrthogonalDecomposition().solve(residual);
    if (!step.allFinite()) return false;
    for (int i = 0; i < n; ++i) x[i] -= step(i);
  }
  return false;
}

}  // namespace

std::vector<Diagnostic> validate(const ExitProblem& problem, const ValidateSettings& settings) {
  std::vector<Diagnostic> out;
  const int n = problem.sde.state_dim;
  auto error = [&out](std::string code, std::string message) {
    out.push_back({Severity::Error, std::move(code), std::move(message)});
  };
  auto warning = [&out](std::string code, std::string message) {
    out.push_back({Severity::Warning, std::move(code), std::move(message)});
  };

  // Shape consistency.
  if (problem.functional.dimension() != n) {
    error("dimension", "functional g has wrong dimension");
  }
  if (problem.initial.dimension() != n) {
    error("dimension", "initial law has wrong dimension");
  }
  auto check_piece = [&](const SemialgebraicPiece& piece, const std::string& where) {
    if (piece.inequalities.empty() && piece.equalities.empty()) {
      error("empty-piece", where + " has no defining polynomials");
    }
    for (const auto& p : piece.inequalities) {
      if (p.dimension() != n) error("dimension", where + " inequality has wrong dimension");
    }
    for (const auto& p : piece.equalities) {
      if (p.dimension() != n) error("dimension", where + " equality has wrong dimension");
    }
  };
  check_piece(problem.domain.interior, "interior");
  for (std::size_t i = 0; i < problem.domain.boundary.size(); ++i) {
    check_piece(problem.domain.boundary[i],
                "boundary piece " + std::to_string(i) +
                    (problem.domain.boundary[i].label.empty()
                         ? ""
                         : " (" + problem.domain.boundary[i].label + ")"));
  }
  if (problem.domain.boundary.empty()) {
    error("no-boundary", "domain has no boundary pieces; exit measures are undefined");
  }
  if (!problem.domain.interior.equalities.empty()) {
    error("interior-equality",
          "interior piece must be described by inequalities only");
  }
  if (!problem.initial.is_dirac()) {
    MultiIndex zero(n, 0);
    if (problem.initial.moment(zero) != 1.0) {
      error("initial-mass", "moment initial law must have unit mass (entry for the zero index)");
    }
  }
  if (has_errors(out)) return out;

  // (i) Ball constraint witnessing boundedness.
  const auto radius = ball_radius(problem.domain.interior, n);
  if (!radius) {
    error("no-ball",
          "interior description contains no ball constraint R^2 - sum z_k^2 >= 0; "
          "re-run with --add-ball R to append one");
    return out;
  }
  const double R = *radius;

  // (iii) Dirac initial point strictly inside.
  if (problem.initial.is_dirac()) {
    const auto& x0 = problem.initial.point();
    for (const auto& p : problem.domain.interior.inequalities) {
      if (p.evaluate(x0) <= 0.0) {
        error("initial-not-interior",
              "initial point is not strictly interior: " + p.str() + " <= 0 there");
        break;
      }
    }
  }

  // (ii) Ellipticity smoke test: second-order matrix positive definite at
  // sampled interior points. A sampling check, not a proof.
  std::mt19937_64 rng(settings.seed);
  std::uniform_real_distribution<double> unif(-R, R);
  int accepted = 0;
  int failures = 0;
  std::vector<double> x(n);
  const long budget = 200LL * std::max(1, settings.ellipticity_samples);
  for (long draw = 0; draw < budget && accepted < settings.ellipticity_samples; ++draw) {
    for (int i = 0; i < n; ++i) x[i] = unif(rng);
    if (!satisfies(problem.domain.interior, x, 0.0)) continue;
    ++accepted;
    Eigen::MatrixXd a(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) a(i, j) = problem.sde.second_order[i][j].evaluate(x);
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(a);
    if (eig.eigenvalues().minCoeff() <= 0.0) ++failures;
  }
  if (accepted == 0) {
    error("interior-sampling", "could not sample any interior point; domain may be empty");
    return out;
  }
  if (accepted < settings.ellipticity_samples / 10) {
    warning("interior-sampling",
            "interior acceptance rate is very low (" + std::to_string(accepted) +
                " points); checks are weak");
  }
  if (failures > 0) {
    error("ellipticity",
          "ellipticity check failed: second-order matrix not positive definite at " +
              std::to_string(failures) + " of " + std::to_string(accepted) +
              " sampled interior points");
  }

  // (iv) Boundary pieces reachable by sampling + projection.
  for (std::size_t bi = 0; bi < problem.domain.boundary.size(); ++bi) {
    const auto& piece = problem.domain.boundary[bi];
    bool found = false;
    for (int attempt = 0; attempt < 200 && !found; ++attempt) {
      for (int i = 0; i < n; ++i) x[i] = unif(rng);
      std::vector<double> y = x;
      if (!project_to_equalities(piece, y)) continue;
      if (satisfies(piece, y, 1e-9)) found = true;
    }
    if (!found) {
      warning("boundary-piece",
              "no point satisfying boundary piece " + std::to_string(bi) +
                  (piece.label.empty() ? "" : " (" + piece.label + ")") +
                  " was found by sampling; the piece may be empty");
    }
  }

  return out;
}

}  // namespace sosexit
