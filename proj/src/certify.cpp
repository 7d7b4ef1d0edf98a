#include "sosexit/certify.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "json.hpp"
#include "sosexit/common.hpp"

namespace sosexit {

namespace {

// Expands b(z)' G b(z) over the Gram basis.
Polynomial gram_polynomial(const MonomialBasis& basis, const Eigen::MatrixXd& gram) {
  Polynomial out(basis.dimension());
  for (int a = 0; a < basis.size(); ++a) {
    for (int b = 0; b < basis.size(); ++b) {
      out.add_term(add(basis[a], basis[b]), gram(a, b));
    }
  }
  return out;
}

double max_abs_coefficient(const Polynomial& p) {
  double m = 0.0;
  for (const auto& [alpha, coeff] : p.terms()) m = std::max(m, std::abs(coeff));
  return m;
}

}  // namespace

SosCertificate extract(const Relaxation& relaxation, const Solution& solution,
                       const ExitProblem& problem) {
  if (solution.status != Solution::Status::Optimal &&
      solution.status != Solution::Status::NearOptimal) {
    throw Error(std::string("cannot extract a certificate from a solve with status ") +
                status_name(solution.status) +
                "; primal infeasibility " + std::to_string(solution.primal_infeasibility) +
                ", dual infeasibility " + std::to_string(solution.dual_infeasibility));
  }
  if (static_cast<int>(solution.eq_duals.size()) != relaxation.test_basis.size()) {
    throw Error("solution does not match the relaxation's equality rows");
  }

  SosCertificate cert;
  cert.sense = relaxation.sense;
  cert.order = relaxation.order;
  cert.value_polynomial = Polynomial(relaxation.indexing.dimension);
  for (int i = 0; i < relaxation.test_basis.size(); ++i) {
    cert.value_polynomial.add_term(relaxation.test_basis[i], solution.eq_duals[i]);
  }
  cert.bound = problem.initial.pairing(cert.value_polynomial);

  for (std::size_t k = 0; k < relaxation.block_info.size(); ++k) {
    const auto& info = relaxation.block_info[k];
    SosCertificate::Multiplier mult;
    mult.measure = info.measure;
    mult.constraint = info.multiplier;
    mult.basis = MonomialBasis(relaxation.indexing.dimension, info.order);
    mult.gram = solution.dual_blocks.at(k);
    mult.label = info.label;
    cert.multipliers.push_back(std::move(mult));
  }
  return cert;
}

namespace {

struct SampleOutcome {
  double worst = std::numeric_limits<double>::infinity();
  long count = 0;
};

// Deterministic batched sampling: batch b uses the stream splitmix64(seed+b),
// outcomes merge by min/count so thread assignment cannot change the result.
template <typename Generate>
SampleOutcome sample_batches(std::uint64_t seed, long wanted, Generate&& generate) {
  constexpr int kBatch = 256;
  constexpr int kChunk = 64;  // batches per scheduling round
  SampleOutcome total;
  for (int round = 0; round < 1024 && total.count < wanted; ++round) {
    std::vector<SampleOutcome> partial(kChunk);
    const std::uint64_t base = seed + static_cast<std::uint64_t>(round) * kChunk;
#pragma omp parallel for schedule(static)
    for (int b = 0; b < kChunk; ++b) {
      std::mt19937_64 rng(splitmix64(base + static_cast<std::uint64_t>(b)));
      partial[b] = generate(rng, kBatch);
    }
    for (const auto& p : partial) {
      total.worst = std::min(total.worst, p.worst);
      total.count += p.count;
    }
  }
  return total;
}

bool project_to_zero_set(const std::vector<Polynomial>& equalities,
                         const std::vector<std::vector<Polynomial>>& jacobian,
                         std::vector<double>& x) {
  const int m = static_cast<int>(equalities.size());
  const int n = static_cast<int>(x.size());
  for (int iter = 0; iter < 60; ++iter) {
    Eigen::VectorXd residual(m);
    double norm = 0.0;
    for (int r = 0; r < m; ++r) {
      residual(r) = equalities[r].evaluate(x);
      norm = std::max(norm, std::abs(residual(r)));
    }
    if (norm <= 1e-12) return true;
    Eigen::MatrixXd jac(m, n);
    for (int r = 0; r < m; ++r) {
      for (int i = 0; i < n; ++i) jac(r, i) = jacobian[r][i].evaluate(x);
    }
    Eigen::VectorXd step = jac.completeOrthogonalDecomposition().solve(residual);
    if (!step.allFinite()) return false;
    for (int i = 0; i < n; ++i) x[i] -= step(i);
  }
  return false;
}

}  // namespace

CertificateReport check(const SosCertificate& certificate, const ExitProblem& problem,
                        const CheckSettings& settings) {
  CertificateReport report;
  std::ostringstream detail;
  const int n = problem.sde.state_dim;
  const double sense = certificate.sense == ConicProgram::Sense::Min ? 1.0 : -1.0;

  // (i) Gram eigenvalues.
  report.min_gram_eigenvalue = std::numeric_limits<double>::infinity();
  for (const auto& mult : certificate.multipliers) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(mult.gram);
    report.min_gram_eigenvalue =
        std::min(report.min_gram_eigenvalue, eig.eigenvalues().minCoeff());
  }
  if (certificate.multipliers.empty()) report.min_gram_eigenvalue = 0.0;

  // (ii) Module identity residual per measure. For min sense the targets are
  // -Lv on the interior and g - v on each piece; max sense flips both signs.
  const Polynomial lv = apply_generator(problem.sde, certificate.value_polynomial);
  const Polynomial interior_target = lv.scaled(-sense);
  const int pieces = static_cast<int>(problem.domain.boundary.size());
  report.max_identity_residual = 0.0;
  for (int measure = 0; measure <= pieces; ++measure) {
    Polynomial target =
        measure == 0
            ? interior_target
            : (problem.functional - certificate.value_polynomial).scaled(sense);
    Polynomial module_sum(n);
    for (const auto& mult : certificate.multipliers) {
      if (mult.measure != measure) continue;
      module_sum = module_sum + mult.constraint * gram_polynomial(mult.basis, mult.gram);
    }
    const Polynomial residual = target - module_sum;
    const double scale = 1.0 + std::max(max_abs_coefficient(target),
                                        max_abs_coefficient(module_sum));
    const double rel = max_abs_coefficient(residual) / scale;
    if (rel > report.max_identity_residual) report.max_identity_residual = rel;
  }

  // (iii) Interior sampling of the generator inequality.
  const auto radius = ball_radius(problem.domain.interior, n);
  if (!radius) throw Error("certificate check needs a ball constraint to sample from");
  const double box = *radius;
  const auto& interior = problem.domain.interior;

  auto interior_batch = [&](std::mt19937_64& rng, int batch) {
    std::uniform_real_distribution<double> unif(-box, box);
    SampleOutcome out;
    out.worst = std::numeric_limits<double>::infinity();
    std::vector<double> x(n);
    for (int i = 0; i < batch; ++i) {
      for (int d = 0; d < n; ++d) x[d] = unif(rng);
      bool inside = true;
      for (const auto& p : interior.inequalities) {
        if (p.evaluate(x) < 0.0) {
          inside = false;
          break;
        }
      }
      if (!inside) continue;
      out.worst = std::min(out.worst, interior_target.evaluate(x));
      ++out.count;
    }
    return out;
  };
  const SampleOutcome interior_out =
      sample_batches(splitmix64(settings.seed), settings.samples, interior_batch);
  if (interior_out.count == 0) {
    throw Error("certificate sampling failure: no interior points found");
  }
  report.interior_samples = static_cast<int>(interior_out.count);
  report.worst_interior_violation = std::min(0.0, interior_out.worst);

  // (iv) Boundary sampling of the functional inequality, via projection onto
  // each piece's equalities and filtering by its inequalities.
  const Polynomial boundary_target =
      (problem.functional - certificate.value_polynomial).scaled(sense);
  report.worst_boundary_violation = 0.0;
  long boundary_total = 0;
  for (int piece_idx = 0; piece_idx < pieces; ++piece_idx) {
    const auto& piece = problem.domain.boundary[piece_idx];
    std::vector<std::vector<Polynomial>> jacobian(piece.equalities.size());
    for (std::size_t r = 0; r < piece.equalities.size(); ++r) {
      for (int i = 0; i < n; ++i) jacobian[r].push_back(piece.equalities[r].partial(i));
    }
    auto boundary_batch = [&](std::mt19937_64& rng, int batch) {
      std::uniform_real_distribution<double> unif(-box, box);
      SampleOutcome out;
      out.worst = std::numeric_limits<double>::infinity();
      std::vector<double> x(n);
      for (int i = 0; i < batch; ++i) {
        for (int d = 0; d < n; ++d) x[d] = unif(rng);
        if (!piece.equalities.empty() &&
            !project_to_zero_set(piece.equalities, jacobian, x)) {
          continue;
        }
        bool ok = true;
        for (const auto& p : piece.inequalities) {
          if (p.evaluate(x) < 0.0) {
            ok = false;
            break;
          }
        }
        if (!ok) continue;
        out.worst = std::min(out.worst, boundary_target.evaluate(x));
        ++out.count;
      }
      return out;
    };
    const SampleOutcome piece_out = sample_batches(
        splitmix64(settings.seed ^ (0x9E3779B97F4A7C15ULL * (piece_idx + 1))),
        settings.samples, boundary_batch);
    if (piece_out.count == 0) {
      throw Error("certificate sampling failure: no points found on boundary piece " +
                  std::to_string(piece_idx));
    }
    boundary_total += piece_out.count;
    report.worst_boundary_violation =
        std::min(report.worst_boundary_violation, std::min(0.0, piece_out.worst));
  }
  report.boundary_samples = static_cast<int>(boundary_total);

  const bool gram_ok = report.min_gram_eigenvalue >= -settings.gram_tol;
  const bool identity_ok = report.max_identity_residual <= settings.identity_tol;
  const bool interior_ok = report.worst_interior_violation >= -settings.sample_tol;
  const bool boundary_ok = report.worst_boundary_violation >= -settings.sample_tol;
  report.pass = gram_ok && identity_ok && interior_ok && boundary_ok;

  detail << "gram eigenvalue " << report.min_gram_eigenvalue << (gram_ok ? " ok" : " FAIL")
         << "; identity residual " << report.max_identity_residual
         << (identity_ok ? " ok" : " FAIL") << "; interior worst "
         << report.worst_interior_violation << " over " << report.interior_samples
         << " samples" << (interior_ok ? " ok" : " FAIL") << "; boundary worst "
         << report.worst_boundary_violation << " over " << report.boundary_samples
         << " samples" << (boundary_ok ? " ok" : " FAIL");
  report.detail = detail.str();
  return report;
}

namespace {

std::string exponent_key(const MultiIndex& alpha) {
  std::ostringstream out;
  out << "(";
  for (std::size_t i = 0; i < alpha.size(); ++i) {
    if (i) out << ",";
    out << alpha[i];
  }
  out << ")";
  return out.str();
}

MultiIndex parse_exponent_key(const std::string& key) {
  MultiIndex alpha;
  std::string digits;
  for (char c : key) {
    if (c == '(' || c == ' ') continue;
    if (c == ',' || c == ')') {
      if (digits.empty()) throw Error("bad exponent tuple: " + key);
      alpha.push_back(std::stoi(digits));
      digits.clear();
    } else {
      digits += c;
    }
  }
  if (!digits.empty()) throw Error("bad exponent tuple: " + key);
  return alpha;
}

}  // namespace

void write_certificate_json(const SosCertificate& certificate, std::ostream& out) {
  nlohmann::ordered_json doc;
  doc["sense"] = certificate.sense == ConicProgram::Sense::Min ? "min" : "max";
  doc["order"] = certificate.order;
  doc["bound"] = certificate.bound;
  doc["dimension"] = certificate.value_polynomial.dimension();
  nlohmann::ordered_json vterms = nlohmann::ordered_json::object();
  for (const auto& [alpha, coeff] : certificate.value_polynomial.terms()) {
    vterms[exponent_key(alpha)] = coeff;
  }
  doc["v"] = std::move(vterms);
  doc["multipliers"] = nlohmann::ordered_json::array();
  for (const auto& mult : certificate.multipliers) {
    nlohmann::ordered_json m;
    m["measure"] = mult.measure;
    m["constraint"] = mult.constraint.str();
    m["basis_degree"] = mult.basis.degree();
    m["label"] = mult.label;
    std::vector<double> gram;
    gram.reserve(mult.gram.size());
    for (int r = 0; r < mult.gram.rows(); ++r) {
      for (int c = 0; c < mult.gram.cols(); ++c) gram.push_back(mult.gram(r, c));
    }
    m["gram"] = std::move(gram);
    doc["multipliers"].push_back(std::move(m));
  }
  out << doc.dump(2) << "\n";
}

SosCertificate read_certificate_json(std::istream& in) {
  nlohmann::json doc = nlohmann::json::parse(in);
  SosCertificate cert;
  cert.sense = doc.at("sense").get<std::string>() == "max" ? ConicProgram::Sense::Max
                                                           : ConicProgram::Sense::Min;
  cert.order = doc.at("order").get<int>();
  cert.bound = doc.at("bound").get<double>();
  const int dim = doc.at("dimension").get<int>();
  cert.value_polynomial = Polynomial(dim);
  for (const auto& [key, value] : doc.at("v").items()) {
    cert.value_polynomial.add_term(parse_exponent_key(key), value.get<double>());
  }
  for (const auto& m : doc.at("multipliers")) {
    SosCertificate::Multiplier mult;
    mult.measure = m.at("measure").get<int>();
    mult.constraint = parse_polynomial(m.at("constraint").get<std::string>(), dim);
    mult.basis = MonomialBasis(dim, m.at("basis_degree").get<int>());
    const auto& gram = m.at("gram");
    const int size = mult.basis.size();
    if (static_cast<int>(gram.size()) != size * size) {
      throw Error("gram matrix size mismatch in certificate file");
    }
    mult.gram.resize(size, size);
    int idx = 0;
    for (int r = 0; r < size; ++r) {
      for (int c = 0; c < size; ++c) mult.gram(r, c) = gram[idx++].get<double>();
    }
    mult.label = m.value("label", "");
    cert.multipliers.push_back(std::move(mult));
  }
  return cert;
}

}  // namespace sosexit
