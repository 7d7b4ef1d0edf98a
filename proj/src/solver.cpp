#include "sosexit/solver.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <vector>

#include "sosexit/common.hpp"

namespace sosexit {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

MatrixXd dense_symmetric(const std::vector<ConicProgram::Entry>& entries, int size) {
  MatrixXd m = MatrixXd::Zero(size, size);
  for (const auto& e : entries) {
    m(e.row, e.col) += e.value;
    if (e.row != e.col) m(e.col, e.row) += e.value;
  }
  return m;
}

double sparse_dot(const std::vector<ConicProgram::Entry>& entries, const MatrixXd& m) {
  double sum = 0.0;
  for (const auto& e : entries) {
    sum += e.value * m(e.row, e.col);
    if (e.row != e.col) sum += e.value * m(e.col, e.row);
  }
  return sum;
}

}  // namespace

namespace kernels {

MatrixXd scaled_gram_serial(const ConicProgram& program,
                            const std::vector<MatrixXd>& scaling_inverses) {
  const int n = program.num_variables;
  MatrixXd gram = MatrixXd::Zero(n, n);
  for (std::size_t k = 0; k < program.blocks.size(); ++k) {
    const auto& block = program.blocks[k];
    const MatrixXd& tinv = scaling_inverses[k];
    for (std::size_t jj = 0; jj < block.terms.size(); ++jj) {
      const MatrixXd aj = dense_symmetric(block.terms[jj].entries, block.size);
      const MatrixXd scaled = tinv * aj * tinv;
      for (std::size_t ll = 0; ll <= jj; ++ll) {
        const MatrixXd al = dense_symmetric(block.terms[ll].entries, block.size);
        const double value = (al.array() * scaled.array()).sum();
        const int j = block.terms[jj].variable;
        const int l = block.terms[ll].variable;
        gram(j, l) += value;
        if (j != l) gram(l, j) += value;
      }
    }
  }
  return gram;
}

MatrixXd scaled_gram_parallel(const ConicProgram& program,
                              const std::vector<MatrixXd>& scaling_inverses) {
  const int n = program.num_variables;
  MatrixXd gram = MatrixXd::Zero(n, n);
  for (std::size_t k = 0; k < program.blocks.size(); ++k) {
    const auto& block = program.blocks[k];
    const MatrixXd& tinv = scaling_inverses[k];
    const int nterms = static_cast<int>(block.terms.size());
    // Each jj owns a distinct target row pattern, so the writes below do not
    // race; accumulation over blocks stays in this serial outer loop, which
    // keeps results identical for any thread count.
#pragma omp parallel for schedule(dynamic)
    for (int jj = 0; jj < nterms; ++jj) {
      const MatrixXd aj = dense_symmetric(block.terms[jj].entries, block.size);
      const MatrixXd scaled = tinv * aj * tinv;
      const int j = block.terms[jj].variable;
      for (int ll = 0; ll <= jj; ++ll) {
        const double value = sparse_dot(block.terms[ll].entries, scaled);
        const int l = block.terms[ll].variable;
        gram(j, l) += value;
        if (j != l) gram(l, j) += value;
      }
    }
  }
  return gram;
}

}  // namespace kernels

namespace {

// Nesterov-Todd scaling data for one PSD block.
struct Scaling {
  MatrixXd r;        // W factor: W(z) = r' Z r
  MatrixXd rinv;
  MatrixXd t;        // r r'
  MatrixXd tinv;     // rinv' rinv
  VectorXd lambda;   // common scaled spectrum of S and Z
};

Scaling nt_scaling(const MatrixXd& s, const MatrixXd& z) {
  Eigen::LLT<MatrixXd> slt(s);
  Eigen::LLT<MatrixXd> zlt(z);
  if (slt.info() != Eigen::Success || zlt.info() != Eigen::Success) {
    throw Error("interior iterate left the cone; scaling breakdown");
  }
  const MatrixXd ls = slt.matrixL();
  const MatrixXd lz = zlt.matrixL();
  Eigen::JacobiSVD<MatrixXd> svd(lz.transpose() * ls,
                                 Eigen::ComputeFullU | Eigen::ComputeFullV);
  Scaling w;
  w.lambda = svd.singularValues();
  const VectorXd isqrt = w.lambda.array().sqrt().inverse().matrix();
  w.r = ls * svd.matrixV() * isqrt.asDiagonal();
  w.rinv = isqrt.asDiagonal() * svd.matrixU().transpose() * lz.transpose();
  w.t = w.r * w.r.transpose();
  w.tinv = w.rinv.transpose() * w.rinv;
  return w;
}

// Largest step alpha with m + alpha dm staying positive semidefinite,
// using the Cholesky factor of m.
double max_cone_step(const MatrixXd& m, const MatrixXd& dm) {
  Eigen::LLT<MatrixXd> llt(m);
  if (llt.info() != Eigen::Success) return 0.0;
  const MatrixXd l = llt.matrixL();
  const MatrixXd inner = l.triangularView<Eigen::Lower>().solve(
      l.triangularView<Eigen::Lower>().solve(dm).transpose());
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(0.5 * (inner + inner.transpose()));
  const double lo = eig.eigenvalues().minCoeff();
  if (lo >= 0.0) return std::numeric_limits<double>::infinity();
  return -1.0 / lo;
}

struct Workspace {
  // Problem in internal min form.
  int n = 0;
  int p = 0;
  VectorXd c;
  MatrixXd eq;   // p x n
  VectorXd rhs;  // p
  std::vector<MatrixXd> constants;  // C_k
  const ConicProgram* program = nullptr;

  double c_norm = 1.0;
  double rhs_norm = 1.0;
  double h_norm = 1.0;

  VectorXd astar(const std::vector<MatrixXd>& z) const {
    VectorXd out = VectorXd::Zero(n);
    for (std::size_t k = 0; k < program->blocks.size(); ++k) {
      for (const auto& term : program->blocks[k].terms) {
        out(term.variable) += sparse_dot(term.entries, z[k]);
      }
    }
    return out;
  }

  std::vector<MatrixXd> amap(const VectorXd& x) const {
    std::vector<MatrixXd> out;
    out.reserve(program->blocks.size());
    for (const auto& block : program->blocks) {
      MatrixXd m = MatrixXd::Zero(block.size, block.size);
      for (const auto& term : block.terms) {
        const double xv = x(term.variable);
        if (xv == 0.0) continue;
        for (const auto& e : term.entries) {
          m(e.row, e.col) += xv * e.value;
          if (e.row != e.col) m(e.col, e.row) += xv * e.value;
        }
      }
      out.push_back(std::move(m));
    }
    return out;
  }
};

struct KktFactor {
  Eigen::LLT<MatrixXd> h_llt;
  MatrixXd hinv_eqt;  // H^{-1} E'
  Eigen::LLT<MatrixXd> schur_llt;
};

// Factors H = A (W'W)^{-1} A' restricted to block structure plus the
// equality Schur complement. Falls back to progressively larger diagonal
// regularization if the Gram matrix is numerically rank deficient.
KktFactor factor_kkt(const Workspace& w, const std::vector<Scaling>& scalings) {
  std::vector<MatrixXd> tinvs;
  tinvs.reserve(scalings.size());
  for (const auto& s : scalings) tinvs.push_back(s.tinv);
  MatrixXd h = kernels::scaled_gram_parallel(*w.program, tinvs);

  KktFactor f;
  const double scale = std::max(1.0, h.diagonal().cwiseAbs().maxCoeff());
  double jitter = 0.0;
  for (int attempt = 0; attempt < 4; ++attempt) {
    MatrixXd hj = h;
    if (jitter > 0.0) hj.diagonal().array() += jitter;
    f.h_llt.compute(hj);
    if (f.h_llt.info() == Eigen::Success) break;
    jitter = jitter == 0.0 ? 1e-14 * scale : jitter * 100.0;
  }
  if (f.h_llt.info() != Eigen::Success) throw Error("KKT factorization failed");

  if (w.p > 0) {
    f.hinv_eqt = f.h_llt.solve(w.eq.transpose());
    MatrixXd schur = w.eq * f.hinv_eqt;
    schur = 0.5 * (schur + schur.transpose());
    const double sscale = std::max(1.0, schur.diagonal().cwiseAbs().maxCoeff());
    double sjitter = 0.0;
    for (int attempt = 0; attempt < 4; ++attempt) {
      MatrixXd sj = schur;
      if (sjitter > 0.0) sj.diagonal().array() += sjitter;
      f.schur_llt.compute(sj);
      if (f.schur_llt.info() == Eigen::Success) break;
      sjitter = sjitter == 0.0 ? 1e-14 * sscale : sjitter * 100.0;
    }
    if (f.schur_llt.info() != Eigen::Success) throw Error("KKT factorization failed");
  }
  return f;
}

struct Direction {
  VectorXd x;
  VectorXd v;
  std::vector<MatrixXd> z;
};

// Solves the reduced system
//   [ 0   E'  G' ] [x]   [bx]
//   [ E   0   0  ] [v] = [bv]
//   [ G   0  -WW ] [z]   [bz]
// with G the negated block map; bz arrives in block-matrix form.
Direction solve3(const Workspace& w, const std::vector<Scaling>& scalings,
                 const KktFactor& f, const VectorXd& bx, const VectorXd& bv,
                 const std::vector<MatrixXd>& bz) {
  std::vector<MatrixXd> scaled_bz(bz.size());
  for (std::size_t k = 0; k < bz.size(); ++k) {
    scaled_bz[k] = scalings[k].tinv * bz[k] * scalings[k].tinv;
  }
  const VectorXd folded = bx - w.astar(scaled_bz);

  Direction d;
  if (w.p > 0) {
    const VectorXd hb = f.h_llt.solve(folded);
    d.v = f.schur_llt.solve(w.eq * hb - bv);
    d.x = f.h_llt.solve(folded - w.eq.transpose() * d.v);
  } else {
    d.v = VectorXd();
    d.x = f.h_llt.solve(folded);
  }

  const std::vector<MatrixXd> ax = w.amap(d.x);
  d.z.resize(bz.size());
  for (std::size_t k = 0; k < bz.size(); ++k) {
    d.z[k] = scalings[k].tinv * (-ax[k] - bz[k]) * scalings[k].tinv;
  }
  return d;
}

Solution classify_failure(Solution sol, const SolverSettings& settings) {
  const double loose = std::sqrt(std::max(settings.feasibility_tol, 1e-12));
  if (sol.primal_infeasibility <= loose && sol.dual_infeasibility <= loose &&
      sol.rel_gap <= std::sqrt(std::max(settings.gap_tol, 1e-12))) {
    sol.status = Solution::Status::NearOptimal;
  } else {
    sol.status = Solution::Status::MaxIters;
  }
  return sol;
}

}  // namespace

Solution solve(const ConicProgram& program, const SolverSettings& settings) {
  program.check_well_formed();
  if (settings.feasibility_tol <= 0.0 || settings.gap_tol <= 0.0) {
    throw Error("solver tolerances must be positive");
  }
  if (program.blocks.empty()) {
    throw Error("program has no conic blocks");
  }
  const bool maximize = program.sense == ConicProgram::Sense::Max;

  Workspace w;
  w.program = &program;
  w.n = program.num_variables;
  w.p = static_cast<int>(program.equalities.size());
  w.c = VectorXd::Zero(w.n);
  for (int j = 0; j < w.n; ++j) w.c(j) = maximize ? -program.objective[j] : program.objective[j];
  w.eq = MatrixXd::Zero(w.p, w.n);
  w.rhs = VectorXd::Zero(w.p);
  for (int r = 0; r < w.p; ++r) {
    for (const auto& [var, value] : program.equalities[r].coefficients) {
      w.eq(r, var) += value;
    }
    w.rhs(r) = program.equalities[r].rhs;
  }
  double hsq = 0.0;
  for (const auto& block : program.blocks) {
    w.constants.push_back(dense_symmetric(block.constant, block.size));
    hsq += w.constants.back().squaredNorm();
  }
  w.c_norm = std::max(1.0, w.c.norm());
  w.rhs_norm = std::max(1.0, w.rhs.norm());
  w.h_norm = std::max(1.0, std::sqrt(hsq));

  const int nblocks = static_cast<int>(program.blocks.size());
  double cone_degree = 1.0;  // tau/kappa pair
  for (const auto& block : program.blocks) cone_degree += block.size;

  // Homogeneous embedding state.
  VectorXd x = VectorXd::Zero(w.n);
  VectorXd veq = VectorXd::Zero(w.p);
  std::vector<MatrixXd> s, z;
  for (const auto& block : program.blocks) {
    s.push_back(MatrixXd::Identity(block.size, block.size));
    z.push_back(MatrixXd::Identity(block.size, block.size));
  }
  double tau = 1.0;
  double kappa = 1.0;

  Solution sol;
  sol.y.assign(w.n, 0.0);

  auto fill_solution = [&](Solution& out) {
    out.y.resize(w.n);
    for (int j = 0; j < w.n; ++j) out.y[j] = x(j) / tau;
    out.eq_duals.resize(w.p);
    for (int r = 0; r < w.p; ++r) {
      const double wmul = -veq(r) / tau;  // internal min convention
      out.eq_duals[r] = maximize ? -wmul : wmul;
    }
    out.dual_blocks.clear();
    out.primal_blocks.clear();
    for (int k = 0; k < nblocks; ++k) {
      out.dual_blocks.push_back(z[k] / tau);
      out.primal_blocks.push_back(s[k] / tau);
    }
  };

  double best_mu = std::numeric_limits<double>::infinity();
  int stalled = 0;

  for (int iter = 0; iter <= settings.max_iterations; ++iter) {
    // Residuals of the self-dual system.
    const VectorXd rx = (w.p > 0 ? VectorXd(w.eq.transpose() * veq) : VectorXd(VectorXd::Zero(w.n)))
                        - w.astar(z) + w.c * tau;
    const VectorXd ry = w.p > 0 ? VectorXd(w.eq * x - w.rhs * tau) : VectorXd();
    const std::vector<MatrixXd> ax = w.amap(x);
    std::vector<MatrixXd> rz(nblocks);
    for (int k = 0; k < nblocks; ++k) {
      rz[k] = -ax[k] + s[k] + w.constants[k] * tau;
    }
    double ch_dot_z = 0.0;  // <C, Z> aggregated
    for (int k = 0; k < nblocks; ++k) {
      ch_dot_z += (w.constants[k].array() * z[k].array()).sum();
    }
    const double rtau = w.c.dot(x) + (w.p > 0 ? w.rhs.dot(veq) : 0.0) - ch_dot_z + kappa;

    double gap_sz = 0.0;
    for (int k = 0; k < nblocks; ++k) gap_sz += (s[k].array() * z[k].array()).sum();
    const double mu = (gap_sz + tau * kappa) / cone_degree;

    // Convergence metrics of the de-homogenized point.
    const double pobj_int = w.c.dot(x) / tau;
    const double dobj_int = (ch_dot_z - (w.p > 0 ? w.rhs.dot(veq) : 0.0)) / tau;
    double pres_sq = 0.0;
    if (w.p > 0) pres_sq += (w.eq * x / tau - w.rhs).squaredNorm() / (w.rhs_norm * w.rhs_norm);
    double cone_sq = 0.0;
    for (int k = 0; k < nblocks; ++k) {
      cone_sq += (s[k] / tau - (ax[k] / tau - w.constants[k])).squaredNorm();
    }
    pres_sq += cone_sq / (w.h_norm * w.h_norm);
    const double pres = std::sqrt(pres_sq);
    const double dres = rx.norm() / tau / w.c_norm;
    const double relgap = std::abs(pobj_int - dobj_int) / (1.0 + std::abs(pobj_int));

    sol.iterations = iter;
    sol.primal_objective = maximize ? -pobj_int : pobj_int;
    sol.dual_objective = maximize ? -dobj_int : dobj_int;
    sol.primal_infeasibility = pres;
    sol.dual_infeasibility = dres;
    sol.gap = gap_sz / (tau * tau);
    sol.rel_gap = relgap;

    if (settings.verbosity >= 1) {
      std::printf("it %3d  pobj % .9e  dobj % .9e  gap %.2e  pres %.2e  dres %.2e  mu %.2e\n",
                  iter, sol.primal_objective, sol.dual_objective, sol.gap, pres, dres, mu);
    }

    if (pres <= settings.feasibility_tol && dres <= settings.feasibility_tol &&
        relgap <= settings.gap_tol) {
      sol.status = Solution::Status::Optimal;
      fill_solution(sol);
      return sol;
    }

    // Infeasibility rays. The certificate quality is judged after
    // normalizing by the strictly positive certificate value.
    const double hz_by = (w.p > 0 ? w.rhs.dot(veq) : 0.0) - ch_dot_z;
    if (hz_by < 0.0) {
      const double denom = -hz_by;
      const VectorXd cert = (w.p > 0 ? VectorXd(w.eq.transpose() * veq) : VectorXd(VectorXd::Zero(w.n)))
                            - w.astar(z);
      if (cert.norm() / denom <= settings.feasibility_tol * w.c_norm) {
        sol.status = Solution::Status::Infeasible;
        fill_solution(sol);
        return sol;
      }
    }
    const double cx = w.c.dot(x);
    if (cx < 0.0) {
      const double denom = -cx;
      double ray_sq = w.p > 0 ? (w.eq * x).squaredNorm() : 0.0;
      for (int k = 0; k < nblocks; ++k) ray_sq += (s[k] - ax[k]).squaredNorm();
      if (std::sqrt(ray_sq) / denom <= settings.feasibility_tol * w.h_norm) {
        sol.status = maximize ? Solution::Status::Infeasible : Solution::Status::Unbounded;
        fill_solution(sol);
        // An unbounded internal minimization is an unbounded user maximization.
        if (maximize) sol.status = Solution::Status::Unbounded;
        return sol;
      }
    }

    if (iter == settings.max_iterations) break;
    if (mu < best_mu * 0.999) {
      best_mu = mu;
      stalled = 0;
    } else if (++stalled >= 10) {
      break;
    }

    // Scaling and KKT factorization for this iterate.
    std::vector<Scaling> scalings;
    scalings.reserve(nblocks);
    for (int k = 0; k < nblocks; ++k) scalings.push_back(nt_scaling(s[k], z[k]));
    KktFactor kkt;
    try {
      kkt = factor_kkt(w, scalings);
    } catch (const Error&) {
      break;
    }

    std::vector<MatrixXd> hb(nblocks);
    for (int k = 0; k < nblocks; ++k) hb[k] = -w.constants[k];
    const Direction stat = solve3(w, scalings, kkt, -w.c, w.rhs, hb);
    double stat_cby = w.c.dot(stat.x) + (w.p > 0 ? w.rhs.dot(stat.v) : 0.0);
    for (int k = 0; k < nblocks; ++k) {
      stat_cby -= (w.constants[k].array() * stat.z[k].array()).sum();
    }
    const double dtau_den = stat_cby - kappa / tau;
    if (!std::isfinite(dtau_den) || std::abs(dtau_den) < 1e-300) break;

    auto newton = [&](double shrink, const std::vector<MatrixXd>& gs_scaled, double gkappa,
                      Direction& dir, double& dtau, double& dkappa,
                      std::vector<MatrixXd>& ds) {
      // Fold the scaled complementarity target into the z-row right side.
      std::vector<MatrixXd> gz(nblocks);
      std::vector<MatrixXd> wls(nblocks);
      for (int k = 0; k < nblocks; ++k) {
        const auto& lam = scalings[k].lambda;
        MatrixXd u(gs_scaled[k].rows(), gs_scaled[k].cols());
        for (int a = 0; a < u.rows(); ++a) {
          for (int b = 0; b < u.cols(); ++b) {
            u(a, b) = 2.0 * gs_scaled[k](a, b) / (lam(a) + lam(b));
          }
        }
        wls[k] = scalings[k].r * u * scalings[k].r.transpose();
        gz[k] = -shrink * rz[k] - wls[k];
      }
      const Direction base = solve3(w, scalings, kkt, -shrink * rx,
                                    w.p > 0 ? VectorXd(-shrink * ry) : VectorXd(), gz);
      double base_cby = w.c.dot(base.x) + (w.p > 0 ? w.rhs.dot(base.v) : 0.0);
      for (int k = 0; k < nblocks; ++k) {
        base_cby -= (w.constants[k].array() * base.z[k].array()).sum();
      }
      const double gtau = -shrink * rtau;
      dtau = (gtau - gkappa / tau - base_cby) / dtau_den;
      dir.x = base.x + dtau * stat.x;
      if (w.p > 0) dir.v = base.v + dtau * stat.v;
      dir.z.resize(nblocks);
      ds.resize(nblocks);
      for (int k = 0; k < nblocks; ++k) {
        dir.z[k] = base.z[k] + dtau * stat.z[k];
        ds[k] = wls[k] - scalings[k].t * dir.z[k] * scalings[k].t;
        ds[k] = 0.5 * (ds[k] + ds[k].transpose());
        dir.z[k] = 0.5 * (dir.z[k] + dir.z[k].transpose());
      }
      dkappa = (gkappa - kappa * dtau) / tau;
    };

    auto max_step = [&](const Direction& dir, const std::vector<MatrixXd>& ds, double dtau,
                        double dkappa) {
      double alpha = std::numeric_limits<double>::infinity();
      for (int k = 0; k < nblocks; ++k) {
        alpha = std::min(alpha, max_cone_step(s[k], ds[k]));
        alpha = std::min(alpha, max_cone_step(z[k], dir.z[k]));
      }
      if (dtau < 0.0) alpha = std::min(alpha, -tau / dtau);
      if (dkappa < 0.0) alpha = std::min(alpha, -kappa / dkappa);
      return alpha;
    };

    // Affine (predictor) direction.
    std::vector<MatrixXd> gs_aff(nblocks);
    for (int k = 0; k < nblocks; ++k) {
      gs_aff[k] = MatrixXd::Zero(s[k].rows(), s[k].cols());
      gs_aff[k].diagonal() = -scalings[k].lambda.array().square();
    }
    Direction aff;
    double dtau_aff = 0.0, dkappa_aff = 0.0;
    std::vector<MatrixXd> ds_aff;
    newton(1.0, gs_aff, -tau * kappa, aff, dtau_aff, dkappa_aff, ds_aff);

    const double alpha_aff = std::min(1.0, max_step(aff, ds_aff, dtau_aff, dkappa_aff));
    double gap_aff = 0.0;
    for (int k = 0; k < nblocks; ++k) {
      gap_aff += ((s[k] + alpha_aff * ds_aff[k]).array() *
                  (z[k] + alpha_aff * aff.z[k]).array()).sum();
    }
    gap_aff += (tau + alpha_aff * dtau_aff) * (kappa + alpha_aff * dkappa_aff);
    const double mu_aff = gap_aff / cone_degree;
    double sigma = std::pow(std::clamp(mu_aff / mu, 0.0, 1.0), 3);

    // Combined (corrector) direction.
    std::vector<MatrixXd> gs_comb(nblocks);
    for (int k = 0; k < nblocks; ++k) {
      const MatrixXd dsb = scalings[k].rinv * ds_aff[k] * scalings[k].rinv.transpose();
      const MatrixXd dzb = scalings[k].r.transpose() * aff.z[k] * scalings[k].r;
      gs_comb[k] = gs_aff[k] - 0.5 * (dsb * dzb + dzb * dsb);
      gs_comb[k].diagonal().array() += sigma * mu;
      gs_comb[k] = 0.5 * (gs_comb[k] + gs_comb[k].transpose());
    }
    Direction comb;
    double dtau_c = 0.0, dkappa_c = 0.0;
    std::vector<MatrixXd> ds_comb;
    newton(1.0 - sigma, gs_comb, -tau * kappa - dtau_aff * dkappa_aff + sigma * mu, comb,
           dtau_c, dkappa_c, ds_comb);

    double alpha = std::min(1.0, 0.99 * max_step(comb, ds_comb, dtau_c, dkappa_c));
    if (!std::isfinite(alpha) || alpha <= 1e-9) break;

    x += alpha * comb.x;
    if (w.p > 0) veq += alpha * comb.v;
    for (int k = 0; k < nblocks; ++k) {
      s[k] += alpha * ds_comb[k];
      z[k] += alpha * comb.z[k];
      s[k] = 0.5 * (s[k] + s[k].transpose()).eval();
      z[k] = 0.5 * (z[k] + z[k].transpose()).eval();
    }
    tau += alpha * dtau_c;
    kappa += alpha * dkappa_c;
  }

  fill_solution(sol);
  return classify_failure(sol, settings);
}

}  // namespace sosexit
