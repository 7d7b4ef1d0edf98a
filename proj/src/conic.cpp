#include "sosexit/conic.hpp"

#include <cmath>

#include "sosexit/common.hpp"

namespace sosexit {

void ConicProgram::check_well_formed() const {
  if (num_variables <= 0) throw Error("conic program has no variables");
  if (static_cast<int>(objective.size()) != num_variables) {
    throw Error("objective length does not match variable count");
  }
  for (const auto& row : equalities) {
    if (row.coefficients.empty()) throw Error("equality row has no coefficients");
    for (const auto& [var, value] : row.coefficients) {
      if (var < 0 || var >= num_variables) throw Error("equality references invalid variable");
      if (value == 0.0) throw Error("equality stores an explicit zero coefficient");
    }
  }
  for (const auto& block : blocks) {
    if (block.size <= 0) throw Error("block with nonpositive size");
    auto check_entry = [&](const Entry& e) {
      if (e.row < 0 || e.col < e.row || e.col >= block.size) {
        throw Error("block entry outside upper triangle");
      }
    };
    for (const auto& e : block.constant) check_entry(e);
    for (const auto& term : block.terms) {
      if (term.variable < 0 || term.variable >= num_variables) {
        throw Error("block term references invalid variable");
      }
      for (const auto& e : term.entries) check_entry(e);
    }
  }
}

Eigen::MatrixXd ConicProgram::block_value(int k, const std::vector<double>& y) const {
  const Block& block = blocks.at(k);
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(block.size, block.size);
  auto apply = [&m](const Entry& e, double scale) {
    m(e.row, e.col) += scale * e.value;
    if (e.row != e.col) m(e.col, e.row) += scale * e.value;
  };
  for (const auto& e : block.constant) apply(e, -1.0);
  for (const auto& term : block.terms) {
    const double yv = y.at(term.variable);
    if (yv == 0.0) continue;
    for (const auto& e : term.entries) apply(e, yv);
  }
  return m;
}

const char* status_name(Solution::Status status) {
  switch (status) {
    case Solution::Status::Optimal: return "optimal";
    case Solution::Status::NearOptimal: return "near_optimal";
    case Solution::Status::Infeasible: return "infeasible";
    case Solution::Status::Unbounded: return "unbounded";
    case Solution::Status::MaxIters: return "max_iters";
  }
  return "unknown";
}

Eigen::VectorXd svec(const Eigen::MatrixXd& m) {
  const int n = static_cast<int>(m.rows());
  if (m.cols() != n) throw Error("svec needs a square matrix");
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + m.cwiseAbs().maxCoeff())) {
    throw Error("svec needs a symmetric matrix");
  }
  static const double kSqrt2 = std::sqrt(2.0);
  Eigen::VectorXd v(n * (n + 1) / 2);
  int idx = 0;
  for (int col = 0; col < n; ++col) {
    for (int row = 0; row <= col; ++row) {
      v(idx++) = row == col ? m(row, col) : kSqrt2 * m(row, col);
    }
  }
  return v;
}

Eigen::MatrixXd smat(const Eigen::VectorXd& v) {
  const int len = static_cast<int>(v.size());
  const int n = static_cast<int>((std::sqrt(8.0 * len + 1.0) - 1.0) / 2.0 + 0.5);
  if (n * (n + 1) / 2 != len) throw Error("smat input length is not triangular");
  static const double kInvSqrt2 = 1.0 / std::sqrt(2.0);
  Eigen::MatrixXd m(n, n);
  int idx = 0;
  for (int col = 0; col < n; ++col) {
    for (int row = 0; row <= col; ++row) {
      const double value = v(idx++);
      if (row == col) {
        m(row, col) = value;
      } else {
        m(row, col) = kInvSqrt2 * value;
        m(col, row) = m(row, col);
      }
    }
  }
  return m;
}

namespace {

double negative_part_norm(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m);
  double sq = 0.0;
  for (int i = 0; i < eig.eigenvalues().size(); ++i) {
    const double lambda = eig.eigenvalues()(i);
    if (lambda < 0.0) sq += lambda * lambda;
  }
  return std::sqrt(sq);
}

}  // namespace

ResidualReport residuals(const ConicProgram& program, const Solution& solution) {
  ResidualReport report{0.0, 0.0, 0.0};

  // Primal side: equality residual plus cone violation of M_k(y).
  double primal_sq = 0.0;
  for (const auto& row : program.equalities) {
    double lhs = 0.0;
    for (const auto& [var, value] : row.coefficients) lhs += value * solution.y.at(var);
    primal_sq += (lhs - row.rhs) * (lhs - row.rhs);
  }
  for (std::size_t k = 0; k < program.blocks.size(); ++k) {
    const double neg = negative_part_norm(program.block_value(static_cast<int>(k), solution.y));
    primal_sq += neg * neg;
  }
  report.primal_infeasibility = std::sqrt(primal_sq);

  // Dual side: stationarity residual and Z cone violation. Sign conventions
  // per sense as documented for Solution.
  const double sense = program.sense == ConicProgram::Sense::Min ? 1.0 : -1.0;
  double dual_sq = 0.0;
  std::vector<double> stationarity(program.objective.begin(), program.objective.end());
  for (std::size_t r = 0; r < program.equalities.size(); ++r) {
    for (const auto& [var, value] : program.equalities[r].coefficients) {
      stationarity[var] -= value * solution.eq_duals.at(r);
    }
  }
  // stationarity now holds c - E'w; subtract sense * A*(Z).
  for (std::size_t k = 0; k < program.blocks.size(); ++k) {
    const auto& block = program.blocks[k];
    const auto& z = solution.dual_blocks.at(k);
    for (const auto& term : block.terms) {
      double dot = 0.0;
      for (const auto& e : term.entries) {
        dot += e.value * z(e.row, e.col);
        if (e.row != e.col) dot += e.value * z(e.col, e.row);
      }
      stationarity[term.variable] -= sense * dot;
    }
    const double neg = negative_part_norm(z);
    dual_sq += neg * neg;
  }
  for (double v : stationarity) dual_sq += v * v;
  report.dual_infeasibility = std::sqrt(dual_sq);

  double pobj = 0.0;
  for (int j = 0; j < program.num_variables; ++j) pobj += program.objective[j] * solution.y.at(j);
  double dobj = 0.0;
  for (std::size_t r = 0; r < program.equalities.size(); ++r) {
    dobj += program.equalities[r].rhs * solution.eq_duals.at(r);
  }
  for (std::size_t k = 0; k < program.blocks.size(); ++k) {
    const auto& block = program.blocks[k];
    const auto& z = solution.dual_blocks.at(k);
    double dot = 0.0;
    for (const auto& e : block.constant) {
      dot += e.value * z(e.row, e.col);
      if (e.row != e.col) dot += e.value * z(e.col, e.row);
    }
    dobj += sense * dot;
  }
  report.gap = std::abs(pobj - dobj);
  return report;
}

}  // namespace sosexit
