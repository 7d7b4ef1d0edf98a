#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace sosexit {

// Conic program in inequality form over a free variable vector y:
//
//   min/max  c' y
//   s.t.     sum_j y_j A_row[j] = rhs        (equality rows)
//            M_k(y) = sum_j y_j A_kj - C_k  is positive semidefinite
//
// Symmetric coefficient matrices are stored sparsely by their upper
// triangle; an entry (i, j, v) with i < j denotes v at both (i,j) and (j,i).
struct ConicProgram {
  enum class Sense { Min, Max };

  struct Entry {
    int row;
    int col;
    double value;
  };

  struct VariableTerm {
    int variable;
    std::vector<Entry> entries;
  };

  struct Block {
    int size = 0;
    std::vector<Entry> constant;       // C_k, upper triangle
    std::vector<VariableTerm> terms;   // A_kj, upper triangle, sorted by variable
    std::string label;
  };

  struct EqualityRow {
    std::vector<std::pair<int, double>> coefficients;  // (variable, value)
    double rhs = 0.0;
  };

  int num_variables = 0;
  Sense sense = Sense::Min;
  std::vector<double> objective;
  std::vector<EqualityRow> equalities;
  std::vector<Block> blocks;

  // Throws Error on out-of-range variable references or empty rows.
  void check_well_formed() const;

  // Dense M_k(y) for block k at the point y.
  Eigen::MatrixXd block_value(int k, const std::vector<double>& y) const;
};

struct SolverSettings {
  double feasibility_tol = 1e-8;
  double gap_tol = 1e-8;
  int max_iterations = 200;
  int verbosity = 0;
};

struct Solution {
  enum class Status { Optimal, NearOptimal, Infeasible, Unbounded, MaxIters };

  Status status = Status::MaxIters;
  std::vector<double> y;                       // variable values
  std::vector<double> eq_duals;                // one multiplier per equality row
  std::vector<Eigen::MatrixXd> dual_blocks;    // PSD multipliers Z_k
  std::vector<Eigen::MatrixXd> primal_blocks;  // slack values M_k(y)
  double primal_objective = 0.0;
  double dual_objective = 0.0;
  double primal_infeasibility = 0.0;  // normalized, as used for termination
  double dual_infeasibility = 0.0;
  double gap = 0.0;      // <S, Z>
  double rel_gap = 0.0;  // |pobj - dobj| / (1 + |pobj|)
  int iterations = 0;
};

const char* status_name(Solution::Status status);

// Symmetric vectorization with sqrt(2)-scaled off-diagonals, so that
// svec(M) . svec(N) equals the Frobenius inner product <M, N>.
Eigen::VectorXd svec(const Eigen::MatrixXd& m);
Eigen::MatrixXd smat(const Eigen::VectorXd& v);

// Unnormalized residual norms recomputed from program data alone, usable
// to audit any claimed solution independent of solver internals.
struct ResidualReport {
  double primal_infeasibility;  // equality residual and cone violation of y
  double dual_infeasibility;    // stationarity residual and Z cone violation
  double gap;                   // |c'y - dual objective|
};

ResidualReport residuals(const ConicProgram& program, const Solution& solution);

}  // namespace sosexit
