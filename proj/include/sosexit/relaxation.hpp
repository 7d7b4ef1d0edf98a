#pragma once

#include <string>
#include <vector>

#include "sosexit/conic.hpp"
#include "sosexit/model.hpp"

namespace sosexit {

// Measure 0 is the occupation measure of the interior; measures 1..m are
// the exit measures of the boundary pieces, in declaration order.
struct MomentIndexing {
  int dimension = 0;
  std::vector<int> truncation;        // per-measure moment degree cap
  std::vector<MonomialBasis> bases;   // basis(dimension, truncation[i])
  std::vector<int> offsets;           // first variable of each measure
  int total_variables = 0;

  int num_measures() const { return static_cast<int>(truncation.size()); }
  int variables_of(int measure) const { return bases[measure].size(); }
  // Column of moment <z^alpha> of the given measure; throws on overflow.
  int variable(int measure, const MultiIndex& alpha) const;
};

struct TruncationDegrees {
  int degree_gain;        // s = max(0, deg a - 2, deg b - 1)
  int occupation_degree;  // moment cap for the occupation measure
  int exit_degree;        // moment cap for each exit measure
};

// Degree bookkeeping for relaxation order r: test monomials run to |a| <= r,
// occupation moments to r + s rounded up to even (so every monomial of
// L z^a has a housed moment), exit moments to r rounded up to even.
// Throws for r < 2 and for r < deg g (the bound would ignore g's top terms).
TruncationDegrees truncation_degrees(const ExitProblem& problem, int order);

// One moment or localizing block: entry (a, b) is the linear form
// sum_gamma q_gamma * <z^(a+b+gamma)> over the measure's moments, for basis
// monomials a, b of the given order. q = 1 gives the plain moment matrix.
ConicProgram::Block moment_block(const MomentIndexing& indexing, int measure,
                                 int order, const Polynomial& multiplier,
                                 const std::string& label);

// One equality row per test monomial z^a, |a| <= order:
//   <L z^a, occupation> + sum_i <z^a, exit_i> = <z^a, initial law>.
std::vector<ConicProgram::EqualityRow> dynkin_rows(const ExitProblem& problem,
                                                   const MomentIndexing& indexing,
                                                   const MonomialBasis& test_basis);

struct BlockProvenance {
  int measure;
  bool is_moment_matrix;
  Polynomial multiplier;  // 1 for moment matrices
  int order;
  std::string label;
};

// Assembled relaxation: the conic program plus the provenance needed to
// interpret its solution (moment layout, test monomials, block origins).
struct Relaxation {
  ConicProgram program;
  MomentIndexing indexing;
  MonomialBasis test_basis;
  std::vector<BlockProvenance> block_info;
  TruncationDegrees degrees;
  int order = 0;
  ConicProgram::Sense sense = ConicProgram::Sense::Min;
};

// Builds the order-r relaxation of the exit problem: objective
// sum_i <g, exit_i>, equalities dynkin_rows, and per measure a moment matrix
// plus localizing blocks for every inequality (and a +/- pair for every
// equality) of its piece. Requires validate(problem) to report no errors.
Relaxation assemble(const ExitProblem& problem, int order, ConicProgram::Sense sense);

struct InstanceStatistics {
  int order;
  TruncationDegrees degrees;
  int dynkin_row_count;
  int total_variables;
  std::vector<int> variables_per_measure;
  std::vector<std::pair<std::string, int>> block_sizes;  // (label, size)
};

InstanceStatistics instance_statistics(const ExitProblem& problem, int order);

}  // namespace sosexit
