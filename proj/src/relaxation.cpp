#include "sosexit/relaxation.hpp"

#include <algorithm>
#include <map>

#include "sosexit/common.hpp"

namespace sosexit {

int MomentIndexing::variable(int measure, const MultiIndex& alpha) const {
  const int pos = bases.at(measure).position(alpha);
  if (pos < 0) {
    throw Error("moment of degree " + std::to_string(total_degree(alpha)) +
                " exceeds truncation " + std::to_string(truncation[measure]) +
                " of measure " + std::to_string(measure));
  }
  return offsets[measure] + pos;
}

namespace {

int round_up_even(int v) { return v % 2 == 0 ? v : v + 1; }

int ceil_half(int v) { return (v + 1) / 2; }

}  // namespace

TruncationDegrees truncation_degrees(const ExitProblem& problem, int order) {
  if (order < 2) throw Error("relaxation order must be at least 2");
  const int gdeg = problem.functional.degree();
  if (order < gdeg) {
    throw Error("relaxation order " + std::to_string(order) +
                " is below deg g = " + std::to_string(gdeg) +
                "; the bound would ignore g's top terms");
  }
  TruncationDegrees t;
  t.degree_gain = generator_degree_gain(problem.sde);
  t.occupation_degree = round_up_even(order + t.degree_gain);
  t.exit_degree = round_up_even(order);
  return t;
}

ConicProgram::Block moment_block(const MomentIndexing& indexing, int measure, int order,
                                 const Polynomial& multiplier, const std::string& label) {
  if (order < 0) throw Error("moment block with negative order");
  if (2 * order + multiplier.degree() > indexing.truncation.at(measure)) {
    throw Error("moment block degree overflow: 2*" + std::to_string(order) + " + " +
                std::to_string(multiplier.degree()) + " > " +
                std::to_string(indexing.truncation[measure]));
  }
  const MonomialBasis basis(indexing.dimension, order);
  ConicProgram::Block block;
  block.size = basis.size();
  block.label = label;
  // (variable -> upper-triangle entries), merged over multiplier terms.
  std::map<int, std::map<std::pair<int, int>, double>> by_variable;
  for (int a = 0; a < basis.size(); ++a) {
    for (int b = a; b < basis.size(); ++b) {
      const MultiIndex ab = add(basis[a], basis[b]);
      for (const auto& [gamma, coeff] : multiplier.terms()) {
        const int var = indexing.variable(measure, add(ab, gamma));
        by_variable[var][{a, b}] += coeff;
      }
    }
  }
  for (const auto& [var, cells] : by_variable) {
    ConicProgram::VariableTerm term;
    term.variable = var;
    for (const auto& [cell, value] : cells) {
      if (value != 0.0) term.entries.push_back({cell.first, cell.second, value});
    }
    if (!term.entries.empty()) block.terms.push_back(std::move(term));
  }
  return block;
}

std::vector<ConicProgram::EqualityRow> dynkin_rows(const ExitProblem& problem,
                                                   const MomentIndexing& indexing,
                                                   const MonomialBasis& test_basis) {
  std::vector<ConicProgram::EqualityRow> rows;
  rows.reserve(test_basis.size());
  const int pieces = indexing.num_measures() - 1;
  for (int i = 0; i < test_basis.size(); ++i) {
    const MultiIndex& alpha = test_basis[i];
    std::map<int, double> coeffs;
    const Polynomial lf = apply_generator(problem.sde, Polynomial::monomial(alpha));
    for (const auto& [gamma, value] : lf.terms()) {
      coeffs[indexing.variable(0, gamma)] += value;
    }
    for (int piece = 0; piece < pieces; ++piece) {
      coeffs[indexing.variable(1 + piece, alpha)] += 1.0;
    }
    ConicProgram::EqualityRow row;
    row.rhs = problem.initial.moment(alpha);
    for (const auto& [var, value] : coeffs) {
      if (value != 0.0) row.coefficients.emplace_back(var, value);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

Relaxation assemble(const ExitProblem& problem, int order, ConicProgram::Sense sense) {
  const auto diagnostics = validate(problem);
  if (has_errors(diagnostics)) {
    throw Error("cannot assemble relaxation, validation failed:\n" +
                format_diagnostics(diagnostics));
  }

  Relaxation rel;
  rel.order = order;
  rel.sense = sense;
  rel.degrees = truncation_degrees(problem, order);

  const int n = problem.sde.state_dim;
  const int pieces = static_cast<int>(problem.domain.boundary.size());
  auto& indexing = rel.indexing;
  indexing.dimension = n;
  indexing.truncation.push_back(rel.degrees.occupation_degree);
  for (int i = 0; i < pieces; ++i) indexing.truncation.push_back(rel.degrees.exit_degree);
  int offset = 0;
  for (int t : indexing.truncation) {
    indexing.bases.emplace_back(n, t);
    indexing.offsets.push_back(offset);
    offset += indexing.bases.back().size();
  }
  indexing.total_variables = offset;

  auto& program = rel.program;
  program.num_variables = offset;
  program.sense = sense;
  program.objective.assign(offset, 0.0);
  for (int i = 0; i < pieces; ++i) {
    for (const auto& [gamma, coeff] : problem.functional.terms()) {
      program.objective[indexing.variable(1 + i, gamma)] += coeff;
    }
  }

  rel.test_basis = MonomialBasis(n, order);
  program.equalities = dynkin_rows(problem, indexing, rel.test_basis);

  auto push_block = [&](int measure, int blk_order, const Polynomial& q, bool is_moment,
                        const std::string& label) {
    program.blocks.push_back(moment_block(indexing, measure, blk_order, q, label));
    rel.block_info.push_back({measure, is_moment, q, blk_order, label});
  };

  const Polynomial one = Polynomial::constant(n, 1.0);
  const int occ_order = rel.degrees.occupation_degree / 2;
  push_block(0, occ_order, one, true, "occupation moment");
  for (std::size_t j = 0; j < problem.domain.interior.inequalities.size(); ++j) {
    const Polynomial& p = problem.domain.interior.inequalities[j];
    const int blk_order = occ_order - ceil_half(p.degree());
    if (blk_order < 0) {
      throw Error("interior inequality degree exceeds the occupation truncation; "
                  "raise the relaxation order");
    }
    push_block(0, blk_order, p, false, "occupation localizing " + std::to_string(j));
  }

  const int exit_order = rel.degrees.exit_degree / 2;
  for (int i = 0; i < pieces; ++i) {
    const auto& piece = problem.domain.boundary[i];
    const std::string name =
        piece.label.empty() ? "exit " + std::to_string(i) : "exit " + piece.label;
    push_block(1 + i, exit_order, one, true, name + " moment");
    for (std::size_t j = 0; j < piece.inequalities.size(); ++j) {
      const Polynomial& p = piece.inequalities[j];
      const int blk_order = exit_order - ceil_half(p.degree());
      if (blk_order < 0) {
        throw Error("boundary inequality degree exceeds the exit truncation; "
                    "raise the relaxation order");
      }
      push_block(1 + i, blk_order, p, false, name + " localizing " + std::to_string(j));
    }
    for (std::size_t j = 0; j < piece.equalities.size(); ++j) {
      const Polynomial& p = piece.equalities[j];
      const int blk_order = exit_order - ceil_half(p.degree());
      if (blk_order < 0) {
        throw Error("boundary equality degree exceeds the exit truncation; "
                    "raise the relaxation order");
      }
      push_block(1 + i, blk_order, p, false, name + " equality+ " + std::to_string(j));
      push_block(1 + i, blk_order, -p, false, name + " equality- " + std::to_string(j));
    }
  }

  program.check_well_formed();
  return rel;
}

InstanceStatistics instance_statistics(const ExitProblem& problem, int order) {
  const Relaxation rel = assemble(problem, order, ConicProgram::Sense::Min);
  InstanceStatistics stats;
  stats.order = order;
  stats.degrees = rel.degrees;
  stats.dynkin_row_count = static_cast<int>(rel.program.equalities.size());
  stats.total_variables = rel.indexing.total_variables;
  for (int m = 0; m < rel.indexing.num_measures(); ++m) {
    stats.variables_per_measure.push_back(rel.indexing.variables_of(m));
  }
  for (const auto& block : rel.program.blocks) {
    stats.block_sizes.emplace_back(block.label, block.size);
  }
  return stats;
}

}  // namespace sosexit
