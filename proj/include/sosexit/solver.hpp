#pragma once

#include "sosexit/conic.hpp"

namespace sosexit {

// Primal-dual interior-point solve with Nesterov-Todd scaling and a
// Mehrotra predictor-corrector step inside a homogeneous self-dual
// embedding; infeasible and unbounded problems are recognized through ray
// certificates. Deterministic: identical inputs and settings produce
// identical iterates.
Solution solve(const ConicProgram& program, const SolverSettings& settings = {});

namespace kernels {

// One scaled coefficient matrix inner-product pass: given per-block scaling
// points T_k (symmetric positive definite), forms the Gram matrix
//   H[j][l] = sum_k < A_kj , T_k^{-1} A_kl T_k^{-1} >.
// The OpenMP variant parallelizes over block columns; the serial variant is
// a plain reference implementation kept for testing and benchmarking.
Eigen::MatrixXd scaled_gram_serial(const ConicProgram& program,
                                   const std::vector<Eigen::MatrixXd>& scaling_inverses);
Eigen::MatrixXd scaled_gram_parallel(const ConicProgram& program,
                                     const std::vector<Eigen::MatrixXd>& scaling_inverses);

}  // namespace kernels

}  // namespace sosexit
