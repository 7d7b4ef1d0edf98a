#pragma once

#include <cstdint>
#include <vector>

#include "sosexit/model.hpp"
#include "sosexit/multiindex.hpp"

namespace sosexit {

struct McSettings {
  double step = 1e-4;        // Euler-Maruyama time step
  long paths = 100000;
  std::uint64_t seed = 0;
  double horizon = 1e3;      // paths still inside at this time are censored
  bool bisection = true;     // refine the exit point along the crossing segment
};

struct McEstimate {
  double mean = 0.0;  // of g at the exit location, over exited paths
  double std_error = 0.0;
  double ci95_low = 0.0;
  double ci95_high = 0.0;
  double mean_exit_time = 0.0;
  double exit_time_std_error = 0.0;
  double censored_fraction = 0.0;  // reported, never silently dropped
  long paths = 0;
  long exited = 0;
};

// Euler-Maruyama estimate of E[g(X at exit)] and of the mean exit time.
// Exit is detected when an interior inequality turns negative; the crossing
// segment is then bisected (<= 30 steps) to land on the boundary. Paths are
// seeded independently from the master seed and accumulated in path order
// with compensated sums, so estimates are bitwise reproducible for a fixed
// seed regardless of thread count. Throws when every path is censored or a
// path state turns non-finite.
McEstimate simulate(const ExitProblem& problem, const McSettings& settings);

// Plain sequential implementation kept as a reference for testing the
// parallel one; same stepping and per-path seeding, naive accumulation.
McEstimate simulate_reference(const ExitProblem& problem, const McSettings& settings);

struct MomentEstimate {
  double value = 0.0;
  double std_error = 0.0;
};

struct EmpiricalMoments {
  MonomialBasis basis;
  std::vector<MomentEstimate> occupation;  // time integrals of z^a up to exit
  std::vector<MomentEstimate> exit;        // z^a at the exit location
  double censored_fraction = 0.0;
  long paths = 0;
};

// Sampled moments of the occupation and exit measures up to the given
// degree: rectangle-rule time integrals along each path and exit-point
// monomials, with standard errors.
EmpiricalMoments empirical_moments(const ExitProblem& problem,
                                   const McSettings& settings, int degree);

// Per test monomial z^a, |a| <= order: sample mean and standard error of
//   integral of L z^a along the path + z^a at exit - <z^a, initial law>,
// which has expectation zero. Used to test that simulated moments satisfy
// the relaxation's equality rows.
std::vector<MomentEstimate> dynkin_residuals(const ExitProblem& problem,
                                             const McSettings& settings, int order);

}  // namespace sosexit
