#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "sosexit/model.hpp"

namespace sosexit {

// Problem-file JSON schema:
//   {
//     "dimension": n,
//     "drift": ["poly", ...],                       // n entries
//     "diffusion": [["poly", ...], ...],            // n rows of m entries
//     "domain": {
//       "interior": ["p >= 0", ...],
//       "boundary": [{"eq": ["p = 0", ...], "ineq": ["p >= 0", ...],
//                     "label": "..."}, ...]
//     },
//     "g": "poly",
//     "initial": {"type": "dirac", "point": [...]}
//             or {"type": "moments", "degree": d, "values": {"(a1,...,an)": v}}
//   }
// Polynomials may also be given in coefficient-map form:
//   {"terms": {"(a1,...,an)": coeff, ...}}.
//
// Throws Error with a located message on malformed input; semantic issues
// (missing ball constraint, inconsistent dimensions) surface through
// validate() on the returned problem.
ExitProblem parse_problem(std::istream& in, const std::string& origin = "<stream>");
ExitProblem parse_problem_file(const std::string& path);

// Inverse of parse_problem; parse(serialize(p)) is structurally identical
// to p.
void serialize_problem(const ExitProblem& problem, std::ostream& out);
std::string problem_to_json(const ExitProblem& problem);

// Appends the ball constraint R^2 - sum z_k^2 >= 0 to the interior piece
// (the `--add-ball` CLI hint).
void add_ball_constraint(ExitProblem& problem, double radius);

}  // namespace sosexit
