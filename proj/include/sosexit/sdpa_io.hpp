#pragma once

#include <iosfwd>
#include <string>

#include "sosexit/conic.hpp"

namespace sosexit {

// Sparse SDPA (.dat-s) export. The program's PSD blocks map one-to-one onto
// SDPA blocks; equality rows are encoded as a trailing diagonal block with a
// +/- entry pair per row. Max-sense programs are written as minimizations of
// the negated objective (recorded in a comment line). Output is line-stable:
// identical programs produce identical bytes.
void write_sdpa(const ConicProgram& program, std::ostream& out);
void write_sdpa_file(const ConicProgram& program, const std::string& path);

// Sparse SDPA import, for running the solver against externally generated
// problems. Diagonal blocks become 1x1 PSD blocks; the result is always a
// min-sense program with no equality rows.
ConicProgram read_sdpa(std::istream& in);
ConicProgram read_sdpa_file(const std::string& path);

}  // namespace sosexit
