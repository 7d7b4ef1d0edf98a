#include "sosexit/sdpa_io.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <tuple>
#include <vector>

#include "sosexit/common.hpp"

namespace sosexit {

namespace {

std::string fmt(double value) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

}  // namespace

void write_sdpa(const ConicProgram& program, std::ostream& out) {
  program.check_well_formed();
  const bool maximize = program.sense == ConicProgram::Sense::Max;
  const int nvars = program.num_variables;
  const int p = static_cast<int>(program.equalities.size());
  const int psd_blocks = static_cast<int>(program.blocks.size());
  const int nblocks = psd_blocks + (p > 0 ? 1 : 0);

  out << "* produced by sosexit\n";
  if (maximize) {
    out << "* objective negated: source program maximizes, file minimizes\n";
  }
  if (p > 0) {
    out << "* final diagonal block encodes " << p
        << " equality rows as +/- inequality pairs\n";
  }
  out << nvars << "\n";
  out << nblocks << "\n";
  for (int k = 0; k < psd_blocks; ++k) {
    out << program.blocks[k].size << (k + 1 < nblocks ? " " : "");
  }
  if (p > 0) out << -2 * p;
  out << "\n";
  for (int j = 0; j < nvars; ++j) {
    const double c = maximize ? -program.objective[j] : program.objective[j];
    out << fmt(c) << (j + 1 < nvars ? " " : "");
  }
  out << "\n";

  // Entries sorted by (matrix, block, row, col); 1-based indices on disk.
  using Key = std::tuple<int, int, int, int>;
  std::map<Key, double> entries;
  for (int k = 0; k < psd_blocks; ++k) {
    const auto& block = program.blocks[k];
    for (const auto& e : block.constant) {
      entries[{0, k + 1, e.row + 1, e.col + 1}] += e.value;
    }
    for (const auto& term : block.terms) {
      for (const auto& e : term.entries) {
        entries[{term.variable + 1, k + 1, e.row + 1, e.col + 1}] += e.value;
      }
    }
  }
  if (p > 0) {
    const int diag = psd_blocks + 1;
    for (int r = 0; r < p; ++r) {
      const auto& row = program.equalities[r];
      if (row.rhs != 0.0) {
        entries[{0, diag, r + 1, r + 1}] += row.rhs;
        entries[{0, diag, p + r + 1, p + r + 1}] += -row.rhs;
      }
      for (const auto& [var, value] : row.coefficients) {
        entries[{var + 1, diag, r + 1, r + 1}] += value;
        entries[{var + 1, diag, p + r + 1, p + r + 1}] += -value;
      }
    }
  }
  for (const auto& [key, value] : entries) {
    if (value == 0.0) continue;
    const auto& [mat, blk, row, col] = key;
    out << mat << " " << blk << " " << row << " " << col << " " << fmt(value) << "\n";
  }
}

void write_sdpa_file(const ConicProgram& program, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path + " for writing");
  write_sdpa(program, out);
}

namespace {

// Strips SDPA token decorations: {, }, ( ) and commas act as separators.
std::string normalize_line(const std::string& line) {
  std::string out = line;
  for (char& c : out) {
    if (c == '{' || c == '}' || c == '(' || c == ')' || c == ',') c = ' ';
  }
  return out;
}

bool comment_or_blank(const std::string& line) {
  for (char c : line) {
    if (c == ' ' || c == '\t' || c == '\r') continue;
    return c == '*' || c == '"';
  }
  return true;
}

}  // namespace

ConicProgram read_sdpa(std::istream& in) {
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!comment_or_blank(line)) lines.push_back(normalize_line(line));
  }
  std::size_t cursor = 0;
  auto next_line = [&]() -> std::istringstream {
    if (cursor >= lines.size()) throw Error("sdpa: unexpected end of file");
    return std::istringstream(lines[cursor++]);
  };

  ConicProgram program;
  program.sense = ConicProgram::Sense::Min;

  int nvars = 0;
  next_line() >> nvars;
  if (nvars <= 0) throw Error("sdpa: bad variable count");
  program.num_variables = nvars;

  int nblocks = 0;
  next_line() >> nblocks;
  if (nblocks <= 0) throw Error("sdpa: bad block count");

  std::vector<int> sizes;
  {
    auto ls = next_line();
    int size = 0;
    while (ls >> size) sizes.push_back(size);
  }
  if (static_cast<int>(sizes.size()) != nblocks) {
    throw Error("sdpa: block size line does not match block count");
  }

  program.objective.assign(nvars, 0.0);
  {
    auto ls = next_line();
    for (int j = 0; j < nvars; ++j) {
      if (!(ls >> program.objective[j])) throw Error("sdpa: objective line too short");
    }
  }

  // File block -> program block layout; diagonal blocks expand into 1x1s.
  std::vector<int> block_offset(nblocks);
  int total_blocks = 0;
  for (int k = 0; k < nblocks; ++k) {
    block_offset[k] = total_blocks;
    total_blocks += sizes[k] < 0 ? -sizes[k] : 1;
  }
  program.blocks.resize(total_blocks);
  for (int k = 0; k < nblocks; ++k) {
    if (sizes[k] < 0) {
      for (int d = 0; d < -sizes[k]; ++d) {
        program.blocks[block_offset[k] + d].size = 1;
        program.blocks[block_offset[k] + d].label = "diag";
      }
    } else {
      program.blocks[block_offset[k]].size = sizes[k];
    }
  }

  using Key = std::tuple<int, int, int, int>;  // (program block, variable(0=const), row, col)
  std::map<Key, double> entries;
  while (cursor < lines.size()) {
    auto ls = next_line();
    int mat, blk, row, col;
    double value;
    if (!(ls >> mat >> blk >> row >> col >> value)) {
      throw Error("sdpa: malformed entry line: " + lines[cursor - 1]);
    }
    if (blk < 1 || blk > nblocks) throw Error("sdpa: entry block out of range");
    if (mat < 0 || mat > nvars) throw Error("sdpa: entry matrix index out of range");
    if (row > col) std::swap(row, col);
    int pblock, prow, pcol;
    if (sizes[blk - 1] < 0) {
      if (row != col || row < 1 || row > -sizes[blk - 1]) {
        throw Error("sdpa: off-diagonal entry in a diagonal block");
      }
      pblock = block_offset[blk - 1] + row - 1;
      prow = pcol = 0;
    } else {
      if (row < 1 || col > sizes[blk - 1]) throw Error("sdpa: entry outside block");
      pblock = block_offset[blk - 1];
      prow = row - 1;
      pcol = col - 1;
    }
    entries[{pblock, mat, prow, pcol}] += value;
  }

  for (const auto& [key, value] : entries) {
    if (value == 0.0) continue;
    const auto& [pblock, mat, row, col] = key;
    auto& block = program.blocks[pblock];
    if (mat == 0) {
      block.constant.push_back({row, col, value});
    } else {
      auto it = std::find_if(block.terms.begin(), block.terms.end(),
                             [&](const auto& t) { return t.variable == mat - 1; });
      if (it == block.terms.end()) {
        block.terms.push_back({mat - 1, {}});
        it = std::prev(block.terms.end());
      }
      it->entries.push_back({row, col, value});
    }
  }
  for (auto& block : program.blocks) {
    std::sort(block.terms.begin(), block.terms.end(),
              [](const auto& a, const auto& b) { return a.variable < b.variable; });
  }
  program.check_well_formed();
  return program;
}

ConicProgram read_sdpa_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  return read_sdpa(in);
}

}  // namespace sosexit
