#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "sosexit/certify.hpp"
#include "sosexit/conic.hpp"
#include "sosexit/mc.hpp"
#include "sosexit/model.hpp"

namespace sosexit {

// Exit codes shared by all commands (scriptable in CI).
enum ExitCode : int {
  kExitOk = 0,
  kExitParseError = 2,
  kExitSolverFailure = 3,
  kExitCertificateFailure = 4,
};

enum class SenseChoice { Min, Max, Both };

struct SolveOptions {
  std::string problem_path;
  std::vector<int> degrees = {2, 4, 6, 8, 10};
  SenseChoice sense = SenseChoice::Both;
  SolverSettings solver;
  bool certify = false;       // also extract and check certificates
  int certify_samples = 10000;
  std::uint64_t seed = 0;
  double add_ball = 0.0;      // > 0: append a ball constraint before validation
  std::string out_json;       // optional report paths
  std::string out_csv;
};

struct BoundRow {
  int degree;
  std::optional<double> lower, upper;
  std::string lower_status, upper_status;
  std::optional<double> gap;
  double wall_seconds = 0.0;
  std::string lower_certificate, upper_certificate;  // "pass"/"fail" when requested
};

struct BoundReport {
  std::string problem_path;
  std::string file_hash;  // fnv1a64 of the problem file bytes
  std::uint64_t seed = 0;
  SolverSettings solver;
  std::vector<BoundRow> rows;
  // Report JSON is byte-identical across identical invocations except for
  // the timing section, which carries wall times and the timestamp.
  std::string timestamp;
};

std::string report_to_json(const BoundReport& report, bool include_timing = true);
std::string report_to_csv(const BoundReport& report);

int cmd_solve(const SolveOptions& options, std::ostream& out, std::ostream& err,
              BoundReport* report_out = nullptr);

struct McOptions {
  std::string problem_path;
  McSettings settings;
  double add_ball = 0.0;
};

int cmd_mc(const McOptions& options, std::ostream& out, std::ostream& err,
           McEstimate* estimate_out = nullptr);

struct CertifyOptions {
  std::string problem_path;
  int degree = 10;
  SenseChoice sense = SenseChoice::Min;  // Both not allowed here
  SolverSettings solver;
  CheckSettings check;
  double add_ball = 0.0;
  std::string out_json;
};

int cmd_certify(const CertifyOptions& options, std::ostream& out, std::ostream& err,
                CertificateReport* report_out = nullptr);

struct InfoOptions {
  std::string problem_path;
  int degree = 8;
  double add_ball = 0.0;
};

int cmd_info(const InfoOptions& options, std::ostream& out, std::ostream& err);

struct ExportOptions {
  std::string problem_path;
  int degree = 4;
  SenseChoice sense = SenseChoice::Min;
  std::string output_path;
  double add_ball = 0.0;
};

int cmd_export(const ExportOptions& options, std::ostream& out, std::ostream& err);

// Applies the SOSEXIT_THREADS cap to OpenMP; called once at CLI startup.
void apply_thread_cap_from_env();

}  // namespace sosexit
