#include "sosexit/cli.hpp"

#include <omp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "json.hpp"
#include "sosexit/common.hpp"
#include "sosexit/problem_io.hpp"
#include "sosexit/relaxation.hpp"
#include "sosexit/sdpa_io.hpp"
#include "sosexit/solver.hpp"

namespace sosexit {

namespace {

using nlohmann::ordered_json;

std::string hash_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return "";
  std::ostringstream buf;
  buf << in.rdbuf();
  const std::string bytes = buf.str();
  char out[24];
  std::snprintf(out, sizeof(out), "fnv1a64:%016llx",
                static_cast<unsigned long long>(fnv1a64(bytes.data(), bytes.size())));
  return out;
}

std::string now_utc() {
  const std::time_t t = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

// Loads, optionally extends with a ball constraint, and validates; returns
// false (after printing diagnostics) on hard errors.
bool load_problem(const std::string& path, double add_ball, std::ostream& err,
                  ExitProblem& problem) {
  try {
    problem = parse_problem_file(path);
  } catch (const Error& e) {
    err << "parse error: " << e.what() << "\n";
    return false;
  }
  if (add_ball > 0.0) add_ball_constraint(problem, add_ball);
  const auto diagnostics = validate(problem);
  if (!diagnostics.empty()) err << format_diagnostics(diagnostics);
  return !has_errors(diagnostics);
}

}  // namespace

std::string report_to_json(const BoundReport& report, bool include_timing) {
  ordered_json doc;
  doc["problem"] = report.problem_path;
  doc["file_hash"] = report.file_hash;
  doc["seed"] = report.seed;
  doc["settings"] = {{"feasibility_tol", report.solver.feasibility_tol},
                     {"gap_tol", report.solver.gap_tol},
                     {"max_iterations", report.solver.max_iterations}};
  doc["rows"] = ordered_json::array();
  for (const auto& row : report.rows) {
    ordered_json jrow;
    jrow["degree"] = row.degree;
    if (row.lower) jrow["lower"] = *row.lower;
    if (row.upper) jrow["upper"] = *row.upper;
    if (!row.lower_status.empty()) jrow["lower_status"] = row.lower_status;
    if (!row.upper_status.empty()) jrow["upper_status"] = row.upper_status;
    if (row.gap) jrow["gap"] = *row.gap;
    if (!row.lower_certificate.empty()) jrow["lower_certificate"] = row.lower_certificate;
    if (!row.upper_certificate.empty()) jrow["upper_certificate"] = row.upper_certificate;
    doc["rows"].push_back(std::move(jrow));
  }
  if (include_timing) {
    ordered_json timing;
    timing["generated_at"] = report.timestamp;
    ordered_json walls = ordered_json::array();
    for (const auto& row : report.rows) walls.push_back(row.wall_seconds);
    timing["wall_seconds"] = std::move(walls);
    doc["timing"] = std::move(timing);
  }
  return doc.dump(2) + "\n";
}

std::string report_to_csv(const BoundReport& report) {
  std::ostringstream out;
  out << "degree,lower,upper,gap,lower_status,upper_status\n";
  for (const auto& row : report.rows) {
    out << row.degree << ",";
    if (row.lower) out << std::setprecision(17) << *row.lower;
    out << ",";
    if (row.upper) out << std::setprecision(17) << *row.upper;
    out << ",";
    if (row.gap) out << std::setprecision(17) << *row.gap;
    out << "," << row.lower_status << "," << row.upper_status << "\n";
  }
  return out.str();
}

int cmd_solve(const SolveOptions& options, std::ostream& out, std::ostream& err,
              BoundReport* report_out) {
  ExitProblem problem;
  if (!load_problem(options.problem_path, options.add_ball, err, problem)) {
    return kExitParseError;
  }

  BoundReport report;
  report.problem_path = options.problem_path;
  report.file_hash = hash_file(options.problem_path);
  report.seed = options.seed;
  report.solver = options.solver;
  report.timestamp = now_utc();

  std::vector<int> degrees = options.degrees;
  std::sort(degrees.begin(), degrees.end());
  degrees.erase(std::unique(degrees.begin(), degrees.end()), degrees.end());

  bool solver_failure = false;
  bool certificate_failure = false;
  out << "degree        lower            upper          gap        status(lo/up)\n";
  for (int degree : degrees) {
    BoundRow row;
    row.degree = degree;
    const auto t0 = std::chrono::steady_clock::now();
    auto run_sense = [&](ConicProgram::Sense sense, std::optional<double>& bound,
                         std::string& status, std::string& cert_verdict) {
      try {
        const Relaxation rel = assemble(problem, degree, sense);
        const Solution sol = solve(rel.program, options.solver);
        status = status_name(sol.status);
        if (sol.status == Solution::Status::Optimal ||
            sol.status == Solution::Status::NearOptimal) {
          bound = sol.primal_objective;
          if (sol.status == Solution::Status::NearOptimal) solver_failure = true;
          if (options.certify) {
            const SosCertificate cert = extract(rel, sol, problem);
            CheckSettings cs;
            cs.samples = options.certify_samples;
            cs.seed = options.seed;
            const CertificateReport cr = check(cert, problem, cs);
            cert_verdict = cr.pass ? "pass" : "fail";
            if (!cr.pass) certificate_failure = true;
          }
        } else {
          solver_failure = true;
          if (sol.status == Solution::Status::Infeasible) {
            err << "degree " << degree
                << ": relaxation infeasible; check the domain and boundary "
                   "descriptions for inconsistency\n";
          }
        }
      } catch (const Error& e) {
        err << "degree " << degree << ": " << e.what() << "\n";
        status = "error";
        solver_failure = true;
      }
    };
    if (options.sense != SenseChoice::Max) {
      run_sense(ConicProgram::Sense::Min, row.lower, row.lower_status,
                row.lower_certificate);
    }
    if (options.sense != SenseChoice::Min) {
      run_sense(ConicProgram::Sense::Max, row.upper, row.upper_status,
                row.upper_certificate);
    }
    if (row.lower && row.upper) row.gap = *row.upper - *row.lower;
    row.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    char line[160];
    std::snprintf(line, sizeof(line), "%4d    %14.6f   %14.6f   %9.2e   %s/%s\n", degree,
                  row.lower.value_or(std::nan("")), row.upper.value_or(std::nan("")),
                  row.gap.value_or(std::nan("")),
                  row.lower_status.empty() ? "-" : row.lower_status.c_str(),
                  row.upper_status.empty() ? "-" : row.upper_status.c_str());
    out << line;
    report.rows.push_back(std::move(row));
  }

  if (!options.out_json.empty()) {
    std::ofstream f(options.out_json);
    if (!f) {
      err << "cannot write " << options.out_json << "\n";
      return kExitSolverFailure;
    }
    f << report_to_json(report);
  }
  if (!options.out_csv.empty()) {
    std::ofstream f(options.out_csv);
    if (!f) {
      err << "cannot write " << options.out_csv << "\n";
      return kExitSolverFailure;
    }
    f << report_to_csv(report);
  }
  if (report_out) *report_out = report;
  if (certificate_failure) return kExitCertificateFailure;
  return solver_failure ? kExitSolverFailure : kExitOk;
}

int cmd_mc(const McOptions& options, std::ostream& out, std::ostream& err,
           McEstimate* estimate_out) {
  ExitProblem problem;
  if (!load_problem(options.problem_path, options.add_ball, err, problem)) {
    return kExitParseError;
  }
  try {
    const McEstimate est = simulate(problem, options.settings);
    out << "paths          " << est.paths << "\n"
        << "exited         " << est.exited << "\n"
        << "censored       " << est.censored_fraction << "\n"
        << "mean g(exit)   " << std::setprecision(10) << est.mean << "\n"
        << "std error      " << est.std_error << "\n"
        << "ci95           [" << est.ci95_low << ", " << est.ci95_high << "]\n"
        << "mean exit time " << est.mean_exit_time << " (se " << est.exit_time_std_error
        << ")\n";
    if (estimate_out) *estimate_out = est;
    return kExitOk;
  } catch (const Error& e) {
    err << "simulation error: " << e.what() << "\n";
    return kExitSolverFailure;
  }
}

int cmd_certify(const CertifyOptions& options, std::ostream& out, std::ostream& err,
                CertificateReport* report_out) {
  if (options.sense == SenseChoice::Both) {
    err << "certify needs --sense min or --sense max\n";
    return kExitParseError;
  }
  ExitProblem problem;
  if (!load_problem(options.problem_path, options.add_ball, err, problem)) {
    return kExitParseError;
  }
  try {
    const auto sense = options.sense == SenseChoice::Min ? ConicProgram::Sense::Min
                                                         : ConicProgram::Sense::Max;
    const Relaxation rel = assemble(problem, options.degree, sense);
    const Solution sol = solve(rel.program, options.solver);
    if (sol.status != Solution::Status::Optimal &&
        sol.status != Solution::Status::NearOptimal) {
      err << "solve failed with status " << status_name(sol.status) << "\n";
      return kExitSolverFailure;
    }
    const SosCertificate cert = extract(rel, sol, problem);
    const CertificateReport report = check(cert, problem, options.check);
    out << "sense            " << (sense == ConicProgram::Sense::Min ? "min" : "max")
        << "\norder            " << options.degree << "\nbound            "
        << std::setprecision(10) << cert.bound << "\nprimal bound     "
        << sol.primal_objective << "\n"
        << "gram eigenvalue  " << report.min_gram_eigenvalue << "\n"
        << "identity resid   " << report.max_identity_residual << "\n"
        << "interior worst   " << report.worst_interior_violation << " ("
        << report.interior_samples << " samples)\n"
        << "boundary worst   " << report.worst_boundary_violation << " ("
        << report.boundary_samples << " samples)\n"
        << "verdict          " << (report.pass ? "pass" : "fail") << "\n";
    if (!options.out_json.empty()) {
      std::ofstream f(options.out_json);
      if (!f) {
        err << "cannot write " << options.out_json << "\n";
        return kExitSolverFailure;
      }
      write_certificate_json(cert, f);
    }
    if (report_out) *report_out = report;
    return report.pass ? kExitOk : kExitCertificateFailure;
  } catch (const Error& e) {
    err << "certify error: " << e.what() << "\n";
    return kExitSolverFailure;
  }
}

int cmd_info(const InfoOptions& options, std::ostream& out, std::ostream& err) {
  ExitProblem problem;
  if (!load_problem(options.problem_path, options.add_ball, err, problem)) {
    return kExitParseError;
  }
  try {
    const InstanceStatistics stats = instance_statistics(problem, options.degree);
    out << "relaxation order     " << stats.order << "\n";
    out << "degree gain (s)      " << stats.degrees.degree_gain << "\n";
    out << "occupation moments   up to degree " << stats.degrees.occupation_degree << " ("
        << stats.variables_per_measure[0] << " variables)\n";
    for (std::size_t i = 1; i < stats.variables_per_measure.size(); ++i) {
      out << "exit measure " << i - 1 << "       up to degree " << stats.degrees.exit_degree
          << " (" << stats.variables_per_measure[i] << " variables)\n";
    }
    out << "total moments        " << stats.total_variables
        << "  (all truncated moments of every measure; counting conventions "
           "differ between tools)\n";
    out << "equality rows        " << stats.dynkin_row_count << "\n";
    out << "psd blocks:\n";
    for (const auto& [label, size] : stats.block_sizes) {
      out << "  " << size << "x" << size << "  " << label << "\n";
    }
    return kExitOk;
  } catch (const Error& e) {
    err << "info error: " << e.what() << "\n";
    return kExitParseError;
  }
}

int cmd_export(const ExportOptions& options, std::ostream& out, std::ostream& err) {
  if (options.sense == SenseChoice::Both) {
    err << "export needs --sense min or --sense max\n";
    return kExitParseError;
  }
  ExitProblem problem;
  if (!load_problem(options.problem_path, options.add_ball, err, problem)) {
    return kExitParseError;
  }
  try {
    const auto sense = options.sense == SenseChoice::Min ? ConicProgram::Sense::Min
                                                         : ConicProgram::Sense::Max;
    const Relaxation rel = assemble(problem, options.degree, sense);
    write_sdpa_file(rel.program, options.output_path);
    out << "wrote " << options.output_path << " (" << rel.program.num_variables
        << " variables, " << rel.program.blocks.size() << " psd blocks, "
        << rel.program.equalities.size() << " equality rows)\n";
    return kExitOk;
  } catch (const Error& e) {
    err << "export error: " << e.what() << "\n";
    return kExitSolverFailure;
  }
}

void apply_thread_cap_from_env() {
  const char* cap = std::getenv("SOSEXIT_THREADS");
  if (!cap) return;
  const int threads = std::atoi(cap);
  if (threads >= 1) omp_set_num_threads(threads);
}

}  // namespace sosexit
