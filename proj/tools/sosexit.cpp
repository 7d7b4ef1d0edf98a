#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "sosexit/cli.hpp"

namespace {

std::vector<int> parse_degree_list(const std::string& text) {
  std::vector<int> degrees;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) degrees.push_back(std::stoi(item));
  }
  if (degrees.empty()) throw CLI::ValidationError("--degrees", "empty degree list");
  return degrees;
}

}  // namespace

int main(int argc, char** argv) {
  sosexit::apply_thread_cap_from_env();

  CLI::App app{"bounds on exit-location functionals of polynomial diffusions"};
  app.require_subcommand(1);

  const std::map<std::string, sosexit::SenseChoice> sense_map{
      {"min", sosexit::SenseChoice::Min},
      {"max", sosexit::SenseChoice::Max},
      {"both", sosexit::SenseChoice::Both}};

  // solve
  sosexit::SolveOptions solve_opts;
  std::string degrees_text = "2,4,6,8,10";
  double solve_tol = 1e-8;
  int verbosity = 0;
  auto* solve_cmd = app.add_subcommand("solve", "compute lower/upper bounds across degrees");
  solve_cmd->add_option("file", solve_opts.problem_path, "problem JSON file")->required();
  solve_cmd->add_option("--degrees", degrees_text, "comma-separated relaxation degrees");
  solve_cmd->add_option("--sense", solve_opts.sense, "min, max, or both")
      ->transform(CLI::CheckedTransformer(sense_map, CLI::ignore_case));
  solve_cmd->add_option("--tol", solve_tol, "solver feasibility and gap tolerance");
  solve_cmd->add_option("--max-iterations", solve_opts.solver.max_iterations);
  solve_cmd->add_flag("--certify", solve_opts.certify, "also check dual certificates");
  solve_cmd->add_option("--samples", solve_opts.certify_samples, "certificate sample count");
  solve_cmd->add_option("--seed", solve_opts.seed, "seed for certificate sampling");
  solve_cmd->add_option("--add-ball", solve_opts.add_ball,
                        "append the ball constraint R^2 - sum z_k^2 >= 0");
  solve_cmd->add_option("--out", solve_opts.out_json, "write a JSON report");
  solve_cmd->add_option("--csv", solve_opts.out_csv, "write a CSV table");
  solve_cmd->add_flag("-v,--verbose", verbosity, "solver iteration log");

  // mc
  sosexit::McOptions mc_opts;
  auto* mc_cmd = app.add_subcommand("mc", "Monte Carlo estimate of the exit functional");
  mc_cmd->add_option("file", mc_opts.problem_path, "problem JSON file")->required();
  mc_cmd->add_option("--paths", mc_opts.settings.paths, "number of paths");
  mc_cmd->add_option("--step", mc_opts.settings.step, "Euler-Maruyama step size");
  mc_cmd->add_option("--seed", mc_opts.settings.seed, "master seed");
  mc_cmd->add_option("--tmax", mc_opts.settings.horizon, "censoring horizon");
  bool no_bisection = false;
  mc_cmd->add_flag("--no-bisection", no_bisection, "skip exit-point refinement");
  mc_cmd->add_option("--add-ball", mc_opts.add_ball);

  // certify
  sosexit::CertifyOptions certify_opts;
  double certify_tol = 1e-8;
  auto* certify_cmd =
      app.add_subcommand("certify", "extract and verify a dual certificate");
  certify_cmd->add_option("file", certify_opts.problem_path, "problem JSON file")->required();
  certify_cmd->add_option("-r,--degree", certify_opts.degree, "relaxation degree");
  certify_cmd->add_option("--sense", certify_opts.sense, "min or max")
      ->transform(CLI::CheckedTransformer(sense_map, CLI::ignore_case));
  certify_cmd->add_option("--samples", certify_opts.check.samples);
  certify_cmd->add_option("--seed", certify_opts.check.seed);
  certify_cmd->add_option("--tol", certify_tol, "solver tolerance");
  certify_cmd->add_option("--gram-tol", certify_opts.check.gram_tol);
  certify_cmd->add_option("--identity-tol", certify_opts.check.identity_tol);
  certify_cmd->add_option("--sample-tol", certify_opts.check.sample_tol);
  certify_cmd->add_option("--add-ball", certify_opts.add_ball);
  certify_cmd->add_option("--out", certify_opts.out_json, "write the certificate as JSON");

  // info
  sosexit::InfoOptions info_opts;
  auto* info_cmd = app.add_subcommand("info", "relaxation size statistics");
  info_cmd->add_option("file", info_opts.problem_path, "problem JSON file")->required();
  info_cmd->add_option("-r,--degree", info_opts.degree, "relaxation degree");
  info_cmd->add_option("--add-ball", info_opts.add_ball);

  // export
  sosexit::ExportOptions export_opts;
  auto* export_cmd = app.add_subcommand("export", "write the relaxation in sparse SDPA format");
  export_cmd->add_option("file", export_opts.problem_path, "problem JSON file")->required();
  export_cmd->add_option("output", export_opts.output_path, "output .dat-s path")->required();
  export_cmd->add_option("-r,--degree", export_opts.degree, "relaxation degree");
  export_cmd->add_option("--sense", export_opts.sense, "min or max")
      ->transform(CLI::CheckedTransformer(sense_map, CLI::ignore_case));
  export_cmd->add_option("--add-ball", export_opts.add_ball);

  CLI11_PARSE(app, argc, argv);

  try {
    if (solve_cmd->parsed()) {
      solve_opts.degrees = parse_degree_list(degrees_text);
      solve_opts.solver.feasibility_tol = solve_tol;
      solve_opts.solver.gap_tol = solve_tol;
      solve_opts.solver.verbosity = verbosity;
      return sosexit::cmd_solve(solve_opts, std::cout, std::cerr);
    }
    if (mc_cmd->parsed()) {
      mc_opts.settings.bisection = !no_bisection;
      return sosexit::cmd_mc(mc_opts, std::cout, std::cerr);
    }
    if (certify_cmd->parsed()) {
      certify_opts.solver.feasibility_tol = certify_tol;
      certify_opts.solver.gap_tol = certify_tol;
      return sosexit::cmd_certify(certify_opts, std::cout, std::cerr);
    }
    if (info_cmd->parsed()) {
      return sosexit::cmd_info(info_opts, std::cout, std::cerr);
    }
    if (export_cmd->parsed()) {
      return sosexit::cmd_export(export_opts, std::cout, std::cerr);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return sosexit::kExitParseError;
  }
  return sosexit::kExitParseError;
}
