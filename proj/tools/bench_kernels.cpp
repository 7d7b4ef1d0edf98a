// Timing harness for the two data-parallel kernels, comparing the serial
// reference implementations against the OpenMP versions on the bundled
// workloads. Run with SOSEXIT_THREADS or OMP_NUM_THREADS to vary the core
// count.

#include <omp.h>

#include <chrono>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "sosexit/cli.hpp"
#include "sosexit/mc.hpp"
#include "sosexit/problem_io.hpp"
#include "sosexit/relaxation.hpp"
#include "sosexit/solver.hpp"

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void bench_mc(const std::string& path, long paths, double step) {
  const sosexit::ExitProblem problem = sosexit::parse_problem_file(path);
  sosexit::McSettings settings;
  settings.paths = paths;
  settings.step = step;
  settings.seed = 7;

  auto t0 = std::chrono::steady_clock::now();
  const sosexit::McEstimate serial = sosexit::simulate_reference(problem, settings);
  const double t_serial = seconds_since(t0);

  t0 = std::chrono::steady_clock::now();
  const sosexit::McEstimate parallel = sosexit::simulate(problem, settings);
  const double t_parallel = seconds_since(t0);

  std::printf("mc %-28s paths=%-7ld serial %8.3fs  omp %8.3fs  speedup %5.2fx  |mean diff| %.2e\n",
              path.c_str(), paths, t_serial, t_parallel, t_serial / t_parallel,
              std::abs(serial.mean - parallel.mean));
}

void bench_gram(const std::string& path, int order) {
  const sosexit::ExitProblem problem = sosexit::parse_problem_file(path);
  const sosexit::Relaxation rel =
      sosexit::assemble(problem, order, sosexit::ConicProgram::Sense::Min);

  // Random symmetric positive definite scaling points.
  std::mt19937_64 rng(11);
  std::normal_distribution<double> normal;
  std::vector<Eigen::MatrixXd> scalings;
  for (const auto& block : rel.program.blocks) {
    Eigen::MatrixXd m(block.size, block.size);
    for (int r = 0; r < block.size; ++r) {
      for (int c = 0; c < block.size; ++c) m(r, c) = normal(rng);
    }
    scalings.push_back(m * m.transpose() +
                       Eigen::MatrixXd::Identity(block.size, block.size));
  }

  const int repeats = 20;
  auto t0 = std::chrono::steady_clock::now();
  Eigen::MatrixXd h_serial;
  for (int i = 0; i < repeats; ++i) {
    h_serial = sosexit::kernels::scaled_gram_serial(rel.program, scalings);
  }
  const double t_serial = seconds_since(t0) / repeats;

  t0 = std::chrono::steady_clock::now();
  Eigen::MatrixXd h_parallel;
  for (int i = 0; i < repeats; ++i) {
    h_parallel = sosexit::kernels::scaled_gram_parallel(rel.program, scalings);
  }
  const double t_parallel = seconds_since(t0) / repeats;

  const double diff = (h_serial - h_parallel).cwiseAbs().maxCoeff();
  std::printf("gram %-22s r=%-2d n=%-4d  serial %8.4fs  omp %8.4fs  speedup %5.2fx  max diff %.2e\n",
              path.c_str(), order, rel.program.num_variables, t_serial, t_parallel,
              t_serial / t_parallel, diff);
}

}  // namespace

int main(int argc, char** argv) {
  sosexit::apply_thread_cap_from_env();
  std::printf("threads: %d\n", omp_get_max_threads());
  const std::string dir = argc > 1 ? argv[1] : "problems";

  bench_mc(dir + "/scalar.json", 20000, 1e-4);
  bench_mc(dir + "/ball_2d.json", 5000, 1e-4);
  bench_gram(dir + "/quartic_ball_2d.json", 8);
  bench_gram(dir + "/quartic_ball_3d.json", 8);
  return 0;
}
