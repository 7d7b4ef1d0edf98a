#include "sosexit/mc.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "sosexit/common.hpp"

namespace sosexit {

namespace {

// Flattened polynomial for the stepping hot loop: contiguous coefficient and
// exponent storage, evaluated against a per-point power table.
struct FlatPoly {
  int dimension = 0;
  std::vector<double> coeffs;
  std::vector<int> exponents;  // term-major, dimension entries per term

  static FlatPoly from(const Polynomial& p) {
    FlatPoly f;
    f.dimension = p.dimension();
    for (const auto& [alpha, coeff] : p.terms()) {
      f.coeffs.push_back(coeff);
      f.exponents.insert(f.exponents.end(), alpha.begin(), alpha.end());
    }
    return f;
  }

  double evaluate(const double* x) const {
    double sum = 0.0;
    const int* e = exponents.data();
    for (double c : coeffs) {
      double term = c;
      for (int i = 0; i < dimension; ++i, ++e) {
        for (int k = 0; k < *e; ++k) term *= x[i];
      }
      sum += term;
    }
    return sum;
  }
};

struct CompiledProblem {
  int n = 0;
  int m = 0;
  std::vector<FlatPoly> drift;                 // n
  std::vector<FlatPoly> diffusion;             // n*m row-major
  std::vector<FlatPoly> interior;              // interior inequalities
  FlatPoly functional;
  std::vector<double> start;

  explicit CompiledProblem(const ExitProblem& problem) {
    n = problem.sde.state_dim;
    m = problem.sde.noise_dim;
    for (const auto& p : problem.sde.drift) drift.push_back(FlatPoly::from(p));
    for (const auto& row : problem.sde.diffusion) {
      for (const auto& p : row) diffusion.push_back(FlatPoly::from(p));
    }
    for (const auto& p : problem.domain.interior.inequalities) {
      interior.push_back(FlatPoly::from(p));
    }
    functional = FlatPoly::from(problem.functional);
    if (!problem.initial.is_dirac()) {
      throw Error("the simulator supports point-mass initial laws only");
    }
    start = problem.initial.point();
  }

  double min_interior(const double* x) const {
    double worst = std::numeric_limits<double>::infinity();
    for (const auto& p : interior) worst = std::min(worst, p.evaluate(x));
    return worst;
  }
};

struct PathOutcome {
  bool exited = false;
  double exit_time = 0.0;
  std::vector<double> exit_point;
};

// Runs one path; per_step(x, weight) sees the pre-step state with its time
// weight (the final partial step gets the refined fraction of h).
template <typename PerStep>
PathOutcome run_path(const CompiledProblem& cp, const McSettings& settings,
                     std::uint64_t path_index, PerStep&& per_step) {
  std::mt19937_64 rng(splitmix64(settings.seed +
                                 0x9E3779B97F4A7C15ULL * (path_index + 1)));
  std::normal_distribution<double> normal(0.0, 1.0);
  const int n = cp.n;
  const int m = cp.m;
  const double h = settings.step;
  const double sqrt_h = std::sqrt(h);

  std::vector<double> x = cp.start;
  std::vector<double> xnew(n), drift_val(n), noise(m), probe(n);

  PathOutcome out;
  const long max_steps = static_cast<long>(settings.horizon / h);
  for (long step = 0; step < max_steps; ++step) {
    for (int k = 0; k < m; ++k) noise[k] = normal(rng);
    for (int i = 0; i < n; ++i) drift_val[i] = cp.drift[i].evaluate(x.data());
    for (int i = 0; i < n; ++i) {
      double diff = 0.0;
      const FlatPoly* row = &cp.diffusion[static_cast<std::size_t>(i) * m];
      for (int k = 0; k < m; ++k) diff += row[k].evaluate(x.data()) * noise[k];
      xnew[i] = x[i] + drift_val[i] * h + sqrt_h * diff;
    }
    for (int i = 0; i < n; ++i) {
      if (!std::isfinite(xnew[i])) {
        throw Error("path " + std::to_string(path_index) + " diverged at t=" +
                    std::to_string(step * h) + " (non-finite state)");
      }
    }
    if (cp.min_interior(xnew.data()) < 0.0) {
      double theta = 1.0;
      if (settings.bisection) {
        double lo = 0.0, hi = 1.0;
        for (int b = 0; b < 30; ++b) {
          const double mid = 0.5 * (lo + hi);
          for (int i = 0; i < n; ++i) probe[i] = x[i] + mid * (xnew[i] - x[i]);
          (cp.min_interior(probe.data()) < 0.0 ? hi : lo) = mid;
        }
        theta = 0.5 * (lo + hi);
        for (int i = 0; i < n; ++i) xnew[i] = x[i] + theta * (xnew[i] - x[i]);
      }
      per_step(x.data(), theta * h);
      out.exited = true;
      out.exit_time = step * h + theta * h;
      out.exit_point = xnew;
      return out;
    }
    per_step(x.data(), h);
    x.swap(xnew);
  }
  return out;  // censored
}

constexpr long kChunk = 2048;

struct KahanSum {
  double sum = 0.0;
  double carry = 0.0;
  void add(double value) {
    const double y = value - carry;
    const double t = sum + y;
    carry = (t - sum) - y;
    sum = t;
  }
};

McEstimate finalize(const std::vector<double>& g_values,
                    const std::vector<double>& t_values, long paths, long censored,
                    bool compensated) {
  McEstimate est;
  est.paths = paths;
  est.exited = paths - censored;
  est.censored_fraction = static_cast<double>(censored) / static_cast<double>(paths);
  if (est.exited == 0) {
    throw Error("horizon too small: every path was censored before exit");
  }
  const long ne = est.exited;
  auto stats = [&](const std::vector<double>& v, double& mean, double& se) {
    if (compensated) {
      KahanSum s1, s2;
      for (double value : v) {
        s1.add(value);
        s2.add(value * value);
      }
      mean = s1.sum / ne;
      const double var = ne > 1 ? std::max(0.0, (s2.sum - ne * mean * mean) / (ne - 1)) : 0.0;
      se = std::sqrt(var / ne);
    } else {
      double s1 = 0.0, s2 = 0.0;
      for (double value : v) {
        s1 += value;
        s2 += value * value;
      }
      mean = s1 / ne;
      const double var = ne > 1 ? std::max(0.0, (s2 - ne * mean * mean) / (ne - 1)) : 0.0;
      se = std::sqrt(var / ne);
    }
  };
  stats(g_values, est.mean, est.std_error);
  stats(t_values, est.mean_exit_time, est.exit_time_std_error);
  est.ci95_low = est.mean - 1.959963984540054 * est.std_error;
  est.ci95_high = est.mean + 1.959963984540054 * est.std_error;
  return est;
}

}  // namespace

McEstimate simulate(const ExitProblem& problem, const McSettings& settings) {
  if (settings.step <= 0.0 || settings.paths < 1 || settings.horizon <= 0.0) {
    throw Error("bad simulation settings");
  }
  const CompiledProblem cp(problem);
  const long paths = settings.paths;

  std::vector<double> g_values;
  std::vector<double> t_values;
  g_values.reserve(paths);
  t_values.reserve(paths);
  long censored = 0;

  std::vector<double> chunk_g(kChunk), chunk_t(kChunk);
  std::vector<char> chunk_exit(kChunk);
  std::string failure;

  for (long base = 0; base < paths; base += kChunk) {
    const long count = std::min(kChunk, paths - base);
    // Paths are independent and land in per-path slots; the reduction below
    // runs in path order, so thread count cannot change the estimates.
#pragma omp parallel for schedule(dynamic, 64)
    for (long i = 0; i < count; ++i) {
      try {
        const PathOutcome out =
            run_path(cp, settings, static_cast<std::uint64_t>(base + i),
                     [](const double*, double) {});
        chunk_exit[i] = out.exited ? 1 : 0;
        if (out.exited) {
          chunk_g[i] = cp.functional.evaluate(out.exit_point.data());
          chunk_t[i] = out.exit_time;
        }
      } catch (const Error& e) {
#pragma omp critical
        if (failure.empty()) failure = e.what();
        chunk_exit[i] = 0;
      }
    }
    if (!failure.empty()) throw Error(failure);
    for (long i = 0; i < count; ++i) {
      if (chunk_exit[i]) {
        g_values.push_back(chunk_g[i]);
        t_values.push_back(chunk_t[i]);
      } else {
        ++censored;
      }
    }
  }
  return finalize(g_values, t_values, paths, censored, /*compensated=*/true);
}

McEstimate simulate_reference(const ExitProblem& problem, const McSettings& settings) {
  if (settings.step <= 0.0 || settings.paths < 1 || settings.horizon <= 0.0) {
    throw Error("bad simulation settings");
  }
  const CompiledProblem cp(problem);
  std::vector<double> g_values, t_values;
  long censored = 0;
  for (long i = 0; i < settings.paths; ++i) {
    const PathOutcome out =
        run_path(cp, settings, static_cast<std::uint64_t>(i), [](const double*, double) {});
    if (out.exited) {
      g_values.push_back(cp.functional.evaluate(out.exit_point.data()));
      t_values.push_back(out.exit_time);
    } else {
      ++censored;
    }
  }
  return finalize(g_values, t_values, settings.paths, censored, /*compensated=*/false);
}

namespace {

// Shared machinery for per-path accumulators over a monomial family:
// values[i] = sum over steps of q_i(x) * dt plus a terminal term.
struct SeriesStats {
  std::vector<KahanSum> sum, sumsq;
  long count = 0;
  explicit SeriesStats(std::size_t size) : sum(size), sumsq(size) {}
  void add(const std::vector<double>& values) {
    for (std::size_t i = 0; i < values.size(); ++i) {
      sum[i].add(values[i]);
      sumsq[i].add(values[i] * values[i]);
    }
    ++count;
  }
  std::vector<MomentEstimate> finish() const {
    std::vector<MomentEstimate> out(sum.size());
    for (std::size_t i = 0; i < sum.size(); ++i) {
      const double mean = sum[i].sum / count;
      const double var =
          count > 1 ? std::max(0.0, (sumsq[i].sum - count * mean * mean) / (count - 1)) : 0.0;
      out[i].value = mean;
      out[i].std_error = std::sqrt(var / count);
    }
    return out;
  }
};

}  // namespace

EmpiricalMoments empirical_moments(const ExitProblem& problem, const McSettings& settings,
                                   int degree) {
  if (degree < 0) throw Error("moment degree must be nonnegative");
  const CompiledProblem cp(problem);
  const MonomialBasis basis(cp.n, degree);
  const int nmono = basis.size();
  std::vector<FlatPoly> monomials;
  monomials.reserve(nmono);
  for (int i = 0; i < nmono; ++i) {
    monomials.push_back(FlatPoly::from(Polynomial::monomial(basis[i])));
  }

  const long paths = settings.paths;
  SeriesStats occupation(nmono);
  SeriesStats exit_stats(nmono);
  long censored = 0;

  std::vector<std::vector<double>> chunk_occ(kChunk), chunk_exit_row(kChunk);
  std::vector<char> chunk_exited(kChunk);
  std::string failure;

  for (long base = 0; base < paths; base += kChunk) {
    const long count = std::min(kChunk, paths - base);
#pragma omp parallel for schedule(dynamic, 16)
    for (long i = 0; i < count; ++i) {
      std::vector<double> occ(nmono, 0.0);
      try {
        const PathOutcome out =
            run_path(cp, settings, static_cast<std::uint64_t>(base + i),
                     [&](const double* x, double dt) {
                       for (int q = 0; q < nmono; ++q) {
                         occ[q] += monomials[q].evaluate(x) * dt;
                       }
                     });
        chunk_exited[i] = out.exited ? 1 : 0;
        chunk_occ[i] = std::move(occ);
        if (out.exited) {
          std::vector<double> row(nmono);
          for (int q = 0; q < nmono; ++q) {
            row[q] = monomials[q].evaluate(out.exit_point.data());
          }
          chunk_exit_row[i] = std::move(row);
        }
      } catch (const Error& e) {
#pragma omp critical
        if (failure.empty()) failure = e.what();
        chunk_exited[i] = 0;
      }
    }
    if (!failure.empty()) throw Error(failure);
    for (long i = 0; i < count; ++i) {
      if (!chunk_exited[i]) {
        ++censored;
        continue;
      }
      occupation.add(chunk_occ[i]);
      exit_stats.add(chunk_exit_row[i]);
    }
  }
  if (occupation.count == 0) {
    throw Error("horizon too small: every path was censored before exit");
  }

  EmpiricalMoments result;
  result.basis = basis;
  result.occupation = occupation.finish();
  result.exit = exit_stats.finish();
  result.paths = paths;
  result.censored_fraction = static_cast<double>(censored) / static_cast<double>(paths);
  return result;
}

std::vector<MomentEstimate> dynkin_residuals(const ExitProblem& problem,
                                             const McSettings& settings, int order) {
  const CompiledProblem cp(problem);
  const MonomialBasis basis(cp.n, order);
  const int nmono = basis.size();
  std::vector<FlatPoly> generated;  // L z^a
  std::vector<FlatPoly> monomials;
  std::vector<double> targets;      // <z^a, initial law>
  for (int i = 0; i < nmono; ++i) {
    generated.push_back(
        FlatPoly::from(apply_generator(problem.sde, Polynomial::monomial(basis[i]))));
    monomials.push_back(FlatPoly::from(Polynomial::monomial(basis[i])));
    targets.push_back(problem.initial.moment(basis[i]));
  }

  const long paths = settings.paths;
  SeriesStats stats(nmono);
  std::vector<std::vector<double>> chunk_rows(kChunk);
  std::vector<char> chunk_exited(kChunk);
  std::string failure;

  for (long base = 0; base < paths; base += kChunk) {
    const long count = std::min(kChunk, paths - base);
#pragma omp parallel for schedule(dynamic, 16)
    for (long i = 0; i < count; ++i) {
      std::vector<double> acc(nmono, 0.0);
      try {
        const PathOutcome out =
            run_path(cp, settings, static_cast<std::uint64_t>(base + i),
                     [&](const double* x, double dt) {
                       for (int q = 0; q < nmono; ++q) {
                         acc[q] += generated[q].evaluate(x) * dt;
                       }
                     });
        chunk_exited[i] = out.exited ? 1 : 0;
        if (out.exited) {
          for (int q = 0; q < nmono; ++q) {
            acc[q] += monomials[q].evaluate(out.exit_point.data()) - targets[q];
          }
          chunk_rows[i] = std::move(acc);
        }
      } catch (const Error& e) {
#pragma omp critical
        if (failure.empty()) failure = e.what();
        chunk_exited[i] = 0;
      }
    }
    if (!failure.empty()) throw Error(failure);
    for (long i = 0; i < count; ++i) {
      if (chunk_exited[i]) stats.add(chunk_rows[i]);
    }
  }
  if (stats.count == 0) {
    throw Error("horizon too small: every path was censored before exit");
  }
  return stats.finish();
}

}  // namespace sosexit
