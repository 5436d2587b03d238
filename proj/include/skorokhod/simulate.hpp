#pragma once

#include "skorokhod/solver.hpp"

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace skorokhod {

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

/// Deterministic standard normals: 64-bit Mersenne Twister uniforms mapped to
/// (0, 1] with 53-bit resolution, passed through the cosine branch of the
/// Box-Muller transform. Two uniforms per normal, no cached second value, so
/// the draw sequence depends only on the seed.
class SeededNormals {
 public:
  explicit SeededNormals(std::uint64_t seed) : gen_(seed) {}

  double next() {
    const double u1 = to_unit(gen_());
    const double u2 = to_unit(gen_());
    constexpr double two_pi = 6.283185307179586476925286766559;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
  }

 private:
  static double to_unit(std::uint64_t x) {
    return static_cast<double>((x >> 11) + 1) * 0x1.0p-53;  // (0, 1]
  }
  std::mt19937_64 gen_;
};

}  // namespace detail

/// Parameters of a sampled Brownian driving path, started at x0 inside the
/// orthant. Identical specs produce identical paths.
template <typename Scalar>
struct BrownianSpec {
  Index d;
  Vector<Scalar> x0;
  Scalar horizon;
  Index n_steps;
  std::uint64_t seed;
};

template <typename Scalar>
PiecewisePath<Scalar> brownian_path(const BrownianSpec<Scalar>& spec) {
  if (spec.d < 1) throw DomainError("dimension must be positive");
  if (spec.x0.size() != spec.d) throw DimensionError("x0 length must equal d");
  if ((spec.x0.array() < Scalar(0)).any())
    throw DomainError("starting point must lie in the orthant");
  if (spec.n_steps < 1) throw DomainError("need at least one step");
  if (!(spec.horizon > Scalar(0))) throw DomainError("horizon must be positive");

  detail::SeededNormals normals(spec.seed);
  const Scalar dt = spec.horizon / Scalar(spec.n_steps);
  const Scalar sd = std::sqrt(dt);

  Vector<Scalar> times(spec.n_steps + 1);
  Matrix<Scalar> values(spec.d, spec.n_steps + 1);
  values.col(0) = spec.x0;
  for (Index k = 0; k <= spec.n_steps; ++k)
    times[k] = spec.horizon * Scalar(k) / Scalar(spec.n_steps);
  for (Index k = 0; k < spec.n_steps; ++k) {
    for (Index i = 0; i < spec.d; ++i)
      values(i, k + 1) = values(i, k) + sd * static_cast<Scalar>(normals.next());
  }
  return PiecewisePath<Scalar>(std::move(times), std::move(values));
}

template <typename Scalar>
struct RestartRecord {
  Index restart;
  std::uint64_t start_seed;  // 0 for the zero-path restart
  bool converged;
  Scalar residual;
  std::int64_t iterations;
  Vector<Scalar> complementarity_defect;
  Vector<Scalar> g_final;  // value of g at the horizon, when converged
};

enum class ExperimentVerdict { Pass, Fail, UnsupportedRegime };

inline const char* to_string(ExperimentVerdict v) {
  switch (v) {
    case ExperimentVerdict::Pass: return "pass";
    case ExperimentVerdict::Fail: return "fail";
    case ExperimentVerdict::UnsupportedRegime: return "unsupported-regime";
  }
  return "unknown";
}

/// Restart-invariance report: one Brownian driver, several solver runs from
/// distinct initial iterates, and the largest pairwise sup-distance between
/// the resulting constrained paths. Agreement is a necessary numerical shadow
/// of pathwise uniqueness, not a proof of it. A pass verdict is only issued
/// when every restart converged, the distances stay below the tolerance, and
/// the spectral radius is within the supported range.
template <typename Scalar>
struct ExperimentReport {
  std::uint64_t seed;
  Scalar rho;
  std::vector<RestartRecord<Scalar>> runs;
  Scalar max_pairwise_g_distance;
  Scalar tolerance;
  ExperimentVerdict verdict;
};

template <typename Scalar>
ExperimentReport<Scalar> uniqueness_experiment(const ReflectionMatrix<Scalar>& M,
                                               const BrownianSpec<Scalar>& spec,
                                               Index n_restarts,
                                               const SolveOptions& opts = {},
                                               bool allow_supercritical = false,
                                               Scalar tolerance = Scalar(1e-5)) {
  if (n_restarts < 1) throw DomainError("need at least one restart");
  if (M.d <= 20 && !is_completely_S(M))
    throw RegimeError("reflection matrix is not completely-S");

  const PiecewisePath<Scalar> f = brownian_path(spec);
  SkorokhodProblem<Scalar> prob(M, f, allow_supercritical);

  ExperimentReport<Scalar> report;
  report.seed = spec.seed;
  report.rho = prob.spectral.rho;
  report.tolerance = tolerance;

  std::vector<PiecewisePath<Scalar>> g_paths;
  for (Index r = 0; r < n_restarts; ++r) {
    RestartRecord<Scalar> record;
    record.restart = r;
    record.start_seed = 0;

    std::optional<MonotonePath<Scalar>> start;
    if (r > 0) {
      record.start_seed = detail::splitmix64(spec.seed + static_cast<std::uint64_t>(r));
      detail::SeededNormals normals(record.start_seed);
      const Scalar sd = std::sqrt(spec.horizon / Scalar(spec.n_steps));
      Matrix<Scalar> values = Matrix<Scalar>::Zero(M.d, f.breakpoints());
      for (Index k = 1; k < f.breakpoints(); ++k)
        for (Index i = 0; i < M.d; ++i)
          values(i, k) = values(i, k - 1) +
                         sd * std::abs(static_cast<Scalar>(normals.next()));
      start = MonotonePath<Scalar>(PiecewisePath<Scalar>(f.times(), std::move(values)));
    }

    try {
      SkorokhodSolution<Scalar> sol = solve(prob, opts, start);
      record.converged = true;
      record.residual = sol.residual;
      record.iterations = sol.iterations;
      record.complementarity_defect = sol.complementarity_defect;
      record.g_final = sol.g.at(sol.g.breakpoints() - 1);
      g_paths.push_back(std::move(sol.g));
    } catch (const ConvergenceError& err) {
      record.converged = false;
      record.residual = static_cast<Scalar>(err.residual);
      record.iterations = err.iterations;
    }
    report.runs.push_back(std::move(record));
  }

  report.max_pairwise_g_distance = Scalar(0);
  for (std::size_t a = 0; a < g_paths.size(); ++a)
    for (std::size_t b = a + 1; b < g_paths.size(); ++b)
      report.max_pairwise_g_distance =
          std::max(report.max_pairwise_g_distance, sup_distance(g_paths[a], g_paths[b]));

  const bool all_converged =
      g_paths.size() == static_cast<std::size_t>(n_restarts);
  if (report.rho > Scalar(1) + Scalar(1e-9))
    report.verdict = ExperimentVerdict::UnsupportedRegime;
  else if (all_converged && report.max_pairwise_g_distance < tolerance)
    report.verdict = ExperimentVerdict::Pass;
  else
    report.verdict = ExperimentVerdict::Fail;
  return report;
}

using BrownianSpecXd = BrownianSpec<double>;
using ExperimentReportXd = ExperimentReport<double>;

}  // namespace skorokhod
