#pragma once

#include "skorokhod/matrix_analysis.hpp"
#include "skorokhod/path.hpp"
#include "skorokhod/types.hpp"

#include <cstdint>
#include <optional>
#include <sstream>
#include <utility>

namespace skorokhod {

namespace detail {

/// Values of sup_{s<=t} (Q h(s) - f(s))^+ on the grid. Running maxima of
/// piecewise-linear functions are attained at breakpoints, so this is exact.
template <typename Scalar>
Matrix<Scalar> push_envelope_values(const Matrix<Scalar>& Q, const Matrix<Scalar>& f_values,
                                    const Matrix<Scalar>& h_values) {
  Matrix<Scalar> out(f_values.rows(), f_values.cols());
  Matrix<Scalar> drive = Q * h_values - f_values;
  Vector<Scalar> acc = drive.col(0);
  out.col(0) = acc.cwiseMax(Scalar(0));
  for (Index k = 1; k < drive.cols(); ++k) {
    acc = acc.cwiseMax(drive.col(k).eval());
    out.col(k) = acc.cwiseMax(Scalar(0));
  }
  return out;
}

template <typename Scalar>
Scalar weighted_sup_l1(const Matrix<Scalar>& values, const Vector<Scalar>& y) {
  Scalar best(0);
  for (Index k = 0; k < values.cols(); ++k)
    best = std::max(best, y.dot(values.col(k).cwiseAbs().eval()));
  return best;
}

}  // namespace detail

/// The pushing-envelope operator: for a candidate local-time path h, the
/// running supremum of (Q h - f)^+. Its fixed points are exactly the valid
/// local-time paths of the Skorokhod problem for driver f. Output components
/// are non-decreasing and start at (-f(0))^+ = 0 whenever f(0) lies in the
/// orthant.
template <typename Scalar>
MonotonePath<Scalar> pushing_envelope(const ReflectionMatrix<Scalar>& M,
                                      const PiecewisePath<Scalar>& f,
                                      const MonotonePath<Scalar>& h) {
  require_same_grid(f, h.path());
  if (f.dimension() != M.d) throw DimensionError("driver dimension does not match matrix");
  return MonotonePath<Scalar>(PiecewisePath<Scalar>(
      f.times(), detail::push_envelope_values(M.Q, f.values(), h.values())));
}

/// Half-averaged pushing envelope (h + envelope(h)) / 2. Averages of monotone
/// paths stay monotone exactly in floating point.
template <typename Scalar>
MonotonePath<Scalar> averaged_pushing_envelope(const ReflectionMatrix<Scalar>& M,
                                               const PiecewisePath<Scalar>& f,
                                               const MonotonePath<Scalar>& h) {
  MonotonePath<Scalar> pushed = pushing_envelope(M, f, h);
  return MonotonePath<Scalar>(PiecewisePath<Scalar>(
      f.times(), ((h.values() + pushed.values()) * Scalar(0.5)).eval()));
}

/// A driving path paired with its reflection matrix and spectral data.
/// Construction rejects drivers starting outside the orthant and, unless
/// allow_supercritical is set, spectral radius of |Q| beyond 1 + 1e-9 (the
/// fixed-point iteration is only guaranteed to converge up to radius 1).
template <typename Scalar>
struct SkorokhodProblem {
  ReflectionMatrix<Scalar> M;
  PiecewisePath<Scalar> f;
  SpectralData<Scalar> spectral;
  bool allow_supercritical;

  SkorokhodProblem(ReflectionMatrix<Scalar> matrix, PiecewisePath<Scalar> driver,
                   bool allow_supercritical_ = false)
      : M(std::move(matrix)),
        f(std::move(driver)),
        spectral(spectral_data(M)),
        allow_supercritical(allow_supercritical_) {
    if (f.dimension() != M.d)
      throw DimensionError("driver dimension does not match the reflection matrix");
    if ((f.at(0).array() < Scalar(0)).any())
      throw DomainError("driving path must start in the non-negative orthant");
    if (!allow_supercritical && spectral.rho > Scalar(1) + Scalar(1e-9))
      throw RegimeError("spectral radius of |Q| exceeds 1; convergence is unguaranteed "
                        "(set allow_supercritical to proceed anyway)");
  }
};

template <typename Scalar>
struct SkorokhodSolution {
  PiecewisePath<Scalar> g;
  MonotonePath<Scalar> m;
  Scalar residual;  // |envelope(m) - m|_* at termination
  std::int64_t iterations;
  Vector<Scalar> complementarity_defect;
  bool m_unique = true;
};

struct SolveOptions {
  double tol = 1e-9;
  std::int64_t max_iter = 200000;
  double eps_wall = 1e-6;
  /// Averaged is the half-relaxed scheme m <- (m + envelope(m))/2, convergent
  /// for spectral radius up to 1. Picard is plain m <- envelope(m), a
  /// contraction only below radius 1; kept as a cross-check.
  enum class Scheme { Averaged, Picard } scheme = Scheme::Averaged;
  /// Cascade solves communicating classes in topological order (the general
  /// construction); Direct iterates on the whole system as a cross-check.
  enum class Mode { Cascade, Direct } mode = Mode::Cascade;
};

/// Residuals and complementarity accounting for a candidate solution pair.
/// The defect for component j adds up every local-time increment spent while
/// g_j stays above eps_wall across the whole step; an exact solution has
/// defect zero. The verdict requires the Skorokhod equation to 1e-10, the
/// orthant constraint to -1e-10, exact monotonicity of m from 0, and each
/// defect within eps_wall times the total variation of m_j.
template <typename Scalar>
struct ValidationReport {
  Scalar equation_residual;
  Scalar min_g;
  bool monotone_ok;
  Vector<Scalar> complementarity_defect;
  Vector<Scalar> defect_bound;
  bool pass;
};

template <typename Scalar>
ValidationReport<Scalar> validate(const ReflectionMatrix<Scalar>& M,
                                  const PiecewisePath<Scalar>& f,
                                  const PiecewisePath<Scalar>& g,
                                  const PiecewisePath<Scalar>& m,
                                  Scalar eps_wall = Scalar(1e-6)) {
  require_same_grid(f, g);
  require_same_grid(f, m);
  if (f.dimension() != M.d) throw DimensionError("path dimension does not match matrix");

  ValidationReport<Scalar> report;
  report.equation_residual =
      (g.values() - f.values() - M.R * m.values()).cwiseAbs().maxCoeff();
  report.min_g = g.values().minCoeff();

  report.monotone_ok = m.at(0).isZero(Scalar(0));
  const Index n = f.breakpoints();
  for (Index k = 0; k + 1 < n && report.monotone_ok; ++k)
    if (((m.at(k + 1) - m.at(k)).array() < Scalar(0)).any()) report.monotone_ok = false;

  report.complementarity_defect = Vector<Scalar>::Zero(M.d);
  Vector<Scalar> total_variation = Vector<Scalar>::Zero(M.d);
  for (Index k = 0; k + 1 < n; ++k) {
    for (Index j = 0; j < M.d; ++j) {
      const Scalar dm = m.values()(j, k + 1) - m.values()(j, k);
      total_variation[j] += std::abs(dm);
      const Scalar wall_gap = std::min(g.values()(j, k), g.values()(j, k + 1));
      if (wall_gap > eps_wall) report.complementarity_defect[j] += std::abs(dm);
    }
  }
  report.defect_bound = eps_wall * total_variation;

  report.pass = report.equation_residual <= Scalar(1e-10) &&
                report.min_g >= Scalar(-1e-10) && report.monotone_ok &&
                (report.complementarity_defect.array() <= report.defect_bound.array()).all();
  return report;
}

namespace detail {

template <typename Scalar>
struct IterationOutcome {
  Matrix<Scalar> m_values;
  Scalar residual;
  std::int64_t iterations;
  bool converged;
};

/// Fixed-point iteration on raw grid values; no regime checks here.
/// Stopping: successive-iterate star-norm difference below tol, which for
/// the averaged scheme equals half the envelope residual, so the reported
/// residual ends below 2 tol.
template <typename Scalar>
IterationOutcome<Scalar> iterate_envelope(const Matrix<Scalar>& Q,
                                          const Matrix<Scalar>& f_values,
                                          const Vector<Scalar>& y,
                                          Matrix<Scalar> m_values,
                                          const SolveOptions& opts) {
  const bool averaged = opts.scheme == SolveOptions::Scheme::Averaged;
  const Scalar tol = static_cast<Scalar>(opts.tol);
  Scalar residual = std::numeric_limits<Scalar>::infinity();
  for (std::int64_t it = 1; it <= opts.max_iter; ++it) {
    Matrix<Scalar> pushed = push_envelope_values(Q, f_values, m_values);
    residual = weighted_sup_l1<Scalar>(pushed - m_values, y);
    const Scalar step = averaged ? residual / Scalar(2) : residual;
    if (averaged)
      m_values = (Scalar(0.5) * (m_values + pushed)).eval();
    else
      m_values = std::move(pushed);
    if (step < tol) {
      Matrix<Scalar> final_push = push_envelope_values(Q, f_values, m_values);
      residual = weighted_sup_l1<Scalar>(final_push - m_values, y);
      return {std::move(m_values), residual, it, true};
    }
  }
  return {std::move(m_values), residual, opts.max_iter, false};
}

template <typename Scalar>
Vector<Scalar> stopping_weights(const SpectralData<Scalar>& spectral, Index d) {
  if (spectral.y) return *spectral.y;
  return Vector<Scalar>::Constant(d, Scalar(1) / Scalar(d));
}

template <typename Scalar>
SkorokhodSolution<Scalar> assemble_solution(const SkorokhodProblem<Scalar>& prob,
                                            Matrix<Scalar> m_values, Scalar residual,
                                            std::int64_t iterations, double eps_wall) {
  MonotonePath<Scalar> m(PiecewisePath<Scalar>(prob.f.times(), std::move(m_values)));
  PiecewisePath<Scalar> g(prob.f.times(), prob.f.values() + prob.M.R * m.values());
  auto report = validate(prob.M, prob.f, g, m.path(), static_cast<Scalar>(eps_wall));
  return SkorokhodSolution<Scalar>{std::move(g), std::move(m), residual, iterations,
                                   std::move(report.complementarity_defect)};
}

}  // namespace detail

/// Fixed-point solve for Q = 0 or irreducible |Q|. Iterates the (averaged)
/// pushing envelope from the zero path, or from `start` when given, until the
/// successive star-norm difference drops below opts.tol.
template <typename Scalar>
SkorokhodSolution<Scalar> solve_irreducible(
    const SkorokhodProblem<Scalar>& prob, const SolveOptions& opts = {},
    const std::optional<MonotonePath<Scalar>>& start = std::nullopt) {
  if (!prob.M.absQ.isZero(Scalar(0)) && !prob.spectral.irreducible)
    throw RegimeError("|Q| is reducible and nonzero; use solve(), which cascades "
                      "over communicating classes");
  Matrix<Scalar> m0 = Matrix<Scalar>::Zero(prob.M.d, prob.f.breakpoints());
  if (start) {
    require_same_grid(prob.f, start->path());
    m0 = start->values();
  }
  auto outcome = detail::iterate_envelope<Scalar>(
      prob.M.Q, prob.f.values(), detail::stopping_weights(prob.spectral, prob.M.d),
      std::move(m0), opts);
  if (!outcome.converged)
    throw ConvergenceError("fixed-point iteration did not converge",
                           static_cast<double>(outcome.residual), outcome.iterations);
  return detail::assemble_solution(prob, std::move(outcome.m_values), outcome.residual,
                                   outcome.iterations, opts.eps_wall);
}

/// General solve. Requires R completely-S (checked up to dimension 20) and,
/// unless overridden, spectral radius of |Q| at most 1. The default cascade
/// decomposes the indices into communicating classes, solves source classes
/// first, and feeds each later class the original driver plus the R-weighted
/// local times of the classes already solved; Direct mode iterates on the
/// whole system instead.
template <typename Scalar>
SkorokhodSolution<Scalar> solve(const SkorokhodProblem<Scalar>& prob,
                                const SolveOptions& opts = {},
                                const std::optional<MonotonePath<Scalar>>& start = std::nullopt) {
  if (prob.M.d <= 20 && !is_completely_S(prob.M))
    throw RegimeError("reflection matrix is not completely-S; the Skorokhod problem "
                      "may have no solution");

  if (opts.mode == SolveOptions::Mode::Direct) {
    Matrix<Scalar> m0 = Matrix<Scalar>::Zero(prob.M.d, prob.f.breakpoints());
    if (start) {
      require_same_grid(prob.f, start->path());
      m0 = start->values();
    }
    auto outcome = detail::iterate_envelope<Scalar>(
        prob.M.Q, prob.f.values(), detail::stopping_weights(prob.spectral, prob.M.d),
        std::move(m0), opts);
    if (!outcome.converged)
      throw ConvergenceError("direct whole-system iteration did not converge",
                             static_cast<double>(outcome.residual), outcome.iterations);
    return detail::assemble_solution(prob, std::move(outcome.m_values), outcome.residual,
                                     outcome.iterations, opts.eps_wall);
  }

  const ClassDecomposition decomposition = decompose(prob.M);
  const Index n = prob.f.breakpoints();
  Matrix<Scalar> m_values = Matrix<Scalar>::Zero(prob.M.d, n);
  std::int64_t iterations = 0;

  for (Index position : decomposition.solve_order) {
    const auto& indices = decomposition.classes[position];
    const Index k = static_cast<Index>(indices.size());

    // Driver of the class: original components plus the pushes already
    // accumulated from earlier classes. Later classes cannot push this one,
    // and their rows of m_values are still zero anyway.
    Matrix<Scalar> driver(k, n);
    for (Index a = 0; a < k; ++a)
      driver.row(a) = prob.f.values().row(indices[a]) +
                      prob.M.R.row(indices[a]) * m_values;

    SkorokhodProblem<Scalar> sub(principal_submatrix(prob.M, indices),
                                 PiecewisePath<Scalar>(prob.f.times(), std::move(driver)),
                                 prob.allow_supercritical);
    std::optional<MonotonePath<Scalar>> sub_start;
    if (start) {
      Matrix<Scalar> rows(k, n);
      for (Index a = 0; a < k; ++a) rows.row(a) = start->values().row(indices[a]);
      sub_start = MonotonePath<Scalar>(PiecewisePath<Scalar>(prob.f.times(), std::move(rows)));
    }

    try {
      SkorokhodSolution<Scalar> part = solve_irreducible(sub, opts, sub_start);
      for (Index a = 0; a < k; ++a) m_values.row(indices[a]) = part.m.values().row(a);
      iterations += part.iterations;
    } catch (const ConvergenceError& err) {
      std::ostringstream what;
      what << "class " << (position + 1) << " (indices";
      for (Index v : indices) what << ' ' << (v + 1);
      what << "): " << err.what();
      throw ConvergenceError(what.str(), err.residual, err.iterations);
    }
  }

  Matrix<Scalar> final_push =
      detail::push_envelope_values(prob.M.Q, prob.f.values(), m_values);
  const Scalar residual = detail::weighted_sup_l1<Scalar>(
      final_push - m_values, detail::stopping_weights(prob.spectral, prob.M.d));
  return detail::assemble_solution(prob, std::move(m_values), residual, iterations,
                                   opts.eps_wall);
}

using SkorokhodProblemXd = SkorokhodProblem<double>;
using SkorokhodSolutionXd = SkorokhodSolution<double>;
using ValidationReportXd = ValidationReport<double>;

}  // namespace skorokhod
