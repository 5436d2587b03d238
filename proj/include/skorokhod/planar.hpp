#pragma once

#include "skorokhod/solver.hpp"

#include <cmath>
#include <string>

namespace skorokhod {

/// The five regimes of the 2x2 reflection matrix [[1, a1], [a2, 1]], keyed by
/// the product a1 a2 and the sign pattern, plus the degenerate pattern
/// (|a1 a2| >= 1 with both entries negative) that is not completely-S.
enum class PlanarCaseId {
  Subcritical,       // |a1 a2| < 1
  CriticalOpposite,  // |a1 a2| = 1, opposite signs
  CriticalPositive,  // |a1 a2| = 1, both positive
  SuperOpposite,     // |a1 a2| > 1, opposite signs
  SuperPositive,     // |a1 a2| > 1, both positive
  NotCompletelyS,    // |a1 a2| >= 1, both negative
};

inline const char* to_string(PlanarCaseId id) {
  switch (id) {
    case PlanarCaseId::Subcritical: return "subcritical";
    case PlanarCaseId::CriticalOpposite: return "critical-opposite";
    case PlanarCaseId::CriticalPositive: return "critical-positive";
    case PlanarCaseId::SuperOpposite: return "supercritical-opposite";
    case PlanarCaseId::SuperPositive: return "supercritical-positive";
    case PlanarCaseId::NotCompletelyS: return "not-completely-S";
  }
  return "unknown";
}

inline const char* describe(PlanarCaseId id) {
  switch (id) {
    case PlanarCaseId::Subcritical:
      return "|a1 a2| < 1: unique solution for every continuous driver";
    case PlanarCaseId::CriticalOpposite:
      return "|a1 a2| = 1 with opposite signs: unique solution";
    case PlanarCaseId::CriticalPositive:
      return "a1 a2 = 1 with both entries positive: the constrained path is unique "
             "but the local-time split is not";
    case PlanarCaseId::SuperOpposite:
      return "|a1 a2| > 1 with opposite signs: uniqueness fails";
    case PlanarCaseId::SuperPositive:
      return "a1 a2 > 1 with both entries positive: uniqueness fails; an explicit "
             "counterexample driver exists";
    case PlanarCaseId::NotCompletelyS:
      return "|a1 a2| >= 1 with both entries negative: R is not completely-S, "
             "existence already fails";
  }
  return "";
}

template <typename Scalar>
struct PlanarCase {
  Scalar a1;
  Scalar a2;
  PlanarCaseId case_id;
  /// |a1 a2| was within classification tolerance of 1 without being exact.
  bool borderline;
};

/// Classify the off-diagonal pair. |a1 a2| is compared against 1 with
/// tolerance 1e-12; a zero product falls in the subcritical case.
template <typename Scalar>
PlanarCase<Scalar> classify(Scalar a1, Scalar a2) {
  const Scalar product = a1 * a2;
  const Scalar gap = std::abs(product) - Scalar(1);
  const bool critical = std::abs(gap) <= Scalar(1e-12);
  const bool both_negative = a1 < Scalar(0) && a2 < Scalar(0);

  PlanarCase<Scalar> out{a1, a2, PlanarCaseId::Subcritical, false};
  if (critical) {
    out.borderline = gap != Scalar(0);
    if (both_negative)
      out.case_id = PlanarCaseId::NotCompletelyS;
    else if (product < Scalar(0))
      out.case_id = PlanarCaseId::CriticalOpposite;
    else
      out.case_id = PlanarCaseId::CriticalPositive;
  } else if (gap < Scalar(0)) {
    out.case_id = PlanarCaseId::Subcritical;
  } else if (both_negative) {
    out.case_id = PlanarCaseId::NotCompletelyS;
  } else if (product < Scalar(0)) {
    out.case_id = PlanarCaseId::SuperOpposite;
  } else {
    out.case_id = PlanarCaseId::SuperPositive;
  }
  return out;
}

/// The conjugation [[1, a1],[a2, 1]] -> [[1, C a1],[a2/C, 1]] with the second
/// components of f, g and m divided by C. It maps solutions to solutions both
/// ways and preserves the product a1 a2, so every question about case
/// membership or uniqueness can be moved to a convenient representative.
template <typename Scalar>
struct ScaledProblem {
  Scalar a1;
  Scalar a2;
  PiecewisePath<Scalar> f;
};

template <typename Scalar>
PiecewisePath<Scalar> rescale_second_component(const PiecewisePath<Scalar>& p, Scalar factor) {
  if (p.dimension() != 2) throw DimensionError("planar transform requires a 2-d path");
  Matrix<Scalar> values = p.values();
  values.row(1) *= factor;
  return PiecewisePath<Scalar>(p.times(), std::move(values));
}

template <typename Scalar>
ScaledProblem<Scalar> scaling_transform(Scalar a1, Scalar a2, Scalar C,
                                        const PiecewisePath<Scalar>& f) {
  if (!(C > Scalar(0))) throw DomainError("scaling constant must be positive");
  return ScaledProblem<Scalar>{C * a1, a2 / C,
                               rescale_second_component(f, Scalar(1) / C)};
}

/// Companion transform for solution paths (divide second component by C), and
/// its inverse.
template <typename Scalar>
PiecewisePath<Scalar> scale_solution_path(const PiecewisePath<Scalar>& p, Scalar C) {
  if (!(C > Scalar(0))) throw DomainError("scaling constant must be positive");
  return rescale_second_component(p, Scalar(1) / C);
}

template <typename Scalar>
PiecewisePath<Scalar> unscale_solution_path(const PiecewisePath<Scalar>& p, Scalar C) {
  if (!(C > Scalar(0))) throw DomainError("scaling constant must be positive");
  return rescale_second_component(p, C);
}

/// Closed-form solution for the symmetric critical matrix a1 = a2 = 1.
///
/// In the rotated frame u1 = (1,1)/sqrt(2), u2 = (1,-1)/sqrt(2) the orthant
/// is the wedge g_u1 >= |g_u2| and both push directions collapse onto u1, so
/// g_u2 = f_u2 and g_u1 is the one-dimensional reflection of f_u1 at the
/// moving barrier |f_u2|:
///
///   g_u1(t) = f_u1(t) + sup_{s<=t} (|f_u2(s)| - f_u1(s))^+.
///
/// |f_u2| - f_u1 is convex on each segment, so breakpoint values are exact.
/// Only g is determined; the returned local-time split is the symmetric one
/// (m1 = m2 = half the total push) and is flagged non-unique. Its
/// complementarity defect is reported honestly and can be nonzero: a valid
/// split may have to assign wall-specific pushes that the symmetric one
/// spreads over both components.
template <typename Scalar>
SkorokhodSolution<Scalar> solve_critical_exact(const PiecewisePath<Scalar>& f,
                                               Scalar eps_wall = Scalar(1e-6)) {
  if (f.dimension() != 2) throw RegimeError("critical closed form requires a 2-d driver");
  if ((f.at(0).array() < Scalar(0)).any())
    throw RegimeError("driving path must start in the orthant");

  const Scalar root_half = std::sqrt(Scalar(0.5));
  const Index n = f.breakpoints();
  Matrix<Scalar> g_values(2, n);
  Matrix<Scalar> m_values(2, n);
  Scalar running(0);
  for (Index k = 0; k < n; ++k) {
    const Scalar f1 = f.values()(0, k);
    const Scalar f2 = f.values()(1, k);
    const Scalar f_u1 = root_half * (f1 + f2);
    const Scalar f_u2 = root_half * (f1 - f2);
    running = std::max(running, std::abs(f_u2) - f_u1);
    const Scalar push = std::max(running, Scalar(0));
    const Scalar g_u1 = f_u1 + push;
    g_values(0, k) = root_half * (g_u1 + f_u2);
    g_values(1, k) = root_half * (g_u1 - f_u2);
    const Scalar total_m = push * root_half;  // m1 + m2
    m_values(0, k) = total_m / Scalar(2);
    m_values(1, k) = total_m / Scalar(2);
  }

  ReflectionMatrix<Scalar> M((Matrix<Scalar>(2, 2) << 1, 1, 1, 1).finished());
  MonotonePath<Scalar> m(PiecewisePath<Scalar>(f.times(), std::move(m_values)));
  PiecewisePath<Scalar> g(f.times(), std::move(g_values));

  MonotonePath<Scalar> pushed = pushing_envelope(M, f, m);
  const Scalar residual = detail::weighted_sup_l1<Scalar>(
      pushed.values() - m.values(), Vector<Scalar>::Constant(2, Scalar(0.5)));
  auto report = validate(M, f, g, m.path(), eps_wall);

  SkorokhodSolution<Scalar> out{std::move(g), std::move(m), residual, 0,
                                std::move(report.complementarity_defect)};
  out.m_unique = false;
  return out;
}

/// Critical closed form for a general positive pair with a1 a2 = 1, reached
/// by conjugating with C = sqrt(a2/a1), solving the symmetric case, and
/// mapping the solution back. Residual and complementarity are reported
/// against the original matrix.
template <typename Scalar>
SkorokhodSolution<Scalar> solve_critical_exact(Scalar a1, Scalar a2,
                                               const PiecewisePath<Scalar>& f,
                                               Scalar eps_wall = Scalar(1e-6)) {
  const auto planar_case = classify(a1, a2);
  if (planar_case.case_id != PlanarCaseId::CriticalPositive)
    throw RegimeError("closed form applies only to positive pairs with a1 a2 = 1");
  const Scalar C = std::sqrt(a2 / a1);

  auto scaled = scaling_transform(a1, a2, C, f);
  SkorokhodSolution<Scalar> sym = solve_critical_exact(scaled.f, eps_wall);

  PiecewisePath<Scalar> g = unscale_solution_path(sym.g, C);
  MonotonePath<Scalar> m(unscale_solution_path(sym.m.path(), C));

  ReflectionMatrix<Scalar> M((Matrix<Scalar>(2, 2) << 1, a1, a2, 1).finished());
  MonotonePath<Scalar> pushed = pushing_envelope(M, f, m);
  const Scalar residual = detail::weighted_sup_l1<Scalar>(
      pushed.values() - m.values(), Vector<Scalar>::Constant(2, Scalar(0.5)));
  auto report = validate(M, f, g, m.path(), eps_wall);

  SkorokhodSolution<Scalar> out{std::move(g), std::move(m), residual, 0,
                                std::move(report.complementarity_defect)};
  out.m_unique = false;
  return out;
}

/// One dyadic block of the non-uniqueness construction for R = [[1, g],[1, 1]]
/// with g = gamma > 1. Columns are the five node times 0, 1/4, 1/2, 3/4, 1
/// of the block's own clock (block n lives on [0, 2^-n]); block identities
/// g_n(t) - g_n(0) = f_n(t) + R m_n(t) hold at every node for both solution
/// pairs.
template <typename Scalar>
struct CounterexampleBlock {
  Matrix<Scalar> f, g, g_bar, m, m_bar;  // each 2 x 5
};

template <typename Scalar>
CounterexampleBlock<Scalar> counterexample_block(Scalar gamma, Index n) {
  if (!(gamma > Scalar(1))) throw DomainError("counterexample requires gamma > 1");
  if (n < 0) throw DomainError("block index must be non-negative");
  Scalar p(1);  // gamma^-n
  for (Index i = 0; i < n; ++i) p /= gamma;
  const Scalar pg = p * gamma;  // gamma^{-n+1}

  CounterexampleBlock<Scalar> b;
  b.f = (Matrix<Scalar>(2, 5) <<
         0, -p, pg - p, pg - p, -p,
         0, 0, 0, -2 * p, pg - 2 * p).finished();
  b.g = (Matrix<Scalar>(2, 5) <<
         0, 0, pg, pg, 0,
         p, 2 * p, 2 * p, 0, pg).finished();
  b.g_bar = (Matrix<Scalar>(2, 5) <<
             p, 0, pg, 2 * pg, pg,
             p, p, p, 0, pg).finished();
  b.m = (Matrix<Scalar>(2, 5) <<
         0, p, p, p, p,
         0, 0, 0, 0, 0).finished();
  b.m_bar = (Matrix<Scalar>(2, 5) <<
             0, 0, 0, 0, 0,
             0, 0, 0, p, p).finished();
  return b;
}

/// Two distinct solutions of the same two-dimensional Skorokhod problem for
/// R = [[1, gamma],[1, 1]], gamma > 1: both (g, m) and (g_bar, m_bar) satisfy
/// the Skorokhod equation for the driver f with zero complementarity defect
/// at breakpoints, yet g and g_bar stay a positive distance apart.
template <typename Scalar>
struct CounterexampleBundle {
  Scalar gamma;
  Index depth;
  PiecewisePath<Scalar> f;
  PiecewisePath<Scalar> g;
  PiecewisePath<Scalar> g_bar;
  MonotonePath<Scalar> m;
  MonotonePath<Scalar> m_bar;
};

/// Assemble the dyadic concatenation: block n occupies (2^-n, 2^-n+1], so the
/// blocks shrink toward t = 0 and the horizon is 2. The infinite tails
/// sum_{k>n} f_k(2^-k) are geometric and added in closed form
/// (sum_{k>n} gamma^-k = gamma^-n / (gamma - 1)); everything below 2^-depth
/// is pinned to the origin, where all five paths of the untruncated object
/// converge to 0 anyway. Truncation error in the driver is of order
/// gamma^-depth and confined to [0, 2^-depth].
template <typename Scalar>
CounterexampleBundle<Scalar> build_counterexample(Scalar gamma, Index depth) {
  if (!(gamma > Scalar(1)))
    throw DomainError("the tail series requires gamma > 1 to converge");
  if (depth < 1 || depth > 50) throw DomainError("depth must be between 1 and 50");

  const Index n_points = 4 * (depth + 1) + 2;  // origin + 4 nodes per block + final node
  Vector<Scalar> times(n_points);
  Matrix<Scalar> f(2, n_points), g(2, n_points), gb(2, n_points), m(2, n_points),
      mb(2, n_points);

  times[0] = Scalar(0);
  f.col(0).setZero();
  g.col(0).setZero();
  gb.col(0).setZero();
  m.col(0).setZero();
  mb.col(0).setZero();

  Index col = 1;
  for (Index n = depth; n >= 0; --n) {
    const auto block = counterexample_block(gamma, n);
    Scalar p(1);
    for (Index i = 0; i < n; ++i) p /= gamma;
    const Scalar tail = p / (gamma - Scalar(1));         // sum_{k>n} gamma^-k
    const Vector<Scalar> c_f = (Vector<Scalar>(2) << -tail, (gamma - 2) * tail).finished();
    const Vector<Scalar> c_m = (Vector<Scalar>(2) << tail, 0).finished();
    const Vector<Scalar> c_mb = (Vector<Scalar>(2) << 0, tail).finished();

    const Scalar block_start = std::ldexp(Scalar(1), static_cast<int>(-n));
    const Scalar quarter = block_start / Scalar(4);
    // Node 4 of block n coincides with node 0 of block n-1; emit it only for
    // the last block (n = 0), where it closes the horizon at t = 2.
    const Index last_node = (n == 0) ? 4 : 3;
    for (Index j = 0; j <= last_node; ++j, ++col) {
      times[col] = block_start + Scalar(j) * quarter;
      f.col(col) = block.f.col(j) + c_f;
      g.col(col) = block.g.col(j);
      gb.col(col) = block.g_bar.col(j);
      m.col(col) = block.m.col(j) + c_m;
      mb.col(col) = block.m_bar.col(j) + c_mb;
    }
  }

  return CounterexampleBundle<Scalar>{
      gamma,
      depth,
      PiecewisePath<Scalar>(times, std::move(f)),
      PiecewisePath<Scalar>(times, std::move(g)),
      PiecewisePath<Scalar>(times, std::move(gb)),
      MonotonePath<Scalar>(PiecewisePath<Scalar>(times, std::move(m))),
      MonotonePath<Scalar>(PiecewisePath<Scalar>(times, std::move(mb)))};
}

/// The reflection matrix of the counterexample family.
template <typename Scalar>
ReflectionMatrix<Scalar> counterexample_matrix(Scalar gamma) {
  return ReflectionMatrix<Scalar>(
      (Matrix<Scalar>(2, 2) << 1, gamma, 1, 1).finished());
}

using PlanarCaseXd = PlanarCase<double>;
using CounterexampleBundleXd = CounterexampleBundle<double>;

}  // namespace skorokhod
