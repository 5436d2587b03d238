#pragma once

#include "skorokhod/types.hpp"

#include <algorithm>
#include <utility>
#include <vector>

namespace skorokhod {

/// A continuous d-dimensional path sampled at strictly increasing breakpoints
/// t0 = 0 < t1 < ... < tN and linear between them. Column k of values() is the
/// point at times()[k]. Running suprema, positive parts and linear maps of
/// piecewise-linear paths attain their extrema at breakpoints, so the grid
/// values are exact for every operation this library performs on them.
template <typename Scalar>
class PiecewisePath {
 public:
  PiecewisePath(Vector<Scalar> times, Matrix<Scalar> values)
      : times_(std::move(times)), values_(std::move(values)) {
    if (times_.size() < 2) throw DomainError("path needs at least two breakpoints");
    if (times_[0] != Scalar(0)) throw DomainError("path must start at time 0");
    for (Index k = 0; k + 1 < times_.size(); ++k) {
      if (!(times_[k] < times_[k + 1]))
        throw DomainError("breakpoint times must be strictly increasing");
    }
    if (values_.cols() != times_.size())
      throw DimensionError("one value column per breakpoint required");
    if (values_.rows() < 1) throw DimensionError("path dimension must be positive");
  }

  Index dimension() const { return values_.rows(); }
  Index breakpoints() const { return times_.size(); }
  Scalar horizon() const { return times_[times_.size() - 1]; }
  const Vector<Scalar>& times() const { return times_; }
  const Matrix<Scalar>& values() const { return values_; }
  Matrix<Scalar>& values() { return values_; }

  /// Value at breakpoint k.
  auto at(Index k) const { return values_.col(k); }

 private:
  Vector<Scalar> times_;
  Matrix<Scalar> values_;
};

/// Path starting at the zero vector whose components never decrease.
/// Non-negativity of increments is exact, not tolerance-based; the solver
/// produces running maxima and exact averages, which preserve this in
/// floating point.
template <typename Scalar>
class MonotonePath {
 public:
  explicit MonotonePath(PiecewisePath<Scalar> path) : path_(std::move(path)) {
    if (!path_.at(0).isZero(Scalar(0)))
      throw DomainError("monotone path must start at the zero vector");
    const auto& v = path_.values();
    for (Index k = 0; k + 1 < path_.breakpoints(); ++k) {
      if (((v.col(k + 1) - v.col(k)).array() < Scalar(0)).any())
        throw DomainError("monotone path has a decreasing increment");
    }
  }

  const PiecewisePath<Scalar>& path() const { return path_; }
  Index dimension() const { return path_.dimension(); }
  Index breakpoints() const { return path_.breakpoints(); }
  const Vector<Scalar>& times() const { return path_.times(); }
  const Matrix<Scalar>& values() const { return path_.values(); }
  auto at(Index k) const { return path_.at(k); }

 private:
  PiecewisePath<Scalar> path_;
};

/// The all-zero monotone path on a given grid.
template <typename Scalar>
MonotonePath<Scalar> zero_path(Index dimension, const Vector<Scalar>& times) {
  return MonotonePath<Scalar>(
      PiecewisePath<Scalar>(times, Matrix<Scalar>::Zero(dimension, times.size())));
}

template <typename Scalar>
bool same_grid(const PiecewisePath<Scalar>& a, const PiecewisePath<Scalar>& b) {
  return a.times().size() == b.times().size() && a.times() == b.times();
}

template <typename Scalar>
void require_same_grid(const PiecewisePath<Scalar>& a, const PiecewisePath<Scalar>& b) {
  if (a.dimension() != b.dimension())
    throw DimensionError("paths have different dimensions");
  if (!same_grid(a, b)) throw GridError("paths are not on a common breakpoint grid");
}

/// Linear interpolation at time t; exact at breakpoints.
template <typename Scalar>
Vector<Scalar> eval(const PiecewisePath<Scalar>& p, Scalar t) {
  const auto& times = p.times();
  if (t < times[0] || t > p.horizon())
    throw DomainError("evaluation time outside the path domain");
  const Scalar* begin = times.data();
  const Scalar* end = begin + times.size();
  Index k = static_cast<Index>(std::upper_bound(begin, end, t) - begin) - 1;
  if (k == times.size() - 1) return p.at(k);  // t == horizon
  if (t == times[k]) return p.at(k);
  const Scalar w = (t - times[k]) / (times[k + 1] - times[k]);
  return p.at(k) + w * (p.at(k + 1) - p.at(k));
}

/// The y-weighted sup-l1 norm sup_t sum_i y_i |p_i(t)|. The weighted l1 value
/// is convex piecewise linear in t, so the supremum over breakpoints is exact.
template <typename Scalar>
Scalar star_norm(const PiecewisePath<Scalar>& p, const Vector<Scalar>& y) {
  if (y.size() != p.dimension())
    throw DimensionError("weight vector length must equal the path dimension");
  if ((y.array() <= Scalar(0)).any())
    throw DomainError("star norm weights must be strictly positive");
  Scalar best(0);
  for (Index k = 0; k < p.breakpoints(); ++k)
    best = std::max(best, y.dot(p.at(k).cwiseAbs()));
  return best;
}

/// Per-component oscillation (max minus min) of p over [s, t].
template <typename Scalar>
Vector<Scalar> oscillation(const PiecewisePath<Scalar>& p, Scalar s, Scalar t) {
  if (!(Scalar(0) <= s && s < t && t <= p.horizon()))
    throw DomainError("oscillation requires 0 <= s < t <= horizon");
  Vector<Scalar> lo = eval(p, s);
  Vector<Scalar> hi = lo;
  const Vector<Scalar> right = eval(p, t);
  lo = lo.cwiseMin(right);
  hi = hi.cwiseMax(right);
  const auto& times = p.times();
  for (Index k = 0; k < times.size(); ++k) {
    if (times[k] <= s) continue;
    if (times[k] >= t) break;
    lo = lo.cwiseMin(p.at(k).eval());
    hi = hi.cwiseMax(p.at(k).eval());
  }
  return hi - lo;
}

template <typename Scalar>
PiecewisePath<Scalar> operator+(const PiecewisePath<Scalar>& a,
                                const PiecewisePath<Scalar>& b) {
  require_same_grid(a, b);
  return PiecewisePath<Scalar>(a.times(), a.values() + b.values());
}

template <typename Scalar>
PiecewisePath<Scalar> operator-(const PiecewisePath<Scalar>& a,
                                const PiecewisePath<Scalar>& b) {
  require_same_grid(a, b);
  return PiecewisePath<Scalar>(a.times(), a.values() - b.values());
}

/// Pointwise image t -> A p(t).
template <typename Scalar>
PiecewisePath<Scalar> apply_matrix(const Matrix<Scalar>& A, const PiecewisePath<Scalar>& p) {
  if (A.cols() != p.dimension())
    throw DimensionError("matrix columns must match the path dimension");
  return PiecewisePath<Scalar>(p.times(), A * p.values());
}

/// Largest absolute componentwise difference over breakpoints.
template <typename Scalar>
Scalar sup_distance(const PiecewisePath<Scalar>& a, const PiecewisePath<Scalar>& b) {
  require_same_grid(a, b);
  return (a.values() - b.values()).cwiseAbs().maxCoeff();
}

/// Re-sample every path on the union of all breakpoint sets. Values at
/// original breakpoints are untouched; new breakpoints interpolate.
template <typename Scalar>
std::vector<PiecewisePath<Scalar>> refine_to_common_grid(
    const std::vector<PiecewisePath<Scalar>>& paths) {
  if (paths.empty()) return {};
  for (const auto& p : paths) {
    if (p.dimension() != paths.front().dimension())
      throw DimensionError("paths have different dimensions");
    if (p.horizon() != paths.front().horizon())
      throw DomainError("paths have different horizons");
  }
  std::vector<Scalar> merged;
  for (const auto& p : paths)
    merged.insert(merged.end(), p.times().data(), p.times().data() + p.times().size());
  std::sort(merged.begin(), merged.end());
  merged.erase(std::unique(merged.begin(), merged.end()), merged.end());

  Vector<Scalar> times = Eigen::Map<const Vector<Scalar>>(merged.data(), merged.size());
  std::vector<PiecewisePath<Scalar>> out;
  out.reserve(paths.size());
  for (const auto& p : paths) {
    Matrix<Scalar> values(p.dimension(), times.size());
    for (Index k = 0; k < times.size(); ++k) values.col(k) = eval(p, times[k]);
    out.emplace_back(times, std::move(values));
  }
  return out;
}

using PiecewisePathXd = PiecewisePath<double>;
using MonotonePathXd = MonotonePath<double>;

}  // namespace skorokhod
