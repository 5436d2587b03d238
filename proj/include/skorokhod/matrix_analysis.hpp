#pragma once

#include "skorokhod/types.hpp"

#include <Eigen/Eigenvalues>

#include <cstdint>
#include <optional>
#include <queue>
#include <vector>

namespace skorokhod {

namespace detail {

/// Outcome of the dense tableau simplex below.
enum class LpStatus { Optimal, Unbounded, IterationLimit };

template <typename Scalar>
struct LpResult {
  LpStatus status = LpStatus::IterationLimit;
  Scalar objective = Scalar(0);
  Vector<Scalar> primal;  // structural variables
  Vector<Scalar> dual;    // one multiplier per constraint row
};

/// Primal simplex with Bland's rule for  max c.z  s.t.  A z <= b, z >= 0,
/// b >= 0 (so the slack basis is feasible). Dense desk-scale problems only.
template <typename Scalar>
LpResult<Scalar> simplex_maximize(const Matrix<Scalar>& A, const Vector<Scalar>& b,
                                  const Vector<Scalar>& c) {
  const Index m = A.rows();
  const Index n = A.cols();
  const Scalar eps = Scalar(1e-11);

  Matrix<Scalar> tab = Matrix<Scalar>::Zero(m + 1, n + m + 1);
  tab.topLeftCorner(m, n) = A;
  tab.block(0, n, m, m) = Matrix<Scalar>::Identity(m, m);
  tab.col(n + m).head(m) = b;
  tab.row(m).head(n) = -c.transpose();

  std::vector<Index> basis(m);
  for (Index i = 0; i < m; ++i) basis[i] = n + i;

  LpResult<Scalar> result;
  const Index max_pivots = 2000 + 64 * (n + m);
  for (Index pivots = 0;; ++pivots) {
    if (pivots > max_pivots) {
      result.status = LpStatus::IterationLimit;
      return result;
    }
    Index enter = -1;
    for (Index j = 0; j < n + m; ++j) {
      if (tab(m, j) < -eps) {
        enter = j;
        break;  // Bland: first improving column
      }
    }
    if (enter < 0) break;  // optimal

    Index leave = -1;
    Scalar best_ratio(0);
    for (Index i = 0; i < m; ++i) {
      if (tab(i, enter) > eps) {
        const Scalar ratio = tab(i, n + m) / tab(i, enter);
        if (leave < 0 || ratio < best_ratio ||
            (ratio == best_ratio && basis[i] < basis[leave])) {
          leave = i;
          best_ratio = ratio;
        }
      }
    }
    if (leave < 0) {
      result.status = LpStatus::Unbounded;
      return result;
    }

    tab.row(leave) /= tab(leave, enter);
    for (Index i = 0; i <= m; ++i) {
      if (i == leave) continue;
      const Scalar factor = tab(i, enter);
      if (factor != Scalar(0)) tab.row(i) -= factor * tab.row(leave);
    }
    basis[leave] = enter;
  }

  result.status = LpStatus::Optimal;
  result.objective = tab(m, n + m);
  result.primal = Vector<Scalar>::Zero(n);
  for (Index i = 0; i < m; ++i)
    if (basis[i] < n) result.primal[basis[i]] = tab(i, n + m);
  result.dual = tab.row(m).segment(n, m).transpose();
  return result;
}

/// Strongly connected components of a directed graph, discovery order.
inline std::vector<std::vector<Index>> strongly_connected_components(
    const std::vector<std::vector<Index>>& adj) {
  const Index n = static_cast<Index>(adj.size());
  std::vector<Index> index(n, -1), low(n, 0), stack;
  std::vector<bool> on_stack(n, false);
  std::vector<std::vector<Index>> components;
  Index counter = 0;

  // Iterative Tarjan; frame second element is the next edge to explore.
  std::vector<std::pair<Index, std::size_t>> frames;
  for (Index root = 0; root < n; ++root) {
    if (index[root] >= 0) continue;
    frames.emplace_back(root, 0);
    while (!frames.empty()) {
      auto& [v, edge] = frames.back();
      if (edge == 0) {
        index[v] = low[v] = counter++;
        stack.push_back(v);
        on_stack[v] = true;
      }
      bool descended = false;
      while (edge < adj[v].size()) {
        const Index w = adj[v][edge++];
        if (index[w] < 0) {
          frames.emplace_back(w, 0);
          descended = true;
          break;
        }
        if (on_stack[w]) low[v] = std::min(low[v], index[w]);
      }
      if (descended) continue;
      if (low[v] == index[v]) {
        std::vector<Index> comp;
        Index w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = false;
          comp.push_back(w);
        } while (w != v);
        components.push_back(std::move(comp));
      }
      const Index finished = v;
      frames.pop_back();
      if (!frames.empty())
        low[frames.back().first] = std::min(low[frames.back().first], low[finished]);
    }
  }
  return components;
}

}  // namespace detail

/// Unit-diagonal reflection matrix together with the derived matrices the
/// solver and the spectral analysis work with: Q = I - R, |Q|, Q+ (entrywise
/// positive parts) and P = Q+/2 + I/2.
template <typename Scalar>
struct ReflectionMatrix {
  Index d;
  Matrix<Scalar> R;
  Matrix<Scalar> Q;
  Matrix<Scalar> absQ;
  Matrix<Scalar> Qplus;
  Matrix<Scalar> P;

  explicit ReflectionMatrix(Matrix<Scalar> R_unit) : d(R_unit.rows()), R(std::move(R_unit)) {
    if (R.rows() != R.cols()) throw DimensionError("reflection matrix must be square");
    if (d < 1) throw DimensionError("reflection matrix must be at least 1x1");
    for (Index i = 0; i < d; ++i) {
      if (R(i, i) != Scalar(1))
        throw DomainError("reflection matrix diagonal must be exactly 1; use normalize()");
    }
    Q = Matrix<Scalar>::Identity(d, d) - R;
    absQ = Q.cwiseAbs();
    Qplus = Q.cwiseMax(Scalar(0));
    P = Scalar(0.5) * Qplus + Scalar(0.5) * Matrix<Scalar>::Identity(d, d);
  }
};

/// Rescale a raw matrix with positive diagonal to unit diagonal: the
/// Skorokhod problem for R_raw and the one for R_raw with columns divided by
/// their diagonal entries have the same constrained paths.
template <typename Scalar>
ReflectionMatrix<Scalar> normalize(const Matrix<Scalar>& R_raw) {
  if (R_raw.rows() != R_raw.cols()) throw DimensionError("reflection matrix must be square");
  Matrix<Scalar> R = R_raw;
  for (Index j = 0; j < R.cols(); ++j) {
    if (!(R_raw(j, j) > Scalar(0)))
      throw NormalizationError("diagonal entry " + std::to_string(j + 1) +
                                   " is not strictly positive",
                               j);
    R.col(j) /= R_raw(j, j);
    R(j, j) = Scalar(1);
  }
  return ReflectionMatrix<Scalar>(std::move(R));
}

/// Principal submatrix restricted to the given (strictly increasing) indices.
template <typename Scalar>
ReflectionMatrix<Scalar> principal_submatrix(const ReflectionMatrix<Scalar>& M,
                                             const std::vector<Index>& indices) {
  const Index k = static_cast<Index>(indices.size());
  Matrix<Scalar> sub(k, k);
  for (Index a = 0; a < k; ++a)
    for (Index b = 0; b < k; ++b) sub(a, b) = M.R(indices[a], indices[b]);
  return ReflectionMatrix<Scalar>(std::move(sub));
}

/// True iff the directed graph with an edge i->j whenever A(i,j) != 0 is
/// strongly connected. A 1x1 zero matrix counts as reducible (the Q = 0 case).
template <typename Scalar>
bool is_irreducible(const Matrix<Scalar>& A) {
  const Index n = A.rows();
  if (n == 1) return A(0, 0) != Scalar(0);
  std::vector<std::vector<Index>> adj(n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j)
      if (A(i, j) != Scalar(0)) adj[i].push_back(j);
  return detail::strongly_connected_components(adj).size() == 1;
}

/// Spectral radii of |Q|, Q+ and P, plus the left Perron weight vector of |Q|
/// in the irreducible case (normalized to sum 1). For Q = 0 the weights fall
/// back to the uniform vector; for a reducible nonzero |Q| no positive left
/// eigenvector need exist and y is absent.
template <typename Scalar>
struct SpectralData {
  Scalar rho;
  Scalar rho_qplus;
  Scalar rho_p;
  bool irreducible;
  std::optional<Vector<Scalar>> y;
  Scalar y_residual;
};

namespace detail {

template <typename Scalar>
Scalar dense_spectral_radius(const Matrix<Scalar>& A) {
  if (A.size() == 0) throw DimensionError("empty matrix");
  Eigen::EigenSolver<Matrix<Scalar>> es(A, /*computeEigenvectors=*/false);
  if (es.info() != Eigen::Success)
    throw SpectralConvergenceError("dense eigensolver failed to converge", -1.0);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

/// Left Perron vector of the irreducible non-negative matrix A with spectral
/// radius rho, via power iteration on A^T + I (primitive, so the iteration
/// cannot cycle). Normalized to sum 1.
template <typename Scalar>
std::pair<Vector<Scalar>, Scalar> left_perron_vector(const Matrix<Scalar>& A, Scalar rho) {
  const Index n = A.rows();
  const Matrix<Scalar> B = A.transpose() + Matrix<Scalar>::Identity(n, n);
  Vector<Scalar> y = Vector<Scalar>::Constant(n, Scalar(1) / Scalar(n));
  const Scalar target = rho + Scalar(1);
  const Scalar tol = Scalar(1e-13) * std::max(Scalar(1), target);
  const Index budget = 1000000;
  Scalar residual(0);
  for (Index it = 0; it < budget; ++it) {
    Vector<Scalar> z = B * y;
    z /= z.template lpNorm<1>();
    residual = (B * z - target * z).template lpNorm<Eigen::Infinity>();
    y = std::move(z);
    if (residual <= tol) break;
  }
  residual = (A.transpose() * y - rho * y).template lpNorm<Eigen::Infinity>();
  if (residual > Scalar(1e-10) * std::max(Scalar(1), rho))
    throw SpectralConvergenceError("Perron iteration did not reach tolerance",
                                   static_cast<double>(residual));
  if (!(y.minCoeff() > Scalar(0)))
    throw SpectralConvergenceError("Perron vector is not strictly positive",
                                   static_cast<double>(residual));
  return {y, residual};
}

}  // namespace detail

template <typename Scalar>
SpectralData<Scalar> spectral_data(const ReflectionMatrix<Scalar>& M) {
  SpectralData<Scalar> out;
  out.rho = detail::dense_spectral_radius(M.absQ);
  out.rho_qplus = detail::dense_spectral_radius(M.Qplus);
  out.rho_p = detail::dense_spectral_radius(M.P);
  out.irreducible = is_irreducible(M.absQ);
  out.y_residual = Scalar(0);
  if (M.absQ.isZero(Scalar(0))) {
    out.y = Vector<Scalar>::Constant(M.d, Scalar(1) / Scalar(M.d));
  } else if (out.irreducible) {
    auto [y, residual] = detail::left_perron_vector(M.absQ, out.rho);
    out.y = std::move(y);
    out.y_residual = residual;
  }
  return out;
}

/// Per-subset outcome of the completely-S check. `indices` lists the subset
/// in increasing order; `witness` (when s_matrix) satisfies R_S x >= slack > 0
/// with x >= 0 and sum x <= 1; `dual` (otherwise) is the optimal LP multiplier
/// vector certifying that no larger slack is feasible.
template <typename Scalar>
struct SubsetCertificate {
  std::uint32_t mask;
  std::vector<Index> indices;
  bool s_matrix;
  Scalar slack;
  Vector<Scalar> witness;
  Vector<Scalar> dual;
};

template <typename Scalar>
struct CompletelySReport {
  bool completely_S;
  std::vector<SubsetCertificate<Scalar>> subsets;
};

/// Decide whether R and every principal submatrix R_S admits x >= 0 with
/// R_S x > 0, by maximizing the slack t subject to R_S x >= t, x >= 0,
/// sum x <= 1. The subset is an S-matrix iff the optimum exceeds 1e-9.
/// Enumeration stops at the first failing subset.
template <typename Scalar>
CompletelySReport<Scalar> check_completely_S(const ReflectionMatrix<Scalar>& M) {
  if (M.d > 20)
    throw DimensionError("completely-S enumeration is limited to dimension 20");
  const Scalar threshold = Scalar(1e-9);

  CompletelySReport<Scalar> report;
  report.completely_S = true;
  const std::uint32_t full = (M.d == 32) ? ~0u : ((1u << M.d) - 1u);
  for (std::uint32_t mask = 1; mask <= full; ++mask) {
    SubsetCertificate<Scalar> cert;
    cert.mask = mask;
    for (Index i = 0; i < M.d; ++i)
      if (mask & (1u << i)) cert.indices.push_back(i);
    const Index k = static_cast<Index>(cert.indices.size());

    // max t  s.t.  -R_S x + t <= 0,  sum x <= 1,  x >= 0, t >= 0
    Matrix<Scalar> A = Matrix<Scalar>::Zero(k + 1, k + 1);
    for (Index a = 0; a < k; ++a) {
      for (Index b = 0; b < k; ++b) A(a, b) = -M.R(cert.indices[a], cert.indices[b]);
      A(a, k) = Scalar(1);
    }
    A.row(k).head(k).setOnes();
    Vector<Scalar> b = Vector<Scalar>::Zero(k + 1);
    b[k] = Scalar(1);
    Vector<Scalar> c = Vector<Scalar>::Zero(k + 1);
    c[k] = Scalar(1);

    auto lp = detail::simplex_maximize<Scalar>(A, b, c);
    if (lp.status != detail::LpStatus::Optimal)
      throw FeasibilityError("slack LP failed for subset mask " + std::to_string(mask));
    cert.slack = lp.objective;
    cert.s_matrix = lp.objective > threshold;
    if (cert.s_matrix) {
      cert.witness = lp.primal.head(k);
    } else {
      cert.dual = lp.dual;
      report.completely_S = false;
    }
    const bool failed = !cert.s_matrix;
    report.subsets.push_back(std::move(cert));
    if (failed) break;
  }
  return report;
}

template <typename Scalar>
bool is_completely_S(const ReflectionMatrix<Scalar>& M) {
  return check_completely_S(M).completely_S;
}

/// Communicating classes of the push-influence relation i -> j, defined by
/// nonzero entries of A = |Q|^T (so R(j,i) != 0 draws an edge i -> j: the
/// local time of i pushes component j). `classes` are the strongly connected
/// components ordered by smallest contained index; `solve_order` lists class
/// positions topologically with source classes (no incoming edge) first, ties
/// broken by smallest contained index; `reaches(i,j)` is the transitive
/// closure of the edge relation.
struct ClassDecomposition {
  std::vector<std::vector<Index>> classes;
  std::vector<Index> solve_order;
  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> reaches;
};

template <typename Scalar>
ClassDecomposition decompose(const ReflectionMatrix<Scalar>& M) {
  const Index d = M.d;
  std::vector<std::vector<Index>> adj(d);
  for (Index i = 0; i < d; ++i)
    for (Index j = 0; j < d; ++j)
      if (M.absQ(j, i) != Scalar(0)) adj[i].push_back(j);  // A = |Q|^T

  ClassDecomposition out;
  out.classes = detail::strongly_connected_components(adj);
  for (auto& cls : out.classes) std::sort(cls.begin(), cls.end());
  std::sort(out.classes.begin(), out.classes.end(),
            [](const auto& a, const auto& b) { return a.front() < b.front(); });

  const Index m = static_cast<Index>(out.classes.size());
  std::vector<Index> class_of(d);
  for (Index c = 0; c < m; ++c)
    for (Index v : out.classes[c]) class_of[v] = c;

  std::vector<std::vector<Index>> class_adj(m);
  std::vector<Index> in_degree(m, 0);
  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> class_edge =
      Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>::Constant(m, m, false);
  for (Index i = 0; i < d; ++i) {
    for (Index j : adj[i]) {
      const Index a = class_of[i], b = class_of[j];
      if (a != b && !class_edge(a, b)) {
        class_edge(a, b) = true;
        class_adj[a].push_back(b);
        ++in_degree[b];
      }
    }
  }

  // Kahn with a min-heap over class positions; classes are already ordered by
  // smallest contained index, so this is the deterministic tie-break.
  std::priority_queue<Index, std::vector<Index>, std::greater<>> ready;
  for (Index c = 0; c < m; ++c)
    if (in_degree[c] == 0) ready.push(c);
  while (!ready.empty()) {
    const Index c = ready.top();
    ready.pop();
    out.solve_order.push_back(c);
    for (Index b : class_adj[c])
      if (--in_degree[b] == 0) ready.push(b);
  }

  out.reaches = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>::Constant(d, d, false);
  for (Index i = 0; i < d; ++i)
    for (Index j : adj[i]) out.reaches(i, j) = true;
  for (Index k = 0; k < d; ++k)
    for (Index i = 0; i < d; ++i)
      if (out.reaches(i, k))
        for (Index j = 0; j < d; ++j)
          if (out.reaches(k, j)) out.reaches(i, j) = true;
  return out;
}

using ReflectionMatrixXd = ReflectionMatrix<double>;
using SpectralDataXd = SpectralData<double>;

}  // namespace skorokhod
