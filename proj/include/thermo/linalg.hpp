#pragma once

// Small numerical kernels: Perron eigen-data of sparse nonnegative matrices by
// power iteration, and a dense LU solver for the tiny systems of the primal
// optimizer.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "thermo/error.hpp"

namespace thermo {

/// Nonnegative matrix stored as weighted edges. Weights are kept as logarithms
/// so that exp-tilted transfer matrices never overflow.
struct LogWeightedGraph {
  struct Edge {
    int from;
    int to;
    double log_weight;
  };
  int size = 0;
  std::vector<Edge> edges;
};

struct PerronOptions {
  double tolerance = 1e-13;  // relative Collatz-Wielandt gap
  long max_iterations = 1000000;
  bool want_left = true;
};

struct PerronData {
  double log_lambda = 0.0;
  /// Certified bound: |log_lambda - log(true Perron root)| <= residual.
  double residual = 0.0;
  // Eigenvectors of diagonally rescaled matrices: the true right vector is
  // exp(right_log_scale) * right and the true left vector exp(left_log_scale)
  // * left, up to normalization. The scales are empty when no rescaling was
  // needed.
  std::vector<double> right;  // M r = lambda r, sum 1
  std::vector<double> left;   // l M = lambda l, sum 1
  std::vector<double> right_log_scale;
  std::vector<double> left_log_scale;
  long iterations = 0;
};

/// Dense row-major square matrix, just enough for Newton steps.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

 private:
  std::size_t rows_ = 0, cols_ = 0;
  std::vector<double> data_;
};

/// Solves A x = b by Gaussian elimination with partial pivoting. Returns false
/// if A is numerically singular.
inline bool lu_solve(DenseMatrix a, std::vector<double> b, std::vector<double>& x) {
  const std::size_t n = a.rows();
  double scale = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) scale = std::max(scale, std::abs(a(i, j)));
  if (scale == 0.0) return false;
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    for (std::size_t i = k + 1; i < n; ++i)
      if (std::abs(a(i, k)) > std::abs(a(piv, k))) piv = i;
    if (std::abs(a(piv, k)) <= 1e-300 + 1e-15 * scale) return false;
    if (piv != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(a(k, j), a(piv, j));
      std::swap(b[k], b[piv]);
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      const double f = a(i, k) / a(k, k);
      if (f == 0.0) continue;
      for (std::size_t j = k; j < n; ++j) a(i, j) -= f * a(k, j);
      b[i] -= f * b[k];
    }
  }
  x.assign(n, 0.0);
  for (std::size_t k = n; k-- > 0;) {
    double s = b[k];
    for (std::size_t j = k + 1; j < n; ++j) s -= a(k, j) * x[j];
    x[k] = s / a(k, k);
  }
  return true;
}

namespace detail {

// y = M x (transpose=false) or y = M^T x, with M scaled by exp(-shift).
inline void apply(const LogWeightedGraph& g, std::span<const double> w, std::span<const double> x,
                  std::span<double> y, bool transpose) {
  std::fill(y.begin(), y.end(), 0.0);
  for (std::size_t e = 0; e < g.edges.size(); ++e) {
    const auto& ed = g.edges[e];
    if (transpose) {
      y[ed.to] += w[e] * x[ed.from];
    } else {
      y[ed.from] += w[e] * x[ed.to];
    }
  }
}

// Power iteration for the dominant eigenvector of a primitive matrix. Returns
// the Collatz-Wielandt bracket [lo, hi] for the eigenvalue of the scaled
// matrix; `identity_shift` adds that multiple of I (used for periodic blocks).
inline bool power_iterate(const LogWeightedGraph& g, std::span<const double> w, bool transpose,
                          double identity_shift, const PerronOptions& opt, std::vector<double>& v,
                          double& lo, double& hi, long& iters) {
  const auto n = static_cast<std::size_t>(g.size);
  v.assign(n, 1.0 / static_cast<double>(n));
  std::vector<double> y(n);
  for (iters = 1; iters <= opt.max_iterations; ++iters) {
    apply(g, w, v, y, transpose);
    lo = std::numeric_limits<double>::infinity();
    hi = 0.0;
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      y[i] += identity_shift * v[i];
      if (v[i] > 0.0) {
        const double ratio = y[i] / v[i];
        lo = std::min(lo, ratio);
        hi = std::max(hi, ratio);
      } else if (y[i] > 0.0) {
        lo = 0.0;
        hi = std::numeric_limits<double>::infinity();
      }
      sum += y[i];
    }
    if (!(sum > 0.0) || !std::isfinite(sum)) return false;
    for (std::size_t i = 0; i < n; ++i) v[i] = y[i] / sum;
    if (hi > 0.0 && lo > 0.0 && (hi - lo) <= opt.tolerance * hi) return true;
  }
  return false;
}

// Collatz-Wielandt bracket of B = M + shift I at a positive vector.
inline bool cw_bracket(const LogWeightedGraph& g, std::span<const double> w, bool transpose,
                       double identity_shift, std::span<const double> v, double& lo, double& hi) {
  std::vector<double> y(v.size());
  apply(g, w, v, y, transpose);
  lo = std::numeric_limits<double>::infinity();
  hi = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!(v[i] > 0.0)) return false;
    const double ratio = (y[i] + identity_shift * v[i]) / v[i];
    lo = std::min(lo, ratio);
    hi = std::max(hi, ratio);
  }
  return lo > 0.0;
}

// Shifted inverse iteration with sigma above the Perron root, where
// (sigma - B)^-1 is entrywise positive. Used when power iteration is slow
// because the second eigenvalue is nearly as large as the first.
inline bool inverse_iterate(const LogWeightedGraph& g, std::span<const double> w, bool transpose,
                            double identity_shift, const PerronOptions& opt, std::vector<double>& v,
                            double& lo, double& hi, long& iters) {
  const auto n = static_cast<std::size_t>(g.size);
  if (n > 1500) return false;
  DenseMatrix b(n, n);
  for (std::size_t e = 0; e < g.edges.size(); ++e) {
    const auto& ed = g.edges[e];
    if (transpose) b(ed.to, ed.from) += w[e];
    else b(ed.from, ed.to) += w[e];
  }
  for (std::size_t i = 0; i < n; ++i) {
    b(i, i) += identity_shift;
    if (!(v[i] > 0.0)) v[i] = 1.0 / static_cast<double>(n);
  }
  if (!cw_bracket(g, w, transpose, identity_shift, v, lo, hi)) {
    lo = 0.0;
    hi = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double row = 0.0;
      for (std::size_t j = 0; j < n; ++j) row += b(i, j);
      hi = std::max(hi, row);
    }
  }
  // The shift follows the bracket down, so a second eigenvalue close to the
  // first is still separated; bump grows if sigma - B turns out singular.
  double bump = 1.0;
  for (int round = 0; round < 200; ++round, ++iters) {
    const double offset = bump * std::max(64.0 * std::numeric_limits<double>::epsilon(), 1e-3 * (hi - lo) / hi);
    const double sigma = hi * (1.0 + offset);
    DenseMatrix a(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) a(i, j) = (i == j ? sigma : 0.0) - b(i, j);
    std::vector<double> x;
    if (!lu_solve(std::move(a), v, x)) {
      bump *= 10.0;
      continue;
    }
    double sum = 0.0;
    for (double& xi : x) {
      xi = std::abs(xi);
      sum += xi;
    }
    if (!(sum > 0.0) || !std::isfinite(sum)) return false;
    for (std::size_t i = 0; i < n; ++i) v[i] = x[i] / sum;
    double l2 = 0.0, h2 = 0.0;
    if (!cw_bracket(g, w, transpose, identity_shift, v, l2, h2)) continue;
    // A bracket that stops shrinking has hit rounding; accept it if it is
    // still tight (the caller reports the bracket as the residual).
    const bool stalled = h2 - l2 >= 0.5 * (hi - lo) && round > 5;
    lo = l2;
    hi = h2;
    if ((hi - lo) <= opt.tolerance * hi) return true;
    if (stalled && (hi - lo) <= 1e3 * opt.tolerance * hi) return true;
  }
  return false;
}

// Repeated squaring of B = M + shift I. Products of nonnegative entries never
// cancel, so even components many orders below the largest keep full relative
// accuracy; inverse iteration loses those when the matrix is nearly
// reducible. Dense, so only for small graphs.
inline bool squaring_vector(const LogWeightedGraph& g, std::span<const double> w, bool transpose,
                            double identity_shift, const PerronOptions& opt, std::vector<double>& v,
                            double& lo, double& hi, long& iters) {
  const auto n = static_cast<std::size_t>(g.size);
  if (n > 400) return false;
  DenseMatrix b(n, n);
  for (std::size_t e = 0; e < g.edges.size(); ++e) {
    const auto& ed = g.edges[e];
    if (transpose) b(ed.to, ed.from) += w[e];
    else b(ed.from, ed.to) += w[e];
  }
  for (std::size_t i = 0; i < n; ++i) b(i, i) += identity_shift;
  DenseMatrix c(n, n);
  v.assign(n, 0.0);
  for (int round = 0; round < 64; ++round, ++iters) {
    double top = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        double s = 0.0;
        for (std::size_t k = 0; k < n; ++k) s += b(i, k) * b(k, j);
        c(i, j) = s;
        top = std::max(top, s);
      }
    if (!(top > 0.0) || !std::isfinite(top)) return false;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) b(i, j) = c(i, j) / top;
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      v[i] = 0.0;
      for (std::size_t j = 0; j < n; ++j) v[i] += b(i, j);
      sum += v[i];
    }
    for (double& x : v) x /= sum;
    if (cw_bracket(g, w, transpose, identity_shift, v, lo, hi) && (hi - lo) <= opt.tolerance * hi) return true;
  }
  return false;
}

// Power iteration with a bounded budget, then inverse iteration.
inline bool dominant_vector(const LogWeightedGraph& g, std::span<const double> w, bool transpose,
                            double identity_shift, const PerronOptions& opt, std::vector<double>& v,
                            double& lo, double& hi, long& iters) {
  // Give power iteration about the work of ten dense solves before switching.
  PerronOptions quick = opt;
  const double n = g.size, dense = 10.0 * n * n * n / (3.0 * std::max<std::size_t>(g.edges.size(), 1));
  quick.max_iterations = std::min<long>(opt.max_iterations, static_cast<long>(std::clamp(dense, 200.0, 20000.0)));
  if (power_iterate(g, w, transpose, identity_shift, quick, v, lo, hi, iters)) return true;
  long extra = 0;
  if (inverse_iterate(g, w, transpose, identity_shift, opt, v, lo, hi, extra)) {
    iters += extra;
    return true;
  }
  if (squaring_vector(g, w, transpose, identity_shift, opt, v, lo, hi, extra)) {
    iters += extra;
    return true;
  }
  if (opt.max_iterations <= quick.max_iterations) return false;
  return power_iterate(g, w, transpose, identity_shift, opt, v, lo, hi, iters);
}

}  // namespace detail

namespace detail {

// Averaged max-plus power iteration: approximate logs of the Perron vector,
// which dominate once the weights span hundreds of nats. The averaging damps
// the oscillation that cyclic critical cycles cause in the plain iteration.
inline std::vector<double> averaged_tropical_vector(const LogWeightedGraph& g, bool transpose) {
  const auto n = static_cast<std::size_t>(g.size);
  std::vector<double> x(n, 0.0), y(n);
  for (int r = 0; r < 2000; ++r) {
    std::fill(y.begin(), y.end(), -std::numeric_limits<double>::infinity());
    for (const auto& e : g.edges) {
      if (transpose) y[e.to] = std::max(y[e.to], x[e.from] + e.log_weight);
      else y[e.from] = std::max(y[e.from], x[e.to] + e.log_weight);
    }
    const double top = *std::max_element(y.begin(), y.end());
    double change = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double next = std::isfinite(y[i]) ? 0.5 * (x[i] + y[i] - top) : x[i];
      change = std::max(change, std::abs(next - x[i]));
      x[i] = next;
    }
    if (change < 1e-3) break;
  }
  const double top = *std::max_element(x.begin(), x.end());
  for (double& v : x) v -= top;
  return x;
}

// Max-plus eigenvector used to balance widely spread weights: with lambda the
// maximal cycle mean (Karp), x_i is the heaviest path of weights w - lambda
// from i to the critical nodes (into i from them for the transpose). Then
// w_ij + x_j - x_i <= lambda with equality along those paths, and the
// Perron vector of the rescaled matrix has no astronomically small entries.
inline std::vector<double> tropical_vector(const LogWeightedGraph& g, bool transpose) {
  const auto n = static_cast<std::size_t>(g.size);
  // Karp keeps an n x n table; large graphs settle for the cheap estimate.
  if (n > 2000) return averaged_tropical_vector(g, transpose);
  constexpr double ninf = -std::numeric_limits<double>::infinity();
  auto src = [&](const LogWeightedGraph::Edge& e) { return transpose ? e.to : e.from; };
  auto dst = [&](const LogWeightedGraph::Edge& e) { return transpose ? e.from : e.to; };
  // Karp on walks ending at each node (reversal does not change cycle means).
  std::vector<std::vector<double>> walk(n + 1, std::vector<double>(n, ninf));
  std::fill(walk[0].begin(), walk[0].end(), 0.0);
  for (std::size_t k = 1; k <= n; ++k)
    for (const auto& e : g.edges)
      walk[k][dst(e)] = std::max(walk[k][dst(e)], walk[k - 1][src(e)] + e.log_weight);
  double lambda = ninf;
  for (std::size_t v = 0; v < n; ++v) {
    if (walk[n][v] == ninf) continue;
    double worst = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < n; ++k)
      if (walk[k][v] != ninf) worst = std::min(worst, (walk[n][v] - walk[k][v]) / static_cast<double>(n - k));
    lambda = std::max(lambda, worst);
  }
  // Potentials with no positive reduced weight; tight edges then carry the
  // critical cycles.
  std::vector<double> pot(n, 0.0);
  for (std::size_t it = 0; it < n; ++it) {
    bool changed = false;
    for (const auto& e : g.edges) {
      const double v = pot[dst(e)] + e.log_weight - lambda;
      if (v > pot[src(e)] + 1e-12 * (1.0 + std::abs(v))) {
        pot[src(e)] = v;
        changed = true;
      }
    }
    if (!changed) break;
  }
  const double tol = 1e-9 * (1.0 + std::abs(lambda));
  // Critical nodes: those that return to themselves along tight edges.
  std::vector<std::vector<int>> tight(n);
  for (const auto& e : g.edges)
    if (pot[dst(e)] + e.log_weight - lambda >= pot[src(e)] - tol) tight[src(e)].push_back(dst(e));
  std::vector<double> x(n, ninf);
  for (std::size_t s = 0; s < n; ++s) {
    std::vector<char> seen(n, 0);
    std::vector<int> stack(tight[s].begin(), tight[s].end());
    bool back = false;
    while (!stack.empty() && !back) {
      const int v = stack.back();
      stack.pop_back();
      if (static_cast<std::size_t>(v) == s) back = true;
      if (seen[v]) continue;
      seen[v] = 1;
      for (int w : tight[v]) stack.push_back(w);
    }
    if (back) x[s] = 0.0;
  }
  for (std::size_t it = 0; it < n; ++it) {
    bool changed = false;
    for (const auto& e : g.edges) {
      if (x[dst(e)] == ninf) continue;
      const double v = x[dst(e)] + e.log_weight - lambda;
      if (v > x[src(e)] + 1e-12 * (1.0 + std::abs(v))) {
        x[src(e)] = v;
        changed = true;
      }
    }
    if (!changed) break;
  }
  const double top = *std::max_element(x.begin(), x.end());
  for (double& v : x) v = v == ninf ? 0.0 : v - top;
  return x;
}

// Weights exp(log_weight + scale[to] - scale[from]) (or from/to swapped for
// the transpose), divided by their maximum.
inline std::vector<double> scaled_weights(const LogWeightedGraph& g, const std::vector<double>& scale, bool transpose,
                                          double& shift) {
  std::vector<double> lw(g.edges.size());
  shift = -std::numeric_limits<double>::infinity();
  for (std::size_t e = 0; e < lw.size(); ++e) {
    const auto& ed = g.edges[e];
    lw[e] = ed.log_weight;
    if (!scale.empty()) lw[e] += transpose ? scale[ed.from] - scale[ed.to] : scale[ed.to] - scale[ed.from];
    shift = std::max(shift, lw[e]);
  }
  for (double& v : lw) v = std::exp(v - shift);
  return lw;
}

}  // namespace detail

/// Perron root and eigenvectors of exp(log_weight) for a primitive matrix.
inline PerronData perron(const LogWeightedGraph& g, const PerronOptions& opt = {}) {
  if (g.size <= 0 || g.edges.empty()) throw PreconditionError("perron: empty matrix");
  double lw_lo = std::numeric_limits<double>::infinity(), lw_hi = -lw_lo;
  for (const auto& e : g.edges) {
    lw_lo = std::min(lw_lo, e.log_weight);
    lw_hi = std::max(lw_hi, e.log_weight);
  }
  PerronData out;
  // Widely spread weights make the plain matrix badly conditioned (and can
  // underflow); balance it by a diagonal similarity first.
  if (lw_hi - lw_lo > 10.0) {
    out.right_log_scale = detail::tropical_vector(g, false);
    if (opt.want_left) out.left_log_scale = detail::tropical_vector(g, true);
  }
  double shift = 0.0;
  const auto w = detail::scaled_weights(g, out.right_log_scale, false, shift);

  double lo = 0, hi = 0;
  long iters = 0;
  if (!detail::dominant_vector(g, w, false, 0.0, opt, out.right, lo, hi, iters)) {
    throw ConvergenceError("perron: power iteration did not converge", std::log(lo) + shift,
                           std::log(hi) + shift);
  }
  out.iterations = iters;
  out.log_lambda = 0.5 * (std::log(lo) + std::log(hi)) + shift;
  out.residual = 0.5 * (std::log(hi) - std::log(lo));
  if (opt.want_left) {
    double left_shift = 0.0;
    const auto wl = detail::scaled_weights(g, out.left_log_scale, true, left_shift);
    if (!detail::dominant_vector(g, wl, true, 0.0, opt, out.left, lo, hi, iters)) {
      throw ConvergenceError("perron: left power iteration did not converge");
    }
    out.iterations += iters;
  }
  return out;
}

/// log of the spectral radius of an irreducible (possibly periodic) matrix.
/// Works on M/s + I, which is primitive and has Perron root rho(M)/s + 1.
inline double log_spectral_radius_irreducible(const LogWeightedGraph& g,
                                              const PerronOptions& opt = {}) {
  double lw_lo = std::numeric_limits<double>::infinity(), lw_hi = -lw_lo;
  for (const auto& e : g.edges) {
    lw_lo = std::min(lw_lo, e.log_weight);
    lw_hi = std::max(lw_hi, e.log_weight);
  }
  std::vector<double> scale;
  if (lw_hi - lw_lo > 10.0) scale = detail::tropical_vector(g, false);
  double shift = 0.0;
  const auto w = detail::scaled_weights(g, scale, false, shift);
  std::vector<double> v;
  double lo = 0, hi = 0;
  long iters = 0;
  if (!detail::dominant_vector(g, w, false, 1.0, opt, v, lo, hi, iters)) {
    throw ConvergenceError("spectral radius: power iteration did not converge");
  }
  const double rho = 0.5 * (lo + hi) - 1.0;
  if (rho <= 0.0) return -std::numeric_limits<double>::infinity();
  return std::log(rho) + shift;
}

/// Stationary distribution of an irreducible stochastic matrix by GTH
/// elimination: no subtractions, so tiny probabilities keep their relative
/// accuracy. Returns an empty vector if the chain is numerically reducible.
inline std::vector<double> gth_stationary(DenseMatrix p) {
  const std::size_t n = p.rows();
  for (std::size_t k = n; k-- > 1;) {
    double s = 0.0;
    for (std::size_t j = 0; j < k; ++j) s += p(k, j);
    if (!(s > 0.0)) return {};
    for (std::size_t i = 0; i < k; ++i) p(i, k) /= s;
    for (std::size_t i = 0; i < k; ++i) {
      const double a = p(i, k);
      if (a == 0.0) continue;
      for (std::size_t j = 0; j < k; ++j) p(i, j) += a * p(k, j);
    }
  }
  std::vector<double> pi(n, 0.0);
  pi[0] = 1.0;
  double total = 1.0;
  for (std::size_t j = 1; j < n; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < j; ++i) s += pi[i] * p(i, j);
    pi[j] = s;
    total += s;
  }
  for (double& x : pi) x /= total;
  return pi;
}

/// Pairwise (cascade) summation: deterministic for a fixed input order.
inline double pairwise_sum(std::span<const double> v) {
  if (v.size() <= 8) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
  }
  const std::size_t half = v.size() / 2;
  return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

/// log(sum exp(v)) with pairwise summation.
inline double log_sum_exp(std::span<const double> v) {
  if (v.empty()) return -std::numeric_limits<double>::infinity();
  const double mx = *std::max_element(v.begin(), v.end());
  if (!std::isfinite(mx)) return mx;
  std::vector<double> e(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) e[i] = std::exp(v[i] - mx);
  return mx + std::log(pairwise_sum(e));
}

}  // namespace thermo
