#pragma once

// Topological pressure of locally constant potentials on primitive subshifts:
// transfer-operator spectral radius, the variational functional evaluated at
// the Gibbs-Markov witness, and finite-n cylinder covers.

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "thermo/block_graph.hpp"
#include "thermo/error.hpp"
#include "thermo/linalg.hpp"
#include "thermo/measures.hpp"
#include "thermo/sft.hpp"

namespace thermo {

enum class PressureMethod { spectral, variational, cover };

inline const char* to_string(PressureMethod m) {
  switch (m) {
    case PressureMethod::spectral:
      return "spectral";
    case PressureMethod::variational:
      return "variational";
    case PressureMethod::cover:
      return "cover";
  }
  return "?";
}

struct PressureResult {
  double value = 0.0;
  PressureMethod method = PressureMethod::spectral;
  double residual = 0.0;
  std::optional<MarkovMeasure> witness;
};

/// Transfer matrices exp(phi + sum_i q_i f_i) on one block graph. Built once,
/// evaluated for many tilts q.
class TransferFamily {
 public:
  static constexpr std::size_t kGthStates = 1000;

  TransferFamily(const Potential& phi, std::span<const Potential> observables, int min_order = 1) {
    const Subshift& spec = phi.subshift();
    require_primitive(spec);
    int depth = phi.depth();
    for (const auto& f : observables) {
      if (!(f.subshift() == spec)) throw PreconditionError("observables live on a different subshift");
      depth = std::max(depth, f.depth());
    }
    graph_ = std::make_shared<const BlockGraph>(spec, std::max(block_order_for(depth), min_order));
    base_ = graph_->edge_values(phi);
    for (const auto& f : observables) obs_.push_back(graph_->edge_values(f));
  }

  const BlockGraph& graph() const { return *graph_; }
  std::shared_ptr<const BlockGraph> graph_ptr() const { return graph_; }
  std::size_t dimension() const { return obs_.size(); }
  std::span<const double> base_values() const { return base_; }
  std::span<const double> observable_values(std::size_t i) const { return obs_[i]; }

  /// phi + beta * psi style re-weighting of the base potential: base * scale.
  std::vector<double> log_weights(std::span<const double> q, double base_scale = 1.0) const {
    std::vector<double> w(base_.size());
    for (std::size_t e = 0; e < w.size(); ++e) {
      double v = base_scale * base_[e];
      for (std::size_t i = 0; i < q.size(); ++i) v += q[i] * obs_[i][e];
      w[e] = v;
    }
    return w;
  }

  PerronData perron_at(std::span<const double> q, bool want_left, double base_scale = 1.0,
                       const PerronOptions& opt = {}) const {
    PerronOptions o = opt;
    o.want_left = want_left;
    return perron(graph_->weighted(log_weights(q, base_scale)), o);
  }

  /// Gibbs-Markov edge transition probabilities and block weights.
  struct Gibbs {
    double log_lambda;
    double residual;
    std::vector<double> transition;
    std::vector<double> stationary;
  };

  Gibbs gibbs_at(std::span<const double> q, double base_scale = 1.0) const {
    const auto lw = log_weights(q, base_scale);
    // Small graphs get the stationary law from the transition matrix by GTH,
    // which stays accurate when the chain is nearly reducible; larger ones
    // use the left eigenvector.
    const std::size_t n = static_cast<std::size_t>(graph_->size());
    PerronOptions po;
    po.want_left = n > kGthStates;
    const auto pd = perron(graph_->weighted(lw), po);
    const auto& edges = graph_->edges();
    Gibbs g{pd.log_lambda, pd.residual, std::vector<double>(edges.size()),
            std::vector<double>(static_cast<std::size_t>(graph_->size()))};
    auto scale = [](const std::vector<double>& s, int i) { return s.empty() ? 0.0 : s[static_cast<std::size_t>(i)]; };
    std::vector<double> row(g.stationary.size(), 0.0);
    for (std::size_t e = 0; e < edges.size(); ++e) {
      const auto& ed = edges[e];
      const double ds = scale(pd.right_log_scale, ed.to) - scale(pd.right_log_scale, ed.from);
      g.transition[e] = std::exp(lw[e] + ds - pd.log_lambda) * pd.right[ed.to] / pd.right[ed.from];
      row[ed.from] += g.transition[e];
    }
    for (std::size_t e = 0; e < edges.size(); ++e) g.transition[e] /= row[edges[e].from];
    if (n <= kGthStates) {
      DenseMatrix p(n, n);
      for (std::size_t e = 0; e < edges.size(); ++e) p(edges[e].from, edges[e].to) += g.transition[e];
      g.stationary = gth_stationary(std::move(p));
      if (g.stationary.empty()) throw ConvergenceError("gibbs: transition matrix is numerically reducible");
      return g;
    }
    if (pd.right_log_scale.empty() && pd.left_log_scale.empty()) {
      double total = 0.0;
      for (std::size_t u = 0; u < g.stationary.size(); ++u) {
        g.stationary[u] = pd.left[u] * pd.right[u];
        total += g.stationary[u];
      }
      for (double& s : g.stationary) s /= total;
      return g;
    }
    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t u = 0; u < g.stationary.size(); ++u) {
      const int i = static_cast<int>(u);
      g.stationary[u] = std::log(pd.left[u]) + std::log(pd.right[u]) + scale(pd.left_log_scale, i) +
                        scale(pd.right_log_scale, i);
      top = std::max(top, g.stationary[u]);
    }
    double total = 0.0;
    for (double& s : g.stationary) total += (s = std::exp(s - top));
    for (double& s : g.stationary) s /= total;
    return g;
  }

  /// Integrals of the observables against the Gibbs measure at tilt q.
  std::vector<double> observable_means(const Gibbs& g) const {
    std::vector<double> out(obs_.size(), 0.0);
    const auto& edges = graph_->edges();
    for (std::size_t e = 0; e < edges.size(); ++e) {
      const double flow = g.stationary[edges[e].from] * g.transition[e];
      for (std::size_t i = 0; i < obs_.size(); ++i) out[i] += flow * obs_[i][e];
    }
    return out;
  }

  /// Second derivative of the pressure in the tilt: the asymptotic covariance
  /// sum_k Cov(f_i, f_j o sigma^k) of the observables under the Gibbs chain,
  /// through the fundamental matrix (I - P + 1 pi^T)^-1. Empty when the block
  /// graph is too large for a dense solve.
  std::vector<std::vector<double>> observable_covariance(const Gibbs& g, std::size_t max_states = 1500) const {
    const std::size_t n = g.stationary.size(), d = obs_.size();
    if (n > max_states) return {};
    const auto& edges = graph_->edges();
    const auto mean = observable_means(g);
    DenseMatrix a(n, n);
    for (std::size_t u = 0; u < n; ++u) {
      a(u, u) += 1.0;
      for (std::size_t v = 0; v < n; ++v) a(u, v) += g.stationary[v];
    }
    for (std::size_t e = 0; e < edges.size(); ++e) a(edges[e].from, edges[e].to) -= g.transition[e];
    std::vector<std::vector<double>> u(d);
    for (std::size_t i = 0; i < d; ++i) {
      std::vector<double> h(n, 0.0);
      for (std::size_t e = 0; e < edges.size(); ++e) h[edges[e].from] += g.transition[e] * (obs_[i][e] - mean[i]);
      if (!lu_solve(a, h, u[i])) return {};
    }
    std::vector<std::vector<double>> cov(d, std::vector<double>(d, 0.0));
    for (std::size_t e = 0; e < edges.size(); ++e) {
      const double flow = g.stationary[edges[e].from] * g.transition[e];
      for (std::size_t i = 0; i < d; ++i) {
        const double fi = obs_[i][e] - mean[i];
        for (std::size_t j = 0; j < d; ++j) {
          const double fj = obs_[j][e] - mean[j];
          cov[i][j] += flow * (fi * fj + fi * u[j][edges[e].to] + fj * u[i][edges[e].to]);
        }
      }
    }
    return cov;
  }

  MarkovMeasure measure(const Gibbs& g) const {
    return MarkovMeasure::from_transition(graph_, g.transition, g.stationary);
  }

 private:
  std::shared_ptr<const BlockGraph> graph_;
  std::vector<double> base_;
  std::vector<std::vector<double>> obs_;
};

/// log of the Perron root of the transfer matrix on the (k-1)-block graph.
inline PressureResult spectral_pressure(const Potential& phi) {
  require_primitive(phi.subshift());
  const BlockGraph g(phi.subshift(), block_order_for(phi.depth()));
  PerronOptions opt;
  opt.want_left = false;
  const auto pd = perron(g.weighted(g.edge_values(phi)), opt);
  return {pd.log_lambda, PressureMethod::spectral, pd.residual, std::nullopt};
}

/// Equilibrium state of phi as a Markov measure of the given order (at least
/// depth - 1): P(u->v) = M(u,v) r(v) / (lambda r(u)), pi = l * r.
inline MarkovMeasure equilibrium_measure(const Potential& phi, int order = 1) {
  const TransferFamily fam(phi, {}, order);
  return fam.measure(fam.gibbs_at({}));
}

/// Maximizes h(mu) + int phi dmu over Markov measures of order r. The maximizer
/// is the Gibbs-Markov measure; the value is the functional evaluated at it.
inline PressureResult variational_pressure(const Potential& phi, int order) {
  if (order < phi.depth() - 1) throw PreconditionError("variational: order must be at least depth - 1");
  const TransferFamily fam(phi, {}, order);
  const auto g = fam.gibbs_at({});
  auto mu = fam.measure(g);
  const double value = entropy(mu) + integrate(phi, mu);
  return {value, PressureMethod::variational, g.residual + std::abs(value - g.log_lambda), std::move(mu)};
}

struct CoverOptions {
  double tolerance = 1e-13;  // bisection bracket width in t
  std::size_t word_cap = kDefaultWordCap;
};

/// Finite-n cover estimate of the pressure of a union of cylinders.
///
/// Sums exp(-t n + sup_{[w]} S_n phi) over the given cylinders (each of length
/// n + epsilon_index) and bisects for the t where the sum crosses 1.
inline PressureResult cover_pressure(const Potential& phi, int n, std::span<const Word> cylinders,
                                     const CoverOptions& opt = {}) {
  if (n < 1) throw PreconditionError("cover: n must be at least 1");
  if (cylinders.empty()) throw PreconditionError("cover: empty collection of cylinders");
  std::vector<double> sup_sums;
  sup_sums.reserve(cylinders.size());
  for (const auto& w : cylinders) {
    if (static_cast<int>(w.size()) < n) throw PreconditionError("cover: cylinder shorter than n");
    if (!phi.subshift().admissible(w)) throw PreconditionError("cover: cylinder '" + w.str() + "' is not admissible");
    sup_sums.push_back(extremal_birkhoff_sum(phi, w.view(), n, /*maximize=*/true));
  }
  const double log_total = log_sum_exp(sup_sums);
  // log sum exp(-t n + s_w) = log_total - t n is decreasing in t; bracket and bisect.
  auto excess = [&](double t) { return log_total - t * static_cast<double>(n); };
  double lo = *std::min_element(sup_sums.begin(), sup_sums.end()) / n - 1.0;
  double hi = log_total / n + 1.0;
  while (hi - lo > opt.tolerance * std::max(1.0, std::abs(hi))) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    (excess(mid) > 0.0 ? lo : hi) = mid;
  }
  return {0.5 * (lo + hi), PressureMethod::cover, hi - lo, std::nullopt};
}

/// Cover estimate over all of X; epsilon_index adds that many symbols to the
/// cylinder depth (0: covers by n-cylinders).
inline PressureResult cover_pressure(const Potential& phi, int n, int epsilon_index = 0,
                                     const CoverOptions& opt = {}) {
  if (epsilon_index < 0) throw PreconditionError("cover: epsilon index must be nonnegative");
  const auto words = enumerate_words(phi.subshift(), n + epsilon_index, opt.word_cap);
  return cover_pressure(phi, n, words, opt);
}

}  // namespace thermo
