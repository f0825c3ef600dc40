#pragma once

// Markov and empirical measures: entropy, integrals of potentials, Birkhoff
// averages and the truncated weak-* metric rho built from cylinder
// indicators.

#include <cmath>
#include <concepts>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "thermo/block_graph.hpp"
#include "thermo/error.hpp"
#include "thermo/linalg.hpp"
#include "thermo/sft.hpp"

namespace thermo {

/// One nonzero entry of a row-stochastic matrix.
struct Transition {
  int from;
  int to;
  double p;
};

struct StationaryOptions {
  double residual = 1e-14;  // L1 norm of pi P - pi
  long max_iterations = 1000000;
};

/// Stationary vector of a stochastic matrix with a single recurrent class.
///
/// Runs power iteration on the lazy chain (I + P)/2, which has the same
/// stationary vector and is aperiodic. Transient states get probability 0.
inline std::vector<double> stationary_distribution(int n, std::span<const Transition> p,
                                                   std::span<const double> initial = {},
                                                   const StationaryOptions& opt = {}) {
  if (n <= 0) throw PreconditionError("stationary: empty chain");
  std::vector<double> row(static_cast<std::size_t>(n), 0.0);
  std::vector<BlockGraph::Edge> support;
  for (const auto& t : p) {
    if (t.from < 0 || t.from >= n || t.to < 0 || t.to >= n) throw PreconditionError("stationary: index out of range");
    if (t.p < 0.0) throw PreconditionError("stationary: negative transition probability");
    row[t.from] += t.p;
    if (t.p > 0.0) support.push_back({t.from, t.to, 0});
  }
  for (int i = 0; i < n; ++i) {
    if (std::abs(row[i] - 1.0) > 1e-12) {
      throw PreconditionError("stationary: row " + std::to_string(i) + " sums to " + std::to_string(row[i]));
    }
  }
  int count = 0;
  const auto comp = detail::strongly_connected(n, support, std::vector<bool>(support.size(), true), count);
  std::vector<char> leaves(static_cast<std::size_t>(count), 0);
  for (const auto& e : support)
    if (comp[e.from] != comp[e.to]) leaves[comp[e.from]] = 1;
  int closed = 0;
  for (char l : leaves) closed += l ? 0 : 1;
  if (closed != 1) {
    throw PreconditionError("stationary: chain has " + std::to_string(closed) +
                            " recurrent classes (reducible support)");
  }

  std::vector<double> pi(static_cast<std::size_t>(n), 1.0 / n), next(static_cast<std::size_t>(n));
  if (initial.size() == static_cast<std::size_t>(n)) pi.assign(initial.begin(), initial.end());
  for (long it = 0; it < opt.max_iterations; ++it) {
    std::fill(next.begin(), next.end(), 0.0);
    for (const auto& t : p) next[t.to] += pi[t.from] * t.p;
    double resid = 0.0, sum = 0.0;
    for (int i = 0; i < n; ++i) {
      resid += std::abs(next[i] - pi[i]);
      next[i] = 0.5 * (next[i] + pi[i]);
      sum += next[i];
    }
    for (double& v : next) v /= sum;
    std::swap(pi, next);
    if (resid <= opt.residual) return pi;
  }
  throw ConvergenceError("stationary: power iteration did not reach the residual target");
}

/// Dense convenience overload.
inline std::vector<double> stationary_distribution(const std::vector<std::vector<double>>& p) {
  std::vector<Transition> t;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i].size() != p.size()) throw PreconditionError("stationary: matrix is not square");
    for (std::size_t j = 0; j < p.size(); ++j)
      if (p[i][j] != 0.0) t.push_back({static_cast<int>(i), static_cast<int>(j), p[i][j]});
  }
  return stationary_distribution(static_cast<int>(p.size()), t);
}

/// Shift-invariant Markov measure of order r: a stochastic matrix on the edges
/// of the order-r block graph together with its stationary vector.
class MarkovMeasure {
 public:
  static constexpr double kTolerance = 1e-12;

  MarkovMeasure(std::shared_ptr<const BlockGraph> graph, std::vector<double> transition,
                std::vector<double> stationary)
      : graph_(std::move(graph)), transition_(std::move(transition)), stationary_(std::move(stationary)) {
    validate();
  }

  /// Builds the measure from edge transition probabilities; the stationary
  /// vector is computed (optionally warm-started).
  static MarkovMeasure from_transition(std::shared_ptr<const BlockGraph> graph, std::vector<double> transition,
                                       std::span<const double> initial = {}) {
    std::vector<Transition> t;
    t.reserve(transition.size());
    for (std::size_t e = 0; e < transition.size(); ++e) {
      const auto& ed = graph->edges()[e];
      t.push_back({ed.from, ed.to, transition[e]});
    }
    auto pi = stationary_distribution(graph->size(), t, initial);
    return MarkovMeasure(std::move(graph), std::move(transition), std::move(pi));
  }

  /// Order-1 measure with i.i.d. symbols; needs every transition allowed
  /// wherever the target symbol has positive probability.
  static MarkovMeasure bernoulli(const Subshift& spec, const std::vector<double>& probs) {
    if (static_cast<int>(probs.size()) != spec.alphabet_size()) {
      throw PreconditionError("bernoulli: one probability per symbol expected");
    }
    auto g = std::make_shared<const BlockGraph>(spec, 1);
    std::vector<double> t(g->edges().size());
    for (std::size_t e = 0; e < t.size(); ++e) t[e] = probs[g->edges()[e].symbol];
    return MarkovMeasure(g, t, probs);
  }

  const BlockGraph& graph() const { return *graph_; }
  std::shared_ptr<const BlockGraph> graph_ptr() const { return graph_; }
  const Subshift& subshift() const { return graph_->subshift(); }
  int order() const { return graph_->order(); }
  std::span<const double> transition() const { return transition_; }
  std::span<const double> stationary() const { return stationary_; }

  /// mu([w]) for any admissible word; 0 for inadmissible ones.
  double cylinder_probability(std::span<const Symbol> w) const {
    if (w.empty()) return 1.0;
    if (!subshift().admissible(w)) return 0.0;
    const auto r = static_cast<std::size_t>(order());
    if (w.size() <= r) {
      double s = 0.0;
      for (int u = 0; u < graph_->size(); ++u) {
        const auto& st = graph_->state(u).symbols();
        if (std::equal(w.begin(), w.end(), st.begin())) s += stationary_[u];
      }
      return s;
    }
    int state = graph_->state_index(w.first(r));
    double p = stationary_[state];
    for (std::size_t i = r; i < w.size() && p > 0.0; ++i) {
      const int e = graph_->edge_index(state, w[i]);
      p *= transition_[e];
      state = graph_->edges()[e].to;
    }
    return p;
  }
  double cylinder_probability(const Word& w) const { return cylinder_probability(w.view()); }

  /// The same measure presented on a higher-order block graph.
  MarkovMeasure lifted(int new_order) const {
    if (new_order < order()) throw PreconditionError("cannot lift a Markov measure to a lower order");
    if (new_order == order()) return *this;
    auto g = std::make_shared<const BlockGraph>(subshift(), new_order);
    std::vector<double> pi(static_cast<std::size_t>(g->size()));
    for (int u = 0; u < g->size(); ++u) pi[u] = cylinder_probability(g->state(u));
    std::vector<double> t(g->edges().size());
    const auto r = static_cast<std::size_t>(order());
    for (std::size_t e = 0; e < t.size(); ++e) {
      const auto& ed = g->edges()[e];
      const auto& w = g->state(ed.from).symbols();
      const int tail = graph_->state_index(std::span<const Symbol>(w).last(r));
      t[e] = transition_[graph_->edge_index(tail, ed.symbol)];
    }
    return MarkovMeasure(g, std::move(t), std::move(pi));
  }

 private:
  void validate() const {
    const auto& g = *graph_;
    if (transition_.size() != g.edges().size()) throw PreconditionError("markov: one probability per edge expected");
    if (stationary_.size() != static_cast<std::size_t>(g.size())) {
      throw PreconditionError("markov: one stationary weight per block expected");
    }
    std::vector<double> row(stationary_.size(), 0.0), flow(stationary_.size(), 0.0);
    for (std::size_t e = 0; e < transition_.size(); ++e) {
      const double p = transition_[e];
      if (!(p >= 0.0) || p > 1.0 + kTolerance) throw PreconditionError("markov: transition entry outside [0,1]");
      row[g.edges()[e].from] += p;
      flow[g.edges()[e].to] += stationary_[g.edges()[e].from] * p;
    }
    double total = 0.0;
    for (std::size_t u = 0; u < stationary_.size(); ++u) {
      if (std::abs(row[u] - 1.0) > kTolerance) {
        throw PreconditionError("markov: transition row of block '" + g.state(static_cast<int>(u)).str() +
                                "' sums to " + std::to_string(row[u]));
      }
      if (stationary_[u] < -kTolerance) throw PreconditionError("markov: negative stationary weight");
      if (std::abs(flow[u] - stationary_[u]) > kTolerance) {
        throw PreconditionError("markov: stationary vector is not invariant");
      }
      total += stationary_[u];
    }
    if (std::abs(total - 1.0) > kTolerance) throw PreconditionError("markov: stationary vector does not sum to 1");
  }

  std::shared_ptr<const BlockGraph> graph_;
  std::vector<double> transition_;
  std::vector<double> stationary_;
};

inline double xlogx(double p) { return p > 0.0 ? p * std::log(p) : 0.0; }

/// Kolmogorov-Sinai entropy of a Markov measure.
inline double entropy(const MarkovMeasure& mu) {
  const auto& g = mu.graph();
  double h = 0.0;
  for (std::size_t e = 0; e < g.edges().size(); ++e) {
    h -= mu.stationary()[g.edges()[e].from] * xlogx(mu.transition()[e]);
  }
  return std::max(h, 0.0);
}

/// Integral of a locally constant potential. Measures of too small an order
/// are lifted exactly first.
inline double integrate(const Potential& phi, const MarkovMeasure& mu) {
  if (!(phi.subshift() == mu.subshift())) throw PreconditionError("integrate: potential and measure differ in subshift");
  if (phi.depth() > mu.order() + 1) return integrate(phi, mu.lifted(phi.depth() - 1));
  const auto& g = mu.graph();
  const auto values = g.edge_values(phi);
  double s = 0.0;
  for (std::size_t e = 0; e < values.size(); ++e) {
    s += mu.stationary()[g.edges()[e].from] * mu.transition()[e] * values[e];
  }
  return s;
}

/// Window statistics of a finite orbit: counts of each depth-k word among the
/// first n windows x[i..i+k).
class EmpiricalMeasure {
 public:
  EmpiricalMeasure(const Subshift& spec, int depth, long n) : spec_(spec), depth_(depth), n_(n) {
    if (depth < 1) throw PreconditionError("empirical: depth must be at least 1");
    if (n < 1) throw PreconditionError("empirical: window must be at least 1");
    counts_.assign(static_cast<std::size_t>(std::pow(static_cast<double>(spec.alphabet_size()), depth)), 0);
  }

  const Subshift& subshift() const { return spec_; }
  int depth() const { return depth_; }
  long window() const { return n_; }

  std::int64_t count(std::span<const Symbol> w) const { return counts_[code(w)]; }
  std::int64_t count(const Word& w) const { return count(w.view()); }
  void add(std::span<const Symbol> w) { ++counts_[code(w)]; }

  /// Nonzero counts in lexicographic order.
  std::vector<std::pair<Word, std::int64_t>> entries() const {
    std::vector<std::pair<Word, std::int64_t>> out;
    for_each_word(spec_, depth_, [&](std::span<const Symbol> w) {
      const auto c = counts_[code(w)];
      if (c) out.emplace_back(Word(std::vector<Symbol>(w.begin(), w.end())), c);
    });
    return out;
  }

  /// Number of windows starting with w, for |w| <= depth.
  std::int64_t prefix_count(std::span<const Symbol> w) const {
    if (static_cast<int>(w.size()) > depth_) throw PreconditionError("empirical: cylinder deeper than the recorded depth");
    const auto m = static_cast<std::size_t>(spec_.alphabet_size());
    std::size_t base = 0;
    for (Symbol s : w) base = base * m + static_cast<std::size_t>(s);
    std::size_t span = 1;
    for (int i = static_cast<int>(w.size()); i < depth_; ++i) span *= m;
    base *= span;
    std::int64_t total = 0;
    for (std::size_t i = 0; i < span; ++i) total += counts_[base + i];
    return total;
  }

  /// (L_n x)([w]) for |w| <= depth.
  double cylinder_probability(std::span<const Symbol> w) const {
    if (w.empty()) return 1.0;
    return static_cast<double>(prefix_count(w)) / static_cast<double>(n_);
  }
  double cylinder_probability(const Word& w) const { return cylinder_probability(w.view()); }

 private:
  std::size_t code(std::span<const Symbol> w) const {
    std::size_t c = 0;
    for (Symbol s : w) c = c * static_cast<std::size_t>(spec_.alphabet_size()) + static_cast<std::size_t>(s);
    return c;
  }

  Subshift spec_;
  int depth_;
  long n_;
  std::vector<std::int64_t> counts_;
};

inline EmpiricalMeasure empirical_measure(const Subshift& spec, const Word& x, int depth, long n) {
  if (static_cast<long>(x.size()) < n + depth - 1) {
    throw PreconditionError("empirical: word of length " + std::to_string(x.size()) + " is shorter than n + k - 1 = " +
                            std::to_string(n + depth - 1));
  }
  EmpiricalMeasure em(spec, depth, n);
  for (long i = 0; i < n; ++i) em.add(x.view(static_cast<std::size_t>(i), static_cast<std::size_t>(depth)));
  return em;
}

inline double birkhoff_average(const Word& x, const Potential& phi, long n) {
  if (n < 1) throw PreconditionError("birkhoff: n must be at least 1");
  const long k = phi.depth();
  if (static_cast<long>(x.size()) < n + k - 1) {
    throw PreconditionError("birkhoff: word too short for " + std::to_string(n) + " windows of depth " +
                            std::to_string(k));
  }
  double s = 0.0;
  for (long i = 0; i < n; ++i) s += phi(x.view(static_cast<std::size_t>(i), static_cast<std::size_t>(k)));
  return s / static_cast<double>(n);
}

/// Integral of phi against an empirical measure (depth must cover phi).
inline double integrate(const Potential& phi, const EmpiricalMeasure& em) {
  if (phi.depth() > em.depth()) throw PreconditionError("integrate: empirical depth is smaller than the potential depth");
  double s = 0.0;
  for_each_word(em.subshift(), em.depth(), [&](std::span<const Symbol> w) {
    const auto c = em.count(w);
    if (c) s += static_cast<double>(c) * phi(w);
  });
  return s / static_cast<double>(em.window());
}

template <class M>
concept CylinderMeasure = requires(const M& m, std::span<const Symbol> w) {
  { m.cylinder_probability(w) } -> std::convertible_to<double>;
  { m.subshift() } -> std::convertible_to<const Subshift&>;
};

/// The fixed test family for rho: indicators of admissible cylinders listed by
/// length, then lexicographically. Returns the first `count` of them.
inline std::vector<Word> rho_test_family(const Subshift& spec, int count) {
  std::vector<Word> family;
  for (int len = 1; static_cast<int>(family.size()) < count; ++len) {
    for_each_word(spec, len, [&](std::span<const Symbol> w) {
      if (static_cast<int>(family.size()) < count) family.emplace_back(std::vector<Symbol>(w.begin(), w.end()));
    });
  }
  return family;
}

/// Deepest cylinder used by the first `count` test functions.
inline int rho_depth(const Subshift& spec, int count) {
  int len = 0;
  double seen = 0.0;
  while (seen < count) seen += word_count(spec, ++len);
  return len;
}

struct RhoValue {
  double value;       // truncated sum over the first K test functions
  double tail_bound;  // 2^-K bounds the omitted terms
};

/// rho(a, b) = sum_k |a(f_k) - b(f_k)| / 2^k truncated after K terms.
template <CylinderMeasure A, CylinderMeasure B>
RhoValue rho_distance(const A& a, const B& b, int truncation) {
  if (truncation < 1) throw PreconditionError("rho: truncation must be at least 1");
  const auto family = rho_test_family(a.subshift(), truncation);
  double s = 0.0, weight = 1.0;
  for (const auto& w : family) {
    weight *= 0.5;
    s += weight * std::abs(a.cylinder_probability(w.view()) - b.cylinder_probability(w.view()));
  }
  return {s, std::ldexp(1.0, -truncation)};
}

}  // namespace thermo
