#pragma once

// Higher-block presentation of a subshift: states are admissible s-blocks and
// edges append one symbol. Locally constant potentials of depth <= s+1 become
// edge weights, which is what the transfer operator, Markov measures and
// mean-cycle computations all work with.

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <span>
#include <vector>

#include "thermo/linalg.hpp"
#include "thermo/sft.hpp"

namespace thermo {

class BlockGraph {
 public:
  struct Edge {
    int from;
    int to;
    Symbol symbol;  // appended symbol; edge word = state(from) + symbol
  };

  BlockGraph(const Subshift& spec, int order) : spec_(spec), order_(order) {
    if (order < 1) throw PreconditionError("block order must be at least 1");
    states_ = enumerate_words(spec, order);
    const int m = spec.alphabet_size();
    lookup_.assign(static_cast<std::size_t>(std::pow(static_cast<double>(m), order)), -1);
    for (std::size_t i = 0; i < states_.size(); ++i) lookup_[code(states_[i].view())] = static_cast<int>(i);
    std::vector<Symbol> buf;
    for (std::size_t i = 0; i < states_.size(); ++i) {
      const Word& u = states_[i];
      for (Symbol a = 0; a < m; ++a) {
        if (!spec.allowed(u.back(), a)) continue;
        buf.assign(u.symbols().begin() + 1, u.symbols().end());
        buf.push_back(a);
        edges_.push_back({static_cast<int>(i), state_index(buf), a});
      }
    }
    out_edge_.assign(states_.size() * static_cast<std::size_t>(m), -1);
    for (std::size_t e = 0; e < edges_.size(); ++e) {
      out_edge_[static_cast<std::size_t>(edges_[e].from) * static_cast<std::size_t>(m) +
                static_cast<std::size_t>(edges_[e].symbol)] = static_cast<int>(e);
    }
  }

  const Subshift& subshift() const { return spec_; }
  int order() const { return order_; }
  int size() const { return static_cast<int>(states_.size()); }
  const std::vector<Word>& states() const { return states_; }
  const Word& state(int i) const { return states_[static_cast<std::size_t>(i)]; }
  const std::vector<Edge>& edges() const { return edges_; }

  int state_index(std::span<const Symbol> block) const {
    return lookup_[code(block)];
  }

  /// Edge leaving `from` that appends `symbol`, or -1.
  int edge_index(int from, Symbol symbol) const {
    return out_edge_[static_cast<std::size_t>(from) * static_cast<std::size_t>(spec_.alphabet_size()) +
                     static_cast<std::size_t>(symbol)];
  }

  /// The (order+1)-word read along an edge.
  Word edge_word(const Edge& e) const {
    Word w = states_[static_cast<std::size_t>(e.from)];
    w.push_back(e.symbol);
    return w;
  }

  /// Value of `phi` at each edge (phi evaluated on the edge word prefix).
  std::vector<double> edge_values(const Potential& phi) const {
    if (phi.depth() > order_ + 1) {
      throw PreconditionError("potential of depth " + std::to_string(phi.depth()) +
                              " does not fit a block graph of order " + std::to_string(order_));
    }
    std::vector<double> out(edges_.size());
    std::vector<Symbol> buf;
    for (std::size_t e = 0; e < edges_.size(); ++e) {
      const auto& u = states_[static_cast<std::size_t>(edges_[e].from)].symbols();
      buf.assign(u.begin(), u.end());
      buf.push_back(edges_[e].symbol);
      out[e] = phi(std::span<const Symbol>(buf));
    }
    return out;
  }

  LogWeightedGraph weighted(std::span<const double> log_weights) const {
    LogWeightedGraph g;
    g.size = size();
    g.edges.reserve(edges_.size());
    for (std::size_t e = 0; e < edges_.size(); ++e) {
      g.edges.push_back({edges_[e].from, edges_[e].to, log_weights[e]});
    }
    return g;
  }

 private:
  std::size_t code(std::span<const Symbol> w) const {
    std::size_t c = 0;
    for (Symbol s : w) c = c * static_cast<std::size_t>(spec_.alphabet_size()) + static_cast<std::size_t>(s);
    return c;
  }

  Subshift spec_;
  int order_;
  std::vector<Word> states_;
  std::vector<int> lookup_;
  std::vector<Edge> edges_;
  std::vector<int> out_edge_;
};

/// Order that can carry all the given depths (at least 1).
inline int block_order_for(int max_depth) { return std::max(1, max_depth - 1); }

struct MeanCycle {
  double mean = 0.0;
  std::vector<int> edges;  // edge indices of one optimal simple cycle, in order
};

namespace detail {

// Kosaraju SCC labelling restricted to edges with keep[e] true.
inline std::vector<int> strongly_connected(int n, const std::vector<BlockGraph::Edge>& edges,
                                           const std::vector<bool>& keep, int& count) {
  std::vector<std::vector<int>> out(n), in(n);
  for (std::size_t e = 0; e < edges.size(); ++e) {
    if (!keep[e]) continue;
    out[edges[e].from].push_back(edges[e].to);
    in[edges[e].to].push_back(edges[e].from);
  }
  std::vector<int> order;
  std::vector<char> seen(n, 0);
  for (int s = 0; s < n; ++s) {
    if (seen[s]) continue;
    std::vector<std::pair<int, std::size_t>> stack{{s, 0}};
    seen[s] = 1;
    while (!stack.empty()) {
      auto& [v, i] = stack.back();
      if (i < out[v].size()) {
        const int w = out[v][i++];
        if (!seen[w]) {
          seen[w] = 1;
          stack.push_back({w, 0});
        }
      } else {
        order.push_back(v);
        stack.pop_back();
      }
    }
  }
  std::vector<int> comp(n, -1);
  count = 0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    if (comp[*it] >= 0) continue;
    std::vector<int> stack{*it};
    comp[*it] = count;
    while (!stack.empty()) {
      const int v = stack.back();
      stack.pop_back();
      for (int w : in[v])
        if (comp[w] < 0) {
          comp[w] = count;
          stack.push_back(w);
        }
    }
    ++count;
  }
  return comp;
}

}  // namespace detail

/// Karp's minimum mean-weight cycle, with one optimal cycle extracted.
/// `maximize` finds the maximum mean cycle instead.
inline MeanCycle karp_mean_cycle(const BlockGraph& g, std::span<const double> weight,
                                 bool maximize = false) {
  const int n = g.size();
  const auto& edges = g.edges();
  const double sign = maximize ? -1.0 : 1.0;
  const double inf = std::numeric_limits<double>::infinity();
  // d[k][v]: least weight of a k-edge walk ending at v (any start).
  std::vector<std::vector<double>> d(n + 1, std::vector<double>(n, inf));
  std::vector<std::vector<int>> parent(n + 1, std::vector<int>(n, -1));
  std::fill(d[0].begin(), d[0].end(), 0.0);
  for (int k = 1; k <= n; ++k) {
    for (std::size_t e = 0; e < edges.size(); ++e) {
      const auto& ed = edges[e];
      if (d[k - 1][ed.from] == inf) continue;
      const double v = d[k - 1][ed.from] + sign * weight[e];
      if (v < d[k][ed.to]) {
        d[k][ed.to] = v;
        parent[k][ed.to] = static_cast<int>(e);
      }
    }
  }
  double best = inf;
  int best_v = -1;
  for (int v = 0; v < n; ++v) {
    if (d[n][v] == inf) continue;
    double worst = -inf;
    for (int k = 0; k < n; ++k) {
      if (d[k][v] == inf) continue;
      worst = std::max(worst, (d[n][v] - d[k][v]) / static_cast<double>(n - k));
    }
    if (worst < best) {
      best = worst;
      best_v = v;
    }
  }
  if (best_v < 0) throw PreconditionError("mean cycle: graph has no cycle");

  // Walk of n edges ending at best_v; it contains at least one cycle. Pick the
  // best cycle found while peeling cycles off the walk.
  std::vector<int> walk(static_cast<std::size_t>(n));
  int v = best_v;
  for (int k = n; k >= 1; --k) {
    const int e = parent[k][v];
    walk[static_cast<std::size_t>(k - 1)] = e;
    v = edges[e].from;
  }
  MeanCycle result;
  result.mean = inf;
  std::vector<int> stack_edges;
  std::vector<int> pos_of(static_cast<std::size_t>(n), -1);
  std::vector<int> stack_vertices{edges[walk[0]].from};
  pos_of[edges[walk[0]].from] = 0;
  for (int e : walk) {
    const int to = edges[e].to;
    stack_edges.push_back(e);
    if (pos_of[to] >= 0) {
      const auto start = static_cast<std::size_t>(pos_of[to]);
      std::vector<int> cyc(stack_edges.begin() + static_cast<long>(start), stack_edges.end());
      double s = 0.0;
      for (int ce : cyc) s += weight[ce];
      const double mean = sign * s / static_cast<double>(cyc.size());
      if (mean < result.mean) {
        result.mean = mean;
        result.edges = cyc;
      }
      for (std::size_t i = start + 1; i < stack_vertices.size(); ++i) pos_of[stack_vertices[i]] = -1;
      stack_vertices.resize(start + 1);
      stack_edges.resize(start);
    } else {
      pos_of[to] = static_cast<int>(stack_vertices.size());
      stack_vertices.push_back(to);
    }
  }
  // Karp's value is exact; the extracted cycle attains it up to rounding.
  result.mean = sign * best;
  return result;
}

/// Edges that can carry an invariant measure whose edge-weight mean equals the
/// extremal cycle mean: tight edges (zero reduced cost under Bellman-Ford
/// potentials) that lie inside a strongly connected tight component.
/// Returns per-edge component labels (-1 for edges off the critical subgraph).
inline std::vector<int> critical_subgraph(const BlockGraph& g, std::span<const double> weight,
                                          double mean, bool maximize, double tol,
                                          int& component_count) {
  const int n = g.size();
  const auto& edges = g.edges();
  const double sign = maximize ? -1.0 : 1.0;
  std::vector<double> dist(static_cast<std::size_t>(n), 0.0);
  for (int it = 0; it < n; ++it) {
    bool changed = false;
    for (std::size_t e = 0; e < edges.size(); ++e) {
      const double c = sign * (weight[e] - mean);
      const double v = dist[edges[e].from] + c;
      if (v < dist[edges[e].to] - 1e-15) {
        dist[edges[e].to] = v;
        changed = true;
      }
    }
    if (!changed) break;
  }
  std::vector<bool> tight(edges.size());
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const double rc = sign * (weight[e] - mean) + dist[edges[e].from] - dist[edges[e].to];
    tight[e] = std::abs(rc) <= tol;
  }
  int count = 0;
  const auto comp = detail::strongly_connected(n, edges, tight, count);
  std::vector<int> label(edges.size(), -1);
  std::vector<int> remap(static_cast<std::size_t>(count), -1);
  component_count = 0;
  for (std::size_t e = 0; e < edges.size(); ++e) {
    if (!tight[e]) continue;
    if (comp[edges[e].from] != comp[edges[e].to]) continue;
    auto& r = remap[comp[edges[e].from]];
    if (r < 0) r = component_count++;
    label[e] = r;
  }
  return label;
}

}  // namespace thermo
