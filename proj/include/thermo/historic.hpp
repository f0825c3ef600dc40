#pragma once

// Explicit symbolic points whose Birkhoff averages accumulate on a prescribed
// connected target: a dense chain through the target, a block schedule, and
// an empirical verifier.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "thermo/block_graph.hpp"
#include "thermo/error.hpp"
#include "thermo/sft.hpp"
#include "thermo/spectra.hpp"
#include "thermo/target_set.hpp"

namespace thermo {

// ---------------------------------------------------------------------------
// Dense chain

/// Zigzag sequence along a polyline. Level l is a round trip over the
/// 2^-l net of the arclength parameter, so every tail is dense and the gap
/// between consecutive points at level l is at most 2^-l times the length.
class DenseChain {
 public:
  DenseChain(std::vector<Point> polyline, int first_level = 0) : path_(std::move(polyline)), first_level_(first_level) {
    if (path_.empty()) throw PreconditionError("dense chain: empty polyline");
    if (first_level < 0 || first_level > 40) throw PreconditionError("dense chain: first level must lie in [0, 40]");
    for (const auto& p : path_)
      if (p.size() != path_[0].size() || p.empty()) throw PreconditionError("dense chain: vertices of mixed dimension");
    cum_.push_back(0.0);
    for (std::size_t i = 1; i < path_.size(); ++i) cum_.push_back(cum_.back() + TargetSet::distance(path_[i - 1], path_[i]));
  }

  int dim() const { return static_cast<int>(path_[0].size()); }
  int first_level() const { return first_level_; }
  const std::vector<Point>& polyline() const { return path_; }
  double length() const { return cum_.back(); }

  /// Level of the j-th point (j >= 1); the first point belongs to the first level.
  int level(long j) const { return locate(j).first; }

  /// Arclength parameter in [0, 1] of the j-th point.
  double parameter(long j) const { return locate(j).second; }

  Point at(long j) const { return point_at(parameter(j)); }

  /// Bound on |a_j - a_{j+1}|.
  double gap_bound(long j) const { return length() * std::ldexp(1.0, -level(j + 1)); }

  /// Every tail {a_i : i > j} is dense at this resolution.
  double density(long j) const { return 0.5 * gap_bound(j); }

  Point point_at(double t) const {
    if (length() == 0.0) return path_[0];
    const double s = std::clamp(t, 0.0, 1.0) * length();
    auto it = std::upper_bound(cum_.begin(), cum_.end(), s);
    std::size_t i = it == cum_.end() ? cum_.size() - 1 : static_cast<std::size_t>(it - cum_.begin());
    if (i == 0) return path_[0];
    const double seg = cum_[i] - cum_[i - 1];
    const double u = seg > 0 ? (s - cum_[i - 1]) / seg : 0.0;
    Point p(path_[0].size());
    for (std::size_t c = 0; c < p.size(); ++c) p[c] = path_[i - 1][c] + u * (path_[i][c] - path_[i - 1][c]);
    return p;
  }

 private:
  std::pair<int, double> locate(long j) const {
    if (j < 1) throw PreconditionError("dense chain: indices start at 1");
    if (j == 1) return {first_level_, 0.0};
    long r = j - 2;
    for (int l = first_level_;; ++l) {
      const long h = 1L << std::min(l, 61);
      if (r < 2 * h) {
        const double t = r < h ? static_cast<double>(r + 1) / static_cast<double>(h)
                               : static_cast<double>(2 * h - r - 1) / static_cast<double>(h);
        return {l, t};
      }
      r -= 2 * h;
    }
  }

  std::vector<Point> path_;
  std::vector<double> cum_;
  int first_level_;
};

/// Chain through a connected target: a point, or a connected subset of the
/// line. Targets in higher dimension are passed as polylines directly.
inline DenseChain make_dense_chain(const TargetSet& k, int first_level = 0) {
  if (k.empty()) throw PreconditionError("dense chain: empty target");
  if (!k.connected()) throw PreconditionError("dense chain: target is not connected");
  if (k.kind() == TargetSet::Kind::point) return DenseChain({k.point_data()[0]}, first_level);
  if (k.dim() != 1) {
    throw PreconditionError("dense chain: targets of dimension " + std::to_string(k.dim()) + " must be given as polylines");
  }
  const auto b = k.bounds();
  if (b.lo[0] == b.hi[0]) return DenseChain({b.lo}, first_level);
  return DenseChain({b.lo, b.hi}, first_level);
}

// ---------------------------------------------------------------------------
// Blueprint

namespace detail {

// Intermediate symbols of a shortest path a -> ... -> b.
inline Word connector(const Subshift& spec, Symbol a, Symbol b) {
  if (spec.allowed(a, b)) return {};
  const int m = spec.alphabet_size();
  std::vector<int> prev(static_cast<std::size_t>(m), -1), dist(static_cast<std::size_t>(m), -1);
  std::deque<int> queue;
  for (Symbol c = 0; c < m; ++c)
    if (spec.allowed(a, c)) {
      dist[c] = 1;
      queue.push_back(c);
    }
  while (!queue.empty()) {
    const int u = queue.front();
    queue.pop_front();
    if (spec.allowed(u, b)) {
      std::vector<Symbol> path;
      for (int v = u; v >= 0; v = prev[v]) path.push_back(v);
      std::reverse(path.begin(), path.end());
      return Word(std::move(path));
    }
    for (Symbol c = 0; c < m; ++c)
      if (spec.allowed(u, c) && dist[c] < 0) {
        dist[c] = dist[u] + 1;
        prev[c] = u;
        queue.push_back(c);
      }
  }
  throw PreconditionError("connector: no path between symbols");
}


// Cyclic averages of the observables over u, reading windows of u u.
inline Point cyclic_means(const ObservableSet& obs, std::span<const Symbol> u) {
  const std::size_t n = u.size();
  Point out(static_cast<std::size_t>(obs.dim()), 0.0);
  std::vector<Symbol> buf;
  for (int i = 0; i < obs.dim(); ++i) {
    const auto& f = obs[static_cast<std::size_t>(i)];
    const auto k = static_cast<std::size_t>(f.depth());
    double s = 0.0;
    for (std::size_t p = 0; p < n; ++p) {
      buf.clear();
      for (std::size_t q = 0; q < k; ++q) buf.push_back(u[(p + q) % n]);
      s += f(buf);
    }
    out[static_cast<std::size_t>(i)] = s / static_cast<double>(n);
  }
  return out;
}

inline double max_abs_diff(const Point& a, const Point& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

inline Word concat(std::initializer_list<const Word*> parts) {
  std::vector<Symbol> s;
  for (const Word* w : parts) s.insert(s.end(), w->symbols().begin(), w->symbols().end());
  return Word(std::move(s));
}

}  // namespace detail

/// Schedule ratio zeta_k: strictly decreasing to 0, slowly enough that a
/// few dozen segments fit in a few million symbols.
inline double historic_zeta(int k) { return 0.6 / (1.0 + 0.005 * (k - 1)); }

struct HistoricSegment {
  Point target;            // chain point alpha''_k
  Word block;              // w_k
  Word connector;          // c_k, closes w_k back onto itself
  Word lead_in;            // joins the previous segment to w_k
  long repetitions = 0;    // N_k
  Point mean;              // cyclic average of w_k c_k
  double zeta = 0.0;       // schedule ratio
  double tolerance = 0.0;  // block tolerance
  long checkpoint = 0;     // M_k: prefix length at the end of the segment

  long period() const { return static_cast<long>(block.size() + connector.size()); }
  double connector_fraction() const {
    return static_cast<double>(connector.size()) / static_cast<double>(period());
  }
};

struct HistoricBlueprint {
  Subshift spec;
  std::uint64_t seed = 0;
  std::vector<HistoricSegment> segments;

  long length() const { return segments.empty() ? 0 : segments.back().checkpoint; }
  std::vector<long> checkpoints() const {
    std::vector<long> out;
    for (const auto& s : segments) out.push_back(s.checkpoint);
    return out;
  }
};

enum class BlockMode { sampled, spliced };

inline const char* to_string(BlockMode m) { return m == BlockMode::sampled ? "sampled" : "spliced"; }

struct BlueprintOptions {
  std::uint64_t seed = 1;
  int block_length = 40;          // starting n_k
  double tolerance = 0.01;        // block tolerance at k = 1, shrinks with zeta_k
  BlockMode mode = BlockMode::sampled;
  int max_draws = 20000;          // rejection budget per length
  int max_block_length = 1 << 15;
};

/// Checks the schedule inequalities and admissibility of every junction.
struct BlueprintCheck {
  bool ok = true;
  std::string message;
};

inline BlueprintCheck check_blueprint(const HistoricBlueprint& bp) {
  const auto& spec = bp.spec;
  auto fail = [](std::string m) { return BlueprintCheck{false, std::move(m)}; };
  double before = 0.0;  // sum_{j<k} n_j N_j
  long pos = 0;
  std::optional<Word> last;
  for (std::size_t i = 0; i < bp.segments.size(); ++i) {
    const auto& s = bp.segments[i];
    const std::string at = "segment " + std::to_string(i + 1) + ": ";
    if (s.block.empty() || s.repetitions < 1) return fail(at + "empty block or no repetitions");
    const Word period = detail::concat({&s.block, &s.connector});
    const Word twice = detail::concat({&period, &period});
    if (!spec.admissible(twice)) return fail(at + "block and connector do not close up");
    if (last) {
      const Word join = detail::concat({&*last, &s.lead_in, &s.block});
      if (!spec.admissible(join)) return fail(at + "inadmissible lead-in");
    }
    const double through = before + static_cast<double>(s.period()) * static_cast<double>(s.repetitions);
    if (i > 0 && before > s.zeta * through * (1.0 + 1e-15)) {
      return fail(at + "previous mass exceeds zeta_k times the total");
    }
    if (i + 1 < bp.segments.size() &&
        static_cast<double>(bp.segments[i + 1].period()) > s.zeta * through * (1.0 + 1e-15)) {
      return fail(at + "next block longer than zeta_k times the total");
    }
    if (i + 1 < bp.segments.size() && !(bp.segments[i + 1].zeta < s.zeta)) return fail(at + "zeta not decreasing");
    pos += static_cast<long>(s.lead_in.size()) + s.period() * s.repetitions;
    if (pos != s.checkpoint) return fail(at + "checkpoint does not match the cumulative length");
    before = through;
    last = period;
  }
  return {};
}

namespace detail {

struct BlockChoice {
  Word block;
  Word connector;
  Point mean;
};

class BlockFactory {
 public:
  BlockFactory(const Spectrum& sp, const BlueprintOptions& opt)
      : sp_(sp), opt_(opt), spec_(sp.observables().subshift()), rng_(opt.seed) {}

  BlockChoice make(const Point& target, double tol) {
    double best = INFINITY;
    if (opt_.mode == BlockMode::sampled) {
      if (auto b = sampled(target, tol, best)) return *b;
      if (sp_.dim() != 1) {
        throw PreconditionError("historic: block tolerance " + format(tol) + " unreachable up to length " +
                                std::to_string(opt_.max_block_length) + "; best deviation " + format(best));
      }
    }
    if (sp_.dim() != 1) throw PreconditionError("historic: spliced blocks need a single observable");
    if (auto b = spliced(target, tol, best)) return *b;
    throw PreconditionError("historic: block tolerance " + format(tol) + " unreachable up to length " +
                            std::to_string(opt_.max_block_length) + "; best deviation " + format(best));
  }

 private:
  static std::string format(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
  }

  BlockChoice close(std::vector<Symbol> w) const {
    Word block(std::move(w));
    Word conn = connector(spec_, block.back(), block.front());
    const Word period = concat({&block, &conn});
    return {std::move(block), std::move(conn), cyclic_means(sp_.observables(), period.view())};
  }

  // Words drawn from the Gibbs chain of the tilt whose mean is the target.
  std::optional<BlockChoice> sampled(const Point& target, double tol, double& best) {
    const auto lr = sp_.lambda(target);
    if (lr.status != LambdaStatus::interior) return std::nullopt;
    for (double q : lr.dual)
      if (!std::isfinite(q)) return std::nullopt;
    TransferFamily::Gibbs gibbs;
    try {
      gibbs = sp_.family().gibbs_at(lr.dual);
    } catch (const ConvergenceError&) {
      return std::nullopt;
    }
    const auto& g = sp_.family().graph();
    const auto& edges = g.edges();
    std::vector<std::vector<int>> out(static_cast<std::size_t>(g.size()));
    std::vector<std::vector<double>> prob(out.size());
    for (std::size_t e = 0; e < edges.size(); ++e) {
      out[edges[e].from].push_back(static_cast<int>(e));
      prob[edges[e].from].push_back(gibbs.transition[e]);
    }
    std::vector<std::discrete_distribution<int>> step;
    for (const auto& p : prob) step.emplace_back(p.begin(), p.end());
    std::discrete_distribution<int> start(gibbs.stationary.begin(), gibbs.stationary.end());
    for (int n = std::max(opt_.block_length, g.order()); n <= opt_.max_block_length; n *= 2) {
      for (int draw = 0; draw < opt_.max_draws; ++draw) {
        int u = start(rng_);
        std::vector<Symbol> w(g.state(u).symbols());
        while (static_cast<int>(w.size()) < n) {
          const int e = out[u][static_cast<std::size_t>(step[u](rng_))];
          w.push_back(edges[e].symbol);
          u = edges[e].to;
        }
        auto choice = close(std::move(w));
        const double dev = max_abs_diff(choice.mean, target);
        best = std::min(best, dev);
        if (dev <= tol) return choice;
      }
    }
    return std::nullopt;
  }

  // Concatenations of the extremal-mean cycles, mixed in the proportion that
  // lands closest to the target.
  std::optional<BlockChoice> spliced(const Point& target, double tol, double& best) {
    const auto& g = sp_.family().graph();
    const auto f = sp_.family().observable_values(0);
    auto cycle_word = [&](bool maximize) {
      std::vector<Symbol> w;
      for (int e : karp_mean_cycle(g, f, maximize).edges) w.push_back(g.edges()[e].symbol);
      return Word(std::move(w));
    };
    const Word lo = cycle_word(false), hi = cycle_word(true);
    const Word up = connector(spec_, lo.back(), hi.front());
    const std::size_t unit = std::max(lo.size(), hi.size());
    for (std::size_t total = std::max<std::size_t>(2, static_cast<std::size_t>(opt_.block_length) / unit);
         total * unit <= static_cast<std::size_t>(opt_.max_block_length); total *= 2) {
      std::optional<BlockChoice> pick;
      double pick_dev = INFINITY;
      for (std::size_t j = 0; j <= total; ++j) {
        std::vector<Symbol> w;
        for (std::size_t i = 0; i < total - j; ++i) w.insert(w.end(), lo.symbols().begin(), lo.symbols().end());
        if (j > 0 && j < total) w.insert(w.end(), up.symbols().begin(), up.symbols().end());
        for (std::size_t i = 0; i < j; ++i) w.insert(w.end(), hi.symbols().begin(), hi.symbols().end());
        auto choice = close(std::move(w));
        const double dev = max_abs_diff(choice.mean, target);
        if (dev < pick_dev) {
          pick_dev = dev;
          pick = std::move(choice);
        }
      }
      best = std::min(best, pick_dev);
      if (pick_dev <= tol) return pick;
    }
    return std::nullopt;
  }

  const Spectrum& sp_;
  BlueprintOptions opt_;
  Subshift spec_;
  std::mt19937_64 rng_;
};

}  // namespace detail

/// Blocks for the first `steps` chain points with repetition counts chosen as
/// small as the schedule inequalities allow.
inline HistoricBlueprint plan_blueprint(const Spectrum& sp, const DenseChain& chain, int steps,
                                        const BlueprintOptions& opt = {}) {
  if (steps < 1) throw PreconditionError("historic: need at least one step");
  if (chain.dim() != sp.dim()) throw PreconditionError("historic: chain and observables differ in dimension");
  if (opt.block_length < 1 || !(opt.tolerance > 0.0)) throw PreconditionError("historic: block length and tolerance must be positive");
  for (const auto& v : chain.polyline())
    if (!sp.domain().contains(v)) throw PreconditionError("historic: target leaves the feasible domain");
  HistoricBlueprint bp{sp.observables().subshift(), opt.seed, {}};
  detail::BlockFactory factory(sp, opt);
  for (int k = 1; k <= steps; ++k) {
    HistoricSegment s;
    s.target = chain.at(k);
    s.zeta = historic_zeta(k);
    s.tolerance = opt.tolerance * s.zeta / historic_zeta(1);
    auto b = factory.make(s.target, s.tolerance);
    s.block = std::move(b.block);
    s.connector = std::move(b.connector);
    s.mean = std::move(b.mean);
    bp.segments.push_back(std::move(s));
  }
  double before = 0.0;
  long pos = 0, prev_reps = 0;
  for (std::size_t i = 0; i < bp.segments.size(); ++i) {
    auto& s = bp.segments[i];
    const double n = static_cast<double>(s.period());
    long reps = prev_reps + 1;
    auto total = [&](long r) { return before + n * static_cast<double>(r); };
    if (i > 0) {
      reps = std::max(reps, static_cast<long>(std::ceil(before * (1.0 - s.zeta) / (s.zeta * n))));
      while (before > s.zeta * total(reps)) ++reps;
    }
    if (i + 1 < bp.segments.size()) {
      const double next = static_cast<double>(bp.segments[i + 1].period());
      reps = std::max(reps, static_cast<long>(std::ceil((next / s.zeta - before) / n)));
      while (next > s.zeta * total(reps)) ++reps;
    }
    s.repetitions = reps;
    if (i > 0) {
      const auto& p = bp.segments[i - 1];
      const Symbol end = p.connector.empty() ? p.block.back() : p.connector.back();
      s.lead_in = detail::connector(bp.spec, end, s.block.front());
    }
    pos += static_cast<long>(s.lead_in.size()) + s.period() * reps;
    s.checkpoint = pos;
    before = total(reps);
    prev_reps = reps;
  }
  return bp;
}

/// Streams the first `length` symbols (at most the blueprint length) in chunks.
template <class Sink>
void stream_point(const HistoricBlueprint& bp, long length, Sink&& sink) {
  long left = std::min(length, bp.length());
  auto emit = [&](const Word& w) {
    if (left <= 0 || w.empty()) return;
    const auto n = std::min<long>(left, static_cast<long>(w.size()));
    sink(w.view(0, static_cast<std::size_t>(n)));
    left -= n;
  };
  for (const auto& s : bp.segments) {
    emit(s.lead_in);
    for (long r = 0; r < s.repetitions && left > 0; ++r) {
      emit(s.block);
      emit(s.connector);
    }
    if (left <= 0) break;
  }
}

inline Word synthesize_point(const HistoricBlueprint& bp, long length) {
  std::vector<Symbol> out;
  out.reserve(static_cast<std::size_t>(std::max(0L, std::min(length, bp.length()))));
  stream_point(bp, length, [&](std::span<const Symbol> w) { out.insert(out.end(), w.begin(), w.end()); });
  return Word(std::move(out));
}

// ---------------------------------------------------------------------------
// Verification

/// Xi L_n x for every n = 1 .. count; needs count + depth - 1 symbols.
class BirkhoffPath {
 public:
  BirkhoffPath(const Word& x, const ObservableSet& obs) : dim_(obs.dim()) {
    const auto depth = static_cast<std::size_t>(obs.max_depth());
    if (x.size() < depth) throw PreconditionError("birkhoff path: word shorter than the observable depth");
    count_ = static_cast<long>(x.size() - depth + 1);
    sums_.assign(static_cast<std::size_t>(count_ * dim_), 0.0);
    for (int i = 0; i < dim_; ++i) {
      const auto& f = obs[static_cast<std::size_t>(i)];
      const auto k = static_cast<std::size_t>(f.depth());
      double s = 0.0;
      for (long n = 0; n < count_; ++n) {
        s += f(x.view(static_cast<std::size_t>(n), k));
        sums_[static_cast<std::size_t>(n * dim_ + i)] = s;
      }
    }
  }

  long count() const { return count_; }
  int dim() const { return dim_; }

  Point average(long n) const {
    if (n < 1 || n > count_) throw PreconditionError("birkhoff path: n out of range");
    Point p(static_cast<std::size_t>(dim_));
    for (int i = 0; i < dim_; ++i) p[i] = sums_[static_cast<std::size_t>((n - 1) * dim_ + i)] / static_cast<double>(n);
    return p;
  }

 private:
  int dim_;
  long count_ = 0;
  std::vector<double> sums_;
};

struct AccumulationOptions {
  double resolution = 1e-3;  // clustering cell size
  int reference_samples = 257;  // per axis, for d >= 2 references
};

struct AccumulationEstimate {
  std::vector<Point> points;  // one representative per occupied cell
  double largest_gap = 0.0;   // longest edge of a minimum spanning tree
  std::optional<double> hausdorff;
  long first = 0, last = 0;   // range of n covered
};

namespace detail {

inline double largest_gap(const std::vector<Point>& pts) {
  if (pts.size() < 2) return 0.0;
  if (pts[0].size() == 1) {
    std::vector<double> v;
    for (const auto& p : pts) v.push_back(p[0]);
    std::sort(v.begin(), v.end());
    double g = 0.0;
    for (std::size_t i = 1; i < v.size(); ++i) g = std::max(g, v[i] - v[i - 1]);
    return g;
  }
  // Prim; the bottleneck of the MST is the connectivity threshold.
  std::vector<double> d(pts.size(), INFINITY);
  std::vector<bool> in(pts.size(), false);
  d[0] = 0.0;
  double g = 0.0;
  for (std::size_t it = 0; it < pts.size(); ++it) {
    std::size_t u = pts.size();
    for (std::size_t i = 0; i < pts.size(); ++i)
      if (!in[i] && (u == pts.size() || d[i] < d[u])) u = i;
    in[u] = true;
    g = std::max(g, d[u]);
    for (std::size_t i = 0; i < pts.size(); ++i)
      if (!in[i]) d[i] = std::min(d[i], TargetSet::distance(pts[u], pts[i]));
  }
  return g;
}

}  // namespace detail

/// Hausdorff distance between a finite set and a target (exact for d = 1,
/// on a grid sample of the target otherwise).
inline double hausdorff_distance(const std::vector<Point>& pts, const TargetSet& k, int samples_per_axis = 257) {
  if (pts.empty() || k.empty()) return INFINITY;
  double out = 0.0;
  for (const auto& p : pts) out = std::max(out, k.distance_to(p));
  if (k.dim() == 1) {
    std::vector<double> v;
    for (const auto& p : pts) v.push_back(p[0]);
    std::sort(v.begin(), v.end());
    auto nearest = [&](double y) {
      auto it = std::lower_bound(v.begin(), v.end(), y);
      double d = INFINITY;
      if (it != v.end()) d = *it - y;
      if (it != v.begin()) d = std::min(d, y - *(it - 1));
      return d;
    };
    for (const auto& [a, b] : k.intervals()) {
      out = std::max({out, nearest(a), nearest(b)});
      for (std::size_t i = 1; i < v.size(); ++i) {
        const double mid = 0.5 * (v[i - 1] + v[i]);
        if (mid > a && mid < b) out = std::max(out, nearest(mid));
      }
    }
    return out;
  }
  for (const auto& y : k.samples(samples_per_axis)) {
    double d = INFINITY;
    for (const auto& p : pts) d = std::min(d, TargetSet::distance(p, y));
    out = std::max(out, d);
  }
  return out;
}

/// The visited set {Xi L_n x : first <= n <= last}, clustered at the given
/// resolution, with its largest gap and optional distance to a reference.
inline AccumulationEstimate accumulation_estimate(const BirkhoffPath& path, long first, long last,
                                                  const TargetSet* reference = nullptr,
                                                  const AccumulationOptions& opt = {}) {
  if (first < 1 || last < first || last > path.count()) throw PreconditionError("accumulation: bad checkpoint range");
  if (!(opt.resolution > 0.0)) throw PreconditionError("accumulation: resolution must be positive");
  AccumulationEstimate est;
  est.first = first;
  est.last = last;
  std::map<std::vector<long long>, std::size_t> cells;
  std::vector<long long> key(static_cast<std::size_t>(path.dim()));
  for (long n = first; n <= last; ++n) {
    Point p = path.average(n);
    for (std::size_t i = 0; i < p.size(); ++i) key[i] = static_cast<long long>(std::floor(p[i] / opt.resolution));
    if (cells.emplace(key, est.points.size()).second) est.points.push_back(std::move(p));
  }
  est.largest_gap = detail::largest_gap(est.points);
  if (reference) est.hausdorff = hausdorff_distance(est.points, *reference, opt.reference_samples);
  return est;
}

inline AccumulationEstimate accumulation_estimate(const Word& x, const ObservableSet& obs,
                                                  std::span<const long> checkpoints,
                                                  const TargetSet* reference = nullptr,
                                                  const AccumulationOptions& opt = {}) {
  if (checkpoints.empty()) throw PreconditionError("accumulation: no checkpoints");
  for (std::size_t i = 1; i < checkpoints.size(); ++i)
    if (checkpoints[i] <= checkpoints[i - 1]) throw PreconditionError("accumulation: checkpoints must increase");
  return accumulation_estimate(BirkhoffPath(x, obs), checkpoints.front(), checkpoints.back(), reference, opt);
}

struct CheckpointRow {
  long n;
  Point average;
  double distance;  // to the reference target
  double deviation;  // from the segment's chain point
};

/// One row per blueprint checkpoint that the word covers.
inline std::vector<CheckpointRow> checkpoint_rows(const HistoricBlueprint& bp, const BirkhoffPath& path,
                                                  const TargetSet& reference) {
  std::vector<CheckpointRow> rows;
  for (const auto& s : bp.segments) {
    if (s.checkpoint > path.count()) break;
    Point a = path.average(s.checkpoint);
    const double dist = reference.distance_to(a);
    double dev = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) dev = std::max(dev, std::abs(a[i] - s.target[i]));
    rows.push_back({s.checkpoint, std::move(a), dist, dev});
  }
  return rows;
}

}  // namespace thermo
