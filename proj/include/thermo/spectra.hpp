#pragma once

// Constrained entropy spectra Lambda(y, phi) = sup{h(mu) + int phi dmu : Xi(mu) = y}
// for finite observable families, the level-set pressure formulas built on
// them, relative (ratio) spectra and BS dimensions via Bowen's equation.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <thread>
#include <vector>

#include "thermo/block_graph.hpp"
#include "thermo/error.hpp"
#include "thermo/linalg.hpp"
#include "thermo/measures.hpp"
#include "thermo/optimize.hpp"
#include "thermo/pressure.hpp"
#include "thermo/sft.hpp"
#include "thermo/target_set.hpp"

namespace thermo {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

/// The deformation Xi(mu) = (int f_1 dmu, ..., int f_d dmu).
class ObservableSet {
 public:
  ObservableSet(std::vector<Potential> obs) : obs_(std::move(obs)) {
    if (obs_.empty()) throw PreconditionError("observable set needs at least one observable");
    for (const auto& f : obs_)
      if (!(f.subshift() == obs_[0].subshift())) throw PreconditionError("observables live on different subshifts");
  }
  ObservableSet(Potential f) : ObservableSet(std::vector<Potential>{std::move(f)}) {}

  int dim() const { return static_cast<int>(obs_.size()); }
  const Potential& operator[](std::size_t i) const { return obs_[i]; }
  std::span<const Potential> span() const { return obs_; }
  const Subshift& subshift() const { return obs_[0].subshift(); }
  int max_depth() const {
    int d = 1;
    for (const auto& f : obs_) d = std::max(d, f.depth());
    return d;
  }

  Point evaluate(const MarkovMeasure& mu) const {
    Point y;
    for (const auto& f : obs_) y.push_back(integrate(f, mu));
    return y;
  }

 private:
  std::vector<Potential> obs_;
};

/// Xi(M(X,T)): an interval for d = 1, the convex hull of cycle-mean vectors
/// otherwise (exact for d <= 2, an outer approximation from a fixed direction
/// set for d >= 3).
class FeasibleDomain {
 public:
  int dim() const { return dim_; }
  double lo() const { return lo_; }
  double hi() const { return hi_; }
  /// Cycle-mean vectors that span the domain.
  const std::vector<Point>& vertices() const { return vertices_; }
  const MeanCycle& min_cycle() const { return min_cycle_; }
  const MeanCycle& max_cycle() const { return max_cycle_; }
  double scale() const { return scale_; }
  double tolerance() const { return tol_; }

  bool degenerate() const { return depth_of_interior() <= tol_; }

  /// Signed distance to the boundary: positive inside, negative outside.
  double depth(const Point& y) const {
    if (static_cast<int>(y.size()) != dim_) throw PreconditionError("point dimension does not match the observables");
    if (dim_ == 1) return std::min(y[0] - lo_, hi_ - y[0]);
    if (dim_ == 2 && hull_.size() <= 2) {
      const double d = hull_.size() == 1 ? TargetSet::distance(hull_[0], y) : detail::segment_distance(y, hull_[0], hull_[1]);
      return -d;
    }
    double best = INFINITY;
    for (std::size_t i = 0; i < normals_.size(); ++i) {
      double s = 0.0;
      for (int j = 0; j < dim_; ++j) s += normals_[i][j] * y[j];
      best = std::min(best, offsets_[i] - s);
    }
    return best;
  }

  /// Outward unit normal of the planar face nearest to y (d = 2).
  Point face_normal(const Point& y) const {
    if (dim_ != 2) throw PreconditionError("face normal: planar domains only");
    if (hull_.size() == 1) return {1.0, 0.0};
    if (hull_.size() == 2) {
      Point n{hull_[1][1] - hull_[0][1], hull_[0][0] - hull_[1][0]};
      const double len = std::hypot(n[0], n[1]);
      return {n[0] / len, n[1] / len};
    }
    std::size_t best = 0;
    double slack = INFINITY;
    for (std::size_t i = 0; i < normals_.size(); ++i) {
      const double s = offsets_[i] - normals_[i][0] * y[0] - normals_[i][1] * y[1];
      if (s < slack) {
        slack = s;
        best = i;
      }
    }
    return normals_[best];
  }

  bool contains(const Point& y) const { return depth(y) >= -tol_; }
  bool on_boundary(const Point& y) const { return std::abs(depth(y)) <= tol_; }
  bool interior(const Point& y) const { return depth(y) > tol_; }

  TargetSet as_target() const {
    if (dim_ == 1) return TargetSet::interval(lo_, hi_);
    if (dim_ == 2) return TargetSet::polytope(vertices_);
    Point lo = vertices_[0], hi = vertices_[0];
    for (const auto& v : vertices_)
      for (int i = 0; i < dim_; ++i) {
        lo[i] = std::min(lo[i], v[i]);
        hi[i] = std::max(hi[i], v[i]);
      }
    return TargetSet::box(lo, hi);
  }

 private:
  friend FeasibleDomain feasible_domain(const ObservableSet& obs);

  double depth_of_interior() const {
    if (dim_ == 1) return 0.5 * (hi_ - lo_);
    if (dim_ == 2 && hull_.size() <= 2) return 0.0;
    return INFINITY;
  }

  int dim_ = 1;
  double lo_ = 0.0, hi_ = 0.0;
  MeanCycle min_cycle_, max_cycle_;
  std::vector<Point> vertices_, hull_;
  std::vector<Point> normals_;  // unit outward normals
  std::vector<double> offsets_;
  double scale_ = 1.0, tol_ = 1e-12;
};

namespace detail {

inline Point cycle_mean_vector(const std::vector<std::vector<double>>& values, const MeanCycle& c) {
  Point y(values.size(), 0.0);
  for (std::size_t i = 0; i < values.size(); ++i) {
    for (int e : c.edges) y[i] += values[i][e];
    y[i] /= static_cast<double>(c.edges.size());
  }
  return y;
}

inline std::vector<double> combine(const std::vector<std::vector<double>>& values, const Point& u) {
  std::vector<double> w(values[0].size(), 0.0);
  for (std::size_t i = 0; i < values.size(); ++i)
    for (std::size_t e = 0; e < w.size(); ++e) w[e] += u[i] * values[i][e];
  return w;
}

}  // namespace detail

inline FeasibleDomain feasible_domain(const ObservableSet& obs) {
  const Subshift& spec = obs.subshift();
  require_primitive(spec);
  const BlockGraph g(spec, block_order_for(obs.max_depth()));
  std::vector<std::vector<double>> values;
  double spread = 0.0;
  for (const auto& f : obs.span()) {
    values.push_back(g.edge_values(f));
    for (double v : values.back()) spread = std::max(spread, std::abs(v));
  }
  FeasibleDomain d;
  d.dim_ = obs.dim();
  d.scale_ = std::max(1.0, spread);
  d.tol_ = 1e-12 * d.scale_;
  if (d.dim_ == 1) {
    d.min_cycle_ = karp_mean_cycle(g, values[0], false);
    d.max_cycle_ = karp_mean_cycle(g, values[0], true);
    d.lo_ = d.min_cycle_.mean;
    d.hi_ = d.max_cycle_.mean;
    d.vertices_ = {{d.lo_}, {d.hi_}};
    return d;
  }
  auto support_point = [&](const Point& u) {
    return detail::cycle_mean_vector(values, karp_mean_cycle(g, detail::combine(values, u), true));
  };
  std::vector<Point> dirs;
  for (int i = 0; i < d.dim_; ++i)
    for (double s : {1.0, -1.0}) {
      Point u(static_cast<std::size_t>(d.dim_), 0.0);
      u[i] = s;
      dirs.push_back(u);
    }
  if (d.dim_ == 2) {
    // Grow the hull until every edge normal is supported by the edge itself.
    for (const auto& u : dirs) d.vertices_.push_back(support_point(u));
    for (int round = 0; round < 500; ++round) {
      d.hull_ = detail::convex_hull_2d(d.vertices_);
      bool grew = false;
      for (std::size_t i = 0; i < d.hull_.size() && d.hull_.size() >= 2; ++i) {
        const auto& a = d.hull_[i];
        const auto& b = d.hull_[(i + 1) % d.hull_.size()];
        Point n{b[1] - a[1], a[0] - b[0]};
        const double len = std::hypot(n[0], n[1]);
        if (len == 0.0) continue;
        n[0] /= len;
        n[1] /= len;
        const auto p = support_point(n);
        if (n[0] * (p[0] - a[0]) + n[1] * (p[1] - a[1]) > d.tol_) {
          d.vertices_.push_back(p);
          grew = true;
        }
      }
      if (!grew) break;
    }
    d.vertices_ = d.hull_;
    if (d.hull_.size() >= 3) {
      for (std::size_t i = 0; i < d.hull_.size(); ++i) {
        const auto& a = d.hull_[i];
        const auto& b = d.hull_[(i + 1) % d.hull_.size()];
        Point n{b[1] - a[1], a[0] - b[0]};
        const double len = std::hypot(n[0], n[1]);
        n[0] /= len;
        n[1] /= len;
        d.normals_.push_back(n);
        d.offsets_.push_back(n[0] * a[0] + n[1] * a[1]);
      }
    }
    return d;
  }
  std::mt19937_64 rng(0x5eedULL);
  std::normal_distribution<double> gauss;
  for (int k = 0; k < 64 * d.dim_; ++k) {
    Point u(static_cast<std::size_t>(d.dim_));
    double norm = 0.0;
    for (double& c : u) {
      c = gauss(rng);
      norm += c * c;
    }
    for (double& c : u) c /= std::sqrt(norm);
    dirs.push_back(u);
  }
  for (const auto& u : dirs) {
    const auto p = support_point(u);
    d.vertices_.push_back(p);
    d.normals_.push_back(u);
    double h = 0.0;
    for (int j = 0; j < d.dim_; ++j) h += u[j] * p[j];
    d.offsets_.push_back(h);
  }
  std::sort(d.vertices_.begin(), d.vertices_.end());
  d.vertices_.erase(std::unique(d.vertices_.begin(), d.vertices_.end()), d.vertices_.end());
  return d;
}

enum class LambdaStatus { interior, boundary, outside };

inline const char* to_string(LambdaStatus s) {
  switch (s) {
    case LambdaStatus::interior: return "interior";
    case LambdaStatus::boundary: return "boundary";
    case LambdaStatus::outside: return "outside";
  }
  return "?";
}

struct LambdaResult {
  double value = kNegInf;
  Point dual;  // minimizing tilt q; infinite components on the boundary
  LambdaStatus status = LambdaStatus::outside;
  double gradient_norm = 0.0;
};

struct SpectraOptions {
  double gradient_tolerance = 1e-10;
  int max_newton_iterations = 200;
};

/// Evaluation context for Lambda(., s * phi) with a fixed observable family.
class Spectrum {
 public:
  Spectrum(const Potential& phi, const ObservableSet& obs, SpectraOptions opt = {})
      : phi_(phi), obs_(obs), family_(phi, obs.span()), domain_(feasible_domain(obs)), opt_(opt) {
    for (std::size_t i = 0; i < family_.dimension(); ++i) {
      const auto v = family_.observable_values(i);
      const auto [mn, mx] = std::minmax_element(v.begin(), v.end());
      spread_ = std::max(spread_, *mx - *mn);
    }
  }

  const Potential& potential() const { return phi_; }
  const ObservableSet& observables() const { return obs_; }
  const FeasibleDomain& domain() const { return domain_; }
  const TransferFamily& family() const { return family_; }
  int dim() const { return obs_.dim(); }

  /// P(s * phi).
  double pressure(double base_scale = 1.0) const {
    return family_.perron_at({}, false, base_scale).log_lambda;
  }

  /// Lambda(y, s * phi) by Legendre duality against q -> P(s phi + q.f).
  LambdaResult lambda(const Point& y, double base_scale = 1.0) const {
    const double depth = domain_.depth(y);
    if (depth < -domain_.tolerance()) return {kNegInf, Point(y.size(), NAN), LambdaStatus::outside, INFINITY};
    if (dim() == 1) {
      if (depth <= domain_.tolerance()) return boundary_1d(y[0], base_scale);
      return interior_1d(y[0], base_scale);
    }
    if (depth <= domain_.tolerance() && dim() == 2) return boundary_2d(y, base_scale);
    return newton(y, base_scale, depth <= domain_.tolerance());
  }

  /// Lambda at an endpoint of the one-dimensional domain: the pressure of
  /// s * phi restricted to the critical subgraph of extremal-mean cycles.
  LambdaResult boundary_1d(double y, double base_scale) const {
    const bool at_max = std::abs(y - domain_.hi()) <= std::abs(y - domain_.lo());
    const double mean = at_max ? domain_.hi() : domain_.lo();
    const auto& g = family_.graph();
    const auto f = family_.observable_values(0);
    int count = 0;
    const auto label = critical_subgraph(g, f, mean, at_max, 1e-9 * domain_.scale(), count);
    double best = kNegInf;
    for (int c = 0; c < count; ++c) {
      std::vector<int> local(static_cast<std::size_t>(g.size()), -1);
      LogWeightedGraph sub;
      for (std::size_t e = 0; e < label.size(); ++e) {
        if (label[e] != c) continue;
        const auto& ed = g.edges()[e];
        for (int v : {ed.from, ed.to})
          if (local[v] < 0) local[v] = sub.size++;
        sub.edges.push_back({local[ed.from], local[ed.to], base_scale * family_.base_values()[e]});
      }
      best = std::max(best, log_spectral_radius_irreducible(sub));
    }
    const double inf = at_max ? INFINITY : -INFINITY;
    return {best, {inf}, LambdaStatus::boundary, 0.0};
  }

  /// Lambda on the boundary of a planar domain. Measures with mean y live on
  /// the critical subgraph C of the face normal u; along the face the problem
  /// is one-dimensional in the tangent t: inf over q of L(q) - q (t.y), with
  /// L the log spectral radius of exp(s phi + q t.f) on C (the largest over
  /// its components, which also covers mixtures of components).
  LambdaResult boundary_2d(const Point& y, double base_scale) const {
    const auto& g = family_.graph();
    const auto u = domain_.face_normal(y);
    const Point tangent{-u[1], u[0]};
    auto along = [&](const Point& dir) {
      std::vector<double> w(family_.base_values().size());
      for (std::size_t e = 0; e < w.size(); ++e)
        w[e] = dir[0] * family_.observable_values(0)[e] + dir[1] * family_.observable_values(1)[e];
      return w;
    };
    const double tol = 1e-9 * domain_.scale();
    const auto wu = along(u);
    int count = 0;
    const auto face = critical_subgraph(g, wu, karp_mean_cycle(g, wu, true).mean, true, tol, count);
    auto wt = along(tangent);
    const double s = tangent[0] * y[0] + tangent[1] * y[1];
    // Tangent range over cycles of C; edges off C are priced out.
    const double big = 1e6 * domain_.scale();
    auto priced = [&](bool maximize) {
      std::vector<double> w(wt);
      for (std::size_t e = 0; e < w.size(); ++e)
        if (face[e] < 0) w[e] = maximize ? -big : big;
      return w;
    };
    const auto wmax = priced(true), wmin = priced(false);
    const double hi = karp_mean_cycle(g, wmax, true).mean, lo = karp_mean_cycle(g, wmin, false).mean;
    auto radius = [&](const std::vector<int>& label, int components, double q) {
      double best = kNegInf;
      for (int c = 0; c < components; ++c) {
        std::vector<int> local(static_cast<std::size_t>(g.size()), -1);
        LogWeightedGraph sub;
        for (std::size_t e = 0; e < label.size(); ++e) {
          if (label[e] != c) continue;
          const auto& ed = g.edges()[e];
          for (int v : {ed.from, ed.to})
            if (local[v] < 0) local[v] = sub.size++;
          sub.edges.push_back({local[ed.from], local[ed.to], base_scale * family_.base_values()[e] + q * wt[e]});
        }
        best = std::max(best, log_spectral_radius_irreducible(sub));
      }
      return best;
    };
    const double inf_q = INFINITY;
    if (std::abs(s - hi) <= tol || std::abs(s - lo) <= tol) {
      // An end of the face: the extremal tangent cycles inside C.
      const bool at_max = std::abs(s - hi) <= std::abs(s - lo);
      int sub_count = 0;
      const auto ends = critical_subgraph(g, at_max ? wmax : wmin, at_max ? hi : lo, at_max, tol, sub_count);
      const double t = at_max ? inf_q : -inf_q;
      return {radius(ends, sub_count, 0.0), {u[0] * inf_q + tangent[0] * t, u[1] * inf_q + tangent[1] * t},
              LambdaStatus::boundary, 0.0};
    }
    // Convex in q: the minimum lies between the first points on either side
    // where the dual climbs back to its value at 0.
    auto dual = [&](double q) { return radius(face, count, q) - q * s; };
    const double unit = 1.0 / std::max(spread_, 1e-12), f0 = dual(0.0);
    double a = -unit, b = unit;
    while (dual(a) < f0 && -a < max_tilt()) a *= 2.0;
    while (dual(b) < f0 && b < max_tilt()) b *= 2.0;
    const auto opt = golden_minimize(dual, a, b, 1e-10 * std::max(1.0, std::abs(b - a)));
    return {opt.fx, {u[0] * inf_q + tangent[0] * opt.x, u[1] * inf_q + tangent[1] * opt.x}, LambdaStatus::boundary, 0.0};
  }

 private:
  struct TiltEval {
    double log_lambda;
    Point mean;
    TransferFamily::Gibbs gibbs;
  };

  TiltEval eval(std::span<const double> q, double base_scale) const {
    auto gibbs = family_.gibbs_at(q, base_scale);
    auto mean = family_.observable_means(gibbs);
    return {gibbs.log_lambda, std::move(mean), std::move(gibbs)};
  }

  // Near the tilt cap the transfer matrix is close to reducible and the
  // eigensolver may give up; the Newton search treats that as a failed trial.
  std::optional<TiltEval> try_eval(std::span<const double> q, double base_scale) const {
    try {
      return eval(q, base_scale);
    } catch (const ConvergenceError&) {
      return std::nullopt;
    }
  }

  double max_tilt() const { return 600.0 / std::max(spread_, 1e-300); }

  LambdaResult interior_1d(double y, double base_scale) const {
    auto g = [&](double q) {
      const double qv[1] = {q};
      return eval(qv, base_scale).mean[0] - y;
    };
    const double tol = opt_.gradient_tolerance;
    double q0 = 0.0, g0 = g(q0);
    double q1 = q0, g1 = g0;
    if (std::abs(g0) > tol) {
      const double dir = g0 > 0 ? -1.0 : 1.0;
      double step = 1.0 / std::max(spread_, 1e-12);
      while (true) {
        q1 = q0 + dir * step;
        if (std::abs(q1) > max_tilt()) return boundary_1d(y, base_scale);
        g1 = g(q1);
        if ((g1 > 0) != (g0 > 0) || std::abs(g1) <= tol) break;
        q0 = q1;
        g0 = g1;
        step *= 2.0;
      }
    }
    double q = q0, gq = g0;
    if (std::abs(g0) > tol) {
      if (std::abs(g1) <= tol) {
        q = q1;
        gq = g1;
      } else {
        const auto r = brent_root(g, std::min(q0, q1), std::max(q0, q1), q0 < q1 ? g0 : g1,
                                  q0 < q1 ? g1 : g0, 0.0, tol);
        q = r.x;
        gq = r.fx;
      }
    }
    const double qv[1] = {q};
    const auto at = eval(qv, base_scale);
    return {at.log_lambda - q * y, {q}, LambdaStatus::interior, std::abs(gq)};
  }

  // Damped Newton on G(q) = P(s phi + q.f) - q.y; the Hessian is the
  // covariance of the observables (central differences on huge graphs). On
  // the boundary the tilt runs off to infinity; the iteration then stops at
  // the tilt cap and reports the dual bound.
  LambdaResult newton(const Point& y, double base_scale, bool on_boundary) const {
    const std::size_t d = y.size();
    Point q(d, 0.0);
    auto objective = [&](const TiltEval& t, const Point& qq) {
      double s = t.log_lambda;
      for (std::size_t i = 0; i < d; ++i) s -= qq[i] * y[i];
      return s;
    };
    TiltEval cur = eval(q, base_scale);
    double G = objective(cur, q);
    std::vector<Plane> planes{plane_of(cur, q)};
    auto grad_of = [&](const TiltEval& t) {
      Point gr(d);
      for (std::size_t i = 0; i < d; ++i) gr[i] = t.mean[i] - y[i];
      return gr;
    };
    Point grad = grad_of(cur);
    auto inf_norm = [](const Point& v) {
      double m = 0.0;
      for (double x : v) m = std::max(m, std::abs(x));
      return m;
    };
    bool capped = false;
    std::vector<double> history;
    for (int it = 0; it < opt_.max_newton_iterations && inf_norm(grad) > opt_.gradient_tolerance; ++it) {
      const double h = 1e-4 / std::max(spread_, 1e-12);
      DenseMatrix H(d, d);
      bool hessian = true;
      const auto cov = family_.observable_covariance(cur.gibbs);
      for (std::size_t i = 0; i < d && !cov.empty(); ++i)
        for (std::size_t j = 0; j < d; ++j) H(i, j) = cov[i][j];
      // Finite differences only when the exact covariance was unavailable.
      for (std::size_t j = 0; j < d && hessian && cov.empty(); ++j) {
        Point qp = q, qm = q;
        qp[j] += h;
        qm[j] -= h;
        const auto ep = try_eval(qp, base_scale), em = try_eval(qm, base_scale);
        if (!ep || !em) {
          hessian = false;
          break;
        }
        planes.push_back(plane_of(*ep, qp));
        planes.push_back(plane_of(*em, qm));
        for (std::size_t i = 0; i < d; ++i) H(i, j) = (ep->mean[i] - em->mean[i]) / (2 * h);
      }
      if (!hessian) break;
      double trace = 0.0;
      for (std::size_t i = 0; i < d; ++i) trace += std::abs(H(i, i));
      for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < i; ++j) H(i, j) = H(j, i) = 0.5 * (H(i, j) + H(j, i));
      for (std::size_t i = 0; i < d; ++i) H(i, i) += 1e-12 * trace + 1e-300;
      Point step;
      Point rhs(d);
      for (std::size_t i = 0; i < d; ++i) rhs[i] = -grad[i];
      if (!lu_solve(H, rhs, step)) step = rhs;
      double slope = 0.0;
      for (std::size_t i = 0; i < d; ++i) slope += grad[i] * step[i];
      if (slope >= 0) {
        step = rhs;
        slope = -inf_norm(grad) * inf_norm(grad);
      }
      // A nearly singular Hessian can propose an absurd step; no single step
      // needs to move the tilt by more than a few units of 1/spread.
      const double cap = 16.0 / std::max(spread_, 1e-12), len = inf_norm(step);
      if (len > cap) {
        for (double& x : step) x *= cap / len;
        slope *= cap / len;
      }
      double t = 1.0;
      Point qn(d);
      TiltEval next{};
      double Gn = G;
      bool accepted = false;
      const double g0 = inf_norm(grad);
      while (t >= 1e-12) {
        for (std::size_t i = 0; i < d; ++i) qn[i] = q[i] + t * step[i];
        const auto trial = try_eval(qn, base_scale);
        if (!trial) {
          t *= 0.5;
          continue;
        }
        next = *trial;
        Gn = objective(next, qn);
        planes.push_back(plane_of(next, qn));
        // Near the optimum G is flat to rounding, so a shrinking gradient
        // with no measurable increase of G also counts as progress.
        const double flat = 64.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(G));
        if (Gn <= G + 1e-4 * t * slope || (Gn <= G + flat && inf_norm(grad_of(next)) <= 0.9 * g0)) {
          accepted = true;
          break;
        }
        t *= 0.5;
      }
      if (!accepted) break;
      q = qn;
      cur = next;
      G = Gn;
      grad = grad_of(cur);
      // On the boundary the mean map is only accurate to rounding at large
      // tilts, so the gradient may never reach tolerance; stop once G stalls.
      history.push_back(G);
      if (on_boundary && history.size() > 5 && history[history.size() - 6] - G <= 1e-12 * (1.0 + std::abs(G))) break;
      if (inf_norm(q) > max_tilt()) {
        capped = true;
        break;
      }
    }
    if (inf_norm(grad) > opt_.gradient_tolerance && !capped && !on_boundary) {
      // Newton fails where G is nearly piecewise linear (a sharp crossover
      // between cycles at large tilt).
      if (auto fallback = cutting_planes(y, base_scale, std::move(planes), q, G)) return *fallback;
    }
    const double gn = inf_norm(grad);
    if (gn > opt_.gradient_tolerance && !capped && !on_boundary) {
      char msg[96];
      std::snprintf(msg, sizeof msg, "lambda: Newton iteration stalled, gradient %.3g", gn);
      throw ConvergenceError(msg, G, G);
    }
    return {G, q, on_boundary || capped ? LambdaStatus::boundary : LambdaStatus::interior, gn};
  }

  // Every evaluation at tilt q gives a supporting plane of the concave
  // function y -> Lambda(y): log lambda(q) - q.m + q.y with m the mean at q.
  struct Plane {
    Point mean;
    double offset;  // log lambda(q) - q.m
  };

  static Plane plane_of(const TiltEval& t, const Point& q) {
    double v = t.log_lambda;
    for (std::size_t i = 0; i < q.size(); ++i) v -= q[i] * t.mean[i];
    return {t.mean, v};
  }

  // Kelley's cutting planes on the dual. The best mixture of sampled planes
  // above y bounds Lambda(y) from below, the best G(q) seen bounds it from
  // above, and the LP prices give the next tilt. Works where G is nearly
  // piecewise linear and Newton stalls. Empty if the bracket does not close.
  std::optional<LambdaResult> cutting_planes(const Point& y, double base_scale, std::vector<Plane> planes, Point best_q,
                                             double upper) const {
    const std::size_t d = y.size();
    const double unit = 1.0 / std::max(spread_, 1e-12);
    auto G_of = [&](const TiltEval& t, const Point& q) {
      double g = t.log_lambda;
      for (std::size_t i = 0; i < d; ++i) g -= q[i] * y[i];
      return g;
    };
    auto add = [&](const Point& q) {
      const auto t = try_eval(q, base_scale);
      if (!t) return false;
      planes.push_back(plane_of(*t, q));
      const double g = G_of(*t, q);
      if (g < upper) {
        upper = g;
        best_q = q;
      }
      return true;
    };
    std::vector<std::vector<double>> means;
    std::vector<double> offsets;
    auto solve = [&] {
      means.clear();
      offsets.clear();
      for (const auto& p : planes) {
        means.push_back(p.mean);
        offsets.push_back(p.offset);
      }
      return mixture_lp(means, offsets, y);
    };
    auto lp = solve();
    // y must sit inside the hull of the sampled means; push the tilt outward
    // along each axis and diagonal until it does.
    for (double r = unit; !lp.feasible && r <= max_tilt(); r *= 2.0) {
      std::size_t combos = 1;
      for (std::size_t i = 0; i < d; ++i) combos *= 3;
      for (std::size_t c = 1; c < combos; ++c) {
        Point q(d, 0.0);
        for (std::size_t i = 0, k = c; i < d; ++i, k /= 3) q[i] = k % 3 == 0 ? 0.0 : (k % 3 == 1 ? r : -r);
        add(q);
      }
      lp = solve();
    }
    if (!lp.feasible) return std::nullopt;
    // At large tilts each plane carries rounding of order |q| times the
    // error of the mean, so the bracket may stop shrinking before it is tight:
    // the LP then asks for a tilt it already has, or one the eigensolver
    // cannot resolve. Accept a looser gap there.
    double gap = upper - lp.value;
    Point last;
    for (int it = 0; it < 400 && gap > 1e-11 * (1.0 + std::abs(upper)); ++it) {
      Point q(d);
      for (std::size_t i = 0; i < d; ++i) q[i] = -lp.price[i];
      if (q == last) break;
      double len = 0.0;
      for (double x : q) len = std::max(len, std::abs(x));
      if (len > max_tilt() || !add(q)) break;
      last = q;
      lp = solve();
      if (!lp.feasible) return std::nullopt;
      gap = upper - lp.value;
    }
    if (gap > 1e-9 * (1.0 + std::abs(upper))) return std::nullopt;
    const auto at = eval(best_q, base_scale);
    double gn = 0.0;
    for (std::size_t i = 0; i < d; ++i) gn = std::max(gn, std::abs(at.mean[i] - y[i]));
    return LambdaResult{upper, best_q, LambdaStatus::interior, gn};
  }

  Potential phi_;
  ObservableSet obs_;
  TransferFamily family_;
  FeasibleDomain domain_;
  SpectraOptions opt_;
  double spread_ = 0.0;
};

inline LambdaResult lambda_value(const Point& y, const Potential& phi, const ObservableSet& obs) {
  return Spectrum(phi, obs).lambda(y);
}

// ---------------------------------------------------------------------------
// Primal oracle

struct PrimalOptions {
  double constraint_tolerance = 1e-12;
  int max_outer = 80;
  int max_inner = 100;
};

struct PrimalResult {
  double value = kNegInf;
  double constraint_residual = 0.0;
  int iterations = 0;
  std::optional<MarkovMeasure> witness;  // present when the optimum has full support
};

namespace detail {

struct FlowProblem {
  int states = 0;
  std::vector<int> from, to;
  std::vector<double> phi;
  std::vector<std::vector<double>> rows;  // observable constraints rows . x = rhs
  std::vector<double> rhs;
};

struct FlowSolution {
  std::vector<double> flow;
  double value;
  double residual;
  int iterations;
};

// h(F) + sum F phi with h(F) = -sum F log F + sum_u O_u log O_u, O_u the
// out-flow of state u. Concave and 1-homogeneous in F.
inline double flow_objective(const FlowProblem& p, std::span<const double> x) {
  std::vector<double> out(static_cast<std::size_t>(p.states), 0.0);
  double s = 0.0;
  for (std::size_t e = 0; e < x.size(); ++e) {
    out[p.from[e]] += x[e];
    s += x[e] * p.phi[e] - xlogx(x[e]);
  }
  for (double o : out) s += xlogx(o);
  return s;
}

// Maximizes the flow objective over normalized circulations (kept exactly by
// projecting every Newton step onto them) with the observable rows enforced
// through an augmented-Lagrangian outer loop.
inline FlowSolution maximize_flow(const FlowProblem& p, std::vector<double> x, const PrimalOptions& opt) {
  const std::size_t E = x.size(), R = p.rows.size();
  // Hard rows: conservation at all states but the last (the dropped one is
  // implied), plus total mass 1.
  const std::size_t H = static_cast<std::size_t>(p.states);
  std::vector<std::vector<double>> hard;
  std::vector<double> hard_rhs;
  for (int u = 0; u + 1 < p.states; ++u) {
    std::vector<double> row(E, 0.0);
    for (std::size_t e = 0; e < E; ++e) row[e] = (p.from[e] == u ? 1.0 : 0.0) - (p.to[e] == u ? 1.0 : 0.0);
    hard.push_back(std::move(row));
    hard_rhs.push_back(0.0);
  }
  hard.emplace_back(E, 1.0);
  hard_rhs.push_back(1.0);

  std::vector<double> lam(R, 0.0);
  double c = 10.0;
  auto residuals = [&](std::span<const double> v) {
    std::vector<double> r(R);
    for (std::size_t k = 0; k < R; ++k) {
      double s = -p.rhs[k];
      for (std::size_t e = 0; e < E; ++e) s += p.rows[k][e] * v[e];
      r[k] = s;
    }
    return r;
  };
  auto lagrangian = [&](std::span<const double> v) {
    const auto r = residuals(v);
    double s = flow_objective(p, v);
    for (std::size_t k = 0; k < R; ++k) s -= lam[k] * r[k] + 0.5 * c * r[k] * r[k];
    return s;
  };
  auto max_abs = [](const std::vector<double>& v) {
    double m = 0.0;
    for (double a : v) m = std::max(m, std::abs(a));
    return m;
  };
  double prev = max_abs(residuals(x));
  int total = 0;
  for (int outer = 0; outer < opt.max_outer; ++outer) {
    double decrement = INFINITY;
    for (int inner = 0; inner < opt.max_inner; ++inner, ++total) {
      std::vector<double> out(static_cast<std::size_t>(p.states), 0.0);
      for (std::size_t e = 0; e < E; ++e) out[p.from[e]] += x[e];
      const auto r = residuals(x);
      // KKT system [A B^T; B 0] [d; nu] = [grad; b - B x] with A = -Hessian.
      DenseMatrix K(E + H, E + H);
      std::vector<double> rhs(E + H, 0.0);
      for (std::size_t e = 0; e < E; ++e) {
        double g = p.phi[e] - std::log(x[e] / out[p.from[e]]);
        for (std::size_t k = 0; k < R; ++k) g -= p.rows[k][e] * (lam[k] + c * r[k]);
        rhs[e] = g;
        K(e, e) += 1.0 / x[e];
        for (std::size_t f = 0; f < E; ++f) {
          if (p.from[e] == p.from[f]) K(e, f) -= 1.0 / out[p.from[e]];
          double s = 0.0;
          for (std::size_t k = 0; k < R; ++k) s += p.rows[k][e] * p.rows[k][f];
          K(e, f) += c * s;
        }
      }
      for (std::size_t h = 0; h < H; ++h) {
        double bx = 0.0;
        for (std::size_t e = 0; e < E; ++e) {
          K(E + h, e) = K(e, E + h) = hard[h][e];
          bx += hard[h][e] * x[e];
        }
        rhs[E + h] = hard_rhs[h] - bx;
      }
      std::vector<double> sol;
      if (!lu_solve(K, rhs, sol)) break;
      std::vector<double> d(sol.begin(), sol.begin() + static_cast<long>(E));
      decrement = 0.0;
      for (std::size_t e = 0; e < E; ++e) decrement += rhs[e] * d[e];
      if (std::abs(decrement) <= 1e-18) break;
      double t = 1.0;
      for (std::size_t e = 0; e < E; ++e)
        if (d[e] < 0) t = std::min(t, -0.99 * x[e] / d[e]);
      const double L0 = lagrangian(x);
      std::vector<double> xn(E);
      bool moved = false;
      for (; t > 1e-14; t *= 0.5) {
        for (std::size_t e = 0; e < E; ++e) xn[e] = x[e] + t * d[e];
        const double L1 = lagrangian(xn);
        if (L1 >= L0 + 1e-4 * t * decrement) {
          moved = true;
          break;
        }
      }
      if (!moved) break;
      x = xn;
    }
    const auto r = residuals(x);
    const double res = max_abs(r);
    if (res <= opt.constraint_tolerance && decrement <= 1e-16) break;
    for (std::size_t k = 0; k < R; ++k) lam[k] += c * r[k];
    if (res > 0.25 * prev) c = std::min(c * 10.0, 1e10);
    prev = res;
  }
  double total_flow = 0.0;
  for (double v : x) total_flow += v;
  return {x, flow_objective(p, x) / total_flow, max_abs(residuals(x)), total};
}

// Positive conserved starting flow: the simple random walk's edge flow.
inline std::vector<double> uniform_flow(const FlowProblem& p) {
  std::vector<int> outdeg(static_cast<std::size_t>(p.states), 0);
  for (int u : p.from) ++outdeg[u];
  std::vector<Transition> t;
  for (std::size_t e = 0; e < p.from.size(); ++e) t.push_back({p.from[e], p.to[e], 1.0 / outdeg[p.from[e]]});
  const auto pi = stationary_distribution(p.states, t, {}, {});
  std::vector<double> x(p.from.size());
  for (std::size_t e = 0; e < x.size(); ++e) x[e] = pi[p.from[e]] / outdeg[p.from[e]];
  return x;
}

}  // namespace detail

/// Lambda(y, phi) as a direct maximization of h + int phi over order-r Markov
/// measures subject to Xi(mu) = y. Independent of the transfer-operator path.
/// At an endpoint of a one-dimensional domain the search runs on each
/// critical component separately.
inline PrimalResult lambda_direct(const Point& y, const Potential& phi, const ObservableSet& obs, int order = 1,
                                  const PrimalOptions& opt = {}) {
  const auto dom = feasible_domain(obs);
  if (!dom.contains(y)) throw PreconditionError("lambda_direct: infeasible constraint set (y outside the feasible domain)");
  const int r = std::max(order, block_order_for(std::max(phi.depth(), obs.max_depth())));
  auto graph = std::make_shared<const BlockGraph>(phi.subshift(), r);
  const auto& edges = graph->edges();
  const auto phi_e = graph->edge_values(phi);
  std::vector<std::vector<double>> f_e;
  for (const auto& f : obs.span()) f_e.push_back(graph->edge_values(f));

  auto build = [&](const std::vector<int>& edge_ids, bool with_observables) {
    detail::FlowProblem p;
    std::vector<int> local(static_cast<std::size_t>(graph->size()), -1);
    for (int e : edge_ids)
      for (int v : {edges[e].from, edges[e].to})
        if (local[v] < 0) local[v] = p.states++;
    for (int e : edge_ids) {
      p.from.push_back(local[edges[e].from]);
      p.to.push_back(local[edges[e].to]);
      p.phi.push_back(phi_e[e]);
    }
    const std::size_t E = edge_ids.size();
    if (with_observables) {
      for (std::size_t i = 0; i < f_e.size(); ++i) {
        std::vector<double> row(E);
        for (std::size_t e = 0; e < E; ++e) row[e] = f_e[i][edge_ids[e]];
        p.rows.push_back(row);
        p.rhs.push_back(y[i]);
      }
    }
    return p;
  };

  PrimalResult best;
  if (obs.dim() == 1 && dom.on_boundary(y)) {
    const bool at_max = std::abs(y[0] - dom.hi()) <= std::abs(y[0] - dom.lo());
    int count = 0;
    const auto label = critical_subgraph(*graph, f_e[0], at_max ? dom.hi() : dom.lo(), at_max,
                                         1e-9 * dom.scale(), count);
    for (int c = 0; c < count; ++c) {
      std::vector<int> ids;
      for (std::size_t e = 0; e < label.size(); ++e)
        if (label[e] == c) ids.push_back(static_cast<int>(e));
      const auto p = build(ids, false);
      const auto sol = detail::maximize_flow(p, detail::uniform_flow(p), opt);
      if (sol.value > best.value) {
        best.value = sol.value;
        best.constraint_residual = sol.residual;
      }
      best.iterations += sol.iterations;
    }
    return best;
  }

  std::vector<int> all(edges.size());
  for (std::size_t e = 0; e < all.size(); ++e) all[e] = static_cast<int>(e);
  const auto p = build(all, true);
  const auto sol = detail::maximize_flow(p, detail::uniform_flow(p), opt);
  std::vector<double> out(static_cast<std::size_t>(graph->size()), 0.0);
  for (std::size_t e = 0; e < edges.size(); ++e) out[edges[e].from] += sol.flow[e];
  std::vector<double> transition(edges.size());
  for (std::size_t e = 0; e < edges.size(); ++e) transition[e] = sol.flow[e] / out[edges[e].from];
  double total = 0.0;
  for (double o : out) total += o;
  for (double& o : out) o /= total;
  auto mu = MarkovMeasure::from_transition(graph, transition, out);
  best.value = entropy(mu) + integrate(phi, mu);
  best.constraint_residual = sol.residual;
  best.iterations = sol.iterations;
  best.witness = std::move(mu);
  return best;
}

// ---------------------------------------------------------------------------
// Level-set pressures

struct SetValue {
  enum class Status { value, empty, bracket };
  Status status = Status::value;
  double value = kNegInf;  // for brackets: the upper end
  double lower = kNegInf, upper = kNegInf;
  Point at;  // where the extremum was found (value status)

  static SetValue empty_set() {
    SetValue v;
    v.status = Status::empty;
    v.value = v.lower = v.upper = NAN;
    return v;
  }
  static SetValue of(double x, Point at = {}) {
    SetValue v;
    v.value = v.lower = v.upper = x;
    v.at = std::move(at);
    return v;
  }
  bool is_empty() const { return status == Status::empty; }
};

inline const char* to_string(SetValue::Status s) {
  switch (s) {
    case SetValue::Status::value: return "value";
    case SetValue::Status::empty: return "EMPTY";
    case SetValue::Status::bracket: return "bracket";
  }
  return "?";
}

struct Extremum {
  double value;
  Point at;
};

/// Extremum of fn over C: a grid plus golden-section refinement in d = 1,
/// a grid plus compass search in higher dimension. When `domain` is given,
/// points outside it are skipped (fn is -inf there).
template <class Fn>
Extremum extremize(const TargetSet& C, Fn&& fn, bool maximize, const FeasibleDomain* domain = nullptr) {
  const double sign = maximize ? 1.0 : -1.0;
  Extremum best{maximize ? kNegInf : INFINITY, {}};
  auto consider = [&](const Point& y, double v) {
    if (best.at.empty() || sign * v > sign * best.value) best = {v, y};
  };
  if (C.empty()) return best;
  if (C.dim() == 1) {
    for (auto [a, b] : C.intervals()) {
      if (domain) {
        a = std::max(a, domain->lo());
        b = std::min(b, domain->hi());
        if (a > b + domain->tolerance()) continue;
        if (a > b) a = b;
      }
      if (b - a <= 1e-12 * std::max(1.0, std::abs(a))) {
        consider({a}, fn(Point{a}));
        continue;
      }
      const auto grid = detail::linspace(a, b, 21);
      std::vector<double> vals;
      for (double x : grid) vals.push_back(fn(Point{x}));
      std::size_t i = 0;
      for (std::size_t j = 1; j < vals.size(); ++j)
        if (sign * vals[j] > sign * vals[i]) i = j;
      const double l = grid[i == 0 ? 0 : i - 1], r = grid[std::min(i + 1, grid.size() - 1)];
      auto line = [&](double x) { return sign * fn(Point{x}); };
      const auto opt = golden_maximize(line, l, r, 1e-9 * std::max(1.0, b - a));
      consider({grid[i]}, vals[i]);
      consider({opt.x}, sign * opt.fx);
    }
    return best;
  }
  const int per_axis = C.dim() == 2 ? 9 : 5;
  for (const auto& y : C.samples(per_axis)) {
    if (domain && !domain->contains(y)) continue;
    consider(y, fn(y));
  }
  if (best.at.empty()) return best;
  const auto bb = C.bounds();
  double step = 0.0;
  for (int i = 0; i < C.dim(); ++i) step = std::max(step, (bb.hi[i] - bb.lo[i]) / (per_axis - 1));
  while (step > 1e-7 * std::max(1.0, step)) {
    bool improved = false;
    for (int i = 0; i < C.dim() && !improved; ++i) {
      for (double s : {1.0, -1.0}) {
        Point cand = best.at;
        cand[i] += s * step;
        if (!C.contains(cand) || (domain && !domain->contains(cand))) continue;
        const double v = fn(cand);
        if (sign * v > sign * best.value) {
          best = {v, cand};
          improved = true;
          break;
        }
      }
    }
    if (!improved) step *= 0.5;
  }
  return best;
}

namespace detail {

inline bool inside_domain(const TargetSet& C, const FeasibleDomain& dom) {
  for (const auto& p : C.extreme_points())
    if (!dom.contains(p)) return false;
  return true;
}

}  // namespace detail

/// P(Delta_equ(C), phi) = inf over C of Lambda; empty unless C is connected and
/// inside the feasible domain.
inline SetValue pressure_equ(const TargetSet& C, const Spectrum& sp) {
  if (C.empty() || !C.connected() || !detail::inside_domain(C, sp.domain())) return SetValue::empty_set();
  const auto e = extremize(C, [&](const Point& y) { return sp.lambda(y).value; }, false);
  return SetValue::of(e.value, e.at);
}

/// P(Delta_sub(C), phi) = inf over C of Lambda; C may be disconnected.
inline SetValue pressure_sub(const TargetSet& C, const Spectrum& sp) {
  if (C.empty() || !detail::inside_domain(C, sp.domain())) return SetValue::empty_set();
  const auto e = extremize(C, [&](const Point& y) { return sp.lambda(y).value; }, false);
  return SetValue::of(e.value, e.at);
}

/// P(Delta_sup(C), phi) = sup over C of Lambda (-inf off the feasible domain).
inline SetValue pressure_sup(const TargetSet& C, const Spectrum& sp) {
  const auto e = extremize(C, [&](const Point& y) { return sp.lambda(y).value; }, true, &sp.domain());
  return SetValue::of(e.value, e.at);
}

/// P(Delta(S1, S2), phi): points whose accumulation set contains S1 and lies
/// in S2.
inline SetValue pressure_between(const TargetSet& S1, const TargetSet& S2, const Spectrum& sp) {
  if (S1.empty()) return pressure_sup(S2, sp);
  if (!detail::inside_domain(S1, sp.domain())) return SetValue::empty_set();
  const auto s1_points = S1.samples(9);
  const auto comps = S2.components();
  const TargetSet* home = nullptr;
  for (const auto& c : comps) {
    if (std::all_of(s1_points.begin(), s1_points.end(), [&](const Point& p) { return c.contains(p); })) {
      home = &c;
      break;
    }
  }
  if (!home) return SetValue::empty_set();
  auto lambda = [&](const Point& y) { return sp.lambda(y).value; };
  const auto upper = extremize(S1, lambda, false);
  const auto hull_points = S1.hull().samples(9);
  if (std::all_of(hull_points.begin(), hull_points.end(), [&](const Point& p) { return home->contains(p); })) {
    return SetValue::of(upper.value, upper.at);
  }
  // Lower end: best inf over connected sub-unions of the component that still
  // contain S1.
  double lower = kNegInf;
  const auto& boxes = home->boxes();
  const std::size_t nb = boxes.size();
  if (nb > 0 && nb <= 12) {
    for (std::size_t mask = 1; mask < (std::size_t{1} << nb); ++mask) {
      std::vector<Box> pick;
      for (std::size_t i = 0; i < nb; ++i)
        if (mask >> i & 1) pick.push_back(boxes[i]);
      const auto Q = TargetSet::box_union(pick);
      if (!Q.connected()) continue;
      if (!std::all_of(s1_points.begin(), s1_points.end(), [&](const Point& p) { return Q.contains(p); })) continue;
      lower = std::max(lower, extremize(Q, lambda, false).value);
    }
  } else {
    lower = extremize(*home, lambda, false).value;
  }
  SetValue v;
  v.status = SetValue::Status::bracket;
  v.value = v.upper = upper.value;
  v.lower = lower;
  v.at = upper.at;
  return v;
}

// ---------------------------------------------------------------------------
// Relative spectra and dimensions

inline void require_nonzero_mean(const Potential& g) {
  const auto dom = feasible_domain(ObservableSet(g));
  if (dom.lo() <= 0.0 && dom.hi() >= 0.0) {
    throw PreconditionError("relative spectrum: the feasible means of g contain 0");
  }
}

/// sup{h + int psi : int f / int g = alpha} as Lambda(0, psi) for f - alpha g.
inline LambdaResult relative_spectrum(const Potential& f, const Potential& g, double alpha, const Potential& psi) {
  require_nonzero_mean(g);
  return Spectrum(psi, ObservableSet(f - alpha * g)).lambda({0.0});
}

inline PrimalResult relative_direct(const Potential& f, const Potential& g, double alpha, const Potential& psi,
                                    int order = 1) {
  require_nonzero_mean(g);
  return lambda_direct({0.0}, psi, ObservableSet(f - alpha * g), order);
}

/// Least mean of psi over invariant measures; BS dimension needs it positive.
inline double require_positive_scale(const Potential& psi) {
  const auto dom = feasible_domain(ObservableSet(psi));
  if (!(dom.lo() > 0.0)) throw PreconditionError("scale potential must have positive mean on every cycle");
  return dom.lo();
}

/// Root s of Lambda(y, -s psi) = 0, where `sp` is built on psi.
inline double bs_dimension_point(const Point& y, const Spectrum& sp) {
  const double min_mean = require_positive_scale(sp.potential());
  const auto at0 = sp.lambda(y, 0.0);
  if (at0.status == LambdaStatus::outside) throw PreconditionError("bs dimension: y outside the feasible domain");
  if (at0.value <= 0.0) return 0.0;
  auto F = [&](double s) { return sp.lambda(y, -s).value; };
  const double hi = at0.value / min_mean * (1.0 + 1e-9) + 1e-12;
  const double fhi = F(hi);
  if (fhi >= 0.0) return hi;
  return brent_root(F, 0.0, hi, at0.value, fhi, 1e-13, 0.0).x;
}

inline double bs_dimension_point(const Point& y, const Potential& psi, const ObservableSet& obs) {
  return bs_dimension_point(y, Spectrum(psi, obs));
}

/// Root of P(-s psi) = 0.
inline double bowen_root(const Potential& psi) {
  const double min_mean = require_positive_scale(psi);
  const TransferFamily fam(psi, {});
  auto F = [&](double s) { return fam.perron_at({}, false, -s).log_lambda; };
  const double f0 = F(0.0);
  const double hi = f0 / min_mean * (1.0 + 1e-9) + 1e-12;
  return brent_root(F, 0.0, hi, f0, F(hi), 1e-13, 0.0).x;
}

enum class LevelMode { equ, sub, sup };

inline const char* to_string(LevelMode m) {
  switch (m) {
    case LevelMode::equ: return "equ";
    case LevelMode::sub: return "sub";
    case LevelMode::sup: return "sup";
  }
  return "?";
}

/// BS dimension of Delta_equ / Delta_sub / Delta_sup for the scale psi on
/// which `sp` is built.
inline SetValue bs_dimension_set(const TargetSet& C, const Spectrum& sp, LevelMode mode) {
  require_positive_scale(sp.potential());
  auto dim_at = [&](const Point& y) { return bs_dimension_point(y, sp); };
  if (mode == LevelMode::sup) {
    if (C.empty()) return SetValue::empty_set();
    const auto e = extremize(C, dim_at, true, &sp.domain());
    if (e.at.empty()) return SetValue::empty_set();
    return SetValue::of(e.value, e.at);
  }
  if (C.empty() || !detail::inside_domain(C, sp.domain())) return SetValue::empty_set();
  if (mode == LevelMode::equ && !C.connected()) return SetValue::empty_set();
  const auto e = extremize(C, dim_at, false);
  return SetValue::of(e.value, e.at);
}

// ---------------------------------------------------------------------------
// Spectrum curves

struct SpectrumCurve {
  std::vector<Point> grid;
  std::vector<LambdaResult> values;
};

/// Lambda on an even grid over the feasible domain (its bounding box when
/// d > 1; points outside evaluate to -inf). Results are ordered by grid index
/// whatever the worker count.
inline SpectrumCurve spectrum_curve(const Spectrum& sp, int points, int workers = 1) {
  if (points < 1) throw PreconditionError("spectrum grid needs at least one point");
  SpectrumCurve curve;
  const auto bb = sp.domain().as_target().bounds();
  std::vector<std::vector<double>> axes;
  for (int i = 0; i < sp.dim(); ++i) axes.push_back(detail::linspace(bb.lo[i], bb.hi[i], points));
  std::vector<std::size_t> idx(static_cast<std::size_t>(sp.dim()), 0);
  while (true) {
    Point p(static_cast<std::size_t>(sp.dim()));
    for (int i = 0; i < sp.dim(); ++i) p[i] = axes[i][idx[i]];
    curve.grid.push_back(std::move(p));
    int i = 0;
    while (i < sp.dim() && ++idx[i] == axes[i].size()) idx[i++] = 0;
    if (i == sp.dim()) break;
  }
  curve.values.resize(curve.grid.size());
  workers = std::max(1, std::min<int>(workers, static_cast<int>(curve.grid.size())));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
  auto run = [&](int w) {
    try {
      for (std::size_t k = static_cast<std::size_t>(w); k < curve.grid.size(); k += static_cast<std::size_t>(workers))
        curve.values[k] = sp.lambda(curve.grid[k]);
    } catch (...) {
      errors[static_cast<std::size_t>(w)] = std::current_exception();
    }
  };
  if (workers == 1) {
    run(0);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(run, w);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return curve;
}

}  // namespace thermo
