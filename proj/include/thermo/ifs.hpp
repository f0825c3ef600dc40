#pragma once

// Recurrent iterated function systems of similarities on R^n driven by a
// subshift: scale potential, symbolic projection, and dimensions of
// projected level sets.

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "thermo/error.hpp"
#include "thermo/sft.hpp"
#include "thermo/spectra.hpp"
#include "thermo/target_set.hpp"

namespace thermo {

/// x -> ratio * orthogonal * x + translate.
struct Similarity {
  double ratio = 0.5;
  std::vector<std::vector<double>> orthogonal;  // n x n; empty means identity
  Point translate;

  int dim() const { return static_cast<int>(translate.size()); }

  Point operator()(const Point& x) const {
    Point y(translate);
    for (std::size_t i = 0; i < y.size(); ++i) {
      double s = 0.0;
      if (orthogonal.empty()) {
        s = x[i];
      } else {
        for (std::size_t j = 0; j < x.size(); ++j) s += orthogonal[i][j] * x[j];
      }
      y[i] += ratio * s;
    }
    return y;
  }
};

class RecurrentIFS {
 public:
  using Key = std::pair<Symbol, Symbol>;

  RecurrentIFS(Subshift spec, std::map<Key, Similarity> maps) : spec_(std::move(spec)), maps_(std::move(maps)) {
    const int m = spec_.alphabet_size();
    if (maps_.empty()) throw PreconditionError("ifs: no maps");
    dim_ = maps_.begin()->second.dim();
    if (dim_ < 1) throw PreconditionError("ifs: maps need a translation vector");
    for (Symbol i = 0; i < m; ++i)
      for (Symbol j = 0; j < m; ++j) {
        const bool has = maps_.count({i, j}) > 0;
        if (has != spec_.allowed(i, j)) {
          throw PreconditionError("ifs: map " + key_name(i, j) + (has ? " present where the transfer matrix has 0"
                                                                    : " missing where the transfer matrix has 1"));
        }
      }
    for (const auto& [k, w] : maps_) {
      const auto name = key_name(k.first, k.second);
      if (!(w.ratio > 0.0 && w.ratio < 1.0)) throw PreconditionError("ifs: ratio of map " + name + " must lie in (0, 1)");
      if (w.dim() != dim_) throw PreconditionError("ifs: map " + name + " has the wrong dimension");
      if (!w.orthogonal.empty()) check_orthogonal(w.orthogonal, name);
    }
  }

  /// Maps that depend only on the first symbol: w_ij = maps[i].
  static RecurrentIFS by_first_symbol(const Subshift& spec, const std::vector<Similarity>& maps) {
    if (static_cast<int>(maps.size()) != spec.alphabet_size()) throw PreconditionError("ifs: one map per symbol expected");
    std::map<Key, Similarity> all;
    for (Symbol i = 0; i < spec.alphabet_size(); ++i)
      for (Symbol j = 0; j < spec.alphabet_size(); ++j)
        if (spec.allowed(i, j)) all[{i, j}] = maps[static_cast<std::size_t>(i)];
    return RecurrentIFS(spec, std::move(all));
  }

  /// x/3 and x/3 + 2/3 on the full 2-shift.
  static RecurrentIFS middle_thirds() {
    return by_first_symbol(Subshift::full(2), {{1.0 / 3.0, {}, {0.0}}, {1.0 / 3.0, {}, {2.0 / 3.0}}});
  }

  const Subshift& subshift() const { return spec_; }
  int dim() const { return dim_; }
  const std::map<Key, Similarity>& maps() const { return maps_; }
  const Similarity& map(Symbol i, Symbol j) const { return maps_.at({i, j}); }

  static std::string key_name(Symbol i, Symbol j) { return std::to_string(i) + std::to_string(j); }

 private:
  static void check_orthogonal(const std::vector<std::vector<double>>& o, const std::string& name) {
    const std::size_t n = o.size();
    for (const auto& row : o)
      if (row.size() != n) throw PreconditionError("ifs: orthogonal part of map " + name + " is not square");
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        double s = 0.0;
        for (std::size_t k = 0; k < n; ++k) s += o[k][i] * o[k][j];
        if (std::abs(s - (i == j ? 1.0 : 0.0)) > 1e-9) {
          throw PreconditionError("ifs: orthogonal part of map " + name + " is not orthogonal");
        }
      }
  }

  Subshift spec_;
  std::map<Key, Similarity> maps_;
  int dim_ = 0;
};

/// phi(w1 w2) = -log s_{w1 w2}; strictly positive.
inline Potential scale_potential(const RecurrentIFS& ifs) {
  return Potential::from_function(ifs.subshift(), 2, [&](std::span<const Symbol> w) { return -std::log(ifs.map(w[0], w[1]).ratio); });
}

/// A ball mapped into itself by every map; it contains every piece E_i.
struct InvariantBall {
  Point center;
  double radius;
};

inline InvariantBall invariant_ball(const RecurrentIFS& ifs) {
  Point c(static_cast<std::size_t>(ifs.dim()), 0.0);
  for (const auto& [k, w] : ifs.maps()) {
    // Fixed point of w by iteration (a contraction).
    Point x = w.translate;
    for (int it = 0; it < 2000; ++it) {
      Point y = w(x);
      const double d = TargetSet::distance(x, y);
      x = std::move(y);
      if (d <= 1e-16 * (1.0 + TargetSet::distance(x, Point(x.size(), 0.0)))) break;
    }
    for (std::size_t i = 0; i < c.size(); ++i) c[i] += x[i] / static_cast<double>(ifs.maps().size());
  }
  double r = 0.0;
  for (const auto& [k, w] : ifs.maps()) r = std::max(r, TargetSet::distance(w(c), c) / (1.0 - w.ratio));
  return {c, r};
}

struct Projection {
  Point point;
  double radius;  // |point - pi(x)| <= radius
};

/// pi(x) approximated by w_{x1 x2} o ... o w_{x_d x_{d+1}} applied to the
/// centre of an invariant ball.
inline Projection project_point(const RecurrentIFS& ifs, const Word& x, int depth) {
  if (depth < 1) throw PreconditionError("project: depth must be at least 1");
  if (static_cast<int>(x.size()) < depth + 1) throw PreconditionError("project: word shorter than depth + 1");
  if (!ifs.subshift().admissible(x)) throw PreconditionError("project: word is not admissible");
  const auto ball = invariant_ball(ifs);
  Point p = ball.center;
  double scale = 1.0;
  for (int i = depth - 1; i >= 0; --i) {
    const auto& w = ifs.map(x[static_cast<std::size_t>(i)], x[static_cast<std::size_t>(i) + 1]);
    p = w(p);
    scale *= w.ratio;
  }
  return {p, ball.radius * scale};
}

struct OscReport {
  bool checked = false;  // numeric check run (interval systems only)
  bool passed = false;
  std::string detail;
};

/// Interval systems: the hulls H_i of the pieces E_i, then disjointness of
/// the first-level images w_ij(H_j) inside each H_i.
inline OscReport check_open_set_condition(const RecurrentIFS& ifs) {
  OscReport rep;
  if (ifs.dim() != 1) {
    rep.detail = "not checked: dimension " + std::to_string(ifs.dim()) + " (asserted by the caller)";
    return rep;
  }
  rep.checked = true;
  const int m = ifs.subshift().alphabet_size();
  const auto ball = invariant_ball(ifs);
  std::vector<std::pair<double, double>> hull(static_cast<std::size_t>(m), {ball.center[0] - ball.radius, ball.center[0] + ball.radius});
  auto image = [&](Symbol i, Symbol j, const std::vector<std::pair<double, double>>& h) {
    const auto& w = ifs.map(i, j);
    const double a = w({h[j].first})[0], b = w({h[j].second})[0];
    return std::pair{std::min(a, b), std::max(a, b)};
  };
  for (int it = 0; it < 5000; ++it) {
    auto next = hull;
    double change = 0.0;
    for (Symbol i = 0; i < m; ++i) {
      double lo = INFINITY, hi = -INFINITY;
      for (Symbol j = 0; j < m; ++j)
        if (ifs.subshift().allowed(i, j)) {
          const auto [a, b] = image(i, j, hull);
          lo = std::min(lo, a);
          hi = std::max(hi, b);
        }
      next[i] = {lo, hi};
      change = std::max({change, std::abs(lo - hull[i].first), std::abs(hi - hull[i].second)});
    }
    hull = std::move(next);
    if (change <= 1e-15 * (1.0 + ball.radius)) break;
  }
  const double tol = 1e-12 * (1.0 + ball.radius);
  for (Symbol i = 0; i < m; ++i) {
    std::vector<std::pair<std::pair<double, double>, Symbol>> pieces;
    for (Symbol j = 0; j < m; ++j)
      if (ifs.subshift().allowed(i, j)) pieces.push_back({image(i, j, hull), j});
    std::sort(pieces.begin(), pieces.end());
    for (std::size_t k = 1; k < pieces.size(); ++k) {
      if (pieces[k].first.first < pieces[k - 1].first.second - tol) {
        rep.detail = "images of maps " + RecurrentIFS::key_name(i, pieces[k - 1].second) + " and " +
                     RecurrentIFS::key_name(i, pieces[k].second) + " overlap";
        return rep;
      }
    }
  }
  rep.passed = true;
  rep.detail = "first-level images are disjoint";
  return rep;
}

enum class OscPolicy { warn, error };

struct IfsDimension {
  SetValue value;
  OscReport osc;
  Potential scale;  // the table used as the scale potential
};

/// Hausdorff dimension of the projected level set over C: the BS dimension
/// with respect to the scale potential.
inline IfsDimension hausdorff_dimension(const RecurrentIFS& ifs, const ObservableSet& obs, const TargetSet& C,
                                        LevelMode mode, OscPolicy policy = OscPolicy::warn) {
  if (!(obs.subshift() == ifs.subshift())) throw PreconditionError("ifs: observables live on a different subshift");
  auto osc = check_open_set_condition(ifs);
  if (osc.checked && !osc.passed && policy == OscPolicy::error) {
    throw PreconditionError("ifs: open set condition check failed: " + osc.detail);
  }
  auto psi = scale_potential(ifs);
  const Spectrum sp(psi, obs);
  return {bs_dimension_set(C, sp, mode), std::move(osc), std::move(psi)};
}

/// Dimension of the whole limit set: the root of P(-s psi) = 0.
inline double limit_set_dimension(const RecurrentIFS& ifs) { return bowen_root(scale_potential(ifs)); }

}  // namespace thermo
