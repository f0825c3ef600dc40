#pragma once

// Compact targets in R^d: points, boxes, convex polytopes, finite point lists
// and finite unions of boxes. Polytopes (and hulls) are limited to d <= 2 so
// that containment stays exact.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "thermo/error.hpp"

namespace thermo {

using Point = std::vector<double>;

struct Box {
  Point lo, hi;
};

namespace detail {

inline double cross(const Point& o, const Point& a, const Point& b) {
  return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
}

// Andrew's monotone chain; counter-clockwise, collinear points dropped.
inline std::vector<Point> convex_hull_2d(std::vector<Point> pts) {
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() < 3) return pts;
  std::vector<Point> hull(2 * pts.size());
  std::size_t k = 0;
  for (const auto& p : pts) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 0) --k;
    hull[k++] = p;
  }
  for (std::size_t i = pts.size() - 1, t = k + 1; i-- > 0;) {
    while (k >= t && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  return hull;
}

inline double segment_distance(const Point& p, const Point& a, const Point& b) {
  const double dx = b[0] - a[0], dy = b[1] - a[1];
  const double len2 = dx * dx + dy * dy;
  double t = len2 > 0 ? ((p[0] - a[0]) * dx + (p[1] - a[1]) * dy) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return std::hypot(p[0] - a[0] - t * dx, p[1] - a[1] - t * dy);
}

// Containment in the convex hull given by a CCW vertex list (any size).
inline bool hull_contains(const std::vector<Point>& hull, const Point& y, double tol) {
  if (hull.empty()) return false;
  if (hull.size() == 1) return std::hypot(y[0] - hull[0][0], y[1] - hull[0][1]) <= tol;
  if (hull.size() == 2) return segment_distance(y, hull[0], hull[1]) <= tol;
  for (std::size_t i = 0; i < hull.size(); ++i) {
    const auto& a = hull[i];
    const auto& b = hull[(i + 1) % hull.size()];
    const double len = std::hypot(b[0] - a[0], b[1] - a[1]);
    if (cross(a, b, y) < -tol * len) return false;
  }
  return true;
}

inline std::vector<double> linspace(double a, double b, int n) {
  if (n <= 1 || a == b) return {a};
  std::vector<double> v(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = a + (b - a) * i / (n - 1);
  v.back() = b;
  return v;
}

inline bool boxes_touch(const Box& a, const Box& b, double tol) {
  for (std::size_t i = 0; i < a.lo.size(); ++i)
    if (a.hi[i] < b.lo[i] - tol || b.hi[i] < a.lo[i] - tol) return false;
  return true;
}

inline std::vector<int> union_find_labels(std::size_t n, auto&& linked) {
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (linked(i, j)) parent[find(static_cast<int>(i))] = find(static_cast<int>(j));
  std::vector<int> label(n), remap(n, -1);
  int next = 0;
  for (std::size_t i = 0; i < n; ++i) {
    auto& r = remap[find(static_cast<int>(i))];
    if (r < 0) r = next++;
    label[i] = r;
  }
  return label;
}

}  // namespace detail

class TargetSet {
 public:
  enum class Kind { point, box, polytope, points, box_union };

  static constexpr double kTol = 1e-12;

  static TargetSet point(Point y) {
    TargetSet t(Kind::point, static_cast<int>(y.size()));
    t.points_.push_back(std::move(y));
    return t;
  }

  static TargetSet box(Point lo, Point hi) {
    TargetSet t(Kind::box, static_cast<int>(lo.size()));
    check_box(lo, hi);
    t.boxes_.push_back({std::move(lo), std::move(hi)});
    return t;
  }

  static TargetSet interval(double a, double b) { return box({a}, {b}); }

  static TargetSet polytope(std::vector<Point> vertices) {
    if (vertices.empty()) throw PreconditionError("polytope needs at least one vertex");
    TargetSet t(Kind::polytope, static_cast<int>(vertices[0].size()));
    t.check_points(vertices);
    if (t.dim_ > 2) throw PreconditionError("polytopes are supported in dimension 1 and 2 only");
    t.points_ = t.dim_ == 2 ? detail::convex_hull_2d(vertices) : interval_ends(vertices);
    return t;
  }

  /// Finite list of points; may be empty when `dim` is given.
  static TargetSet points(std::vector<Point> pts, int dim = -1) {
    if (pts.empty() && dim < 1) throw PreconditionError("empty point list needs an explicit dimension");
    TargetSet t(Kind::points, pts.empty() ? dim : static_cast<int>(pts[0].size()));
    t.check_points(pts);
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    t.points_ = std::move(pts);
    return t;
  }

  static TargetSet box_union(std::vector<Box> boxes) {
    if (boxes.empty()) throw PreconditionError("box union needs at least one box");
    TargetSet t(Kind::box_union, static_cast<int>(boxes[0].lo.size()));
    for (const auto& b : boxes) {
      if (static_cast<int>(b.lo.size()) != t.dim_) throw PreconditionError("boxes of mixed dimension");
      check_box(b.lo, b.hi);
    }
    t.boxes_ = std::move(boxes);
    return t;
  }

  Kind kind() const { return kind_; }
  int dim() const { return dim_; }
  bool empty() const { return kind_ == Kind::points && points_.empty(); }
  /// Point data: the point, the listed points, or the polytope vertices.
  const std::vector<Point>& point_data() const { return points_; }
  const std::vector<Box>& boxes() const { return boxes_; }

  /// A finite set whose convex hull equals the hull of this set.
  std::vector<Point> extreme_points() const {
    if (boxes_.empty()) return points_;
    std::vector<Point> out;
    for (const auto& b : boxes_) {
      const std::size_t corners = std::size_t{1} << dim_;
      for (std::size_t mask = 0; mask < corners; ++mask) {
        Point c(static_cast<std::size_t>(dim_));
        for (int i = 0; i < dim_; ++i) c[i] = (mask >> i) & 1 ? b.hi[i] : b.lo[i];
        out.push_back(std::move(c));
      }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

  bool contains(const Point& y, double tol = kTol) const {
    if (static_cast<int>(y.size()) != dim_) throw PreconditionError("point dimension mismatch");
    switch (kind_) {
      case Kind::point:
      case Kind::points:
        for (const auto& p : points_)
          if (distance(p, y) <= tol) return true;
        return false;
      case Kind::box:
      case Kind::box_union:
        for (const auto& b : boxes_)
          if (in_box(b, y, tol)) return true;
        return false;
      case Kind::polytope:
        if (dim_ == 1) return y[0] >= points_.front()[0] - tol && y[0] <= points_.back()[0] + tol;
        return detail::hull_contains(points_, y, tol);
    }
    return false;
  }

  /// Connected components, each returned as a target of its own.
  std::vector<TargetSet> components() const {
    if (kind_ == Kind::points) {
      std::vector<TargetSet> out;
      for (const auto& p : points_) out.push_back(point(p));
      return out;
    }
    if (kind_ != Kind::box_union) return {*this};
    const auto label = detail::union_find_labels(
        boxes_.size(), [&](std::size_t i, std::size_t j) { return detail::boxes_touch(boxes_[i], boxes_[j], kTol); });
    const int count = *std::max_element(label.begin(), label.end()) + 1;
    std::vector<std::vector<Box>> groups(static_cast<std::size_t>(count));
    for (std::size_t i = 0; i < boxes_.size(); ++i) groups[label[i]].push_back(boxes_[i]);
    std::vector<TargetSet> out;
    for (auto& g : groups) out.push_back(g.size() == 1 ? box(g[0].lo, g[0].hi) : box_union(std::move(g)));
    return out;
  }

  bool connected() const { return components().size() <= 1; }

  /// Closed convex hull (d <= 2, or any d for a single box or point).
  TargetSet hull() const {
    if (kind_ == Kind::point || kind_ == Kind::box || kind_ == Kind::polytope) return *this;
    if (empty()) throw PreconditionError("hull of an empty set");
    if (dim_ == 1) {
      const auto ext = extreme_points();
      return interval(ext.front()[0], ext.back()[0]);
    }
    return polytope(extreme_points());
  }

  Box bounds() const {
    const auto ext = extreme_points();
    if (ext.empty()) throw PreconditionError("bounds of an empty set");
    Box b{ext[0], ext[0]};
    for (const auto& p : ext)
      for (int i = 0; i < dim_; ++i) {
        b.lo[i] = std::min(b.lo[i], p[i]);
        b.hi[i] = std::max(b.hi[i], p[i]);
      }
    return b;
  }

  /// For d = 1: the set as a sorted list of closed intervals (points are
  /// degenerate intervals). Overlapping pieces are kept separate.
  std::vector<std::pair<double, double>> intervals() const {
    if (dim_ != 1) throw PreconditionError("intervals() needs a one-dimensional target");
    std::vector<std::pair<double, double>> out;
    if (kind_ == Kind::polytope) {
      out.push_back({points_.front()[0], points_.back()[0]});
    } else if (boxes_.empty()) {
      for (const auto& p : points_) out.push_back({p[0], p[0]});
    } else {
      for (const auto& b : boxes_) out.push_back({b.lo[0], b.hi[0]});
    }
    std::sort(out.begin(), out.end());
    return out;
  }

  /// Finite sample containing every extreme point plus an even grid with
  /// `per_axis` points per coordinate over each piece.
  std::vector<Point> samples(int per_axis) const {
    std::vector<Point> out = extreme_points();
    auto grid = [&](const Box& b, auto&& keep) {
      std::vector<std::vector<double>> axes;
      for (int i = 0; i < dim_; ++i) axes.push_back(detail::linspace(b.lo[i], b.hi[i], per_axis));
      std::vector<std::size_t> idx(static_cast<std::size_t>(dim_), 0);
      while (true) {
        Point p(static_cast<std::size_t>(dim_));
        for (int i = 0; i < dim_; ++i) p[i] = axes[i][idx[i]];
        if (keep(p)) out.push_back(std::move(p));
        int i = 0;
        while (i < dim_ && ++idx[i] == axes[i].size()) idx[i++] = 0;
        if (i == dim_) break;
      }
    };
    if (!boxes_.empty()) {
      for (const auto& b : boxes_) grid(b, [](const Point&) { return true; });
    } else if (kind_ == Kind::polytope) {
      grid(bounds(), [&](const Point& p) { return contains(p); });
      if (dim_ == 2) {
        for (std::size_t i = 0; i < points_.size(); ++i) {
          const auto& a = points_[i];
          const auto& b = points_[(i + 1) % points_.size()];
          for (double t : detail::linspace(0.0, 1.0, per_axis)) out.push_back({a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])});
        }
      }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

  static double distance(const Point& a, const Point& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(s);
  }

  /// Euclidean distance from y to the set (exact for boxes, points and
  /// polytopes in d <= 2).
  double distance_to(const Point& y) const {
    double best = INFINITY;
    if (!boxes_.empty()) {
      for (const auto& b : boxes_) {
        double s = 0.0;
        for (int i = 0; i < dim_; ++i) {
          const double c = std::clamp(y[i], b.lo[i], b.hi[i]);
          s += (y[i] - c) * (y[i] - c);
        }
        best = std::min(best, std::sqrt(s));
      }
      return best;
    }
    if (kind_ == Kind::polytope) {
      if (contains(y, 0.0)) return 0.0;
      if (dim_ == 1) return std::max(points_.front()[0] - y[0], y[0] - points_.back()[0]);
      if (points_.size() == 1) return distance(points_[0], y);
      for (std::size_t i = 0; i < points_.size(); ++i)
        best = std::min(best, detail::segment_distance(y, points_[i], points_[(i + 1) % points_.size()]));
      return best;
    }
    for (const auto& p : points_) best = std::min(best, distance(p, y));
    return best;
  }

 private:
  TargetSet(Kind k, int dim) : kind_(k), dim_(dim) {
    if (dim < 1) throw PreconditionError("target dimension must be at least 1");
  }

  static void check_box(const Point& lo, const Point& hi) {
    if (lo.size() != hi.size() || lo.empty()) throw PreconditionError("box corners must have equal positive dimension");
    for (std::size_t i = 0; i < lo.size(); ++i) {
      if (!std::isfinite(lo[i]) || !std::isfinite(hi[i])) throw PreconditionError("box corners must be finite");
      if (lo[i] > hi[i]) throw PreconditionError("box has min > max in coordinate " + std::to_string(i));
    }
  }

  void check_points(const std::vector<Point>& pts) const {
    for (const auto& p : pts) {
      if (static_cast<int>(p.size()) != dim_) throw PreconditionError("points of mixed dimension");
      for (double v : p)
        if (!std::isfinite(v)) throw PreconditionError("point coordinates must be finite");
    }
  }

  static std::vector<Point> interval_ends(const std::vector<Point>& v) {
    auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    return {*lo, *hi};
  }

  static bool in_box(const Box& b, const Point& y, double tol) {
    for (std::size_t i = 0; i < y.size(); ++i)
      if (y[i] < b.lo[i] - tol || y[i] > b.hi[i] + tol) return false;
    return true;
  }

  Kind kind_;
  int dim_;
  std::vector<Point> points_;
  std::vector<Box> boxes_;
};

inline const char* to_string(TargetSet::Kind k) {
  switch (k) {
    case TargetSet::Kind::point: return "point";
    case TargetSet::Kind::box: return "box";
    case TargetSet::Kind::polytope: return "polytope";
    case TargetSet::Kind::points: return "points";
    case TargetSet::Kind::box_union: return "box-union";
  }
  return "?";
}

}  // namespace thermo
