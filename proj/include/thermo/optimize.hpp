#pragma once

// Scalar root finding and unimodal line searches.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <utility>
#include <vector>

#include "thermo/error.hpp"

namespace thermo {

struct RootResult {
  double x;
  double fx;
  double lo, hi;  // final bracket
  int evaluations;
};

/// Brent's method on a bracket [a, b] with f(a), f(b) of opposite sign.
/// Stops when |f| <= ftol or the bracket is narrower than xtol.
template <class F>
RootResult brent_root(F&& f, double a, double b, double fa, double fb, double xtol, double ftol,
                      int max_evaluations = 500) {
  if ((fa > 0) == (fb > 0) && fa != 0.0 && fb != 0.0) {
    throw PreconditionError("brent: interval does not bracket a root");
  }
  int evals = 0;
  if (fa == 0.0) return {a, fa, a, a, evals};
  if (fb == 0.0) return {b, fb, b, b, evals};
  double c = a, fc = fa, d = b - a, e = d;
  while (true) {
    if ((fb > 0) == (fc > 0)) {
      c = a;
      fc = fa;
      d = e = b - a;
    }
    if (std::abs(fc) < std::abs(fb)) {
      a = b; b = c; c = a;
      fa = fb; fb = fc; fc = fa;
    }
    const double tol = 2.0 * std::numeric_limits<double>::epsilon() * std::abs(b) + 0.5 * xtol;
    const double m = 0.5 * (c - b);
    if (std::abs(fb) <= ftol || std::abs(m) <= tol) {
      return {b, fb, std::min(b, c), std::max(b, c), evals};
    }
    if (evals >= max_evaluations) {
      throw ConvergenceError("brent: evaluation budget exhausted", std::min(b, c), std::max(b, c));
    }
    if (std::abs(e) >= tol && std::abs(fa) > std::abs(fb)) {
      double p, q, r;
      const double s = fb / fa;
      if (a == c) {
        p = 2.0 * m * s;
        q = 1.0 - s;
      } else {
        q = fa / fc;
        r = fb / fc;
        p = s * (2.0 * m * q * (q - r) - (b - a) * (r - 1.0));
        q = (q - 1.0) * (r - 1.0) * (s - 1.0);
      }
      if (p > 0) q = -q; else p = -p;
      if (2.0 * p < std::min(3.0 * m * q - std::abs(tol * q), std::abs(e * q))) {
        e = d;
        d = p / q;
      } else {
        d = m;
        e = m;
      }
    } else {
      d = m;
      e = m;
    }
    a = b;
    fa = fb;
    b += std::abs(d) > tol ? d : (m > 0 ? tol : -tol);
    fb = f(b);
    ++evals;
  }
}

struct LineOptimum {
  double x;
  double fx;
};

/// Golden-section search for the maximum of a unimodal function on [a, b].
/// The endpoints are compared too, so monotone functions return an endpoint.
template <class F>
LineOptimum golden_maximize(F&& f, double a, double b, double xtol) {
  constexpr double inv_phi = 0.6180339887498949;
  const double a0 = a, b0 = b, fa = f(a), fb = f(b);
  double x1 = b - inv_phi * (b - a), x2 = a + inv_phi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  while (b - a > xtol) {
    if (f1 >= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - inv_phi * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + inv_phi * (b - a);
      f2 = f(x2);
    }
  }
  LineOptimum best{x1, f1};
  if (f2 > best.fx) best = {x2, f2};
  if (fa > best.fx) best = {a0, fa};
  if (fb > best.fx) best = {b0, fb};
  return best;
}

template <class F>
LineOptimum golden_minimize(F&& f, double a, double b, double xtol) {
  auto r = golden_maximize([&](double x) { return -f(x); }, a, b, xtol);
  return {r.x, -r.fx};
}

struct MixtureLp {
  bool feasible = false;
  double value = 0.0;          // best sum t_k v_k
  std::vector<double> weights;  // t_k
  std::vector<double> price;    // p with v_k - p.(m_k - y) <= value for all k
};

/// max sum t_k v_k over t >= 0, sum t_k = 1, sum t_k m_k = y: the best convex
/// combination of the samples (m_k, v_k) above y. Dense two-phase simplex
/// with Bland's rule; meant for a handful of rows and a few thousand columns.
inline MixtureLp mixture_lp(const std::vector<std::vector<double>>& m, const std::vector<double>& v,
                            const std::vector<double>& y) {
  const std::size_t k = m.size(), d = y.size(), rows = d + 1, cols = k + rows;
  MixtureLp out;
  if (k == 0) return out;
  double scale = 1.0;
  for (const auto& mk : m)
    for (std::size_t i = 0; i < d; ++i) scale = std::max(scale, std::abs(mk[i] - y[i]));
  const double eps = 1e-12;
  // Tableau rows: constraint coefficients, then the right-hand side.
  std::vector<std::vector<double>> tab(rows, std::vector<double>(cols + 1, 0.0));
  for (std::size_t j = 0; j < k; ++j) {
    for (std::size_t i = 0; i < d; ++i) tab[i][j] = (m[j][i] - y[i]) / scale;
    tab[d][j] = 1.0;
  }
  tab[d][cols] = 1.0;
  std::vector<std::size_t> basis(rows);
  for (std::size_t i = 0; i < rows; ++i) {
    tab[i][k + i] = 1.0;
    basis[i] = k + i;
  }
  auto pivot = [&](std::size_t r, std::size_t c) {
    const double piv = tab[r][c];
    for (double& x : tab[r]) x /= piv;
    for (std::size_t i = 0; i < rows; ++i) {
      if (i == r || tab[i][c] == 0.0) continue;
      const double f = tab[i][c];
      for (std::size_t j = 0; j <= cols; ++j) tab[i][j] -= f * tab[r][j];
    }
    basis[r] = c;
  };
  // Maximizes cost.x over the columns allowed to enter; false if unbounded.
  auto run = [&](const std::vector<double>& cost, std::size_t enter_limit) {
    for (int it = 0; it < 100000; ++it) {
      std::size_t enter = cols;
      for (std::size_t j = 0; j < enter_limit && enter == cols; ++j) {
        double reduced = cost[j];
        for (std::size_t i = 0; i < rows; ++i) reduced -= cost[basis[i]] * tab[i][j];
        if (reduced > eps) enter = j;
      }
      if (enter == cols) return true;
      std::size_t leave = rows;
      double best = 0.0;
      for (std::size_t i = 0; i < rows; ++i) {
        if (tab[i][enter] <= eps) continue;
        const double ratio = tab[i][cols] / tab[i][enter];
        if (leave == rows || ratio < best - 1e-15 || (ratio <= best + 1e-15 && basis[i] < basis[leave])) {
          leave = i;
          best = ratio;
        }
      }
      if (leave == rows) return false;
      pivot(leave, enter);
    }
    return false;
  };
  std::vector<double> phase1(cols, 0.0);
  for (std::size_t i = 0; i < rows; ++i) phase1[k + i] = -1.0;
  run(phase1, cols);
  double infeasibility = 0.0;
  for (std::size_t i = 0; i < rows; ++i)
    if (basis[i] >= k) infeasibility += tab[i][cols];
  if (infeasibility > 1e-9) return out;
  // Drive zero-level artificials out where a real column allows it.
  for (std::size_t i = 0; i < rows; ++i) {
    if (basis[i] < k) continue;
    for (std::size_t j = 0; j < k; ++j)
      if (std::abs(tab[i][j]) > 1e-9) {
        pivot(i, j);
        break;
      }
  }
  std::vector<double> cost(cols, 0.0);
  for (std::size_t j = 0; j < k; ++j) cost[j] = v[j];
  if (!run(cost, k)) return out;
  out.feasible = true;
  out.weights.assign(k, 0.0);
  for (std::size_t i = 0; i < rows; ++i)
    if (basis[i] < k) out.weights[basis[i]] = std::max(0.0, tab[i][cols]);
  double total = 0.0;
  for (std::size_t j = 0; j < k; ++j) {
    out.value += out.weights[j] * v[j];
    total += out.weights[j];
  }
  out.value /= total;
  // Prices from the artificial columns: they hold B^-1, so w = c_B B^-1.
  std::vector<double> w(rows, 0.0);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t i = 0; i < rows; ++i) w[r] += cost[basis[i]] * tab[i][k + r];
  out.price.assign(d, 0.0);
  for (std::size_t i = 0; i < d; ++i) out.price[i] = w[i] / scale;
  return out;
}

}  // namespace thermo
