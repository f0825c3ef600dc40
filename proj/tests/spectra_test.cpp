#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "thermo/spectra.hpp"

using namespace thermo;

namespace {

const double kGoldenLog = std::log((1.0 + std::sqrt(5.0)) / 2.0);

double binary_entropy(double a) {
  auto t = [](double p) { return p > 0 ? -p * std::log(p) : 0.0; };
  return t(a) + t(1 - a);
}

Subshift random_primitive(std::mt19937_64& rng, int m) {
  std::bernoulli_distribution coin(0.65);
  while (true) {
    std::vector<std::vector<int>> t(m, std::vector<int>(m));
    for (auto& row : t)
      for (auto& v : row) v = coin(rng) ? 1 : 0;
    try {
      Subshift s(t);
      if (primitivity(s).primitive) return s;
    } catch (const PreconditionError&) {
    }
  }
}

Potential random_potential(std::mt19937_64& rng, const Subshift& spec, int depth, double scale = 1.0) {
  std::uniform_real_distribution<double> val(-scale, scale);
  return Potential::from_function(spec, depth, [&](std::span<const Symbol>) { return val(rng); });
}

// Oracle on the full 2-shift for a depth-2 phi and f = indicator of 1: the
// constrained maximum over two-state chains P = [[1-a, a], [b, 1-b]] with
// stationary mass alpha on symbol 1, i.e. b = a (1 - alpha) / alpha. One free
// parameter, maximized by a plain ternary search.
double markov_oracle(const Potential& phi, double alpha) {
  auto value = [&](double a) {
    const double b = a * (1 - alpha) / alpha;
    const double P[2][2] = {{1 - a, a}, {b, 1 - b}};
    const double pi[2] = {1 - alpha, alpha};
    double s = 0.0;
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) {
        if (P[i][j] <= 0) continue;
        const Symbol w[2] = {i, j};
        s += pi[i] * P[i][j] * (-std::log(P[i][j]) + phi(std::span<const Symbol>(w, 2)));
      }
    return s;
  };
  double lo = 0.0, hi = std::min(1.0, alpha / (1 - alpha));
  for (int it = 0; it < 200; ++it) {
    const double m1 = lo + (hi - lo) / 3, m2 = hi - (hi - lo) / 3;
    (value(m1) < value(m2) ? lo : hi) = value(m1) < value(m2) ? m1 : m2;
  }
  return value(0.5 * (lo + hi));
}

ObservableSet ind1(const Subshift& s) { return ObservableSet(Potential::indicator(s, Word{1})); }

}  // namespace

TEST(FeasibleDomain, Examples) {
  auto full = Subshift::full(2);
  auto golden = Subshift::golden_mean();
  auto a = feasible_domain(ind1(full));
  EXPECT_DOUBLE_EQ(a.lo(), 0.0);
  EXPECT_DOUBLE_EQ(a.hi(), 1.0);
  auto b = feasible_domain(ind1(golden));
  EXPECT_DOUBLE_EQ(b.lo(), 0.0);
  EXPECT_DOUBLE_EQ(b.hi(), 0.5);
  EXPECT_EQ(b.max_cycle().edges.size(), 2u);
  auto c = feasible_domain(ObservableSet(Potential::indicator(golden, Word{1, 1})));
  EXPECT_DOUBLE_EQ(c.lo(), 0.0);
  EXPECT_DOUBLE_EQ(c.hi(), 0.0);
}

TEST(FeasibleDomain, SimplexInTwoDimensions) {
  auto full = Subshift::full(3);
  ObservableSet obs({Potential::indicator(full, Word{1}), Potential::indicator(full, Word{2})});
  auto d = feasible_domain(obs);
  EXPECT_EQ(d.vertices().size(), 3u);
  EXPECT_TRUE(d.interior({0.2, 0.3}));
  EXPECT_TRUE(d.on_boundary({0.5, 0.5}));
  EXPECT_FALSE(d.contains({0.6, 0.6}));
  EXPECT_FALSE(d.contains({-0.01, 0.5}));
}

TEST(Lambda, BinaryEntropyOnFullShift) {
  auto full = Subshift::full(2);
  Spectrum sp(Potential::constant(full, 0.0), ind1(full));
  for (int k = 1; k < 100; ++k) {
    const double a = k / 100.0;
    const auto r = sp.lambda({a});
    EXPECT_EQ(r.status, LambdaStatus::interior);
    EXPECT_NEAR(r.value, binary_entropy(a), 1e-9) << a;
    EXPECT_LE(r.gradient_norm, 1e-10);
    EXPECT_NEAR(r.dual[0], std::log(a / (1 - a)), 1e-6);
  }
  EXPECT_NEAR(sp.lambda({0.0}).value, 0.0, 1e-12);
  EXPECT_EQ(sp.lambda({1.0}).status, LambdaStatus::boundary);
  EXPECT_EQ(sp.lambda({1.2}).value, kNegInf);
  EXPECT_EQ(sp.lambda({-0.1}).status, LambdaStatus::outside);
}

TEST(Lambda, MatchesTwoStateMarkovOracle) {
  std::mt19937_64 rng(11);
  auto full = Subshift::full(2);
  for (int i = 0; i < 4; ++i) {
    auto phi = random_potential(rng, full, 2);
    Spectrum sp(phi, ind1(full));
    for (double a : {0.05, 0.2, 0.5, 0.71, 0.93}) EXPECT_NEAR(sp.lambda({a}).value, markov_oracle(phi, a), 1e-8);
  }
}

TEST(Lambda, ConstantShiftAndPressureBound) {
  std::mt19937_64 rng(12);
  for (int i = 0; i < 6; ++i) {
    auto spec = random_primitive(rng, 3);
    auto phi = random_potential(rng, spec, 2);
    ObservableSet obs(random_potential(rng, spec, 1 + i % 2));
    Spectrum sp(phi, obs), shifted(phi.plus(0.37), obs);
    const double p = spectral_pressure(phi).value;
    const auto& d = sp.domain();
    if (d.hi() - d.lo() < 1e-6) continue;
    for (int k = 0; k <= 10; ++k) {
      const double y = d.lo() + (d.hi() - d.lo()) * k / 10.0;
      const double v = sp.lambda({y}).value;
      EXPECT_NEAR(shifted.lambda({y}).value, v + 0.37, 1e-9);
      EXPECT_LE(v, p + 1e-12);
    }
  }
}

TEST(Lambda, GoldenMeanEndpoints) {
  auto golden = Subshift::golden_mean();
  Spectrum sp(Potential::constant(golden, 0.0), ind1(golden));
  // Only the 2-cycle 0101... has frequency 1/2; the fixed point 000... has 0.
  EXPECT_NEAR(sp.lambda({0.5}).value, 0.0, 1e-12);
  EXPECT_NEAR(sp.lambda({0.0}).value, 0.0, 1e-12);
  // Peak at the Parry frequency of symbol 1, 1/(lam^2 + 1).
  const double lam = (1 + std::sqrt(5.0)) / 2;
  EXPECT_NEAR(sp.lambda({1 / (lam * lam + 1)}).value, kGoldenLog, 1e-9);
  // Degenerate domain: "11" never occurs, so the only level is 0 with full entropy.
  Spectrum deg(Potential::constant(golden, 0.0), ObservableSet(Potential::indicator(golden, Word{1, 1})));
  EXPECT_NEAR(deg.lambda({0.0}).value, kGoldenLog, 1e-12);
  EXPECT_EQ(deg.lambda({0.1}).value, kNegInf);
}

TEST(Lambda, TwoDimensionalSimplex) {
  auto full = Subshift::full(3);
  ObservableSet obs({Potential::indicator(full, Word{1}), Potential::indicator(full, Word{2})});
  Spectrum sp(Potential::constant(full, 0.0), obs);
  for (auto y : std::vector<Point>{{0.2, 0.3}, {1.0 / 3, 1.0 / 3}, {0.05, 0.9}, {0.6, 0.1}}) {
    const double p0 = 1 - y[0] - y[1];
    const double h = -(p0 * std::log(p0) + y[0] * std::log(y[0]) + y[1] * std::log(y[1]));
    const auto r = sp.lambda(y);
    EXPECT_EQ(r.status, LambdaStatus::interior);
    EXPECT_NEAR(r.value, h, 1e-9);
  }
  EXPECT_EQ(sp.lambda({0.7, 0.7}).value, kNegInf);
  auto edge = sp.lambda({0.5, 0.5});
  EXPECT_EQ(edge.status, LambdaStatus::boundary);
  EXPECT_NEAR(edge.value, std::log(2.0), 1e-6);
}

TEST(Lambda, ConcaveAlongTheDomain) {
  std::mt19937_64 rng(13);
  for (int i = 0; i < 5; ++i) {
    auto spec = random_primitive(rng, 2 + i % 3);
    auto phi = random_potential(rng, spec, 2);
    Spectrum sp(phi, ObservableSet(random_potential(rng, spec, 2)));
    const auto& d = sp.domain();
    std::vector<double> ys;
    for (int k = 0; k <= 8; ++k) ys.push_back(d.lo() + (d.hi() - d.lo()) * k / 8.0);
    for (double y1 : ys)
      for (double y2 : ys)
        for (double l : {0.25, 0.5, 0.75}) {
          const double mid = sp.lambda({l * y1 + (1 - l) * y2}).value;
          EXPECT_GE(mid - (l * sp.lambda({y1}).value + (1 - l) * sp.lambda({y2}).value), -1e-8);
        }
  }
}

TEST(LambdaDirect, Examples) {
  auto full = Subshift::full(2);
  auto zero = Potential::constant(full, 0.0);
  EXPECT_NEAR(lambda_direct({1.0}, zero, ind1(full)).value, 0.0, 1e-12);
  EXPECT_NEAR(lambda_direct({0.0}, zero, ind1(full)).value, 0.0, 1e-12);
  auto golden = Subshift::golden_mean();
  const double lam = (1 + std::sqrt(5.0)) / 2;
  EXPECT_NEAR(lambda_direct({1 / (lam * lam + 1)}, Potential::constant(golden, 0.0), ind1(golden)).value, kGoldenLog,
              1e-9);
  EXPECT_NEAR(lambda_direct({0.5}, Potential::constant(golden, 0.0), ind1(golden)).value, 0.0, 1e-12);
  EXPECT_THROW(lambda_direct({1.5}, zero, ind1(full)), PreconditionError);
}

TEST(LambdaDirect, WitnessMeetsConstraint) {
  auto full = Subshift::full(2);
  auto r = lambda_direct({0.3}, Potential::constant(full, 0.0), ind1(full));
  ASSERT_TRUE(r.witness.has_value());
  EXPECT_NEAR(r.witness->cylinder_probability(Word{1}), 0.3, 1e-10);
  EXPECT_NEAR(r.value, binary_entropy(0.3), 1e-9);
  EXPECT_LE(r.constraint_residual, 1e-11);
}

TEST(LambdaDirect, AgreesWithDualOnRandomSystems) {
  std::mt19937_64 rng(14);
  for (int i = 0; i < 8; ++i) {
    auto spec = random_primitive(rng, 2 + i % 3);
    auto phi = random_potential(rng, spec, 1 + i % 2);
    ObservableSet obs(random_potential(rng, spec, 1 + (i / 2) % 2));
    Spectrum sp(phi, obs);
    const auto& d = sp.domain();
    if (d.hi() - d.lo() < 1e-3) continue;
    for (int k = 1; k < 6; ++k) {
      const double y = d.lo() + (d.hi() - d.lo()) * k / 6.0;
      EXPECT_NEAR(lambda_direct({y}, phi, obs, 1 + i % 2).value, sp.lambda({y}).value, 1e-6);
    }
  }
}

TEST(LambdaDirect, AgreesWithDualInTwoDimensions) {
  std::mt19937_64 rng(15);
  auto spec = Subshift::full(3);
  auto phi = random_potential(rng, spec, 2, 0.5);
  ObservableSet obs({random_potential(rng, spec, 1), random_potential(rng, spec, 2)});
  Spectrum sp(phi, obs);
  const auto& verts = sp.domain().vertices();
  Point c(2, 0.0);
  for (const auto& v : verts)
    for (int i = 0; i < 2; ++i) c[i] += v[i] / static_cast<double>(verts.size());
  for (double t : {0.0, 0.3, 0.6}) {
    Point y{c[0] + t * (verts[0][0] - c[0]), c[1] + t * (verts[0][1] - c[1])};
    EXPECT_NEAR(lambda_direct(y, phi, obs).value, sp.lambda(y).value, 1e-6);
  }
}

TEST(PressureLevels, EquExamples) {
  auto full = Subshift::full(2);
  Spectrum sp(Potential::constant(full, 0.0), ind1(full));
  EXPECT_NEAR(pressure_equ(TargetSet::point({0.3}), sp).value, binary_entropy(0.3), 1e-9);
  EXPECT_NEAR(pressure_equ(TargetSet::interval(0.0, 1.0), sp).value, 0.0, 1e-12);
  EXPECT_NEAR(pressure_equ(TargetSet::interval(0.2, 0.6), sp).value, binary_entropy(0.2), 1e-9);
  EXPECT_TRUE(pressure_equ(TargetSet::interval(0.5, 1.1), sp).is_empty());
  EXPECT_TRUE(pressure_equ(TargetSet::points({{0.2}, {0.4}}), sp).is_empty());
  EXPECT_TRUE(pressure_equ(TargetSet::box_union({{{0.1}, {0.2}}, {{0.3}, {0.4}}}), sp).is_empty());
  EXPECT_FALSE(pressure_equ(TargetSet::box_union({{{0.1}, {0.3}}, {{0.3}, {0.4}}}), sp).is_empty());
}

TEST(PressureLevels, SubExamplesAndHull) {
  auto full = Subshift::full(2);
  Spectrum sp(Potential::constant(full, 0.0), ind1(full));
  auto two = pressure_sub(TargetSet::points({{0.1}, {0.45}}), sp);
  EXPECT_NEAR(two.value, std::min(binary_entropy(0.1), binary_entropy(0.45)), 1e-9);
  EXPECT_NEAR(pressure_sub(TargetSet::point({0.37}), sp).value, pressure_equ(TargetSet::point({0.37}), sp).value,
              1e-15);
  std::mt19937_64 rng(16);
  for (int i = 0; i < 5; ++i) {
    auto spec = random_primitive(rng, 3);
    auto phi = random_potential(rng, spec, 2);
    Spectrum s(phi, ObservableSet(random_potential(rng, spec, 2)));
    const auto& d = s.domain();
    std::uniform_real_distribution<double> u(d.lo(), d.hi());
    std::vector<Point> pts;
    for (int k = 0; k < 4; ++k) pts.push_back({u(rng)});
    auto C = TargetSet::points(pts);
    EXPECT_NEAR(pressure_sub(C, s).value, pressure_sub(C.hull(), s).value, 1e-6);
  }
}

TEST(PressureLevels, SupExamples) {
  std::mt19937_64 rng(17);
  for (int i = 0; i < 4; ++i) {
    auto spec = random_primitive(rng, 2 + i % 2);
    auto phi = random_potential(rng, spec, 2);
    Spectrum sp(phi, ObservableSet(random_potential(rng, spec, 1)));
    const auto& d = sp.domain();
    auto whole = TargetSet::interval(d.lo() - 1.0, d.hi() + 1.0);
    EXPECT_NEAR(pressure_sup(whole, sp).value, spectral_pressure(phi).value, 1e-9);
  }
  auto full = Subshift::full(2);
  Spectrum sp(Potential::constant(full, 0.0), ind1(full));
  EXPECT_NEAR(pressure_sup(TargetSet::point({0.2}), sp).value, binary_entropy(0.2), 1e-9);
  EXPECT_EQ(pressure_sup(TargetSet::interval(1.5, 2.0), sp).value, kNegInf);
  EXPECT_NEAR(pressure_sup(TargetSet::interval(0.6, 0.9), sp).value, binary_entropy(0.6), 1e-9);
}

TEST(PressureLevels, SupInTwoDimensions) {
  auto full = Subshift::full(3);
  ObservableSet obs({Potential::indicator(full, Word{1}), Potential::indicator(full, Word{2})});
  Spectrum sp(Potential::constant(full, 0.0), obs);
  EXPECT_NEAR(pressure_sup(TargetSet::box({0, 0}, {1, 1}), sp).value, std::log(3.0), 1e-8);
  auto corner = pressure_sub(TargetSet::box({0.1, 0.1}, {0.3, 0.2}), sp);
  auto h = [](double a, double b) { return -(a * std::log(a) + b * std::log(b) + (1 - a - b) * std::log(1 - a - b)); };
  EXPECT_NEAR(corner.value, h(0.1, 0.1), 1e-8);
}

TEST(PressureLevels, BetweenExamples) {
  auto full = Subshift::full(2);
  auto phi = Potential::per_symbol(full, {0.1, -0.3});
  Spectrum sp(phi, ind1(full));
  const double P = spectral_pressure(phi).value;
  auto none = TargetSet::points({}, 1);
  EXPECT_NEAR(pressure_between(none, TargetSet::interval(0, 1), sp).value, P, 1e-9);
  auto single = pressure_between(TargetSet::point({0.4}), TargetSet::interval(0.2, 0.9), sp);
  EXPECT_EQ(single.status, SetValue::Status::value);
  EXPECT_NEAR(single.value, sp.lambda({0.4}).value, 1e-12);
  auto split = pressure_between(TargetSet::points({{0.2}, {0.8}}),
                                TargetSet::box_union({{{0.1}, {0.3}}, {{0.7}, {0.9}}}), sp);
  EXPECT_TRUE(split.is_empty());
  auto joined = pressure_between(TargetSet::points({{0.2}, {0.8}}),
                                 TargetSet::box_union({{{0.1}, {0.5}}, {{0.5}, {0.9}}}), sp);
  EXPECT_NEAR(joined.value, std::min(sp.lambda({0.2}).value, sp.lambda({0.8}).value), 1e-9);
}

TEST(PressureLevels, BetweenBracketWhenHullEscapes) {
  auto full = Subshift::full(3);
  ObservableSet obs({Potential::indicator(full, Word{1}), Potential::indicator(full, Word{2})});
  Spectrum sp(Potential::constant(full, 0.0), obs);
  // An L-shaped S2 joining (0.1,0.1) and (0.4,0.4) around the corner (0.4,0.1);
  // the segment between the two S1 points leaves S2.
  auto S2 = TargetSet::box_union({{{0.05, 0.05}, {0.45, 0.15}}, {{0.35, 0.05}, {0.45, 0.45}}});
  auto S1 = TargetSet::points({{0.1, 0.1}, {0.4, 0.4}});
  auto r = pressure_between(S1, S2, sp);
  ASSERT_EQ(r.status, SetValue::Status::bracket);
  EXPECT_LE(r.lower, r.upper + 1e-12);
  EXPECT_NEAR(r.upper, std::min(sp.lambda({0.1, 0.1}).value, sp.lambda({0.4, 0.4}).value), 1e-9);
}

TEST(Relative, Examples) {
  auto full = Subshift::full(2);
  auto psi = Potential::per_symbol(full, {0.2, -0.5});
  auto f = Potential::indicator(full, Word{1});
  auto one = Potential::constant(full, 1.0);
  Spectrum sp(psi, ObservableSet(f));
  for (double a : {0.1, 0.5, 0.8}) EXPECT_NEAR(relative_spectrum(f, one, a, psi).value, sp.lambda({a}).value, 1e-9);
  auto g = Potential::per_symbol(full, {1.0, 2.0});
  EXPECT_NEAR(relative_spectrum(g, g, 1.0, psi).value, spectral_pressure(psi).value, 1e-10);
  EXPECT_EQ(relative_spectrum(g, g, 0.7, psi).value, kNegInf);
  EXPECT_THROW(relative_spectrum(f, Potential::per_symbol(full, {1.0, -1.0}), 0.5, psi), PreconditionError);
}

TEST(Relative, AgreesWithPrimalRatioConstraint) {
  auto full = Subshift::full(2);
  auto f = Potential::indicator(full, Word{1});
  auto g = Potential::constant(full, 1.0) + Potential::indicator(full, Word{0});
  auto psi = Potential::constant(full, 0.0);
  for (int k = 0; k <= 20; k += 4) {
    const double a = k / 20.0;
    EXPECT_NEAR(relative_spectrum(f, g, a, psi).value, relative_direct(f, g, a, psi).value, 1e-5);
  }
}

TEST(Dimension, PointExamples) {
  auto full = Subshift::full(2);
  auto obs = ind1(full);
  EXPECT_NEAR(bs_dimension_point({0.5}, Potential::constant(full, std::log(2.0)), obs), 1.0, 1e-10);
  EXPECT_NEAR(bs_dimension_point({0.5}, Potential::constant(full, std::log(3.0)), obs), std::log(2.0) / std::log(3.0),
              1e-10);
  EXPECT_NEAR(bs_dimension_point({0.2}, Potential::constant(full, 1.7), obs), binary_entropy(0.2) / 1.7, 1e-10);
  EXPECT_NEAR(bs_dimension_point({1.0}, Potential::constant(full, 1.7), obs), 0.0, 1e-12);
  EXPECT_THROW(bs_dimension_point({0.5}, Potential::per_symbol(full, {1.0, -0.5}), obs), PreconditionError);
}

TEST(Dimension, ScalingTheScaleDividesTheDimension) {
  std::mt19937_64 rng(18);
  std::uniform_real_distribution<double> u(0.3, 2.0);
  auto spec = Subshift::full(2);
  auto psi = Potential::from_function(spec, 2, [&](std::span<const Symbol>) { return u(rng); });
  auto obs = ind1(spec);
  for (double y : {0.2, 0.5, 0.7}) {
    const double base = bs_dimension_point({y}, psi, obs);
    EXPECT_NEAR(bs_dimension_point({y}, 2.5 * psi, obs), base / 2.5, 1e-9);
  }
}

TEST(Dimension, SetModes) {
  auto full = Subshift::full(2);
  auto psi = Potential::per_symbol(full, {std::log(2.0), std::log(4.0)});
  Spectrum sp(psi, ind1(full));
  const double golden_dim = kGoldenLog / std::log(2.0);
  auto sup = bs_dimension_set(TargetSet::interval(-1, 2), sp, LevelMode::sup);
  EXPECT_NEAR(sup.value, golden_dim, 1e-9);
  EXPECT_NEAR(bowen_root(psi), golden_dim, 1e-12);
  EXPECT_NEAR(bs_dimension_set(TargetSet::point(sup.at), sp, LevelMode::equ).value, golden_dim, 1e-9);
  EXPECT_NEAR(bs_dimension_set(TargetSet::point({0.3}), sp, LevelMode::equ).value, bs_dimension_point({0.3}, sp),
              1e-15);
  EXPECT_TRUE(bs_dimension_set(TargetSet::interval(0.5, 1.5), sp, LevelMode::sub).is_empty());
  EXPECT_NEAR(bs_dimension_set(TargetSet::interval(0.0, 1.0), sp, LevelMode::equ).value, 0.0, 1e-12);
}

TEST(SpectrumCurve, WorkerCountDoesNotChangeResults) {
  auto full = Subshift::full(2);
  Spectrum sp(Potential::per_symbol(full, {0.3, 0.0}), ind1(full));
  auto a = spectrum_curve(sp, 41, 1);
  auto b = spectrum_curve(sp, 41, 4);
  ASSERT_EQ(a.grid.size(), 41u);
  for (std::size_t i = 0; i < a.values.size(); ++i) EXPECT_EQ(a.values[i].value, b.values[i].value);
  double best = kNegInf;
  for (const auto& v : a.values) best = std::max(best, v.value);
  EXPECT_LE(best, spectral_pressure(Potential::per_symbol(full, {0.3, 0.0})).value + 1e-12);
}

TEST(MixtureLp, SmallCases) {
  const std::vector<std::vector<double>> m{{0.0}, {1.0}, {2.0}};
  const std::vector<double> v{0.0, 1.0, 0.0};
  auto r = mixture_lp(m, v, {1.0});
  ASSERT_TRUE(r.feasible);
  EXPECT_NEAR(r.value, 1.0, 1e-14);
  EXPECT_NEAR(r.weights[1], 1.0, 1e-14);
  r = mixture_lp(m, v, {0.5});
  ASSERT_TRUE(r.feasible);
  EXPECT_NEAR(r.value, 0.5, 1e-14);
  EXPECT_NEAR(r.price[0], 1.0, 1e-12);
  EXPECT_FALSE(mixture_lp(m, v, {3.0}).feasible);
}

// Oracle: the best mixture uses at most three points (Caratheodory), so in
// the plane it is the best barycentric interpolation over triangles holding y.
TEST(MixtureLp, MatchesTriangleSearch) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 40; ++trial) {
    const int k = 4 + trial % 9;
    std::vector<std::vector<double>> m(k, std::vector<double>(2));
    std::vector<double> v(k);
    for (int i = 0; i < k; ++i) {
      m[i] = {u(rng), u(rng)};
      v[i] = u(rng);
    }
    const std::vector<double> y{0.3 * u(rng), 0.3 * u(rng)};
    double best = -INFINITY;
    for (int a = 0; a < k; ++a)
      for (int b = a + 1; b < k; ++b)
        for (int c = b + 1; c < k; ++c) {
          const double det = (m[b][0] - m[a][0]) * (m[c][1] - m[a][1]) - (m[c][0] - m[a][0]) * (m[b][1] - m[a][1]);
          if (std::abs(det) < 1e-12) continue;
          const double lb = ((y[0] - m[a][0]) * (m[c][1] - m[a][1]) - (m[c][0] - m[a][0]) * (y[1] - m[a][1])) / det;
          const double lc = ((m[b][0] - m[a][0]) * (y[1] - m[a][1]) - (y[0] - m[a][0]) * (m[b][1] - m[a][1])) / det;
          const double la = 1.0 - lb - lc;
          if (la < 0 || lb < 0 || lc < 0) continue;
          best = std::max(best, la * v[a] + lb * v[b] + lc * v[c]);
        }
    const auto r = mixture_lp(m, v, y);
    ASSERT_EQ(r.feasible, std::isfinite(best)) << trial;
    if (!r.feasible) continue;
    EXPECT_NEAR(r.value, best, 1e-12) << trial;
    // The prices give a plane over every sample that touches at y.
    for (int i = 0; i < k; ++i)
      EXPECT_LE(v[i] - r.price[0] * (m[i][0] - y[0]) - r.price[1] * (m[i][1] - y[1]), r.value + 1e-12);
  }
}
