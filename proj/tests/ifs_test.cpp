#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "thermo/ifs.hpp"

using namespace thermo;

namespace {

const double kGolden = (1.0 + std::sqrt(5.0)) / 2.0;

double binary_entropy(double p) { return -(p * std::log(p) + (1 - p) * std::log(1 - p)); }

// Oracle: plain bisection on a decreasing function with a sign change on [0, hi].
template <class F>
double bisect(F&& f, double hi) {
  double lo = 0.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) > 0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

RecurrentIFS interval_pair(double r0, double r1) {
  return RecurrentIFS::by_first_symbol(Subshift::full(2), {{r0, {}, {0.0}}, {r1, {}, {1.0 - r1}}});
}

}  // namespace

TEST(RecurrentIFS, Validation) {
  auto full = Subshift::full(2);
  EXPECT_THROW(RecurrentIFS::by_first_symbol(full, {{1.0, {}, {0.0}}, {0.5, {}, {0.5}}}), PreconditionError);
  EXPECT_THROW(RecurrentIFS::by_first_symbol(full, {{0.5, {}, {0.0}}}), PreconditionError);
  std::map<RecurrentIFS::Key, Similarity> partial{{{0, 0}, {0.5, {}, {0.0}}}};
  EXPECT_THROW(RecurrentIFS(full, partial), PreconditionError);
  std::map<RecurrentIFS::Key, Similarity> extra;
  auto golden = Subshift::golden_mean();
  for (Symbol i = 0; i < 2; ++i)
    for (Symbol j = 0; j < 2; ++j) extra[{i, j}] = {0.3, {}, {0.0}};
  EXPECT_THROW(RecurrentIFS(golden, extra), PreconditionError);
  EXPECT_THROW(RecurrentIFS::by_first_symbol(full, {{0.5, {{1, 1}, {0, 1}}, {0, 0}}, {0.5, {}, {0.5, 0.5}}}),
               PreconditionError);
  const double c = std::cos(0.7), s = std::sin(0.7);
  EXPECT_NO_THROW(RecurrentIFS::by_first_symbol(full, {{0.5, {{c, -s}, {s, c}}, {0, 0}}, {0.5, {}, {0.5, 0.5}}}));
}

TEST(ScalePotential, Tables) {
  auto cantor = scale_potential(RecurrentIFS::middle_thirds());
  EXPECT_EQ(cantor.depth(), 2);
  for (const char* w : {"00", "01", "10", "11"}) EXPECT_DOUBLE_EQ(cantor(Word::parse(w)), std::log(3.0));
  auto two = scale_potential(interval_pair(0.5, 0.25));
  EXPECT_DOUBLE_EQ(two(Word{0, 1}), std::log(2.0));
  EXPECT_DOUBLE_EQ(two(Word{1, 0}), std::log(4.0));
  EXPECT_GT(two.min_value(), 0.0);
}

TEST(ProjectPoint, Examples) {
  auto ifs = RecurrentIFS::middle_thirds();
  auto zeros = project_point(ifs, Word(std::vector<Symbol>(41, 0)), 40);
  EXPECT_NEAR(zeros.point[0], 0.0, zeros.radius);
  EXPECT_LE(zeros.radius, 1e-18);
  auto ones = project_point(ifs, Word(std::vector<Symbol>(41, 1)), 40);
  EXPECT_NEAR(ones.point[0], 1.0, 1e-15);
  std::vector<Symbol> w(11, 0);
  w[0] = 1;
  auto p = project_point(ifs, Word(w), 10);
  EXPECT_LE(std::abs(p.point[0] - 2.0 / 3.0), std::pow(3.0, -10));
  EXPECT_LE(p.radius, std::pow(3.0, -10));
  EXPECT_THROW(project_point(ifs, Word{0, 1}, 2), PreconditionError);
}

TEST(ProjectPoint, RadiusBoundsTheLimit) {
  std::mt19937_64 rng(40);
  auto ifs = interval_pair(0.45, 0.3);
  for (int t = 0; t < 20; ++t) {
    std::vector<Symbol> w(70);
    for (auto& s : w) s = static_cast<Symbol>(rng() % 2);
    const auto deep = project_point(ifs, Word(w), 69);
    for (int d : {3, 8, 20}) {
      const auto p = project_point(ifs, Word(w), d);
      EXPECT_LE(std::abs(p.point[0] - deep.point[0]), p.radius + deep.radius + 1e-15);
    }
  }
}

TEST(OpenSetCondition, IntervalCheck) {
  auto ok = check_open_set_condition(RecurrentIFS::middle_thirds());
  EXPECT_TRUE(ok.checked);
  EXPECT_TRUE(ok.passed);
  auto overlap = check_open_set_condition(interval_pair(0.6, 0.6));
  EXPECT_TRUE(overlap.checked);
  EXPECT_FALSE(overlap.passed);
  auto full = Subshift::full(2);
  ObservableSet f(Potential::indicator(full, Word{1}));
  EXPECT_THROW(hausdorff_dimension(interval_pair(0.6, 0.6), f, TargetSet::interval(0, 1), LevelMode::sup, OscPolicy::error),
               PreconditionError);
  auto warned = hausdorff_dimension(interval_pair(0.6, 0.6), f, TargetSet::interval(0, 1), LevelMode::sup);
  EXPECT_FALSE(warned.osc.passed);
  auto plane = RecurrentIFS::by_first_symbol(full, {{0.5, {}, {0, 0}}, {0.5, {}, {0.5, 0.5}}});
  EXPECT_FALSE(check_open_set_condition(plane).checked);
}

TEST(IfsDimension, KnownValues) {
  auto full = Subshift::full(2);
  ObservableSet f(Potential::indicator(full, Word{1}));
  const auto whole = TargetSet::interval(0.0, 1.0);
  EXPECT_NEAR(hausdorff_dimension(RecurrentIFS::middle_thirds(), f, whole, LevelMode::sup).value.value,
              std::log(2.0) / std::log(3.0), 1e-9);
  EXPECT_NEAR(hausdorff_dimension(interval_pair(0.5, 0.25), f, whole, LevelMode::sup).value.value,
              std::log(kGolden) / std::log(2.0), 1e-9);
}

TEST(IfsDimension, MoranFormula) {
  for (int m : {2, 3, 5})
    for (double r : {0.1, 0.2, 1.0 / m - 0.01}) {
      std::vector<Similarity> maps;
      for (int i = 0; i < m; ++i) maps.push_back({r, {}, {i / static_cast<double>(m)}});
      auto ifs = RecurrentIFS::by_first_symbol(Subshift::full(m), maps);
      EXPECT_NEAR(limit_set_dimension(ifs), std::log(m) / -std::log(r), 1e-12);
    }
}

TEST(IfsDimension, SupModeMatchesBowenRoot) {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> u(0.05, 0.45);
  auto full = Subshift::full(2);
  ObservableSet f(Potential::indicator(full, Word{1}));
  for (int t = 0; t < 6; ++t) {
    const double r0 = u(rng), r1 = u(rng);
    auto ifs = interval_pair(r0, r1);
    const double moran = bisect([&](double s) { return std::pow(r0, s) + std::pow(r1, s) - 1.0; }, 1.0);
    EXPECT_NEAR(limit_set_dimension(ifs), moran, 1e-10);
    EXPECT_NEAR(hausdorff_dimension(ifs, f, TargetSet::interval(0, 1), LevelMode::sup).value.value, moran, 1e-9);
  }
}

TEST(IfsDimension, GraphDirectedGoldenMean) {
  // Maps only where the golden-mean matrix allows; dimension solves
  // rho([a_ij r_ij^s]) = 1.
  const double r00 = 0.3, r01 = 0.4, r10 = 0.25;
  std::map<RecurrentIFS::Key, Similarity> maps{
      {{0, 0}, {r00, {}, {0.0}}}, {{0, 1}, {r01, {}, {0.6}}}, {{1, 0}, {r10, {}, {0.2}}}};
  RecurrentIFS ifs(Subshift::golden_mean(), maps);
  auto rho = [&](double s) {
    const double a = std::pow(r00, s), b = std::pow(r01, s) * std::pow(r10, s);
    return 0.5 * (a + std::sqrt(a * a + 4 * b)) - 1.0;
  };
  EXPECT_NEAR(limit_set_dimension(ifs), bisect(rho, 2.0), 1e-10);
}

TEST(IfsDimension, LevelSetsMatchEntropyOverLyapunov) {
  auto full = Subshift::full(2);
  ObservableSet f(Potential::indicator(full, Word{1}));
  auto cantor = RecurrentIFS::middle_thirds();
  auto pair = interval_pair(0.5, 0.25);
  for (double a : {0.1, 0.3, 0.5, 0.8}) {
    const auto C = TargetSet::point({a});
    EXPECT_NEAR(hausdorff_dimension(cantor, f, C, LevelMode::equ).value.value, binary_entropy(a) / std::log(3.0), 1e-8);
    EXPECT_NEAR(hausdorff_dimension(pair, f, C, LevelMode::equ).value.value,
                binary_entropy(a) / ((1 + a) * std::log(2.0)), 1e-8);
  }
}

TEST(IfsDimension, SingletonAtTheMaximisingMean) {
  auto full = Subshift::full(2);
  ObservableSet f(Potential::indicator(full, Word{1}));
  auto ifs = interval_pair(0.5, 0.25);
  const double s = limit_set_dimension(ifs);
  // The equilibrium state of -s psi carries the maximal level set.
  auto mu = equilibrium_measure(-s * scale_potential(ifs), 1);
  const Point y = f.evaluate(mu);
  const double at = hausdorff_dimension(ifs, f, TargetSet::point(y), LevelMode::equ).value.value;
  const double sup = hausdorff_dimension(ifs, f, TargetSet::interval(0, 1), LevelMode::sup).value.value;
  EXPECT_NEAR(at, sup, 1e-9);
  EXPECT_NEAR(y[0], 1.0 / (kGolden * kGolden), 1e-9);
}

TEST(IfsDimension, RatioPowerDividesDimension) {
  for (double t : {1.5, 2.0, 3.25}) {
    const double r = 0.2;
    std::vector<Similarity> base, shrunk;
    for (int i = 0; i < 3; ++i) {
      base.push_back({r, {}, {0.4 * i}});
      shrunk.push_back({std::pow(r, t), {}, {0.4 * i}});
    }
    const auto d0 = limit_set_dimension(RecurrentIFS::by_first_symbol(Subshift::full(3), base));
    const auto d1 = limit_set_dimension(RecurrentIFS::by_first_symbol(Subshift::full(3), shrunk));
    EXPECT_NEAR(d1, d0 / t, 1e-12);
  }
}
