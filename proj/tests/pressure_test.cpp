#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "thermo/pressure.hpp"

using namespace thermo;

namespace {

const double kGoldenLog = std::log((1.0 + std::sqrt(5.0)) / 2.0);

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

// Oracle: (1/n) log of the partition function sum_w exp(sup S_n phi) with the
// sup taken by brute force over extensions.
double brute_cover(const Potential& phi, int n) {
  const int k = phi.depth();
  const auto words = enumerate_words(phi.subshift(), n);
  double total = 0.0;
  for (const auto& w : words) {
    double best = -INFINITY;
    for (const auto& z : enumerate_words(phi.subshift(), n + k - 1)) {
      if (!std::equal(w.symbols().begin(), w.symbols().end(), z.symbols().begin())) continue;
      double s = 0.0;
      for (int i = 0; i < n; ++i) s += phi(z.view(static_cast<std::size_t>(i), static_cast<std::size_t>(k)));
      best = std::max(best, s);
    }
    total += std::exp(best);
  }
  return std::log(total) / n;
}

}  // namespace

TEST(SpectralPressure, KnownValues) {
  auto full = Subshift::full(2);
  EXPECT_NEAR(spectral_pressure(Potential::constant(full, 0.0)).value, std::log(2.0), 1e-12);
  EXPECT_NEAR(spectral_pressure(Potential::constant(Subshift::golden_mean(), 0.0)).value, kGoldenLog, 1e-12);
  const double a = 0.3, b = -1.1;
  EXPECT_NEAR(spectral_pressure(Potential::per_symbol(full, {a, b})).value, std::log(std::exp(a) + std::exp(b)), 1e-12);
  EXPECT_EQ(spectral_pressure(Potential::constant(full, 0.0)).method, PressureMethod::spectral);
}

TEST(SpectralPressure, RejectsNonPrimitive) {
  auto cyc = Subshift({{0, 1}, {1, 0}});
  EXPECT_THROW(spectral_pressure(Potential::constant(cyc, 0.0)), PreconditionError);
}

TEST(SpectralPressure, LargePotentialValuesDoNotOverflow) {
  auto full = Subshift::full(3);
  auto phi = Potential::per_symbol(full, {800.0, 799.0, -800.0});
  EXPECT_NEAR(spectral_pressure(phi).value, 800.0 + std::log(1.0 + std::exp(-1.0) + std::exp(-1600.0)), 1e-10);
}

TEST(SpectralPressure, ConstantShift) {
  std::mt19937_64 rng(1);
  for (int i = 0; i < 10; ++i) {
    auto spec = random_primitive(rng, 3);
    auto phi = random_potential(rng, spec, 2);
    const double c = -2.0 + 0.4 * i;
    EXPECT_NEAR(spectral_pressure(phi.plus(c)).value, spectral_pressure(phi).value + c, 1e-12);
  }
}

TEST(SpectralPressure, ConvexInTilt) {
  std::mt19937_64 rng(2);
  for (int i = 0; i < 5; ++i) {
    auto spec = random_primitive(rng, 3);
    auto phi = random_potential(rng, spec, 2);
    auto f = random_potential(rng, spec, 1);
    const double h = 0.05;
    for (double q = -3.0; q <= 3.0; q += 0.5) {
      const double pm = spectral_pressure(phi + (q - h) * f).value;
      const double p0 = spectral_pressure(phi + q * f).value;
      const double pp = spectral_pressure(phi + (q + h) * f).value;
      EXPECT_GE((pp - 2 * p0 + pm) / (h * h), -1e-8);
    }
  }
}

TEST(VariationalPressure, MatchesSpectralOnRandomSystems) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 25; ++i) {
    auto spec = random_primitive(rng, 2 + i % 4);
    auto phi = random_potential(rng, spec, 1 + i % 3);
    const auto s = spectral_pressure(phi);
    const int order = std::max(1, phi.depth() - 1) + i % 2;
    const auto v = variational_pressure(phi, order);
    EXPECT_NEAR(s.value, v.value, 1e-10);
    ASSERT_TRUE(v.witness.has_value());
    EXPECT_EQ(v.witness->order(), order);
    EXPECT_LE(std::abs(entropy(*v.witness) + integrate(phi, *v.witness) - v.value), v.residual + 1e-15);
  }
}

TEST(VariationalPressure, Witnesses) {
  auto full = Subshift::full(2);
  auto v = variational_pressure(Potential::constant(full, 0.0), 1);
  EXPECT_NEAR(v.witness->cylinder_probability(Word{1}), 0.5, 1e-13);
  EXPECT_NEAR(v.witness->cylinder_probability(Word{1, 1}), 0.25, 1e-13);

  auto golden = variational_pressure(Potential::constant(Subshift::golden_mean(), 0.0), 1);
  const double lam = (1.0 + std::sqrt(5.0)) / 2.0;
  // Parry measure: mu[0] = lam^2 / (lam^2 + 1).
  EXPECT_NEAR(golden.witness->cylinder_probability(Word{0}), lam * lam / (lam * lam + 1), 1e-12);
  EXPECT_NEAR(entropy(*golden.witness), kGoldenLog, 1e-12);
  EXPECT_THROW(variational_pressure(Potential::indicator(full, Word{1, 1, 1}), 1), PreconditionError);
}

TEST(EquilibriumMeasure, TiltedBernoulli) {
  auto full = Subshift::full(2);
  for (double q : {-2.0, -0.5, 0.0, 1.0, 3.0}) {
    auto mu = equilibrium_measure(q * Potential::indicator(full, Word{1}));
    const double p = std::exp(q) / (1 + std::exp(q));
    EXPECT_NEAR(mu.cylinder_probability(Word{1}), p, 1e-12);
    EXPECT_NEAR(mu.cylinder_probability(Word{1, 0}), p * (1 - p), 1e-12);
  }
}

TEST(EquilibriumMeasure, AttainsPressure) {
  std::mt19937_64 rng(4);
  for (int i = 0; i < 10; ++i) {
    auto spec = random_primitive(rng, 2 + i % 3);
    auto phi = random_potential(rng, spec, 2, 2.0);
    auto mu = equilibrium_measure(phi);
    EXPECT_NEAR(entropy(mu) + integrate(phi, mu), spectral_pressure(phi).value, 1e-10);
  }
}

TEST(CoverPressure, ConstantPotentials) {
  for (int n : {1, 3, 7}) {
    EXPECT_NEAR(cover_pressure(Potential::constant(Subshift::full(2), 0.0), n).value, std::log(2.0), 1e-12);
    EXPECT_NEAR(cover_pressure(Potential::constant(Subshift::full(3), 0.7), n).value, std::log(3.0) + 0.7, 1e-12);
  }
  auto r = cover_pressure(Potential::constant(Subshift::full(2), 0.0), 4);
  EXPECT_EQ(r.method, PressureMethod::cover);
  EXPECT_LE(r.residual, 1e-12);
}

TEST(CoverPressure, GoldenMeanConvergesFromAbove) {
  auto zero = Potential::constant(Subshift::golden_mean(), 0.0);
  double prev = INFINITY;
  for (int n = 8; n <= 14; ++n) {
    const double gap = std::abs(cover_pressure(zero, n).value - kGoldenLog);
    EXPECT_LT(gap, prev);
    prev = gap;
  }
  EXPECT_LE(std::abs(cover_pressure(zero, 12).value - kGoldenLog), 0.05);
  // Fibonacci count: F_14 = 377 words of length 12.
  EXPECT_NEAR(cover_pressure(zero, 12).value, std::log(377.0) / 12.0, 1e-12);
}

TEST(CoverPressure, MatchesBruteForcePartitionFunction) {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 8; ++i) {
    auto spec = random_primitive(rng, 2 + i % 2);
    auto phi = random_potential(rng, spec, 1 + i % 3);
    EXPECT_NEAR(cover_pressure(phi, 5).value, brute_cover(phi, 5), 1e-11);
  }
}

TEST(CoverPressure, MonotoneUnderSubcollections) {
  std::mt19937_64 rng(6);
  for (int i = 0; i < 10; ++i) {
    auto spec = random_primitive(rng, 3);
    auto phi = random_potential(rng, spec, 2);
    const int n = 5;
    auto all = enumerate_words(spec, n);
    const double full = cover_pressure(phi, n, all).value;
    std::vector<Word> sub;
    for (const auto& w : all)
      if (rng() % 3) sub.push_back(w);
    if (sub.empty()) sub.push_back(all.front());
    EXPECT_LE(cover_pressure(phi, n, sub).value, full + 1e-13);
  }
}

TEST(CoverPressure, EpsilonIndexRefinesCylinders) {
  auto phi = Potential::per_symbol(Subshift::full(2), {0.2, -0.4});
  // Extra symbols multiply the number of cylinders without changing S_n.
  const double base = cover_pressure(phi, 6, 0).value;
  EXPECT_NEAR(cover_pressure(phi, 6, 1).value, base + std::log(2.0) / 6.0, 1e-12);
  EXPECT_THROW(cover_pressure(phi, 6, -1), PreconditionError);
}

TEST(CoverPressure, TrendTowardsSpectralPressure) {
  std::mt19937_64 rng(8);
  auto spec = random_primitive(rng, 3);
  auto phi = random_potential(rng, spec, 2);
  const double p = spectral_pressure(phi).value;
  EXPECT_LT(std::abs(cover_pressure(phi, 14).value - p), std::abs(cover_pressure(phi, 8).value - p));
}

TEST(TransferFamily, CovarianceOfBernoulliTilt) {
  auto full = Subshift::full(2);
  std::vector<Potential> f{Potential::indicator(full, Word{1})};
  const TransferFamily fam(Potential::constant(full, 0.0), f);
  for (double q : {-3.0, 0.0, 0.7, 5.0}) {
    const double qv[1] = {q};
    const auto cov = fam.observable_covariance(fam.gibbs_at(qv));
    const double p = 1.0 / (1.0 + std::exp(-q));
    EXPECT_NEAR(cov[0][0], p * (1 - p), 1e-12);
  }
}

TEST(TransferFamily, CovarianceIsTheDerivativeOfTheMean) {
  std::mt19937_64 rng(77);
  for (int t = 0; t < 8; ++t) {
    const auto spec = random_primitive(rng, 2 + t % 3);
    std::vector<Potential> f{random_potential(rng, spec, 2), random_potential(rng, spec, 1)};
    const TransferFamily fam(random_potential(rng, spec, 2), f);
    const std::vector<double> q{0.4, -0.9};
    const auto cov = fam.observable_covariance(fam.gibbs_at(q));
    const double h = 1e-5;
    for (std::size_t j = 0; j < 2; ++j) {
      auto qp = q, qm = q;
      qp[j] += h;
      qm[j] -= h;
      const auto mp = fam.observable_means(fam.gibbs_at(qp)), mm = fam.observable_means(fam.gibbs_at(qm));
      for (std::size_t i = 0; i < 2; ++i) EXPECT_NEAR(cov[i][j], (mp[i] - mm[i]) / (2 * h), 1e-6);
    }
    EXPECT_NEAR(cov[0][1], cov[1][0], 1e-12);
  }
}

TEST(Gth, NearlyReducibleChain) {
  // Two blocks joined by 1e-20 in one direction: the mass on the leaky block
  // is of order 1e-20 / (gap) and must come out with full relative accuracy.
  const double eps = 1e-20;
  DenseMatrix p(3, 3);
  p(0, 0) = 0.5;
  p(0, 1) = 0.5 - eps;
  p(0, 2) = eps;
  p(1, 0) = 1.0;
  p(2, 0) = 0.75;
  p(2, 2) = 0.25;
  const auto pi = gth_stationary(p);
  // Balance: pi2 = eps pi0 / 0.75, pi1 = (0.5 - eps) pi0.
  EXPECT_NEAR(pi[2] / pi[0], eps / 0.75, 1e-15 * eps);
  EXPECT_NEAR(pi[1] / pi[0], 0.5, 1e-15);
  DenseMatrix split(2, 2);
  split(0, 0) = split(1, 1) = 1.0;
  EXPECT_TRUE(gth_stationary(split).empty());
}

// Tilted weights from a case where the second eigenvalue is within 1e-4 of
// the first and the Perron vector spans 18 orders of magnitude. Power
// iteration needs most of a million rounds here; a tight budget forces the
// other paths, which must still meet M x = lambda x componentwise.
TEST(Perron, NearlyReducibleEigenvector) {
  LogWeightedGraph g;
  g.size = 4;
  g.edges = {{0, 0, -7.0321887338328093}, {0, 3, -5.7503046074369362}, {1, 0, -54.505275931157627},
             {1, 1, -55.071512956039186}, {1, 2, -54.814471184011865}, {1, 3, -55.154365700692082},
             {2, 1, -5.4873601898251314}, {2, 2, -6.6620227078975249}, {3, 0, -8.8902153624716327},
             {3, 2, -9.3902522028126185}, {3, 3, -8.673431757737788}};
  PerronOptions opt;
  opt.max_iterations = 20000;
  const auto pd = perron(g, opt);
  const auto slow = perron(g);
  EXPECT_NEAR(pd.log_lambda, slow.log_lambda, 1e-12);
  std::vector<double> x(4);
  for (int i = 0; i < 4; ++i) x[i] = std::log(pd.right[i]) + (pd.right_log_scale.empty() ? 0.0 : pd.right_log_scale[i]);
  for (int i = 0; i < 4; ++i) {
    double row = 0.0;
    for (const auto& e : g.edges)
      if (e.from == i) row += std::exp(e.log_weight + x[e.to] - x[i] - pd.log_lambda);
    EXPECT_NEAR(row, 1.0, 1e-11) << i;
  }
}
