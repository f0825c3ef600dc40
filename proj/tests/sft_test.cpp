#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "thermo/block_graph.hpp"
#include "thermo/sft.hpp"

using namespace thermo;

namespace {

// Brute force: minimum of S_nu phi over all admissible words of length
// nu + k - 1 that start with the given prefix.
double brute_min_sum(const Potential& phi, const Word& prefix, int nu) {
  const int k = phi.depth();
  double best = INFINITY;
  for (const auto& z : enumerate_words(phi.subshift(), nu + k - 1)) {
    bool match = true;
    for (std::size_t i = 0; i < prefix.size() && match; ++i) match = z[i] == prefix[i];
    if (!match) continue;
    double s = 0.0;
    for (int i = 0; i < nu; ++i) s += phi(z.view(static_cast<std::size_t>(i), static_cast<std::size_t>(k)));
    best = std::min(best, s);
  }
  return best;
}

Subshift random_subshift(std::mt19937_64& rng, int m) {
  std::bernoulli_distribution coin(0.6);
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

}  // namespace

TEST(Subshift, RejectsMalformedMatrices) {
  EXPECT_THROW(Subshift({{1, 2}, {1, 1}}), PreconditionError);
  EXPECT_THROW(Subshift({{1, 1}, {1}}), PreconditionError);
  EXPECT_THROW(Subshift({{0, 0}, {1, 1}}), PreconditionError);  // dead end
  EXPECT_THROW(Subshift({{1, 0}, {1, 0}}), PreconditionError);  // unreachable symbol
  EXPECT_THROW(Subshift(std::vector<std::vector<int>>{}), PreconditionError);
}

TEST(Primitivity, KnownMatrices) {
  auto full = primitivity(Subshift::full(2));
  EXPECT_TRUE(full.primitive);
  EXPECT_EQ(full.power, 1);

  auto golden = primitivity(Subshift::golden_mean());
  EXPECT_TRUE(golden.primitive);
  EXPECT_EQ(golden.power, 2);

  auto cycle = primitivity(Subshift({{0, 1}, {1, 0}}));
  EXPECT_FALSE(cycle.primitive);
  EXPECT_FALSE(cycle.power.has_value());
}

TEST(Primitivity, WielandtExtremalMatrixNeedsFullBound) {
  // Wielandt's matrix on 4 symbols has exponent (m-1)^2 + 1 = 10.
  Subshift w({{0, 1, 0, 0}, {0, 0, 1, 0}, {0, 0, 0, 1}, {1, 1, 0, 0}});
  auto p = primitivity(w);
  EXPECT_TRUE(p.primitive);
  EXPECT_EQ(p.power, 10);
}

TEST(EnumerateWords, CountsAndOrder) {
  EXPECT_EQ(enumerate_words(Subshift::full(2), 3).size(), 8u);
  EXPECT_EQ(enumerate_words(Subshift::golden_mean(), 3).size(), 5u);
  EXPECT_EQ(enumerate_words(Subshift::golden_mean(), 5).size(), 13u);

  auto words = enumerate_words(Subshift::golden_mean(), 3);
  std::vector<std::string> got;
  for (const auto& w : words) got.push_back(w.str());
  EXPECT_EQ(got, (std::vector<std::string>{"000", "001", "010", "100", "101"}));
  EXPECT_TRUE(std::is_sorted(words.begin(), words.end()));
}

TEST(EnumerateWords, CapIsEnforced) {
  EXPECT_THROW(enumerate_words(Subshift::full(2), 10, 512), ResourceError);
  EXPECT_NO_THROW(enumerate_words(Subshift::full(2), 9, 512));
  EXPECT_THROW(enumerate_words(Subshift::full(2), 0), PreconditionError);
}

TEST(EnumerateWords, CountMatchesMatrixPowersAndGrowthBound) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const int m = 2 + trial % 3;
    auto spec = random_subshift(rng, m);
    for (int n = 1; n <= 6; ++n) {
      const auto count = enumerate_words(spec, n).size();
      EXPECT_EQ(static_cast<double>(count), word_count(spec, n));
      EXPECT_LE(enumerate_words(spec, n + 1).size(), static_cast<std::size_t>(m) * count);
      for (const auto& w : enumerate_words(spec, n)) EXPECT_TRUE(spec.admissible(w));
    }
  }
}

TEST(Potential, TableMustMatchAdmissibleWords) {
  auto golden = Subshift::golden_mean();
  std::map<Word, double> ok{{Word{0, 0}, 1.0}, {Word{0, 1}, 2.0}, {Word{1, 0}, 3.0}};
  EXPECT_NO_THROW(Potential(golden, 2, ok));

  auto missing = ok;
  missing.erase(Word{1, 0});
  EXPECT_THROW(Potential(golden, 2, missing), PreconditionError);

  auto extra = ok;
  extra[Word{1, 1}] = 4.0;
  EXPECT_THROW(Potential(golden, 2, extra), PreconditionError);

  EXPECT_THROW(Potential(golden, 0, {}), PreconditionError);
}

TEST(Potential, ArithmeticLiftsToCommonDepth) {
  auto spec = Subshift::full(2);
  auto f = Potential::indicator(spec, Word{1});
  auto g = Potential::indicator(spec, Word{1, 1});
  auto h = f + 2.0 * g;
  EXPECT_EQ(h.depth(), 2);
  EXPECT_DOUBLE_EQ(h(Word{1, 1}), 3.0);
  EXPECT_DOUBLE_EQ(h(Word{1, 0}), 1.0);
  EXPECT_DOUBLE_EQ(h(Word{0, 1}), 0.0);
  EXPECT_DOUBLE_EQ(f.lifted(3)(Word{1, 0, 0}), 1.0);
  EXPECT_DOUBLE_EQ(f.plus(0.5)(Word{0}), 0.5);
}

TEST(DPhi, IdenticalAndFirstSymbolCases) {
  auto spec = Subshift::full(2);
  auto phi = Potential::constant(spec, std::log(2.0));
  EXPECT_EQ(d_phi_distance(Word{0, 1, 1}, Word{0, 1, 1}, phi), 0.0);
  EXPECT_EQ(d_phi_distance(Word{0, 1, 1}, Word{1, 1, 1}, phi), 1.0);
}

TEST(DPhi, ConstantPotentialGivesPowerOfHalf) {
  auto spec = Subshift::full(2);
  auto phi = Potential::constant(spec, std::log(2.0));
  // First disagreement at index 3 (1-based).
  EXPECT_NEAR(d_phi_distance(Word{0, 1, 0, 0}, Word{0, 1, 1, 0}, phi), 0.125, 1e-15);
}

TEST(DPhi, RemarkConstantLogPsi) {
  auto spec = Subshift::golden_mean();
  const double psi = 3.5;
  auto phi = Potential::constant(spec, std::log(psi));
  auto words = enumerate_words(spec, 6);
  for (const auto& x : words)
    for (const auto& y : words) {
      if (x == y || x[0] != y[0]) continue;
      std::size_t nu = 0;
      while (x[nu] == y[nu]) ++nu;
      EXPECT_NEAR(d_phi_distance(x, y, phi), std::pow(psi, -static_cast<double>(nu + 1)), 1e-14);
    }
}

TEST(DPhi, RejectsNonpositivePotential) {
  auto spec = Subshift::full(2);
  auto phi = Potential::per_symbol(spec, {1.0, 0.0});
  EXPECT_THROW(d_phi_distance(Word{0, 0}, Word{0, 1}, phi), DomainError);
}

TEST(DPhi, DynamicProgramMatchesBruteForce) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> val(0.1, 2.0);
  for (int trial = 0; trial < 15; ++trial) {
    auto spec = random_subshift(rng, 2 + trial % 3);
    const int depth = 1 + trial % 3;
    auto phi = Potential::from_function(spec, depth, [&](std::span<const Symbol>) { return val(rng); });
    auto words = enumerate_words(spec, 5);
    for (std::size_t a = 0; a < words.size(); a += 3)
      for (std::size_t b = 0; b < words.size(); b += 2) {
        const auto& x = words[a];
        const auto& y = words[b];
        if (x == y || x[0] != y[0]) continue;
        std::size_t i = 0;
        while (x[i] == y[i]) ++i;
        const int nu = static_cast<int>(i) + 1;
        const double expect = std::exp(-brute_min_sum(phi, Word(std::vector<Symbol>(x.symbols().begin(), x.symbols().begin() + nu - 1)), nu));
        EXPECT_NEAR(d_phi_distance(x, y, phi), expect, 1e-13);
      }
  }
}

TEST(DPhi, IsAnUltrametric) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> val(0.2, 1.5);
  for (int trial = 0; trial < 6; ++trial) {
    auto spec = random_subshift(rng, 3);
    auto phi = Potential::from_function(spec, 2, [&](std::span<const Symbol>) { return val(rng); });
    auto words = enumerate_words(spec, 4);
    for (const auto& x : words)
      for (const auto& y : words)
        for (const auto& z : words) {
          const double dxz = d_phi_distance(x, z, phi);
          EXPECT_LE(dxz, std::max(d_phi_distance(x, y, phi), d_phi_distance(y, z, phi)) + 1e-15);
        }
  }
}

TEST(ExtremalSum, MaximumMatchesBruteForce) {
  auto spec = Subshift::golden_mean();
  auto phi = Potential::from_function(spec, 2, [](std::span<const Symbol> w) { return 0.3 * w[0] - 0.7 * w[1] + 0.1; });
  for (const auto& prefix : enumerate_words(spec, 3)) {
    double best = -INFINITY;
    for (const auto& z : enumerate_words(spec, 6)) {
      if (z[0] != prefix[0] || z[1] != prefix[1] || z[2] != prefix[2]) continue;
      double s = 0;
      for (int i = 0; i < 5; ++i) s += phi(z.view(i, 2));
      best = std::max(best, s);
    }
    EXPECT_NEAR(extremal_birkhoff_sum(phi, prefix.view(), 5, true), best, 1e-14);
  }
}

TEST(BlockGraph, StatesAndEdges) {
  BlockGraph g(Subshift::golden_mean(), 2);
  EXPECT_EQ(g.size(), 3);  // 00, 01, 10
  EXPECT_EQ(g.edges().size(), 5u);
  for (const auto& e : g.edges()) {
    EXPECT_TRUE(Subshift::golden_mean().admissible(g.edge_word(e)));
    EXPECT_EQ(g.edge_index(e.from, e.symbol), &e - g.edges().data());
  }
}

TEST(Karp, MatchesBruteForceCycleMeans) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> val(-1.0, 1.0);
  for (int trial = 0; trial < 30; ++trial) {
    const int m = 2 + trial % 3;
    auto spec = random_subshift(rng, m);
    BlockGraph g(spec, m <= 3 ? 1 + trial % 2 : 1);
    std::vector<double> w(g.edges().size());
    for (auto& v : w) v = val(rng);
    // Brute force: every closed walk of length <= n contains a simple cycle;
    // enumerate closed walks up to length n from each start.
    const int n = g.size();
    double lo = INFINITY, hi = -INFINITY;
    std::function<void(int, int, int, double)> walk = [&](int start, int v, int len, double s) {
      if (len > 0 && v == start) {
        lo = std::min(lo, s / len);
        hi = std::max(hi, s / len);
      }
      if (len == n) return;
      for (std::size_t e = 0; e < g.edges().size(); ++e)
        if (g.edges()[e].from == v) walk(start, g.edges()[e].to, len + 1, s + w[e]);
    };
    for (int s = 0; s < n; ++s) walk(s, s, 0, 0.0);

    auto mn = karp_mean_cycle(g, w, false);
    auto mx = karp_mean_cycle(g, w, true);
    EXPECT_NEAR(mn.mean, lo, 1e-12);
    EXPECT_NEAR(mx.mean, hi, 1e-12);
    for (const auto* c : {&mn, &mx}) {
      ASSERT_FALSE(c->edges.empty());
      double s = 0;
      for (std::size_t i = 0; i < c->edges.size(); ++i) {
        const auto& e = g.edges()[c->edges[i]];
        const auto& nxt = g.edges()[c->edges[(i + 1) % c->edges.size()]];
        EXPECT_EQ(e.to, nxt.from);
        s += w[c->edges[i]];
      }
      EXPECT_NEAR(s / c->edges.size(), c->mean, 1e-12);
    }
  }
}

TEST(WordIo, DigitStrings) {
  EXPECT_EQ(Word::parse("0110").str(), "0110");
  EXPECT_THROW(Word::parse("01a"), PreconditionError);
}
