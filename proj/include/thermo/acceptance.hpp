#pragma once

// End-to-end acceptance checks shared by the test suite and `thermo selftest`.
// Each check returns its measured error next to the tolerance; nothing here
// depends on wall-clock time except the reported runtimes.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "thermo/historic.hpp"
#include "thermo/ifs.hpp"
#include "thermo/io.hpp"
#include "thermo/measures.hpp"
#include "thermo/pressure.hpp"
#include "thermo/spectra.hpp"

namespace thermo::acceptance {

/// mt19937_64 with portable draws (the std distributions are not).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : g_(seed) {}
  double uniform(double a = 0.0, double b = 1.0) {
    return a + (b - a) * static_cast<double>(g_() >> 11) * 0x1.0p-53;
  }
  int below(int n) { return static_cast<int>(g_() % static_cast<std::uint64_t>(n)); }
  bool coin(double p) { return uniform() < p; }

 private:
  std::mt19937_64 g_;
};

inline Subshift random_primitive(Rng& rng, int m) {
  while (true) {
    std::vector<std::vector<int>> t(static_cast<std::size_t>(m), std::vector<int>(static_cast<std::size_t>(m)));
    for (auto& row : t)
      for (auto& v : row) v = rng.coin(0.65) ? 1 : 0;
    try {
      Subshift s(t);
      if (primitivity(s).primitive) return s;
    } catch (const PreconditionError&) {
    }
  }
}

inline Potential random_potential(Rng& rng, const Subshift& spec, int depth, double scale = 1.0) {
  return Potential::from_function(spec, depth, [&](std::span<const Symbol>) { return rng.uniform(-scale, scale); });
}

/// Uniform random walk on the transfer graph.
inline Word random_word(Rng& rng, const Subshift& spec, std::size_t length) {
  std::vector<Symbol> w;
  w.reserve(length);
  w.push_back(static_cast<Symbol>(rng.below(spec.alphabet_size())));
  while (w.size() < length) {
    std::vector<Symbol> next;
    for (Symbol j = 0; j < spec.alphabet_size(); ++j)
      if (spec.allowed(w.back(), j)) next.push_back(j);
    w.push_back(next[static_cast<std::size_t>(rng.below(static_cast<int>(next.size())))]);
  }
  return Word(std::move(w));
}

/// A random point of the feasible domain, kept away from its boundary.
inline Point random_feasible(Rng& rng, const FeasibleDomain& dom, double margin = 0.05) {
  if (dom.dim() == 1) return {dom.lo() + rng.uniform(margin, 1.0 - margin) * (dom.hi() - dom.lo())};
  const auto& v = dom.vertices();
  std::vector<double> w(v.size());
  double total = 0.0;
  for (auto& x : w) total += (x = rng.uniform(margin, 1.0));
  Point y(v[0].size(), 0.0);
  for (std::size_t k = 0; k < v.size(); ++k)
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += w[k] / total * v[k][i];
  return y;
}

struct Outcome {
  int id = 0;
  std::string name;
  bool within_tolerance = false;
  std::string detail;   // measured quantities, deterministic
  double seconds = 0.0;
  double budget = 0.0;  // stated runtime target, seconds (0: none)

  bool within_budget() const { return budget <= 0.0 || seconds <= budget; }
  bool passed() const { return within_tolerance && within_budget(); }
};

struct Options {
  std::uint64_t seed = 20240601;
  int workers = 1;
};

namespace detail {

inline std::string fmt(double v) { return format_number(v); }

inline double binary_entropy(double p) { return -(p * std::log(p) + (1 - p) * std::log(1 - p)); }

}  // namespace detail

// 1. spectral vs variational pressure on random systems.
inline Outcome pressure_agreement(const Options& o) {
  Rng rng(o.seed ^ 0x01);
  double gap = 0.0, witness = 0.0;
  for (int t = 0; t < 25; ++t) {
    const auto spec = random_primitive(rng, 2 + t % 4);
    const auto phi = random_potential(rng, spec, 2);
    const auto s = spectral_pressure(phi);
    const auto v = variational_pressure(phi, 1);
    gap = std::max(gap, std::abs(s.value - v.value));
    const auto& mu = *v.witness;
    witness = std::max(witness, std::abs(entropy(mu) + integrate(phi, mu) - s.value));
  }
  return {1, "pressure agreement", gap <= 1e-10 && witness <= 1e-10,
          "max |spectral - variational| = " + detail::fmt(gap) + ", max |h + int phi - P| = " + detail::fmt(witness) +
              " (tol 1e-10, 25 systems)",
          0.0, 10.0};
}

// 2. closed-form values.
inline Outcome known_values(const Options&) {
  const double golden = (1.0 + std::sqrt(5.0)) / 2.0;
  const double e1 = std::abs(spectral_pressure(Potential::constant(Subshift::full(2), 0.0)).value - std::log(2.0));
  const double e2 = std::abs(spectral_pressure(Potential::constant(Subshift::golden_mean(), 0.0)).value - std::log(golden));
  const auto full = Subshift::full(2);
  const ObservableSet f(Potential::indicator(full, Word{1}));
  const auto whole = TargetSet::interval(0.0, 1.0);
  const double d3 = hausdorff_dimension(RecurrentIFS::middle_thirds(), f, whole, LevelMode::sup).value.value;
  const auto pair = RecurrentIFS::by_first_symbol(full, {{0.5, {}, {0.0}}, {0.25, {}, {0.75}}});
  const double d4 = hausdorff_dimension(pair, f, whole, LevelMode::sup).value.value;
  const double e3 = std::abs(d3 - std::log(2.0) / std::log(3.0));
  const double e4 = std::abs(d4 - std::log(golden) / std::log(2.0));
  return {2, "known values", e1 <= 1e-12 && e2 <= 1e-10 && e3 <= 1e-9 && e4 <= 1e-9,
          "full shift " + detail::fmt(e1) + " (1e-12), golden mean " + detail::fmt(e2) + " (1e-10), Cantor " +
              detail::fmt(e3) + " (1e-9), ratios 1/2,1/4 " + detail::fmt(e4) + " (1e-9)",
          0.0, 1.0};
}

// 3. Lambda against the Bernoulli entropy and against the primal solver.
inline Outcome spectrum_oracle(const Options&) {
  const auto full = Subshift::full(2);
  const auto zero = Potential::constant(full, 0.0);
  const ObservableSet f(Potential::indicator(full, Word{1}));
  const Spectrum sp(zero, f);
  double sup_err = 0.0, gap = 0.0;
  for (int k = 1; k <= 99; ++k) {
    const double a = k / 100.0;
    const double dual = sp.lambda({a}).value;
    // Bernoulli(a) maximizes entropy at frequency a; its entropy is the oracle.
    const double oracle = entropy(MarkovMeasure::bernoulli(full, {1.0 - a, a}));
    sup_err = std::max(sup_err, std::abs(dual - oracle));
    gap = std::max(gap, std::abs(dual - lambda_direct({a}, zero, f).value));
  }
  return {3, "spectrum oracle", sup_err <= 1e-6 && gap <= 1e-5,
          "sup |Lambda - H| = " + detail::fmt(sup_err) + " (1e-6), max dual/primal gap = " + detail::fmt(gap) +
              " (1e-5), 99 points",
          0.0, 30.0};
}

// 4. formula consistency between level-set pressures.
inline Outcome formula_consistency(const Options& o) {
  Rng rng(o.seed ^ 0x04);
  double full_err = 0.0, hull_err = 0.0, single_err = 0.0;
  for (int t = 0; t < 10; ++t) {
    const auto spec = random_primitive(rng, 2 + t % 3);
    const auto phi = random_potential(rng, spec, 2);
    std::vector<Potential> fs{random_potential(rng, spec, 1 + t % 2)};
    if (t % 3 == 2) fs.push_back(random_potential(rng, spec, 1));
    const Spectrum sp(phi, ObservableSet(fs));
    const auto& dom = sp.domain();

    const auto sup = pressure_sup(dom.as_target(), sp);
    full_err = std::max(full_err, std::abs(sup.value - spectral_pressure(phi).value));

    std::vector<Point> pts;
    const int count = 2 + rng.below(4);
    for (int i = 0; i < count; ++i) pts.push_back(random_feasible(rng, dom));
    const auto C = TargetSet::points(pts);
    const auto a = pressure_sub(C, sp), b = pressure_sub(C.hull(), sp);
    hull_err = std::max(hull_err, std::abs(a.value - b.value));

    const auto single = TargetSet::point(random_feasible(rng, dom));
    single_err = std::max(single_err, std::abs(pressure_equ(single, sp).value - pressure_sub(single, sp).value));
  }
  return {4, "formula consistency", full_err <= 1e-6 && hull_err <= 1e-6 && single_err <= 1e-6,
          "sup Lambda vs P " + detail::fmt(full_err) + ", sub(C) vs sub(hull C) " + detail::fmt(hull_err) +
              ", equ vs sub at singletons " + detail::fmt(single_err) + " (tol 1e-6, 10 systems)",
          0.0, 60.0};
}

// 5. midpoint concavity of Lambda.
inline Outcome concavity(const Options& o) {
  Rng rng(o.seed ^ 0x05);
  double worst = INFINITY;
  int triples = 0;
  for (int t = 0; t < 10; ++t) {
    const auto spec = random_primitive(rng, 2 + t % 3);
    const auto phi = random_potential(rng, spec, 2);
    std::vector<Potential> fs{random_potential(rng, spec, 2)};
    if (t % 2) fs.push_back(random_potential(rng, spec, 1));
    const Spectrum sp(phi, ObservableSet(fs));
    for (int i = 0; i < 10; ++i) {
      const auto y1 = random_feasible(rng, sp.domain(), 0.0), y2 = random_feasible(rng, sp.domain(), 0.0);
      Point mid(y1.size());
      for (std::size_t k = 0; k < mid.size(); ++k) mid[k] = 0.5 * (y1[k] + y2[k]);
      const double slack = sp.lambda(mid).value - 0.5 * (sp.lambda(y1).value + sp.lambda(y2).value);
      worst = std::min(worst, slack);
      ++triples;
    }
  }
  return {5, "concavity", worst >= -1e-8,
          "min midpoint slack = " + detail::fmt(worst) + " over " + std::to_string(triples) + " triples (>= -1e-8)", 0.0,
          10.0};
}

// 6. cover pressure approaching P on the golden-mean shift.
inline Outcome cover_convergence(const Options&) {
  const auto phi = Potential::constant(Subshift::golden_mean(), 0.0);
  const double p = spectral_pressure(phi).value;
  std::vector<double> gaps;
  for (int n = 8; n <= 14; ++n) gaps.push_back(std::abs(cover_pressure(phi, n).value - p));
  // Least-squares slope of the gap against n.
  double mean_n = 11.0, mean_g = 0.0, num = 0.0, den = 0.0;
  for (double g : gaps) mean_g += g / static_cast<double>(gaps.size());
  for (std::size_t i = 0; i < gaps.size(); ++i) {
    num += (8.0 + static_cast<double>(i) - mean_n) * (gaps[i] - mean_g);
    den += (8.0 + static_cast<double>(i) - mean_n) * (8.0 + static_cast<double>(i) - mean_n);
  }
  const double slope = num / den;
  std::string list;
  for (double g : gaps) list += (list.empty() ? "" : " ") + detail::fmt(g);
  return {6, "cover pressure convergence", slope < 0.0 && gaps.back() < gaps.front() && gaps.back() <= 0.05,
          "gaps n=8..14: " + list + "; slope " + detail::fmt(slope) + ", final <= 0.05", 0.0, 20.0};
}

struct HistoricRun {
  HistoricBlueprint blueprint;
  std::vector<CheckpointRow> rows;
  double hausdorff = NAN, largest_gap = NAN;
};

/// The interval-target run of criterion 7 (also the selftest artifact).
inline HistoricRun historic_interval_run(std::uint64_t seed) {
  const auto full = Subshift::full(2);
  const Spectrum sp(Potential::constant(full, 0.0), ObservableSet(Potential::indicator(full, Word{1})));
  const auto k = TargetSet::interval(0.3, 0.7);
  BlueprintOptions opt;
  opt.seed = seed;
  HistoricRun run{plan_blueprint(sp, make_dense_chain(k, 4), 20, opt), {}};
  const BirkhoffPath path{synthesize_point(run.blueprint, run.blueprint.length()), sp.observables()};
  const auto cps = run.blueprint.checkpoints();
  const auto est = accumulation_estimate(path, cps.front(), cps.back(), &k);
  run.hausdorff = *est.hausdorff;
  run.largest_gap = est.largest_gap;
  run.rows = checkpoint_rows(run.blueprint, path, k);
  return run;
}

// 7. historic synthesis.
inline Outcome historic_synthesis(const Options& o) {
  const auto run = historic_interval_run(o.seed);
  const auto check = check_blueprint(run.blueprint);
  const long length = run.blueprint.length();

  const auto full = Subshift::full(2);
  const Spectrum sp(Potential::constant(full, 0.0), ObservableSet(Potential::indicator(full, Word{1})));
  BlueprintOptions opt;
  opt.seed = o.seed;
  const auto point = plan_blueprint(sp, make_dense_chain(TargetSet::point({0.5})), 12, opt);
  const auto point_check = check_blueprint(point);
  const BirkhoffPath path{synthesize_point(point, point.length()), sp.observables()};
  const auto& segs = point.segments;
  double dev = 0.0;
  for (long n = segs[segs.size() - 2].checkpoint; n <= segs.back().checkpoint; ++n)
    dev = std::max(dev, std::abs(path.average(n)[0] - 0.5));

  const bool ok = check.ok && point_check.ok && run.hausdorff <= 0.05 && run.largest_gap <= 0.05 && length <= 10'000'000 &&
                  dev <= 2.0 * segs.back().zeta;
  return {7, "historic synthesis", ok,
          std::string("schedule ") + (check.ok && point_check.ok ? "ok" : check.message + point_check.message) +
              "; K=[0.3,0.7] at checkpoint 20: Hausdorff " + detail::fmt(run.hausdorff) + ", gap " +
              detail::fmt(run.largest_gap) + ", length " + std::to_string(length) + "; K={1/2} final window " +
              detail::fmt(dev) + " <= " + detail::fmt(2.0 * segs.back().zeta),
          0.0, 120.0};
}

// 8. rho(L_n x, L_{n+1} x) <= 1/(n+1), checked in integer arithmetic.
inline Outcome empirical_metric(const Options& o) {
  Rng rng(o.seed ^ 0x08);
  constexpr int kTerms = 40;
  int violations = 0;
  double worst_ratio = 0.0, float_err = 0.0;
  for (int t = 0; t < 1000; ++t) {
    const auto spec = t % 2 ? Subshift::full(2) : random_primitive(rng, 2 + rng.below(3));
    const long n = 1 + rng.below(400);
    const int depth = rho_depth(spec, kTerms);
    const auto x = random_word(rng, spec, static_cast<std::size_t>(n + depth + 1));
    const auto a = empirical_measure(spec, x, depth, n), b = empirical_measure(spec, x, depth, n + 1);
    // With d_k = |(n+1) c_k - n c'_k|, the truncated sum is sum 2^-k d_k / (n (n+1)) and
    // each omitted term is at most 2^-k / (n+1). The claim becomes
    // sum_k 2^(K-k) d_k + n <= n 2^K.
    const auto family = rho_test_family(spec, kTerms);
    __int128 lhs = n;
    for (int k = 1; k <= kTerms; ++k) {
      const auto& w = family[static_cast<std::size_t>(k - 1)];
      const __int128 d = std::abs((n + 1) * a.prefix_count(w.view()) - n * b.prefix_count(w.view()));
      lhs += d << (kTerms - k);
    }
    const __int128 rhs = static_cast<__int128>(n) << kTerms;
    if (lhs > rhs) ++violations;
    worst_ratio = std::max(worst_ratio, static_cast<double>(lhs) / static_cast<double>(rhs));
    // The library value must be the same number.
    const auto r = rho_distance(a, b, kTerms);
    const double exact = static_cast<double>(lhs - n) / static_cast<double>(static_cast<__int128>(1) << kTerms) /
                         static_cast<double>(n * (n + 1));
    float_err = std::max(float_err, std::abs(r.value - exact));
  }
  return {8, "empirical-measure metric", violations == 0 && float_err <= 1e-15,
          std::to_string(violations) + " violations in 1000 pairs; max bound/(1/(n+1)) = " + detail::fmt(worst_ratio) +
              "; library vs exact " + detail::fmt(float_err),
          0.0, 5.0};
}

// 9. relative spectrum against the constrained primal optimum.
inline Outcome relative_spectrum_check(const Options&) {
  const auto full = Subshift::full(2);
  const auto f = Potential::indicator(full, Word{1});
  const auto g = Potential::constant(full, 1.0) + Potential::indicator(full, Word{0});
  const auto psi = Potential::constant(full, 0.0);
  double gap = 0.0;
  for (int k = 0; k <= 20; ++k) {
    const double alpha = 0.04 + 0.046 * k;
    gap = std::max(gap, std::abs(relative_spectrum(f, g, alpha, psi).value - relative_direct(f, g, alpha, psi).value));
  }
  return {9, "relative spectrum", gap <= 1e-5, "max dual/primal gap = " + detail::fmt(gap) + " over 21 ratios (1e-5)", 0.0,
          60.0};
}

/// Selftest artifacts by file name.
using Artifacts = std::map<std::string, std::string>;

inline Artifacts selftest_artifacts(std::uint64_t seed, int workers) {
  Artifacts out;
  const auto full = Subshift::full(2);
  const Spectrum sp(Potential::constant(full, 0.0), ObservableSet(Potential::indicator(full, Word{1})));
  std::ostringstream csv;
  write_spectrum_csv(csv, spectrum_curve(sp, 101, workers), 1);
  out["spectrum.csv"] = csv.str();

  const auto run = historic_interval_run(seed);
  out["blueprint.json"] = to_json(run.blueprint).dump(1) + "\n";
  std::ostringstream cps;
  write_checkpoints_csv(cps, run.rows, 1);
  out["checkpoints.csv"] = cps.str();

  json result{{"seed", seed},
              {"golden_mean_pressure", to_json(spectral_pressure(Potential::constant(Subshift::golden_mean(), 0.0)))},
              {"cantor_dimension",
               to_json(hausdorff_dimension(RecurrentIFS::middle_thirds(), sp.observables(), TargetSet::interval(0, 1),
                                           LevelMode::sup)
                           .value,
                       "bowen_root", 0.0)},
              {"historic", {{"hausdorff", run.hausdorff}, {"largest_gap", run.largest_gap}}}};
  out["result.json"] = result.dump(1) + "\n";
  return out;
}

// 10. byte-identical artifacts for one seed, whatever the worker count.
inline Outcome determinism(const Options& o) {
  const auto a = selftest_artifacts(o.seed, 1);
  const auto b = selftest_artifacts(o.seed, std::max(2, o.workers));
  std::string differing;
  for (const auto& [name, text] : a)
    if (b.at(name) != text) differing += (differing.empty() ? "" : ", ") + name;
  std::size_t bytes = 0;
  for (const auto& [name, text] : a) bytes += text.size();
  return {10, "determinism", differing.empty(),
          differing.empty() ? std::to_string(a.size()) + " artifacts, " + std::to_string(bytes) + " bytes identical"
                            : "differing: " + differing,
          0.0, 0.0};
}

using Check = std::function<Outcome(const Options&)>;

inline std::vector<Check> all_checks() {
  return {pressure_agreement, known_values,        spectrum_oracle,          formula_consistency, concavity,
          cover_convergence,  historic_synthesis,  empirical_metric,         relative_spectrum_check, determinism};
}

/// Runs every check; an exception fails its check with the message.
inline std::vector<Outcome> run_all(const Options& o, const std::function<void(const Outcome&)>& report = {}) {
  std::vector<Outcome> out;
  int id = 0;
  for (const auto& check : all_checks()) {
    ++id;
    const auto start = std::chrono::steady_clock::now();
    Outcome r;
    try {
      r = check(o);
    } catch (const std::exception& e) {
      r.id = id;
      r.name = "criterion " + std::to_string(id);
      r.detail = std::string("error: ") + e.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (report) report(r);
    out.push_back(std::move(r));
  }
  return out;
}

inline std::string format_line(const Outcome& r) {
  char head[96];
  std::snprintf(head, sizeof head, "[%s] %2d %-28s %7.2fs", r.passed() ? "PASS" : "FAIL", r.id, r.name.c_str(), r.seconds);
  std::string line = head;
  if (r.budget > 0.0) line += r.within_budget() ? " (< " + detail::fmt(r.budget) + "s)" : " (over " + detail::fmt(r.budget) + "s)";
  return line + "  " + r.detail;
}

inline json to_json(const std::vector<Outcome>& rs) {
  json j = json::array();
  for (const auto& r : rs) j.push_back({{"id", r.id}, {"name", r.name}, {"within_tolerance", r.within_tolerance}, {"detail", r.detail}});
  return j;
}

}  // namespace thermo::acceptance
