#pragma once

// Subshifts of finite type, admissible words, locally constant potentials and
// the ultrametric d_phi built from a positive potential.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "thermo/error.hpp"

namespace thermo {

using Symbol = int;

/// Finite sequence of symbols. Serializes as a digit string ("0110").
class Word {
 public:
  Word() = default;
  Word(std::initializer_list<Symbol> s) : symbols_(s) {}
  explicit Word(std::vector<Symbol> s) : symbols_(std::move(s)) {}

  static Word parse(std::string_view text) {
    std::vector<Symbol> s;
    s.reserve(text.size());
    for (char c : text) {
      if (c < '0' || c > '9') {
        throw PreconditionError("word '" + std::string(text) + "' contains a non-digit symbol");
      }
      s.push_back(c - '0');
    }
    return Word(std::move(s));
  }

  std::string str() const {
    std::string out;
    out.reserve(symbols_.size());
    for (Symbol s : symbols_) out.push_back(static_cast<char>('0' + s));
    return out;
  }

  std::size_t size() const { return symbols_.size(); }
  bool empty() const { return symbols_.empty(); }
  Symbol operator[](std::size_t i) const { return symbols_[i]; }
  Symbol front() const { return symbols_.front(); }
  Symbol back() const { return symbols_.back(); }
  std::span<const Symbol> view() const { return symbols_; }
  std::span<const Symbol> view(std::size_t pos, std::size_t len) const {
    return std::span<const Symbol>(symbols_).subspan(pos, len);
  }
  const std::vector<Symbol>& symbols() const { return symbols_; }

  void push_back(Symbol s) { symbols_.push_back(s); }
  void append(std::span<const Symbol> s) { symbols_.insert(symbols_.end(), s.begin(), s.end()); }
  void reserve(std::size_t n) { symbols_.reserve(n); }

  auto operator<=>(const Word&) const = default;

 private:
  std::vector<Symbol> symbols_;
};

/// One-sided subshift of finite type given by a 0/1 transfer matrix.
///
/// Every row and column must contain a 1, so each symbol has a successor and a
/// predecessor and every admissible finite word extends to an infinite point.
class Subshift {
 public:
  Subshift() = default;

  explicit Subshift(std::vector<std::vector<int>> transfer) {
    const std::size_t m = transfer.size();
    if (m == 0) throw PreconditionError("transfer matrix is empty");
    if (m > 10) throw PreconditionError("alphabets larger than 10 symbols are not supported");
    m_ = static_cast<int>(m);
    a_.assign(m * m, 0);
    for (std::size_t i = 0; i < m; ++i) {
      if (transfer[i].size() != m) {
        throw PreconditionError("transfer matrix row " + std::to_string(i) + " has length " +
                                std::to_string(transfer[i].size()) + ", expected " +
                                std::to_string(m));
      }
      for (std::size_t j = 0; j < m; ++j) {
        const int v = transfer[i][j];
        if (v != 0 && v != 1) {
          throw PreconditionError("transfer matrix entry (" + std::to_string(i) + "," +
                                  std::to_string(j) + ") is not 0 or 1");
        }
        a_[i * m + j] = static_cast<std::uint8_t>(v);
      }
    }
    for (int i = 0; i < m_; ++i) {
      bool row = false, col = false;
      for (int j = 0; j < m_; ++j) {
        row = row || allowed(i, j);
        col = col || allowed(j, i);
      }
      if (!row) throw PreconditionError("symbol " + std::to_string(i) + " has no successor");
      if (!col) throw PreconditionError("symbol " + std::to_string(i) + " has no predecessor");
    }
  }

  static Subshift full(int m) {
    return Subshift(std::vector<std::vector<int>>(m, std::vector<int>(m, 1)));
  }

  static Subshift golden_mean() { return Subshift({{1, 1}, {1, 0}}); }

  int alphabet_size() const { return m_; }
  bool allowed(Symbol a, Symbol b) const { return a_[static_cast<std::size_t>(a * m_ + b)] != 0; }

  std::vector<std::vector<int>> transfer() const {
    std::vector<std::vector<int>> t(m_, std::vector<int>(m_));
    for (int i = 0; i < m_; ++i)
      for (int j = 0; j < m_; ++j) t[i][j] = allowed(i, j) ? 1 : 0;
    return t;
  }

  bool admissible(std::span<const Symbol> w) const {
    for (Symbol s : w)
      if (s < 0 || s >= m_) return false;
    for (std::size_t i = 0; i + 1 < w.size(); ++i)
      if (!allowed(w[i], w[i + 1])) return false;
    return true;
  }
  bool admissible(const Word& w) const { return admissible(w.view()); }

  bool operator==(const Subshift&) const = default;

 private:
  int m_ = 0;
  std::vector<std::uint8_t> a_;
};

struct Primitivity {
  bool primitive = false;
  std::optional<int> power;
};

/// Least p with A^p > 0, searched up to Wielandt's bound (m-1)^2 + 1.
inline Primitivity primitivity(const Subshift& spec) {
  const int m = spec.alphabet_size();
  std::vector<std::uint8_t> p(static_cast<std::size_t>(m * m));
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) p[i * m + j] = spec.allowed(i, j) ? 1 : 0;
  const int bound = (m - 1) * (m - 1) + 1;
  for (int power = 1; power <= bound; ++power) {
    if (std::all_of(p.begin(), p.end(), [](std::uint8_t v) { return v != 0; })) {
      return {true, power};
    }
    std::vector<std::uint8_t> next(p.size(), 0);
    for (int i = 0; i < m; ++i)
      for (int k = 0; k < m; ++k)
        if (p[i * m + k])
          for (int j = 0; j < m; ++j)
            if (spec.allowed(k, j)) next[i * m + j] = 1;
    p = std::move(next);
  }
  return {false, std::nullopt};
}

inline void require_primitive(const Subshift& spec) {
  if (!primitivity(spec).primitive) throw PreconditionError("subshift is not primitive");
}

/// Number of admissible words of length n (sum of the entries of A^(n-1)).
/// Saturates at the largest double; exact while below 2^53.
inline double word_count(const Subshift& spec, int n) {
  if (n < 1) return 0.0;
  const int m = spec.alphabet_size();
  std::vector<double> ending(m, 1.0);
  for (int len = 1; len < n; ++len) {
    std::vector<double> next(m, 0.0);
    for (int a = 0; a < m; ++a)
      for (int b = 0; b < m; ++b)
        if (spec.allowed(a, b)) next[b] += ending[a];
    ending = std::move(next);
  }
  double total = 0.0;
  for (double c : ending) total += c;
  return total;
}

inline constexpr std::size_t kDefaultWordCap = std::size_t{1} << 26;

/// Calls `visit` on every admissible word of length n in lexicographic order.
template <class Visitor>
void for_each_word(const Subshift& spec, int n, Visitor&& visit,
                   std::size_t cap = kDefaultWordCap) {
  if (n < 1) throw PreconditionError("word length must be at least 1");
  const double count = word_count(spec, n);
  if (count > static_cast<double>(cap)) {
    throw ResourceError("enumerating " + std::to_string(static_cast<long double>(count)) +
                        " words of length " + std::to_string(n) + " exceeds the cap of " +
                        std::to_string(cap));
  }
  const int m = spec.alphabet_size();
  std::vector<Symbol> w(static_cast<std::size_t>(n), 0);
  // Iterative depth-first search; position `pos` is the one being advanced.
  std::vector<Symbol> next(static_cast<std::size_t>(n), 0);
  int pos = 0;
  while (pos >= 0) {
    if (next[pos] >= m) {
      next[pos] = 0;
      --pos;
      continue;
    }
    const Symbol s = next[pos]++;
    if (pos > 0 && !spec.allowed(w[pos - 1], s)) continue;
    w[pos] = s;
    if (pos + 1 == n) {
      visit(std::span<const Symbol>(w));
    } else {
      ++pos;
    }
  }
}

inline std::vector<Word> enumerate_words(const Subshift& spec, int n,
                                         std::size_t cap = kDefaultWordCap) {
  std::vector<Word> out;
  out.reserve(static_cast<std::size_t>(word_count(spec, n)));
  for_each_word(
      spec, n,
      [&](std::span<const Symbol> w) { out.emplace_back(std::vector<Symbol>(w.begin(), w.end())); },
      cap);
  return out;
}

/// Locally constant real function: its value at a point depends on the first
/// `depth` symbols. Inadmissible windows carry no value.
class Potential {
 public:
  Potential() = default;

  /// Builds a table from explicit entries. Every admissible depth-word must be
  /// present, and no other word may appear.
  Potential(const Subshift& spec, int depth, const std::map<Word, double>& entries)
      : spec_(spec), depth_(depth) {
    init_table();
    std::size_t seen = 0;
    for (const auto& [w, v] : entries) {
      if (static_cast<int>(w.size()) != depth_) {
        throw PreconditionError("potential entry '" + w.str() + "' does not have length " +
                                std::to_string(depth_));
      }
      if (!spec_.admissible(w)) {
        throw PreconditionError("potential entry '" + w.str() + "' is not an admissible word");
      }
      if (!std::isfinite(v)) throw PreconditionError("potential entry '" + w.str() + "' is not finite");
      values_[index(w.view())] = v;
      ++seen;
    }
    const auto needed = static_cast<std::size_t>(word_count(spec_, depth_));
    if (seen != needed) {
      throw PreconditionError("potential table has " + std::to_string(seen) + " entries, expected " +
                              std::to_string(needed) + " admissible words of length " +
                              std::to_string(depth_));
    }
  }

  template <class Fn>
  static Potential from_function(const Subshift& spec, int depth, Fn&& fn) {
    Potential p;
    p.spec_ = spec;
    p.depth_ = depth;
    p.init_table();
    for_each_word(spec, depth, [&](std::span<const Symbol> w) {
      p.values_[p.index(w)] = static_cast<double>(fn(w));
    });
    return p;
  }

  static Potential constant(const Subshift& spec, double c, int depth = 1) {
    return from_function(spec, depth, [c](std::span<const Symbol>) { return c; });
  }

  /// Indicator of the cylinder [w]; its depth is |w|. Inadmissible w gives the
  /// zero function of that depth.
  static Potential indicator(const Subshift& spec, const Word& w) {
    const auto ref = w.symbols();
    return from_function(spec, static_cast<int>(w.size()), [&](std::span<const Symbol> x) {
      return std::equal(x.begin(), x.end(), ref.begin()) ? 1.0 : 0.0;
    });
  }

  /// Depth-1 potential with one value per symbol.
  static Potential per_symbol(const Subshift& spec, const std::vector<double>& values) {
    if (static_cast<int>(values.size()) != spec.alphabet_size()) {
      throw PreconditionError("per-symbol potential needs one value per symbol");
    }
    return from_function(spec, 1, [&](std::span<const Symbol> w) { return values[w[0]]; });
  }

  const Subshift& subshift() const { return spec_; }
  int depth() const { return depth_; }

  /// Value on a window of at least `depth` symbols (extra symbols ignored).
  double operator()(std::span<const Symbol> window) const {
    return values_[index(window.first(static_cast<std::size_t>(depth_)))];
  }
  double operator()(const Word& w) const { return (*this)(w.view()); }

  /// Same function expressed as a table of larger depth.
  Potential lifted(int new_depth) const {
    if (new_depth < depth_) throw PreconditionError("cannot lift a potential to a smaller depth");
    if (new_depth == depth_) return *this;
    return from_function(spec_, new_depth, [this](std::span<const Symbol> w) { return (*this)(w); });
  }

  double min_value() const { return fold(std::numeric_limits<double>::infinity(), [](double a, double b) { return std::min(a, b); }); }
  double max_value() const { return fold(-std::numeric_limits<double>::infinity(), [](double a, double b) { return std::max(a, b); }); }

  /// Calls visit(word, value) for each admissible depth-word in lexicographic order.
  template <class Visitor>
  void for_each_entry(Visitor&& visit) const {
    for_each_word(spec_, depth_, [&](std::span<const Symbol> w) { visit(w, (*this)(w)); });
  }

  friend Potential operator+(const Potential& a, const Potential& b) {
    return combine(a, b, [](double x, double y) { return x + y; });
  }
  friend Potential operator-(const Potential& a, const Potential& b) {
    return combine(a, b, [](double x, double y) { return x - y; });
  }
  friend Potential operator*(double c, const Potential& a) {
    Potential out = a;
    for (double& v : out.values_)
      if (!std::isnan(v)) v *= c;
    return out;
  }
  Potential plus(double c) const {
    Potential out = *this;
    for (double& v : out.values_)
      if (!std::isnan(v)) v += c;
    return out;
  }

 private:
  std::size_t index(std::span<const Symbol> w) const {
    std::size_t idx = 0;
    const auto m = static_cast<std::size_t>(spec_.alphabet_size());
    for (Symbol s : w) idx = idx * m + static_cast<std::size_t>(s);
    return idx;
  }

  void init_table() {
    if (depth_ < 1) throw PreconditionError("potential depth must be at least 1");
    const double size = std::pow(static_cast<double>(spec_.alphabet_size()), depth_);
    if (size > static_cast<double>(kDefaultWordCap)) {
      throw ResourceError("potential table of depth " + std::to_string(depth_) + " is too large");
    }
    values_.assign(static_cast<std::size_t>(size), std::numeric_limits<double>::quiet_NaN());
  }

  template <class Op>
  double fold(double init, Op op) const {
    double acc = init;
    for (double v : values_)
      if (!std::isnan(v)) acc = op(acc, v);
    return acc;
  }

  template <class Op>
  static Potential combine(const Potential& a, const Potential& b, Op op) {
    if (!(a.spec_ == b.spec_)) throw PreconditionError("potentials live on different subshifts");
    const int depth = std::max(a.depth_, b.depth_);
    return from_function(a.spec_, depth,
                         [&](std::span<const Symbol> w) { return op(a(w), b(w)); });
  }

  Subshift spec_;
  int depth_ = 0;
  std::vector<double> values_;
};

/// Smallest total of `phi` over admissible continuations.
///
/// Minimizes S_len phi(z) over all admissible z whose first |prefix| symbols
/// equal `prefix`; the remaining symbols are free. Dynamic programming over
/// states holding the last depth-1 symbols. With `maximize` the largest total
/// is returned instead.
inline double extremal_birkhoff_sum(const Potential& phi, std::span<const Symbol> prefix, int len,
                                    bool maximize = false) {
  const Subshift& spec = phi.subshift();
  const int m = spec.alphabet_size();
  const int k = phi.depth();
  const int total = len + k - 1;  // symbols that S_len phi reads
  const double worst = maximize ? -std::numeric_limits<double>::infinity()
                                : std::numeric_limits<double>::infinity();
  auto better = [maximize](double a, double b) { return maximize ? a > b : a < b; };

  // State: the last min(k, pos) symbols packed in base m (window of length k).
  // value[state] = best partial sum of completed windows so far.
  const auto win = static_cast<std::size_t>(std::pow(static_cast<double>(m), k));
  std::vector<double> value(win, worst), next(win, worst);
  std::vector<Symbol> buf(static_cast<std::size_t>(k));

  auto decode = [&](std::size_t code, int count) {
    for (int i = count - 1; i >= 0; --i) {
      buf[static_cast<std::size_t>(i)] = static_cast<Symbol>(code % static_cast<std::size_t>(m));
      code /= static_cast<std::size_t>(m);
    }
  };

  // Position 0.
  for (Symbol s = 0; s < m; ++s) {
    if (!prefix.empty() && prefix[0] != s) continue;
    value[static_cast<std::size_t>(s)] = 0.0;
  }
  int filled = 1;  // symbols currently held in the state (≤ k)
  if (k == 1 && len >= 1) {
    for (Symbol s = 0; s < m; ++s)
      if (value[s] != worst) value[s] += phi(std::span<const Symbol>(&s, 1));
  }
  for (int pos = 1; pos < total; ++pos) {
    std::fill(next.begin(), next.end(), worst);
    const int keep = std::min(filled + 1, k);
    const auto mod = static_cast<std::size_t>(std::pow(static_cast<double>(m), keep - 1));
    for (std::size_t code = 0; code < win; ++code) {
      if (value[code] == worst) continue;
      const Symbol last = static_cast<Symbol>(code % static_cast<std::size_t>(m));
      for (Symbol s = 0; s < m; ++s) {
        if (pos < static_cast<int>(prefix.size()) && prefix[pos] != s) continue;
        if (!spec.allowed(last, s)) continue;
        const std::size_t ncode = (code % mod) * static_cast<std::size_t>(m) + static_cast<std::size_t>(s);
        double v = value[code];
        // A window ending at `pos` starts at pos-k+1 and is counted if that
        // start lies inside [0, len).
        const int start = pos - k + 1;
        if (start >= 0 && start < len) {
          decode(ncode, k);
          v += phi(std::span<const Symbol>(buf));
        }
        if (better(v, next[ncode])) next[ncode] = v;
      }
    }
    std::swap(value, next);
    filled = keep;
  }
  double best = worst;
  for (double v : value)
    if (better(v, best)) best = v;
  return best;
}

/// Ultrametric d_phi on finite approximations of points.
///
/// 0 for identical words, 1 when the first symbols differ, otherwise
/// exp(-min S_nu phi(z)) over admissible z agreeing with x on the first nu-1
/// symbols, where nu is the 1-based index of the first disagreement. Words of
/// different length that agree on the shorter one disagree just past it.
inline double d_phi_distance(const Word& x, const Word& y, const Potential& phi) {
  const Subshift& spec = phi.subshift();
  if (!spec.admissible(x) || !spec.admissible(y)) throw PreconditionError("d_phi needs admissible words");
  if (phi.min_value() <= 0.0) throw DomainError("d_phi needs a strictly positive potential");
  if (x == y) return 0.0;
  if (x.empty() || y.empty()) throw PreconditionError("d_phi needs nonempty words");
  if (x[0] != y[0]) return 1.0;
  const std::size_t common = std::min(x.size(), y.size());
  std::size_t i = 0;
  while (i < common && x[i] == y[i]) ++i;
  const int nu = static_cast<int>(i) + 1;
  const double s = extremal_birkhoff_sum(phi, x.view(0, static_cast<std::size_t>(nu - 1)), nu);
  return std::exp(-s);
}

}  // namespace thermo
