#pragma once

// JSON configuration and artifact formats. Every semantic error in an input
// document is reported as "<source>:<line>: <message>".

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "thermo/error.hpp"
#include "thermo/historic.hpp"
#include "thermo/measures.hpp"
#include "thermo/pressure.hpp"
#include "thermo/ifs.hpp"
#include "thermo/sft.hpp"
#include "thermo/spectra.hpp"
#include "thermo/target_set.hpp"

namespace thermo {

using json = nlohmann::json;

class ConfigError : public PreconditionError {
 public:
  using PreconditionError::PreconditionError;
};

namespace detail {

// Line (1-based) where each value starts, keyed by JSON pointer. Assumes the
// text already parsed successfully.
class LineIndex {
 public:
  explicit LineIndex(std::string_view text) : t_(text) {
    ws();
    value("");
  }
  const std::map<std::string, int>& lines() const { return lines_; }

 private:
  void ws() {
    while (i_ < t_.size() && (t_[i_] == ' ' || t_[i_] == '\t' || t_[i_] == '\n' || t_[i_] == '\r')) {
      if (t_[i_] == '\n') ++line_;
      ++i_;
    }
  }
  std::string string() {
    std::string out;
    ++i_;
    while (i_ < t_.size() && t_[i_] != '"') {
      if (t_[i_] == '\\' && i_ + 1 < t_.size()) {
        ++i_;
        switch (t_[i_]) {
          case 'n': out += '\n'; break;
          case 't': out += '\t'; break;
          case 'u': out += "\\u"; break;
          default: out += t_[i_];
        }
      } else {
        out += t_[i_];
      }
      ++i_;
    }
    ++i_;
    return out;
  }
  static std::string escape(const std::string& key) {
    std::string out;
    for (char c : key) {
      if (c == '~') out += "~0";
      else if (c == '/') out += "~1";
      else out += c;
    }
    return out;
  }
  void value(const std::string& ptr) {
    lines_[ptr] = line_;
    if (i_ >= t_.size()) return;
    const char c = t_[i_];
    if (c == '{') {
      ++i_;
      ws();
      while (i_ < t_.size() && t_[i_] != '}') {
        const std::string key = string();
        ws();
        ++i_;  // ':'
        ws();
        value(ptr + "/" + escape(key));
        ws();
        if (i_ < t_.size() && t_[i_] == ',') ++i_;
        ws();
      }
      ++i_;
    } else if (c == '[') {
      ++i_;
      ws();
      for (int k = 0; i_ < t_.size() && t_[i_] != ']'; ++k) {
        value(ptr + "/" + std::to_string(k));
        ws();
        if (i_ < t_.size() && t_[i_] == ',') ++i_;
        ws();
      }
      ++i_;
    } else if (c == '"') {
      string();
    } else {
      while (i_ < t_.size() && std::string_view(",]} \t\r\n").find(t_[i_]) == std::string_view::npos) ++i_;
    }
  }

  std::string_view t_;
  std::size_t i_ = 0;
  int line_ = 1;
  std::map<std::string, int> lines_;
};

}  // namespace detail

/// A parsed JSON document that remembers where each value came from.
class Document {
 public:
  static Document parse(std::string text, std::string source) {
    Document d;
    d.source_ = std::move(source);
    try {
      d.root_ = json::parse(text);
    } catch (const json::parse_error& e) {
      // byte offset -> line
      int line = 1;
      for (std::size_t i = 0; i < std::min(e.byte, text.size() + 1) - 1 && i < text.size(); ++i)
        if (text[i] == '\n') ++line;
      throw ConfigError(d.source_ + ":" + std::to_string(line) + ": malformed JSON (" + e.what() + ")");
    }
    d.lines_ = detail::LineIndex(text).lines();
    return d;
  }

  static Document load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path + ":0: cannot open file");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str(), path);
  }

  const json& root() const { return root_; }
  const std::string& source() const { return source_; }

  int line(const std::string& ptr) const {
    for (std::string p = ptr;; p = p.substr(0, p.rfind('/'))) {
      if (auto it = lines_.find(p); it != lines_.end()) return it->second;
      if (p.empty()) return 1;
    }
  }

 private:
  json root_;
  std::string source_;
  std::map<std::string, int> lines_;
};

/// Cursor into a Document; every accessor failure names the line.
class Node {
 public:
  Node(const Document& doc) : doc_(&doc), j_(&doc.root()) {}
  Node(const Document& doc, const json& j, std::string ptr) : doc_(&doc), j_(&j), ptr_(std::move(ptr)) {}

  [[noreturn]] void fail(const std::string& msg) const {
    throw ConfigError(doc_->source() + ":" + std::to_string(doc_->line(ptr_)) + ": " + msg);
  }

  const json& raw() const { return *j_; }
  const std::string& pointer() const { return ptr_; }
  std::string where() const { return ptr_.empty() ? "document" : "'" + ptr_ + "'"; }

  bool has(const std::string& key) const { return j_->is_object() && j_->contains(key); }
  bool is_object() const { return j_->is_object(); }
  bool is_array() const { return j_->is_array(); }
  bool is_number() const { return j_->is_number(); }
  bool is_string() const { return j_->is_string(); }

  Node operator[](const std::string& key) const {
    if (!j_->is_object()) fail(where() + " must be an object");
    auto it = j_->find(key);
    if (it == j_->end()) fail(where() + " is missing key '" + key + "'");
    return Node(*doc_, *it, ptr_ + "/" + key);
  }
  Node operator[](std::size_t i) const {
    if (!j_->is_array() || i >= j_->size()) fail(where() + " has no element " + std::to_string(i));
    return Node(*doc_, (*j_)[i], ptr_ + "/" + std::to_string(i));
  }
  std::size_t size() const {
    if (!j_->is_array() && !j_->is_object()) fail(where() + " must be an array");
    return j_->size();
  }
  std::vector<std::string> keys() const {
    if (!j_->is_object()) fail(where() + " must be an object");
    std::vector<std::string> out;
    for (auto it = j_->begin(); it != j_->end(); ++it) out.push_back(it.key());
    return out;
  }

  double number() const {
    if (!j_->is_number()) fail(where() + " must be a number");
    const double v = j_->get<double>();
    if (!std::isfinite(v)) fail(where() + " must be finite");
    return v;
  }
  long integer() const {
    if (!j_->is_number_integer()) fail(where() + " must be an integer");
    return j_->get<long>();
  }
  std::string string() const {
    if (!j_->is_string()) fail(where() + " must be a string");
    return j_->get<std::string>();
  }
  Point point() const {
    if (j_->is_number()) return {number()};
    Point p;
    for (std::size_t i = 0; i < size(); ++i) p.push_back((*this)[i].number());
    if (p.empty()) fail(where() + " must be a nonempty list of numbers");
    return p;
  }
  std::vector<std::vector<double>> matrix() const {
    std::vector<std::vector<double>> m;
    for (std::size_t i = 0; i < size(); ++i) m.push_back((*this)[i].point());
    return m;
  }

 private:
  const Document* doc_;
  const json* j_;
  std::string ptr_;
};

// ---------------------------------------------------------------------------
// Systems and potentials

inline Subshift parse_subshift(const Node& n) {
  std::vector<std::vector<int>> t;
  for (std::size_t i = 0; i < n.size(); ++i) {
    std::vector<int> row;
    const Node r = n[i];
    for (std::size_t j = 0; j < r.size(); ++j) {
      const long v = r[j].integer();
      if (v != 0 && v != 1) r[j].fail("transfer entries must be 0 or 1");
      row.push_back(static_cast<int>(v));
    }
    t.push_back(std::move(row));
  }
  try {
    return Subshift(t);
  } catch (const PreconditionError& e) {
    n.fail(e.what());
  }
}

inline Word parse_word(const Node& n) {
  try {
    return Word::parse(n.string());
  } catch (const PreconditionError& e) {
    n.fail(e.what());
  }
}

/// A system file: {"alphabet": m, "transfer": [[...]], "potentials": {name:
/// spec, ...}}. Potential specs: {"depth": k, "values": {"01": v, ...}},
/// {"constant": c, "depth": k}, {"per_symbol": [...]}, {"indicator": "011"},
/// or {"terms": [{"of": name, "times": c}, ...], "plus": c}.
class SystemConfig {
 public:
  static SystemConfig from(const Document& doc) {
    SystemConfig c;
    const Node root(doc);
    c.spec_ = parse_subshift(root["transfer"]);
    if (root.has("alphabet") && root["alphabet"].integer() != c.spec_.alphabet_size()) {
      root["alphabet"].fail("alphabet size does not match the transfer matrix");
    }
    if (root.has("potentials")) {
      const Node p = root["potentials"];
      for (const auto& name : p.keys()) c.specs_.emplace(name, p[name]);
    }
    c.doc_ = &doc;
    return c;
  }

  const Subshift& subshift() const { return spec_; }

  std::vector<std::string> names() const {
    std::vector<std::string> out;
    for (const auto& [k, v] : specs_) out.push_back(k);
    return out;
  }

  /// Resolves a name; "zero" is always available.
  Potential potential(const std::string& name) const {
    std::vector<std::string> stack;
    return resolve(name, stack);
  }

 private:
  Potential resolve(const std::string& name, std::vector<std::string>& stack) const {
    auto it = specs_.find(name);
    if (it == specs_.end()) {
      if (name == "zero") return Potential::constant(spec_, 0.0);
      throw ConfigError(doc_->source() + ":" + std::to_string(doc_->line("/potentials")) + ": unknown potential '" +
                        name + "'");
    }
    if (std::find(stack.begin(), stack.end(), name) != stack.end()) it->second.fail("potential '" + name + "' refers to itself");
    stack.push_back(name);
    auto p = build(it->second, stack);
    stack.pop_back();
    return p;
  }

  Potential build(const Node& n, std::vector<std::string>& stack) const {
    try {
      if (n.has("constant") && !n.has("values")) {
        const int depth = n.has("depth") ? static_cast<int>(n["depth"].integer()) : 1;
        if (depth < 1) n["depth"].fail("depth must be at least 1");
        return Potential::constant(spec_, n["constant"].number(), depth);
      }
      if (n.has("per_symbol")) return Potential::per_symbol(spec_, n["per_symbol"].point());
      if (n.has("indicator")) {
        const Word w = parse_word(n["indicator"]);
        if (w.empty() || !spec_.admissible(w)) n["indicator"].fail("indicator word '" + w.str() + "' is not admissible");
        return Potential::indicator(spec_, w);
      }
      if (n.has("values") || n.has("table")) {
        const Node t = n.has("values") ? n["values"] : n["table"];
        std::map<Word, double> entries;
        int depth = 0;
        for (const auto& k : t.keys()) {
          Word w;
          try {
            w = Word::parse(k);
          } catch (const PreconditionError& e) {
            t[k].fail(e.what());
          }
          if (depth == 0) depth = static_cast<int>(w.size());
          entries[w] = t[k].number();
        }
        if (depth == 0) t.fail("table must not be empty");
        if (n.has("depth") && n["depth"].integer() != depth) n["depth"].fail("depth does not match the word length");
        return Potential(spec_, depth, entries);
      }
      if (n.has("terms")) {
        const Node terms = n["terms"];
        Potential sum = Potential::constant(spec_, n.has("plus") ? n["plus"].number() : 0.0);
        for (std::size_t i = 0; i < terms.size(); ++i) {
          const double c = terms[i].has("times") ? terms[i]["times"].number() : 1.0;
          sum = sum + c * resolve(terms[i]["of"].string(), stack);
        }
        return sum;
      }
    } catch (const ConfigError&) {
      throw;
    } catch (const PreconditionError& e) {
      n.fail(e.what());
    }
    n.fail(n.where() + " needs one of values, constant, per_symbol, indicator, terms");
  }

  Subshift spec_;
  std::map<std::string, Node> specs_;
  const Document* doc_ = nullptr;
};

inline json transfer_json(const Subshift& spec) { return json(spec.transfer()); }

inline json to_json(const Potential& phi) {
  json values = json::object();
  for (const auto& w : enumerate_words(phi.subshift(), phi.depth())) values[w.str()] = phi(w);
  return {{"depth", phi.depth()}, {"values", values}};
}

// ---------------------------------------------------------------------------
// Markov measures: {"transfer", "order", "transition": {edge word: p},
// "stationary": [...] in block-graph state order}

inline json to_json(const MarkovMeasure& mu) {
  const auto& g = mu.graph();
  json t = json::object();
  for (std::size_t e = 0; e < g.edges().size(); ++e) t[g.edge_word(g.edges()[e]).str()] = mu.transition()[e];
  return {{"transfer", transfer_json(mu.subshift())},
          {"order", mu.order()},
          {"transition", t},
          {"stationary", std::vector<double>(mu.stationary().begin(), mu.stationary().end())}};
}

inline MarkovMeasure parse_markov(const Node& n) {
  const Subshift spec = parse_subshift(n["transfer"]);
  const long order = n["order"].integer();
  if (order < 1 || order > 12) n["order"].fail("order must lie in [1, 12]");
  auto g = std::make_shared<const BlockGraph>(spec, static_cast<int>(order));
  const Node t = n["transition"];
  std::vector<double> trans(g->edges().size(), 0.0);
  std::vector<bool> seen(trans.size(), false);
  for (const auto& key : t.keys()) {
    Word w;
    try {
      w = Word::parse(key);
    } catch (const PreconditionError& e) {
      t[key].fail(e.what());
    }
    if (static_cast<long>(w.size()) != order + 1 || !spec.admissible(w)) t[key].fail("'" + key + "' is not an admissible edge word");
    const int e = g->edge_index(g->state_index(w.view().first(static_cast<std::size_t>(order))), w[w.size() - 1]);
    trans[static_cast<std::size_t>(e)] = t[key].number();
    seen[static_cast<std::size_t>(e)] = true;
  }
  for (std::size_t e = 0; e < seen.size(); ++e)
    if (!seen[e]) t.fail("missing transition for edge word '" + g->edge_word(g->edges()[e]).str() + "'");
  auto pi = n["stationary"].point();
  try {
    return MarkovMeasure(g, std::move(trans), std::move(pi));
  } catch (const ConfigError&) {
    throw;
  } catch (const PreconditionError& e) {
    n.fail(e.what());
  }
}

// ---------------------------------------------------------------------------
// Target sets

/// {"point": y}, {"interval": [a, b]}, {"box": {"lo": .., "hi": ..}},
/// {"polytope": [[..], ..]}, {"points": [[..], ..], "dim": d},
/// {"boxes": [{"lo": .., "hi": ..}, ..]}. One-dimensional points may be
/// written as plain numbers.
inline TargetSet parse_target(const Node& n) {
  auto box_of = [](const Node& b) { return Box{b["lo"].point(), b["hi"].point()}; };
  auto list_of = [](const Node& l) {
    std::vector<Point> v;
    for (std::size_t i = 0; i < l.size(); ++i) v.push_back(l[i].point());
    return v;
  };
  auto guarded = [](const Node& at, auto&& make) -> TargetSet {
    try {
      return make();
    } catch (const ConfigError&) {
      throw;
    } catch (const PreconditionError& e) {
      at.fail(e.what());
    }
  };
  if (n.has("point")) return guarded(n["point"], [&] { return TargetSet::point(n["point"].point()); });
  if (n.has("interval")) {
    const Node at = n["interval"];
    return guarded(at, [&] {
      const auto v = at.point();
      if (v.size() != 2) at.fail("interval needs two numbers");
      return TargetSet::interval(v[0], v[1]);
    });
  }
  if (n.has("box")) {
    return guarded(n["box"], [&] {
      const auto b = box_of(n["box"]);
      return TargetSet::box(b.lo, b.hi);
    });
  }
  if (n.has("polytope")) return guarded(n["polytope"], [&] { return TargetSet::polytope(list_of(n["polytope"])); });
  if (n.has("points")) {
    return guarded(n["points"], [&] {
      return TargetSet::points(list_of(n["points"]), n.has("dim") ? static_cast<int>(n["dim"].integer()) : -1);
    });
  }
  if (n.has("boxes")) {
    return guarded(n["boxes"], [&] {
      std::vector<Box> v;
      for (std::size_t i = 0; i < n["boxes"].size(); ++i) v.push_back(box_of(n["boxes"][i]));
      return TargetSet::box_union(v);
    });
  }
  n.fail(n.where() + " needs one of point, interval, box, polytope, points, boxes");
}

inline json to_json(const Point& p) { return json(std::vector<double>(p.begin(), p.end())); }

inline json to_json(const TargetSet& t) {
  json j;
  auto box = [](const Box& b) { return json{{"lo", to_json(b.lo)}, {"hi", to_json(b.hi)}}; };
  switch (t.kind()) {
    case TargetSet::Kind::point: j["point"] = to_json(t.point_data()[0]); break;
    case TargetSet::Kind::box: j["box"] = box(t.boxes()[0]); break;
    case TargetSet::Kind::polytope:
      j["polytope"] = json::array();
      for (const auto& p : t.point_data()) j["polytope"].push_back(to_json(p));
      break;
    case TargetSet::Kind::points:
      j["points"] = json::array();
      for (const auto& p : t.point_data()) j["points"].push_back(to_json(p));
      j["dim"] = t.dim();
      break;
    case TargetSet::Kind::box_union:
      j["boxes"] = json::array();
      for (const auto& b : t.boxes()) j["boxes"].push_back(box(b));
      break;
  }
  return j;
}

// ---------------------------------------------------------------------------
// IFS

/// {"transfer": [[...]], "maps": {"ij": {"ratio": s, "orthogonal": [[...]],
/// "translate": [...]}}}
inline RecurrentIFS parse_ifs(const Document& doc) {
  const Node root(doc);
  const Subshift spec = parse_subshift(root["transfer"]);
  std::map<RecurrentIFS::Key, Similarity> maps;
  const Node m = root["maps"];
  for (const auto& key : m.keys()) {
    const Node e = m[key];
    if (key.size() != 2 || key[0] < '0' || key[0] > '9' || key[1] < '0' || key[1] > '9') {
      e.fail("map keys are two symbols such as \"01\"");
    }
    Similarity s;
    s.ratio = e["ratio"].number();
    s.translate = e["translate"].point();
    if (e.has("orthogonal")) s.orthogonal = e["orthogonal"].matrix();
    maps[{key[0] - '0', key[1] - '0'}] = std::move(s);
  }
  try {
    return RecurrentIFS(spec, std::move(maps));
  } catch (const PreconditionError& e) {
    m.fail(e.what());
  }
}

// ---------------------------------------------------------------------------
// Blueprints

inline json to_json(const HistoricBlueprint& bp) {
  json segs = json::array();
  for (const auto& s : bp.segments) {
    segs.push_back({{"target", to_json(s.target)},
                    {"block", s.block.str()},
                    {"connector", s.connector.str()},
                    {"lead_in", s.lead_in.str()},
                    {"repetitions", s.repetitions},
                    {"mean", to_json(s.mean)},
                    {"zeta", s.zeta},
                    {"tolerance", s.tolerance},
                    {"checkpoint", s.checkpoint}});
  }
  return {{"transfer", transfer_json(bp.spec)}, {"seed", bp.seed}, {"segments", segs}};
}

inline HistoricBlueprint parse_blueprint(const Document& doc) {
  const Node root(doc);
  HistoricBlueprint bp{parse_subshift(root["transfer"]), 0, {}};
  if (!root["seed"].raw().is_number_unsigned() && !root["seed"].raw().is_number_integer()) root["seed"].fail("seed must be an integer");
  bp.seed = root["seed"].raw().get<std::uint64_t>();
  const Node segs = root["segments"];
  for (std::size_t i = 0; i < segs.size(); ++i) {
    const Node n = segs[i];
    HistoricSegment s;
    s.target = n["target"].point();
    s.block = parse_word(n["block"]);
    s.connector = parse_word(n["connector"]);
    s.lead_in = parse_word(n["lead_in"]);
    s.repetitions = n["repetitions"].integer();
    s.mean = n["mean"].point();
    s.zeta = n["zeta"].number();
    s.tolerance = n["tolerance"].number();
    s.checkpoint = n["checkpoint"].integer();
    bp.segments.push_back(std::move(s));
  }
  const auto check = check_blueprint(bp);
  if (!check.ok) segs.fail("invalid blueprint: " + check.message);
  return bp;
}

// ---------------------------------------------------------------------------
// Number formatting shared by the text outputs

inline std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

inline json number_json(double v) {
  if (std::isfinite(v)) return v;
  return format_number(v);
}

inline json to_json(const PressureResult& r) {
  return {{"value", number_json(r.value)}, {"method", to_string(r.method)}, {"residual", number_json(r.residual)}};
}

/// "method" names the formula that produced the value; residual is the
/// solver's own error estimate.
inline json to_json(const SetValue& v, const std::string& method, double residual) {
  json j{{"status", to_string(v.status)}, {"method", method}, {"residual", number_json(residual)}};
  switch (v.status) {
    case SetValue::Status::value:
      j["value"] = number_json(v.value);
      if (!v.at.empty()) j["at"] = to_json(v.at);
      break;
    case SetValue::Status::empty:
      j["value"] = "EMPTY";
      break;
    case SetValue::Status::bracket:
      j["lower"] = number_json(v.lower);
      j["upper"] = number_json(v.upper);
      break;
  }
  return j;
}

inline std::string format_value(const SetValue& v) {
  switch (v.status) {
    case SetValue::Status::value: return format_number(v.value);
    case SetValue::Status::empty: return "EMPTY";
    case SetValue::Status::bracket: return "[" + format_number(v.lower) + ", " + format_number(v.upper) + "]";
  }
  return "?";
}

/// y_1..y_d, lambda, dual_q_1..dual_q_d, flags, method, residual.
inline void write_spectrum_csv(std::ostream& out, const SpectrumCurve& c, int dim) {
  for (int i = 1; i <= dim; ++i) out << "y_" << i << ',';
  out << "lambda";
  for (int i = 1; i <= dim; ++i) out << ",dual_q_" << i;
  out << ",flags,method,residual\n";
  for (std::size_t k = 0; k < c.grid.size(); ++k) {
    const auto& r = c.values[k];
    for (double y : c.grid[k]) out << format_number(y) << ',';
    out << format_number(r.value);
    for (int i = 0; i < dim; ++i) {
      out << ',' << (static_cast<std::size_t>(i) < r.dual.size() ? format_number(r.dual[static_cast<std::size_t>(i)]) : "nan");
    }
    out << ',' << to_string(r.status) << ",legendre_dual," << format_number(r.gradient_norm) << '\n';
  }
}

/// n, avg_1..avg_d, distance, deviation.
inline void write_checkpoints_csv(std::ostream& out, const std::vector<CheckpointRow>& rows, int dim) {
  out << "n";
  for (int i = 1; i <= dim; ++i) out << ",avg_" << i;
  out << ",distance,deviation\n";
  for (const auto& r : rows) {
    out << r.n;
    for (double a : r.average) out << ',' << format_number(a);
    out << ',' << format_number(r.distance) << ',' << format_number(r.deviation) << '\n';
  }
}

}  // namespace thermo
