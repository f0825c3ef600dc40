// thermo: command line front end. JSON in, CSV/JSON out.
//
// Exit codes: 0 success, 1 selftest criteria failed, 2 bad input or
// precondition, 3 no convergence.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>

#include "thermo/acceptance.hpp"
#include "thermo/io.hpp"

namespace fs = std::filesystem;
using namespace thermo;

namespace {

struct Common {
  std::string output;
  int workers = 1;
};

// Writes name under the output directory, if one was given.
void save(const Common& c, const std::string& name, const std::string& text) {
  if (c.output.empty()) return;
  fs::create_directories(c.output);
  std::ofstream out(fs::path(c.output) / name, std::ios::binary);
  if (!out) throw ResourceError("cannot write " + (fs::path(c.output) / name).string());
  out << text;
}

struct SystemArgs {
  std::string system;
  std::string phi = "zero";
  std::vector<std::string> f;
};

void add_system(CLI::App* app, SystemArgs& a, bool needs_f) {
  app->add_option("--system", a.system, "system JSON (transfer matrix and named potentials)")->required();
  app->add_option("--phi", a.phi, "name of the potential")->capture_default_str();
  auto* f = app->add_option("--f", a.f, "observable name, once per coordinate");
  if (needs_f) f->required();
}

// The config keeps pointers into its document, so both live on the heap.
struct Loaded {
  std::unique_ptr<Document> doc;
  SystemConfig cfg;
  Potential phi;
  std::vector<Potential> obs;
};

Loaded load_system(const SystemArgs& a) {
  Loaded l;
  l.doc = std::make_unique<Document>(Document::load(a.system));
  l.cfg = SystemConfig::from(*l.doc);
  l.phi = l.cfg.potential(a.phi);
  for (const auto& n : a.f) l.obs.push_back(l.cfg.potential(n));
  return l;
}

TargetSet load_target(const std::string& path) {
  const auto doc = Document::load(path);
  return parse_target(Node(doc));
}

std::string line_of(const std::string& what, const std::string& value, const std::string& method, double residual) {
  return what + " " + value + " method=" + method + " residual=" + format_number(residual);
}

// ---------------------------------------------------------------------------

int cmd_pressure(const SystemArgs& a, const std::string& method, int n, int order, const Common& c) {
  const auto l = load_system(a);
  PressureResult r;
  if (method == "spectral") {
    r = spectral_pressure(l.phi);
  } else if (method == "variational") {
    r = variational_pressure(l.phi, std::max(order, l.phi.depth() - 1));
  } else {
    r = cover_pressure(l.phi, n);
  }
  std::cout << line_of("pressure", format_number(r.value), to_string(r.method), r.residual) << '\n';
  json j = to_json(r);
  j["phi"] = a.phi;
  if (r.method == PressureMethod::cover) j["n"] = n;
  save(c, "result.json", j.dump(1) + "\n");
  return 0;
}

int cmd_spectrum(const SystemArgs& a, int grid, const Common& c) {
  const auto l = load_system(a);
  const Spectrum sp(l.phi, ObservableSet(l.obs));
  const auto curve = spectrum_curve(sp, grid, c.workers);
  std::ostringstream csv;
  write_spectrum_csv(csv, curve, sp.dim());
  std::cout << csv.str();
  save(c, "spectrum.csv", csv.str());
  return 0;
}

int cmd_level(const SystemArgs& a, const std::string& mode, const std::string& target, const std::string& target2,
              const Common& c) {
  const auto l = load_system(a);
  const Spectrum sp(l.phi, ObservableSet(l.obs));
  const auto C = load_target(target);
  SetValue v;
  if (mode == "equ") v = pressure_equ(C, sp);
  else if (mode == "sub") v = pressure_sub(C, sp);
  else if (mode == "sup") v = pressure_sup(C, sp);
  else {
    if (target2.empty()) throw ConfigError("level-pressure between needs --target2");
    v = pressure_between(C, load_target(target2), sp);
  }
  const double residual = v.status == SetValue::Status::bracket ? v.upper - v.lower : 0.0;
  std::cout << line_of("pressure_" + mode, format_value(v), "legendre_dual", residual) << '\n';
  json j = to_json(v, "legendre_dual", residual);
  j["mode"] = mode;
  j["target"] = to_json(C);
  save(c, "result.json", j.dump(1) + "\n");
  return 0;
}

int cmd_relative(const SystemArgs& a, const std::string& g, std::vector<double> alphas, const std::vector<double>& range,
                 int grid, const Common& c) {
  const auto l = load_system(a);
  if (l.obs.size() != 1) throw ConfigError("relative takes exactly one --f");
  const auto gp = l.cfg.potential(g);
  if (!range.empty()) {
    for (int k = 0; k < grid; ++k)
      alphas.push_back(grid == 1 ? range[0] : range[0] + (range[1] - range[0]) * k / (grid - 1));
  }
  if (alphas.empty()) throw ConfigError("relative needs --alpha or --range");
  std::ostringstream csv;
  csv << "alpha,lambda,dual_q_1,flags,method,residual\n";
  json rows = json::array();
  for (double al : alphas) {
    const auto r = relative_spectrum(l.obs[0], gp, al, l.phi);
    csv << format_number(al) << ',' << format_number(r.value) << ','
        << (r.dual.empty() ? "nan" : format_number(r.dual[0])) << ',' << to_string(r.status) << ",legendre_dual,"
        << format_number(r.gradient_norm) << '\n';
    rows.push_back({{"alpha", al},
                    {"value", number_json(r.value)},
                    {"status", to_string(r.status)},
                    {"method", "legendre_dual"},
                    {"residual", number_json(r.gradient_norm)}});
  }
  std::cout << csv.str();
  save(c, "spectrum.csv", csv.str());
  save(c, "result.json", json{{"relative", rows}}.dump(1) + "\n");
  return 0;
}

LevelMode level_mode(const std::string& m) {
  return m == "equ" ? LevelMode::equ : m == "sub" ? LevelMode::sub : LevelMode::sup;
}

int cmd_dimension(const SystemArgs& a, const std::string& ifs_path, const std::string& target, const std::string& mode,
                  bool strict_osc, const Common& c) {
  json j;
  if (!ifs_path.empty()) {
    const auto doc = Document::load(ifs_path);
    const auto ifs = parse_ifs(doc);
    IfsDimension d;
    if (a.f.empty()) {
      const auto psi = scale_potential(ifs);
      d = {SetValue::of(limit_set_dimension(ifs)), check_open_set_condition(ifs), psi};
      if (strict_osc && d.osc.checked && !d.osc.passed) throw PreconditionError("ifs: open set condition check failed: " + d.osc.detail);
    } else {
      if (target.empty()) throw ConfigError("dimension with --f needs --target");
      const auto cfg = SystemConfig::from(doc);
      std::vector<Potential> obs;
      for (const auto& n : a.f) obs.push_back(cfg.potential(n));
      d = hausdorff_dimension(ifs, ObservableSet(obs), load_target(target), level_mode(mode),
                              strict_osc ? OscPolicy::error : OscPolicy::warn);
    }
    std::cout << line_of("dimension", format_value(d.value), "bowen_root", 0.0) << '\n';
    std::cout << "osc " << (d.osc.checked ? (d.osc.passed ? "passed" : "failed") : "assumed");
    if (!d.osc.detail.empty()) std::cout << " (" << d.osc.detail << ')';
    std::cout << '\n';
    const auto table = to_json(d.scale);
    std::cout << "psi depth " << d.scale.depth() << '\n';
    for (const auto& [w, v] : table["values"].items()) std::cout << "psi " << w << ' ' << format_number(v.get<double>()) << '\n';
    if (d.osc.checked && !d.osc.passed) std::cerr << "warning: open set condition check failed\n";
    j = to_json(d.value, "bowen_root", 0.0);
    j["psi"] = table;
    j["osc"] = {{"checked", d.osc.checked}, {"passed", d.osc.passed}, {"detail", d.osc.detail}};
  } else {
    const auto l = load_system(a);
    SetValue v;
    if (l.obs.empty()) {
      v = SetValue::of(bowen_root(l.phi));
    } else {
      if (target.empty()) throw ConfigError("dimension with --f needs --target");
      v = bs_dimension_set(load_target(target), Spectrum(l.phi, ObservableSet(l.obs)), level_mode(mode));
    }
    std::cout << line_of("dimension", format_value(v), "bowen_root", 0.0) << '\n';
    j = to_json(v, "bowen_root", 0.0);
    j["psi"] = a.phi;
  }
  save(c, "result.json", j.dump(1) + "\n");
  return 0;
}

struct HistoricArgs {
  SystemArgs sys;
  std::string target;
  std::string blueprint;
  int steps = 20;
  int first_level = 4;
  std::uint64_t seed = 0;
  int block_length = 40;
  double tolerance = 0.01;
  std::string mode = "sampled";
  long length = -1;
};

int cmd_historic_plan(const HistoricArgs& h, const Common& c) {
  const auto l = load_system(h.sys);
  const Spectrum sp(l.phi, ObservableSet(l.obs));
  BlueprintOptions opt;
  opt.seed = h.seed;
  opt.block_length = h.block_length;
  opt.tolerance = h.tolerance;
  opt.mode = h.mode == "spliced" ? BlockMode::spliced : BlockMode::sampled;
  const auto bp = plan_blueprint(sp, make_dense_chain(load_target(h.target), h.first_level), h.steps, opt);
  const auto text = to_json(bp).dump(1) + "\n";
  if (c.output.empty()) std::cout << text;
  else std::cout << "blueprint segments=" << bp.segments.size() << " length=" << bp.length() << '\n';
  save(c, "blueprint.json", text);
  return 0;
}

int cmd_historic_synth(const HistoricArgs& h, const Common& c) {
  const auto doc = Document::load(h.blueprint);
  const auto bp = parse_blueprint(doc);
  const long n = h.length < 0 ? bp.length() : std::min(h.length, bp.length());
  std::ostringstream out;
  stream_point(bp, n, [&](std::span<const Symbol> w) {
    for (Symbol s : w) out << s;
  });
  out << '\n';
  if (c.output.empty()) std::cout << out.str();
  else std::cout << "symbols " << n << '\n';
  save(c, "point.txt", out.str());
  return 0;
}

int cmd_historic_verify(const HistoricArgs& h, const Common& c) {
  const auto doc = Document::load(h.blueprint);
  const auto bp = parse_blueprint(doc);
  const auto l = load_system(h.sys);
  const ObservableSet obs(l.obs);
  if (!(obs.subshift() == bp.spec)) throw ConfigError(h.blueprint + ":1: blueprint and system differ in the subshift");
  const auto k = load_target(h.target);
  const auto check = check_blueprint(bp);
  std::cout << "schedule " << (check.ok ? "ok" : "violated: " + check.message) << '\n';
  const BirkhoffPath path(synthesize_point(bp, bp.length()), obs);
  const auto cps = bp.checkpoints();
  const auto est = accumulation_estimate(path, cps.front(), std::min(cps.back(), path.count()), &k);
  const auto rows = checkpoint_rows(bp, path, k);
  std::ostringstream csv;
  write_checkpoints_csv(csv, rows, obs.dim());
  std::cout << "hausdorff " << format_number(*est.hausdorff) << " method=accumulation residual=0\n";
  std::cout << "largest_gap " << format_number(est.largest_gap) << " method=accumulation residual=0\n";
  if (c.output.empty()) std::cout << csv.str();
  save(c, "checkpoints.csv", csv.str());
  save(c, "result.json",
       json{{"schedule_ok", check.ok},
            {"message", check.message},
            {"hausdorff", number_json(*est.hausdorff)},
            {"largest_gap", number_json(est.largest_gap)},
            {"length", bp.length()}}
               .dump(1) +
           "\n");
  return check.ok ? 0 : 2;
}

int cmd_selftest(std::uint64_t seed, const Common& c) {
  acceptance::Options opt;
  opt.seed = seed;
  opt.workers = std::max(1, c.workers);
  int failed = 0;
  const auto results = acceptance::run_all(opt, [&](const acceptance::Outcome& r) {
    std::cout << acceptance::format_line(r) << std::endl;
    if (!r.passed()) ++failed;
  });
  std::cout << failed << " of " << results.size() << " criteria failed\n";
  for (const auto& [name, text] : acceptance::selftest_artifacts(seed, opt.workers)) save(c, name, text);
  return failed == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Thermodynamic formalism on subshifts of finite type"};
  app.require_subcommand(1);
  // Global options may also follow the subcommand.
  app.fallthrough();
  Common common;
  app.add_option("--output", common.output, "directory for result files");
  app.add_option("--workers", common.workers, "worker threads")->check(CLI::PositiveNumber);

  SystemArgs sys;
  std::string method = "spectral";
  int cover_n = 12, order = 1, grid = 101;
  auto* pressure = app.add_subcommand("pressure", "topological pressure of a potential");
  add_system(pressure, sys, false);
  pressure->add_option("--method", method)->check(CLI::IsMember({"spectral", "variational", "cover"}))->capture_default_str();
  pressure->add_option("--n", cover_n, "cover length")->capture_default_str();
  pressure->add_option("--order", order, "Markov order for the variational method")->capture_default_str();

  auto* spectrum = app.add_subcommand("spectrum", "Lambda(y, phi) over a grid of the feasible domain");
  add_system(spectrum, sys, true);
  spectrum->add_option("--grid", grid, "points per axis")->check(CLI::PositiveNumber)->capture_default_str();

  std::string mode, target, target2;
  auto* level = app.add_subcommand("level-pressure", "pressure of a level set");
  level->add_option("mode", mode)->required()->check(CLI::IsMember({"equ", "sub", "sup", "between"}));
  add_system(level, sys, true);
  level->add_option("--target", target, "TargetSet JSON")->required();
  level->add_option("--target2", target2, "second TargetSet for between");

  std::string g_name;
  std::vector<double> alphas, range;
  auto* relative = app.add_subcommand("relative", "ratio spectrum for int f / int g = alpha");
  add_system(relative, sys, true);
  relative->add_option("--g", g_name, "denominator observable")->required();
  relative->add_option("--alpha", alphas, "ratio value, repeatable");
  relative->add_option("--range", range, "alpha range lo hi")->expected(2);
  relative->add_option("--grid", grid, "points over --range")->check(CLI::PositiveNumber);

  std::string ifs_path, dim_mode = "sup";
  bool strict_osc = false;
  auto* dimension = app.add_subcommand("dimension", "BS dimension (Bowen root); Hausdorff dimension with --ifs");
  dimension->add_option("--system", sys.system, "system JSON");
  dimension->add_option("--psi", sys.phi, "scale potential")->capture_default_str();
  dimension->add_option("--f", sys.f, "observable name");
  dimension->add_option("--ifs", ifs_path, "IFS JSON");
  dimension->add_option("--target", target, "TargetSet JSON");
  dimension->add_option("--mode", dim_mode)->check(CLI::IsMember({"equ", "sub", "sup"}))->capture_default_str();
  dimension->add_flag("--strict-osc", strict_osc, "fail when the open set condition check fails");

  HistoricArgs h;
  auto* historic = app.add_subcommand("historic", "historic points with a prescribed accumulation set");
  historic->require_subcommand(1);
  auto* plan = historic->add_subcommand("plan", "build a blueprint");
  add_system(plan, h.sys, true);
  plan->add_option("--target", h.target, "connected TargetSet JSON")->required();
  plan->add_option("--seed", h.seed, "seed for block sampling")->required();
  plan->add_option("--steps", h.steps)->capture_default_str();
  plan->add_option("--first-level", h.first_level)->capture_default_str();
  plan->add_option("--block-length", h.block_length)->capture_default_str();
  plan->add_option("--tolerance", h.tolerance)->capture_default_str();
  plan->add_option("--mode", h.mode)->check(CLI::IsMember({"sampled", "spliced"}))->capture_default_str();
  auto* synth = historic->add_subcommand("synth", "emit the symbols of a blueprint");
  synth->add_option("--blueprint", h.blueprint)->required();
  synth->add_option("--length", h.length, "prefix length (default: whole blueprint)");
  auto* verify = historic->add_subcommand("verify", "check a blueprint and its Birkhoff averages");
  verify->add_option("--blueprint", h.blueprint)->required();
  add_system(verify, h.sys, true);
  verify->add_option("--target", h.target, "TargetSet JSON")->required();

  std::uint64_t seed = acceptance::Options{}.seed;
  auto* selftest = app.add_subcommand("selftest", "run the acceptance suite");
  selftest->add_option("--seed", seed)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*pressure) return cmd_pressure(sys, method, cover_n, order, common);
    if (*spectrum) return cmd_spectrum(sys, grid, common);
    if (*level) return cmd_level(sys, mode, target, target2, common);
    if (*relative) return cmd_relative(sys, g_name, alphas, range, grid, common);
    if (*dimension) {
      if (ifs_path.empty() && sys.system.empty()) throw ConfigError("dimension needs --system or --ifs");
      return cmd_dimension(sys, ifs_path, target, dim_mode, strict_osc, common);
    }
    if (*plan) return cmd_historic_plan(h, common);
    if (*synth) return cmd_historic_synth(h, common);
    if (*verify) return cmd_historic_verify(h, common);
    if (*selftest) return cmd_selftest(seed, common);
  } catch (const ConvergenceError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const PreconditionError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const ResourceError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 2;
}
