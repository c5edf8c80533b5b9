// Command line front end: catalog queries, symbolic derivation, grid spectra,
// verification reports, ground states, and ansatz search.
//
// Exit codes: 0 success, 1 computation or verification failure, 2 usage
// error, 3 search did not converge.  Output is deterministic: rerunning a
// command reproduces it byte for byte (LADDERLAB_SEED, when set, overrides
// any --seed value).

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "ladderlab/jsonout.hpp"
#include "ladderlab/ladder.hpp"
#include "ladderlab/numerics.hpp"
#include "ladderlab/search.hpp"

namespace {

using namespace ladderlab;

constexpr int kOk = 0;
constexpr int kFailure = 1;
constexpr int kUsage = 2;
constexpr int kNoConvergence = 3;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string fmt(double v) {
  if (v == 0.0) v = 0.0;  // print -0.0 as 0
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_double(const std::string& text, const std::string& what) {
  char* end = nullptr;
  double v = std::strtod(text.c_str(), &end);
  if (end == text.c_str() || *end != '\0')
    throw UsageError("expected a number for " + what + ", got '" + text + "'");
  return v;
}

// "--set name=value" pairs, kept as raw strings so each command can decide
// whether a value is a number or an expression.
std::map<std::string, std::string> split_sets(
    const std::vector<std::string>& sets) {
  std::map<std::string, std::string> out;
  for (const std::string& s : sets) {
    auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0)
      throw UsageError("--set expects name=value, got '" + s + "'");
    std::string name = s.substr(0, eq);
    if (out.count(name)) throw UsageError("--set repeats '" + name + "'");
    out[name] = s.substr(eq + 1);
  }
  return out;
}

Grid parse_grid(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) parts.push_back(item);
  if (parts.size() != 3)
    throw UsageError("--grid expects a,b,n, got '" + text + "'");
  Grid g;
  g.a = parse_double(parts[0], "grid start");
  g.b = parse_double(parts[1], "grid end");
  double n = parse_double(parts[2], "grid points");
  g.n = static_cast<int>(n);
  if (g.n < 5 || g.n != n) throw UsageError("grid points must be an integer >= 5");
  if (!(g.b > g.a)) throw UsageError("grid end must exceed grid start");
  return g;
}

void write_output(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::fputs(text.c_str(), stdout);
    return;
  }
  std::ofstream f(out_path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open output file " + out_path);
  f << text;
}

ShiftSystem system_from_flags(int case_id,
                              const std::vector<std::string>& sets) {
  if (case_id < 1 || case_id > case_count())
    throw UsageError("--case must be between 1 and " +
                     std::to_string(case_count()));
  ParamBinding overrides;
  for (const auto& [name, value] : split_sets(sets))
    overrides.set(name, parse_double(value, name));
  return build_case(case_id, overrides);
}

JsonValue interval_json(const Interval& iv) {
  JsonValue v = JsonValue::object();
  v.set("a", iv.a);
  v.set("b", iv.b);
  return v;
}

JsonValue grid_json(const Grid& g) {
  JsonValue v = JsonValue::object();
  v.set("a", g.a);
  v.set("b", g.b);
  v.set("n", g.n);
  return v;
}

std::string states_csv(const Grid& g,
                       const std::vector<std::vector<double>>& states) {
  std::string out = "x";
  for (std::size_t k = 0; k < states.size(); ++k)
    out += ",psi_" + std::to_string(k);
  out += "\n";
  for (int i = 0; i < g.n; ++i) {
    out += fmt(g.point(i));
    for (const auto& st : states)
      out += "," + fmt(st[static_cast<std::size_t>(i)]);
    out += "\n";
  }
  return out;
}

// --------------------------------------------------------------------------
// catalog
// --------------------------------------------------------------------------

int run_catalog(const std::string& out_path) {
  JsonValue doc = JsonValue::object();
  doc.set("command", "catalog");
  JsonValue families = JsonValue::array();
  for (int id = 1; id <= case_count(); ++id)
    families.push(system_to_json(build_case(id)));
  doc.set("families", std::move(families));
  write_output(doc.dump(), out_path);
  return kOk;
}

// --------------------------------------------------------------------------
// derive
// --------------------------------------------------------------------------

int run_derive(int case_id, const std::vector<std::string>& sets,
               const std::string& out_path) {
  ShiftSystem sys = system_from_flags(case_id, sets);
  TildePair tilde = tilde_shifts(sys);
  ShiftOperators ops = shift_operators(sys);
  auto [g1, g2] = gap_exprs(sys);

  JsonValue doc = JsonValue::object();
  doc.set("command", "derive");
  doc.set("system", system_to_json(sys));
  JsonValue gaps = JsonValue::object();
  gaps.set("lowering", g1.str());
  gaps.set("raising", g2.str());
  doc.set("gaps", std::move(gaps));
  JsonValue tj = JsonValue::object();
  tj.set("f", tilde.f.str());
  tj.set("g", tilde.g.str());
  doc.set("tilde_shift", std::move(tj));
  JsonValue oj = JsonValue::object();
  oj.set("s1", ops.s1.str());
  oj.set("s2", ops.s2.str());
  doc.set("shift_operators", std::move(oj));
  GroundState gs = ground_state(sys);
  JsonValue gj = JsonValue::object();
  gj.set("psi", gs.psi.str());
  gj.set("energy", gs.energy);
  doc.set("ground_state", std::move(gj));

  ConstraintReport cr = check_constraints(sys, core_spec(sys));
  ClosureReport cl = closure_residuals(sys, core_spec(sys));
  JsonValue vj = JsonValue::object();
  vj.set("constraint_max_residual", cr.max());
  vj.set("closure_max_residual",
         std::max(cl.hp.max_residual, cl.hq.max_residual));
  doc.set("verification", std::move(vj));

  write_output(doc.dump(), out_path);
  return kOk;
}

// --------------------------------------------------------------------------
// spectrum
// --------------------------------------------------------------------------

int run_spectrum(int case_id, const std::vector<std::string>& sets,
                 bool custom, const std::string& grid_flag, int levels,
                 const std::string& format, const std::string& out_path) {
  if (levels < 1) throw UsageError("--levels must be at least 1");

  Expr X = constant(-1.0), V = constant(0.0);
  std::optional<ShiftSystem> sys;
  Grid grid;
  JsonValue system_block = JsonValue::object();
  if (custom) {
    auto pairs = split_sets(sets);
    if (!pairs.count("V"))
      throw UsageError("--custom needs --set V=<expression>");
    if (grid_flag.empty())
      throw UsageError("--custom needs an explicit --grid a,b,n");
    try {
      V = parse(pairs.at("V"));
      if (pairs.count("X")) X = parse(pairs.at("X"));
    } catch (const ParseError& e) {
      throw UsageError(std::string("bad expression: ") + e.what());
    }
    for (const auto& [name, value] : pairs)
      if (name != "X" && name != "V")
        throw UsageError("--custom only understands X and V, got '" + name +
                         "'");
    grid = parse_grid(grid_flag);
    system_block.set("X", X.str());
    system_block.set("V", V.str());
  } else {
    sys = system_from_flags(case_id, sets);
    X = sys->X;
    V = sys->V;
    grid = grid_flag.empty() ? default_grid(*sys) : parse_grid(grid_flag);
    system_block = system_to_json(*sys);
  }

  Spectrum sp = solve_lowest(X, V, grid, levels);

  if (format == "csv") {
    write_output(states_csv(grid, sp.states), out_path);
    return kOk;
  }

  std::vector<double> ladder;
  if (sys) ladder = ladder_spectrum(*sys, levels);

  JsonValue doc = JsonValue::object();
  doc.set("command", "spectrum");
  doc.set("system", std::move(system_block));
  doc.set("grid", grid_json(grid));
  JsonValue rows = JsonValue::array();
  for (int k = 0; k < levels; ++k) {
    std::size_t uk = static_cast<std::size_t>(k);
    JsonValue row = JsonValue::object();
    row.set("level", k);
    row.set("grid_energy", sp.energies[uk]);
    if (uk < ladder.size()) {
      row.set("ladder_energy", ladder[uk]);
      row.set("difference", sp.energies[uk] - ladder[uk]);
    } else {
      row.set("ladder_energy", JsonValue::null());
      row.set("difference", JsonValue::null());
    }
    rows.push(std::move(row));
  }
  doc.set("levels", std::move(rows));
  if (sys) doc.set("ladder_levels", static_cast<long long>(ladder.size()));
  write_output(doc.dump(), out_path);
  return kOk;
}

// --------------------------------------------------------------------------
// verify
// --------------------------------------------------------------------------

int run_verify(int case_id, const std::vector<std::string>& sets,
               const std::string& grid_flag, int levels,
               const std::string& out_path) {
  // Pinned acceptance thresholds for a healthy catalog system.
  constexpr double kConstraintTol = 1e-12;
  constexpr double kClosureTol = 1e-9;
  constexpr double kAnnihilationTol = 1e-9;
  constexpr double kEnergyTol = 1e-4;
  constexpr double kSimilarityTol = 1e-5;  // on 1 - similarity
  constexpr double kGapTol = 1e-4;

  ShiftSystem sys = system_from_flags(case_id, sets);
  Grid grid = grid_flag.empty() ? default_grid(sys) : parse_grid(grid_flag);
  if (levels < 1) throw UsageError("--levels must be at least 1");

  JsonValue doc = JsonValue::object();
  doc.set("command", "verify");
  doc.set("case", case_id);
  doc.set("class", closure_class_name(closure_class(sys)));
  bool ok = true;

  ConstraintReport cr = check_constraints(sys, core_spec(sys));
  bool c_ok = cr.max() < kConstraintTol;
  ok = ok && c_ok;
  JsonValue cj = JsonValue::object();
  cj.set("max_residual", cr.max());
  cj.set("tolerance", kConstraintTol);
  cj.set("pass", c_ok);
  doc.set("constraints", std::move(cj));

  ClosureReport cl = closure_residuals(sys, core_spec(sys));
  double cl_max = std::max(cl.hp.max_residual, cl.hq.max_residual);
  bool cl_ok = cl_max < kClosureTol;
  ok = ok && cl_ok;
  JsonValue clj = JsonValue::object();
  clj.set("max_residual", cl_max);
  clj.set("tolerance", kClosureTol);
  clj.set("pass", cl_ok);
  doc.set("closure", std::move(clj));

  GroundState gs = ground_state(sys);
  ShiftOperators ops = shift_operators(sys);
  Expr annihilated = ops.s1.bind_energy(gs.energy).apply(gs.psi);
  ApproxReport ann = approx_equal(annihilated, constant(0.0), core_spec(sys));
  double grid_e0 = eigenvalue_extrapolated(sys.X, sys.V, grid, 0);
  double e0_err = std::abs(grid_e0 - gs.energy);
  bool g_ok = ann.max_residual < kAnnihilationTol && e0_err < kEnergyTol;
  ok = ok && g_ok;
  JsonValue gj = JsonValue::object();
  gj.set("energy", gs.energy);
  gj.set("annihilation_residual", ann.max_residual);
  gj.set("annihilation_tolerance", kAnnihilationTol);
  gj.set("grid_energy", grid_e0);
  gj.set("energy_error", e0_err);
  gj.set("energy_tolerance", kEnergyTol);
  gj.set("pass", g_ok);
  doc.set("ground_state", std::move(gj));

  LadderVerification lv = verify_ladder(sys, grid, levels);
  bool l_ok = lv.min_similarity() > 1.0 - kSimilarityTol &&
              lv.max_gap_error() < kGapTol;
  ok = ok && l_ok;
  JsonValue lj = JsonValue::object();
  lj.set("levels", levels);
  lj.set("min_similarity", lv.min_similarity());
  lj.set("similarity_tolerance", kSimilarityTol);
  lj.set("max_gap_error", lv.max_gap_error());
  lj.set("gap_tolerance", kGapTol);
  lj.set("pass", l_ok);
  doc.set("ladder", std::move(lj));

  doc.set("pass", ok);
  write_output(doc.dump(), out_path);
  return ok ? kOk : kFailure;
}

// --------------------------------------------------------------------------
// groundstate
// --------------------------------------------------------------------------

int run_groundstate(int case_id, const std::vector<std::string>& sets,
                    const std::string& grid_flag, const std::string& format,
                    const std::string& out_path) {
  ShiftSystem sys = system_from_flags(case_id, sets);
  Grid grid = grid_flag.empty() ? default_grid(sys) : parse_grid(grid_flag);
  GroundState gs = ground_state(sys);

  if (format == "csv") {
    std::vector<double> psi = sample_on_grid(gs.psi, grid);
    std::vector<double> w = b_weights(sys.X, grid);
    double norm = 0;
    for (std::size_t i = 0; i < psi.size(); ++i) norm += w[i] * psi[i] * psi[i];
    norm = std::sqrt(norm);
    if (norm > 0)
      for (double& v : psi) v /= norm;
    write_output(states_csv(grid, {psi}), out_path);
    return kOk;
  }

  Spectrum sp = solve_lowest(sys, grid, 1);
  std::vector<double> exact = sample_on_grid(gs.psi, grid);
  std::vector<double> w = b_weights(sys.X, grid);

  JsonValue doc = JsonValue::object();
  doc.set("command", "groundstate");
  doc.set("case", case_id);
  doc.set("energy", gs.energy);
  doc.set("psi", gs.psi.str());
  JsonValue gj = JsonValue::object();
  gj.set("grid", grid_json(grid));
  gj.set("grid_energy", sp.energies[0]);
  gj.set("energy_difference", sp.energies[0] - gs.energy);
  gj.set("similarity", cosine_similarity(sp.states[0], exact, w, 8));
  doc.set("grid_check", std::move(gj));
  write_output(doc.dump(), out_path);
  return kOk;
}

// --------------------------------------------------------------------------
// search
// --------------------------------------------------------------------------

Ansatz load_ansatz(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw UsageError("cannot open ansatz file " + path);
  nlohmann::json j;
  try {
    f >> j;
  } catch (const nlohmann::json::exception& e) {
    throw UsageError("bad ansatz JSON: " + std::string(e.what()));
  }
  Ansatz a;
  try {
    if (!j.contains("Y")) throw UsageError("ansatz JSON needs a \"Y\" entry");
    a.Y = parse(j.at("Y").get<std::string>());
    if (j.contains("X")) a.X = parse(j.at("X").get<std::string>());
    if (j.contains("domain")) {
      auto d = j.at("domain");
      if (!d.is_array() || d.size() != 2)
        throw UsageError("ansatz domain must be [a, b]");
      a.domain = {d.at(0).get<double>(), d.at(1).get<double>()};
    }
    if (j.contains("pins"))
      for (auto it = j.at("pins").begin(); it != j.at("pins").end(); ++it)
        a.pins[it.key()] = it.value().get<double>();
    auto read_basis = [&](const char* key, std::vector<Expr>& dst) {
      if (!j.contains(key)) return;
      for (const auto& entry : j.at(key))
        dst.push_back(parse(entry.get<std::string>()));
    };
    read_basis("z_basis", a.z_basis);
    read_basis("q_basis", a.q_basis);
    read_basis("v_basis", a.v_basis);
  } catch (const ParseError& e) {
    throw UsageError("bad expression in ansatz: " + std::string(e.what()));
  } catch (const nlohmann::json::exception& e) {
    throw UsageError("bad ansatz JSON: " + std::string(e.what()));
  }
  return a;
}

int run_search(const std::string& ansatz_path, std::uint64_t seed,
               int restarts, int points, const std::string& out_path) {
  Ansatz ansatz = load_ansatz(ansatz_path);
  FitOptions opts;
  opts.seed = seed;
  if (restarts < 1) throw UsageError("--restarts must be at least 1");
  opts.restarts = restarts;
  opts.points = points;
  FitResult fit = fit_shift_system(ansatz, opts);

  JsonValue doc = JsonValue::object();
  doc.set("command", "search");
  JsonValue aj = JsonValue::object();
  aj.set("X", ansatz.X.str());
  aj.set("Y", ansatz.Y.str());
  aj.set("domain", interval_json(ansatz.domain));
  doc.set("ansatz", std::move(aj));
  doc.set("converged", fit.converged);
  doc.set("rms_residual", fit.rms);
  doc.set("iterations", fit.iterations);
  doc.set("best_restart", fit.best_restart);
  JsonValue kj = JsonValue::object();
  kj.set("alpha", fit.constants.alpha);
  kj.set("beta", fit.constants.beta);
  kj.set("gamma", fit.constants.gamma);
  kj.set("lambda", fit.constants.lambda);
  kj.set("nu", fit.constants.nu);
  kj.set("tau", fit.constants.tau);
  doc.set("constants", std::move(kj));
  FitResult shown = fit.converged ? prune_small_coefficients(fit) : fit;
  JsonValue fj = JsonValue::object();
  fj.set("Z", shown.Z.str());
  fj.set("Q", shown.Q.str());
  fj.set("V", shown.V.str());
  doc.set("functions", std::move(fj));

  if (fit.converged) {
    ShiftSystem sys = fitted_system(ansatz, fit);
    ConstraintReport cr = check_constraints(sys, core_spec(sys));
    doc.set("constraint_max_residual", cr.max());
    CaseMatch match = recover_case(sys);
    JsonValue mj = JsonValue::object();
    mj.set("case", match.case_id);
    mj.set("verified", match.verified);
    JsonValue mc = JsonValue::object();
    for (const auto& [name, value] : match.constants) mc.set(name, value);
    mj.set("constants", std::move(mc));
    doc.set("recovered_case", std::move(mj));
  }

  write_output(doc.dump(), out_path);
  return fit.converged ? kOk : kNoConvergence;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"shift-operator toolkit for exactly solvable potentials"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "ladderlab 1.0.0");

  int case_id = 0;
  std::vector<std::string> sets;
  std::string grid_flag, out_path, format = "json", ansatz_path;
  int levels = 6;
  bool custom = false;
  std::uint64_t seed = 0;
  int restarts = 8, points = 40;

  auto add_common = [&](CLI::App* cmd, bool with_case) {
    if (with_case)
      cmd->add_option("--case", case_id, "catalog family number (1-6)");
    cmd->add_option("--set", sets,
                    "override a named constant, e.g. --set alpha=0.5");
    cmd->add_option("--out", out_path, "write output to a file instead of stdout");
    return cmd;
  };

  CLI::App* c_catalog = app.add_subcommand("catalog", "list the built-in families");
  c_catalog->add_option("--out", out_path, "write output to a file");

  CLI::App* c_derive =
      add_common(app.add_subcommand("derive", "derive operators for a family"),
                 true);

  CLI::App* c_spectrum = add_common(
      app.add_subcommand("spectrum", "grid spectrum vs ladder prediction"),
      true);
  c_spectrum->add_option("--grid", grid_flag, "grid as a,b,n");
  c_spectrum->add_option("--levels", levels, "number of energy levels");
  c_spectrum->add_option("--format", format, "json or csv")
      ->check(CLI::IsMember({"json", "csv"}));
  c_spectrum->add_flag("--custom", custom,
                       "use --set X=<expr> and --set V=<expr> instead of a case");

  CLI::App* c_verify = add_common(
      app.add_subcommand("verify", "check identities, closure and ladder action"),
      true);
  c_verify->add_option("--grid", grid_flag, "grid as a,b,n");
  c_verify->add_option("--levels", levels, "ladder transitions to verify");

  CLI::App* c_ground = add_common(
      app.add_subcommand("groundstate", "closed-form ground state and grid check"),
      true);
  c_ground->add_option("--grid", grid_flag, "grid as a,b,n");
  c_ground->add_option("--format", format, "json or csv")
      ->check(CLI::IsMember({"json", "csv"}));

  CLI::App* c_search = app.add_subcommand(
      "search", "fit shift operators to an (X, Y) ansatz from a JSON file");
  c_search->add_option("ansatz", ansatz_path, "ansatz JSON file")->required();
  c_search->add_option("--seed", seed, "random restart seed");
  c_search->add_option("--restarts", restarts, "number of random restarts");
  c_search->add_option("--points", points, "collocation points");
  c_search->add_option("--out", out_path, "write output to a file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  if (const char* env = std::getenv("LADDERLAB_SEED")) {
    char* end = nullptr;
    unsigned long long v = std::strtoull(env, &end, 10);
    if (end != env && *end == '\0') seed = v;
  }

  // verify defaults to fewer levels than spectrum when the flag is untouched.
  if (c_verify->parsed() && c_verify->get_option("--levels")->count() == 0)
    levels = 4;

  try {
    if (c_catalog->parsed()) return run_catalog(out_path);
    if (c_derive->parsed()) return run_derive(case_id, sets, out_path);
    if (c_spectrum->parsed())
      return run_spectrum(case_id, sets, custom, grid_flag, levels, format,
                          out_path);
    if (c_verify->parsed())
      return run_verify(case_id, sets, grid_flag, levels, out_path);
    if (c_ground->parsed())
      return run_groundstate(case_id, sets, grid_flag, format, out_path);
    if (c_search->parsed())
      return run_search(ansatz_path, seed, restarts, points, out_path);
  } catch (const UsageError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kUsage;
  } catch (const CatalogError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kUsage;
  } catch (const ParseError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kUsage;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kFailure;
  }
  return kUsage;
}
