#include "cli.hpp"

#include <fmt/format.h>

#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

#include "qipl/classical.hpp"
#include "qipl/errors.hpp"
#include "qipl/oracle.hpp"
#include "qipl/random.hpp"
#include "qipl/sac1.hpp"
#include "qipl/sat3.hpp"
#include "qipl/sdp.hpp"
#include "qipl/serialize.hpp"
#include "qipl/statetest.hpp"
#include "qipl/transforms.hpp"

namespace qipl::cli {

namespace {

struct Caps {
  int register_qubits = 12;
  std::size_t dim = 4096;
  std::uint64_t nodes = 10'000'000;
  int prover_qubits = 8;
};

struct Options {
  std::uint64_t seed = 0;
  double tol = 1e-4;
  std::string caps_text;
  std::string out_path;
  std::string format = "json";
  Caps caps;
};

// Failure inside a transform stage; carries the stage for the report.
struct StageFailure {
  std::size_t index;
  std::string name;
  std::string message;
};

double parse_number(const std::string& text) {
  const auto slash = text.find('/');
  try {
    std::size_t used = 0;
    if (slash == std::string::npos) {
      const double v = std::stod(text, &used);
      if (used != text.size()) throw std::invalid_argument(text);
      return v;
    }
    const double a = std::stod(text.substr(0, slash));
    const double b = std::stod(text.substr(slash + 1));
    if (b == 0.0) throw std::invalid_argument(text);
    return a / b;
  } catch (const std::logic_error&) {
    throw ParseError(fmt::format("'{}' is not a number or fraction", text));
  }
}

std::map<std::string, std::string> parse_kv(const std::string& text, char sep) {
  std::map<std::string, std::string> kv;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, sep)) {
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw ParseError(fmt::format("expected key=value, got '{}'", item));
    kv[item.substr(0, eq)] = item.substr(eq + 1);
  }
  return kv;
}

Caps parse_caps(const std::string& text) {
  Caps c;
  for (const auto& [k, v] : parse_kv(text, ',')) {
    const double x = parse_number(v);
    if (x < 1) throw ParseError(fmt::format("cap '{}' must be positive", k));
    if (k == "register") c.register_qubits = std::min(int(x), 16);
    else if (k == "dim") c.dim = std::size_t(x);
    else if (k == "nodes") c.nodes = std::uint64_t(x);
    else if (k == "prover") c.prover_qubits = std::min(int(x), 10);
    else throw ParseError(fmt::format("unknown cap '{}' (register, dim, nodes, prover)", k));
  }
  return c;
}

json base_report(const std::string& command, const Options& o) {
  return {{"schema", kReportSchema},
          {"command", command},
          {"seed", o.seed},
          {"tol", o.tol},
          {"caps",
           {{"register", o.caps.register_qubits},
            {"dim", o.caps.dim},
            {"nodes", o.caps.nodes},
            {"prover", o.caps.prover_qubits}}}};
}

VerifierSpec load_verifier(const std::string& path, const Caps& caps) {
  VerifierSpec v = verifier_from_json(parse_json_text(read_text_file(path)));
  const auto bad = validate_verifier(v, SizeCaps{caps.register_qubits, 16, 64});
  if (!bad.empty()) throw ValidationError(fmt::format("{}: {}", path, bad.front()));
  return v;
}

json omega_json(const OmegaResult& om) {
  return {{"omega", om.value}, {"dual", om.dual}, {"gap", om.dual - om.value},
          {"iterations", om.solution.iterations}};
}

// ---- omega ---------------------------------------------------------------

struct OmegaArgs {
  std::string verifier;
  int restarts = 8;
  int iterations = 200;
};

int cmd_omega(const OmegaArgs& a, const Options& o, json& r) {
  const VerifierSpec v = load_verifier(a.verifier, o.caps);
  const OmegaResult om = omega_detailed(v);
  SeeSawConfig cfg;
  cfg.restarts = a.restarts;
  cfg.iterations = a.iterations;
  cfg.rng_seed = o.seed;
  cfg.prover_qubits = std::min(default_prover_qubits(v), o.caps.prover_qubits);
  const SeeSawResult ss = see_saw_prover(v, cfg);
  const double diff = std::abs(om.value - ss.value);
  r["omega_sdp"] = om.value;
  r["dual"] = om.dual;
  r["seesaw"] = ss.value;
  r["gap"] = om.dual - om.value;
  r["bracket_difference"] = diff;
  r["agree"] = diff <= o.tol;
  r["sdp_iterations"] = om.solution.iterations;
  r["prover_qubits"] = cfg.prover_qubits;
  r["seesaw_best_restart"] = ss.best_restart;
  r["verifier_hash"] = spec_hash(v);
  return diff <= o.tol ? kOk : kDisagreement;
}

// ---- transform ------------------------------------------------------------

struct TransformArgs {
  std::string verifier;
  std::vector<std::string> stages;
  std::string emit;
  bool skip_omega = false;
};

json stage_bound(const std::string& name, const std::map<std::string, std::string>& kv,
                 double w_in, double w_out, double tol) {
  json b;
  auto upper = [&](double value) {
    b = {{"kind", "upper"}, {"value", value}, {"holds", w_out <= value + 1e-6}};
  };
  auto target = [&](double value) {
    b = {{"kind", "equal"}, {"value", value}, {"holds", std::abs(w_out - value) <= tol}};
  };
  if (name == "perfect_completeness") {
    const double c = parse_number(kv.at("c")), s = parse_number(kv.at("s"));
    if (w_in <= s + 1e-9) upper(1.0 - (c - s) * (c - s) / 2.0);
    else if (w_in >= c - 1e-9) target(1.0);
  } else if (name == "sequential") {
    target(std::pow(w_in, parse_number(kv.at("r"))));
  } else if (name == "parallel") {
    target(std::pow(w_in, parse_number(kv.at("k"))));
  } else if (w_in >= 1.0 - 1e-6) {
    target(1.0);
  } else {
    upper((1.0 + std::sqrt(w_in)) / 2.0);
  }
  return b;
}

VerifierSpec apply_stage(const std::string& name, const std::map<std::string, std::string>& kv,
                         const VerifierSpec& v) {
  auto need = [&](const char* key) {
    const auto it = kv.find(key);
    if (it == kv.end()) throw ParameterError(fmt::format("stage '{}' needs parameter '{}'", name, key));
    return parse_number(it->second);
  };
  if (name == "perfect_completeness") return perfect_completeness_transform(v, need("c"), need("s"));
  if (name == "sequential") return sequential_repetition(v, int(need("r")));
  if (name == "parallel") return parallel_repetition(v, int(need("k")));
  if (name == "turn_halving") return turn_halving(v);
  if (name == "single_coin") return single_coin_qmaml(v);
  throw ParameterError(fmt::format(
      "unknown stage '{}' (perfect_completeness, sequential, parallel, turn_halving, single_coin)",
      name));
}

int cmd_transform(const TransformArgs& a, const Options& o, json& r) {
  VerifierSpec cur = load_verifier(a.verifier, o.caps);
  std::optional<double> w;
  if (!a.skip_omega) {
    const auto om = omega_detailed(cur);
    w = om.value;
    r["input"] = omega_json(om);
  }
  json stages = json::array();
  for (std::size_t i = 0; i < a.stages.size(); ++i) {
    const auto colon = a.stages[i].find(':');
    const std::string name = a.stages[i].substr(0, colon);
    const auto kv = colon == std::string::npos ? std::map<std::string, std::string>{}
                                               : parse_kv(a.stages[i].substr(colon + 1), ',');
    VerifierSpec next;
    try {
      next = apply_stage(name, kv, cur);
    } catch (const ArgumentError& e) {
      throw StageFailure{i, name, e.what()};
    } catch (const SizeError& e) {
      throw StageFailure{i, name, e.what()};
    } catch (const ParameterError& e) {
      throw StageFailure{i, name, e.what()};
    }
    json s{{"index", i},
           {"name", name},
           {"params", kv},
           {"register_qubits", next.register_qubits()},
           {"turns", next.turns()}};
    if (!a.skip_omega) {
      const auto om = omega_detailed(next);
      s["omega"] = om.value;
      s["dual"] = om.dual;
      s["bound"] = stage_bound(name, kv, *w, om.value, o.tol);
      w = om.value;
    }
    stages.push_back(std::move(s));
    cur = std::move(next);
  }
  r["stages"] = stages;
  r["final_spec"] = verifier_to_json(cur);
  if (!a.emit.empty()) {
    std::ofstream f(a.emit);
    if (!f) throw ParseError(fmt::format("cannot write '{}'", a.emit));
    f << verifier_to_json(cur).dump(2) << '\n';
  }
  return kOk;
}

// ---- sat -----------------------------------------------------------------

struct SatArgs {
  std::string formula;
  std::string assignment;
  int soundness = -1;
};

json triple_json(const Triple& t, const SatEncoding& enc) {
  return {{"var", t.var}, {"negated", t.negated}, {"clause", t.clause}, {"value", t.value},
          {"code", encode_triple(t, enc)}};
}

bool satisfiable(const Cnf3Formula& f) {
  if (f.num_vars > 24) throw SizeError("satisfiability check is limited to 24 variables");
  std::vector<bool> a(std::size_t(f.num_vars));
  for (std::uint64_t m = 0; m < (std::uint64_t{1} << f.num_vars); ++m) {
    for (int i = 0; i < f.num_vars; ++i) a[std::size_t(i)] = (m >> i) & 1;
    if (f.satisfied_by(a)) return true;
  }
  return false;
}

int cmd_sat(const SatArgs& a, const Options& o, json& r) {
  const Cnf3Formula f = parse_dimacs(read_text_file(a.formula));
  const SatEncoding enc = sat_encoding(f);
  r["num_vars"] = f.num_vars;
  r["num_clauses"] = f.num_clauses();
  r["b"] = enc.b;
  r["ell"] = enc.ell;
  if (!a.assignment.empty()) {
    if (int(a.assignment.size()) != f.num_vars)
      throw ParseError(fmt::format("assignment has {} values, formula has {} variables",
                                   a.assignment.size(), f.num_vars));
    std::vector<bool> alpha;
    for (char ch : a.assignment) {
      if (ch != '0' && ch != '1') throw ParseError("assignment must be a string of 0 and 1");
      alpha.push_back(ch == '1');
    }
    Rng rng(o.seed);
    const FingerprintParams fp = draw_3sat_params(f, rng);
    r["mode"] = "honest";
    r["p"] = fp.p;
    r["r"] = fp.r;
    SatTranscript t;
    try {
      t = honest_3sat_prover(f, alpha);
    } catch (const PreconditionError& e) {
      r["accepted"] = false;
      r["reason"] = e.what();
      return kNo;
    }
    const SatVerdict verdict = run_3sat_verifier(f, fp, t);
    json cons = json::array(), sat = json::array();
    for (const auto& x : t.consistency) cons.push_back(triple_json(x, enc));
    for (const auto& g : t.satisfiability) {
      json grp = json::array();
      for (const auto& x : g) grp.push_back(triple_json(x, enc));
      sat.push_back(std::move(grp));
    }
    r["transcript"] = {{"consistency", cons}, {"satisfiability", sat}};
    r["accepted"] = verdict.accepted;
    r["reason"] = verdict.reason;
    r["f_var"] = verdict.f_var;
    r["f_cl"] = verdict.f_cl;
    return verdict.accepted ? kOk : kNo;
  }
  if (a.soundness < 1) throw ParseError("give --assignment or --soundness N with N >= 1");
  const std::size_t n = std::size_t(a.soundness);
  std::vector<FingerprintParams> params(n);
  std::vector<double> values(n);
  EnumerationOptions eo;
  eo.node_cap = o.caps.nodes;
  parallel_for(n, [&](std::size_t i) {
    Rng rng(derive_seed(o.seed, i));
    params[i] = draw_3sat_params(f, rng);
    values[i] = enumerate_classical(build_3sat_protocol(f, params[i]), eo).value;
  });
  json samples = json::array();
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    samples.push_back({{"p", params[i].p}, {"r", params[i].r}, {"value", values[i]}});
    total += values[i];
  }
  r["mode"] = "soundness";
  r["samples"] = samples;
  r["aggregate"] = total / double(n);
  r["collision_bound"] = fingerprint_collision_bound(enc.b, enc.ell);
  if (f.num_vars <= 24) r["satisfiable"] = satisfiable(f);
  return kOk;
}

// ---- sac1 ----------------------------------------------------------------

struct Sac1Args {
  std::string circuit;
  std::string input;
};

int cmd_sac1(const Sac1Args& a, const Options& o, json& r) {
  Sac1Circuit c;
  try {
    c = sac1_from_json(parse_json_text(read_text_file(a.circuit)));
    validate_sac1(c);
  } catch (const ValidationError& e) {
    throw ParseError(e.what());
  }
  std::vector<bool> x;
  for (char ch : a.input) {
    if (ch != '0' && ch != '1') throw ParseError("input must be a string of 0 and 1");
    x.push_back(ch == '1');
  }
  if (int(x.size()) != c.num_inputs)
    throw ParseError(fmt::format("input has {} bits, circuit expects {}", x.size(), c.num_inputs));
  const Rational g = sac1_game_value(c, x);
  EnumerationOptions eo;
  eo.node_cap = o.caps.nodes;
  const auto en = enumerate_classical(build_sac1_protocol(c, x), eo);
  const Rational e = make_rational(en.accepted_weight, en.total_weight);
  r["depth"] = c.depth();
  r["evaluates_to"] = sac1_evaluate(c, x);
  r["game_value"] = {{"num", g.num}, {"den", g.den}, {"value", g.value()}};
  r["enumerated"] = {{"num", e.num}, {"den", e.den}, {"value", e.value()}, {"exact", en.exact}};
  r["match"] = g == e;
  return g == Rational{1, 1} ? kOk : kNo;
}

// ---- statetest -------------------------------------------------------------

struct StateArgs {
  std::string instance;
  double floor = 1e-3;
};

int cmd_statetest(const StateArgs& a, const Options& o, json& r) {
  const IndivProdInstance inst = instance_from_json(parse_json_text(read_text_file(a.instance)));
  const auto d = decide_indivprod(inst, a.floor);
  const auto b = product_distance_bounds(inst, o.caps.dim);
  r["verdict"] = to_string(d.verdict);
  r["witness"] = d.witness >= 0 ? json(d.witness + 1) : json(nullptr);
  r["distances"] = d.distances;
  r["report"] = d.report;
  r["product_distance"] = {{"lower", b.lower},
                           {"upper", b.upper},
                           {"exact", b.exact ? json(*b.exact) : json(nullptr)}};
  switch (d.verdict) {
    case Verdict::Yes: return kOk;
    case Verdict::No: return kNo;
    case Verdict::PromiseViolation: break;
  }
  return kPromiseViolation;
}

// ---- witness -------------------------------------------------------------

struct WitnessArgs {
  std::string verifier;
  std::string witness;
  std::string extract_u;
  std::string save;
  std::optional<double> c;
};

int cmd_witness(const WitnessArgs& a, const Options& o, json& r) {
  const VerifierSpec v = load_verifier(a.verifier, o.caps);
  WitnessFile w;
  if (!a.extract_u.empty() || a.witness.empty()) {
    w.u = a.extract_u;
    const SdpSolution sol = solve(build_second_sdp(v, w.u));
    w.blocks = sol.blocks;
    w.c = a.c.value_or(sol.objective_value);
    r["extracted"] = {{"u", w.u}, {"objective", sol.objective_value}, {"dual", sol.dual_value}};
    if (!a.save.empty()) {
      std::ofstream f(a.save);
      if (!f) throw ParseError(fmt::format("cannot write '{}'", a.save));
      f << witness_to_json(w).dump(2) << '\n';
    }
  } else {
    w = witness_from_json(parse_json_text(read_text_file(a.witness)));
    if (a.c) w.c = *a.c;
  }
  const WitnessVerdict verdict = check_np_witness(v, w.u, w.blocks, w.c);
  r["u"] = w.u;
  r["c"] = w.c;
  r["accepted"] = verdict.accepted;
  r["reason"] = verdict.reason;
  r["max_residual"] = verdict.max_residual;
  r["objective"] = verdict.objective;
  return verdict.accepted ? kOk : kNo;
}

void emit(const json& report, const Options& o, std::ostream& out) {
  const std::string text = report.dump(2);
  if (o.out_path.empty()) {
    out << text << '\n';
    return;
  }
  std::ofstream f(o.out_path);
  if (!f) throw ParseError(fmt::format("cannot write '{}'", o.out_path));
  f << text << '\n';
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Space-bounded quantum interactive proof laboratory", "qipl-lab"};
  app.require_subcommand(1);
  Options o;
  app.add_option("--seed", o.seed, "seed for every random choice")->capture_default_str();
  app.add_option("--tol", o.tol, "agreement tolerance")->capture_default_str();
  app.add_option("--caps", o.caps_text, "caps as key=value list: register, dim, nodes, prover");
  app.add_option("--out", o.out_path, "write the report to this file instead of stdout");
  app.add_option("--format", o.format, "report format")->check(CLI::IsMember({"json"}));

  OmegaArgs oa;
  auto* omega = app.add_subcommand("omega", "SDP value of a verifier, bracketed by a see-saw prover");
  omega->add_option("verifier", oa.verifier, "verifier JSON")->required();
  omega->add_option("--restarts", oa.restarts)->check(CLI::PositiveNumber);
  omega->add_option("--iterations", oa.iterations)->check(CLI::PositiveNumber);

  TransformArgs ta;
  auto* transform = app.add_subcommand("transform", "apply a pipeline of verifier compilers");
  transform->add_option("verifier", ta.verifier, "verifier JSON")->required();
  transform->add_option("--stage", ta.stages, "name[:key=value,...], repeatable, applied in order");
  transform->add_option("--emit", ta.emit, "also write the final verifier JSON here");
  transform->add_flag("--skip-omega", ta.skip_omega, "do not solve the SDP per stage");

  SatArgs sa;
  auto* sat = app.add_subcommand("sat", "3-SAT protocol: honest run or soundness study");
  sat->add_option("formula", sa.formula, "DIMACS CNF file")->required();
  auto* assign = sat->add_option("--assignment", sa.assignment, "0/1 string, one per variable");
  auto* sound = sat->add_option("--soundness", sa.soundness, "number of sampled (p, r)");
  assign->excludes(sound);

  Sac1Args ca;
  auto* sac1 = app.add_subcommand("sac1", "SAC1 game value and protocol enumeration");
  sac1->add_option("circuit", ca.circuit, "circuit JSON")->required();
  sac1->add_option("--input", ca.input, "0/1 string")->required();

  StateArgs st;
  auto* statetest = app.add_subcommand("statetest", "decide an IndivProdQSD instance exactly");
  statetest->add_option("instance", st.instance, "instance JSON")->required();
  statetest->add_option("--floor", st.floor, "promise floor for alpha - delta k");

  WitnessArgs wa;
  auto* witness = app.add_subcommand("witness", "check (or extract and check) a branch-program witness");
  witness->add_option("verifier", wa.verifier, "verifier JSON")->required();
  witness->add_option("witness", wa.witness, "witness JSON");
  witness->add_option("--extract-u", wa.extract_u, "solve the branch program for outcome string u");
  witness->add_option("--save", wa.save, "where to write the extracted witness");
  witness->add_option("--c", wa.c, "acceptance threshold");

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kInputError;
  }

  CLI::App* sub = app.get_subcommands().front();
  json report = base_report(sub->get_name(), o);
  int code = kOk;
  try {
    if (!o.caps_text.empty()) o.caps = parse_caps(o.caps_text);
    report = base_report(sub->get_name(), o);
    if (sub == omega) code = cmd_omega(oa, o, report);
    else if (sub == transform) code = cmd_transform(ta, o, report);
    else if (sub == sat) code = cmd_sat(sa, o, report);
    else if (sub == sac1) code = cmd_sac1(ca, o, report);
    else if (sub == statetest) code = cmd_statetest(st, o, report);
    else code = cmd_witness(wa, o, report);
  } catch (const StageFailure& f) {
    report["error"] = {{"type", "shape"}, {"stage", f.index}, {"stage_name", f.name}, {"message", f.message}};
    err << fmt::format("stage {} ({}): {}\n", f.index + 1, f.name, f.message);
    code = kShapeViolation;
  } catch (const Error& e) {
    report["error"] = {{"type", "input"}, {"message", e.what()}};
    err << "error: " << e.what() << '\n';
    code = kInputError;
  } catch (const std::exception& e) {
    report["error"] = {{"type", "internal"}, {"message", e.what()}};
    err << "error: " << e.what() << '\n';
    code = kInputError;
  }
  report["exit_code"] = code;
  try {
    emit(report, o, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  }
  return code;
}

}  // namespace qipl::cli
