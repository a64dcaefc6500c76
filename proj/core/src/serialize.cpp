#include "qipl/serialize.hpp"

#include <fmt/format.h>

#include <fstream>
#include <map>
#include <sstream>

#include "qipl/errors.hpp"
#include "qipl/transforms.hpp"

namespace qipl {

namespace {

const json& field(const json& j, const char* key) {
  if (!j.is_object()) throw ParseError(fmt::format("expected an object holding '{}'", key));
  const auto it = j.find(key);
  if (it == j.end()) throw ParseError(fmt::format("missing field '{}'", key));
  return *it;
}

template <class T>
T get(const json& j, const char* key) {
  try {
    return field(j, key).get<T>();
  } catch (const json::exception& e) {
    throw ParseError(fmt::format("field '{}': {}", key, e.what()));
  }
}

template <class T>
T get_or(const json& j, const char* key, T fallback) {
  return j.is_object() && j.contains(key) ? get<T>(j, key) : fallback;
}

const std::map<std::string, GateKind> kGateNames{
    {"H", GateKind::H},       {"T", GateKind::T},         {"CNOT", GateKind::CNOT},
    {"SWAP", GateKind::SWAP}, {"RAW", GateKind::Raw},     {"MEASURE", GateKind::Measure},
    {"ANCILLA", GateKind::Ancilla}};

const char* gate_name(GateKind k) {
  for (const auto& [name, kind] : kGateNames)
    if (kind == k) return name.c_str();
  return "?";
}

const char* action_name(ActionKind k) {
  switch (k) {
    case ActionKind::Unitary: return "unitary";
    case ActionKind::AlmostUnitary: return "almost_unitary";
    case ActionKind::Isometric: return "isometric";
  }
  return "?";
}

}  // namespace

json matrix_to_json(const ComplexMatrix& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back({m(r, c).real(), m(r, c).imag()});
    rows.push_back(std::move(row));
  }
  return rows;
}

ComplexMatrix matrix_from_json(const json& j) {
  if (!j.is_array() || j.empty() || !j[0].is_array())
    throw ParseError("matrix must be a non-empty array of rows");
  const auto rows = Eigen::Index(j.size()), cols = Eigen::Index(j[0].size());
  ComplexMatrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const json& row = j[std::size_t(r)];
    if (!row.is_array() || Eigen::Index(row.size()) != cols)
      throw ParseError(fmt::format("matrix row {} has the wrong length", r));
    for (Eigen::Index c = 0; c < cols; ++c) {
      const json& e = row[std::size_t(c)];
      if (e.is_number()) {
        m(r, c) = e.get<double>();
      } else if (e.is_array() && e.size() == 2 && e[0].is_number() && e[1].is_number()) {
        m(r, c) = cplx(e[0].get<double>(), e[1].get<double>());
      } else {
        throw ParseError(fmt::format("matrix entry ({}, {}) is not a number or [re, im]", r, c));
      }
    }
  }
  return m;
}

json gate_to_json(const Gate& g) {
  json j{{"kind", gate_name(g.kind)}, {"wires", g.wires}};
  if (g.kind == GateKind::Raw) j["matrix"] = matrix_to_json(g.matrix);
  return j;
}

Gate gate_from_json(const json& j) {
  const auto kind = get<std::string>(j, "kind");
  const auto wires = get_or<std::vector<int>>(j, "wires", {});
  if (kind == "X") return Gate::raw(Gate::x(0).matrix, wires);
  if (kind == "RY") return Gate::raw(ry_matrix(get<double>(j, "theta")), wires);
  const auto it = kGateNames.find(kind);
  if (it == kGateNames.end()) throw ParseError(fmt::format("unknown gate kind '{}'", kind));
  Gate g{it->second, wires, {}};
  if (g.kind == GateKind::Raw) g.matrix = matrix_from_json(field(j, "matrix"));
  return g;
}

json action_to_json(const CircuitAction& a) {
  json gates = json::array();
  for (const auto& g : a.gates) gates.push_back(gate_to_json(g));
  return {{"kind", action_name(a.kind)}, {"in_qubits", a.in_qubits}, {"gates", gates}};
}

CircuitAction action_from_json(const json& j) {
  CircuitAction a;
  const auto kind = get_or<std::string>(j, "kind", "unitary");
  if (kind == "unitary") a.kind = ActionKind::Unitary;
  else if (kind == "almost_unitary") a.kind = ActionKind::AlmostUnitary;
  else if (kind == "isometric") a.kind = ActionKind::Isometric;
  else throw ParseError(fmt::format("unknown action kind '{}'", kind));
  a.in_qubits = get<int>(j, "in_qubits");
  const json& gates = field(j, "gates");
  if (!gates.is_array()) throw ParseError("'gates' must be an array");
  for (std::size_t i = 0; i < gates.size(); ++i) {
    try {
      a.gates.push_back(gate_from_json(gates[i]));
    } catch (const ParseError& e) {
      throw ParseError(fmt::format("gate {}: {}", i, e.what()));
    }
  }
  try {
    validate_action(a);
  } catch (const ValidationError& e) {
    throw ParseError(e.what());
  }
  return a;
}

json verifier_to_json(const VerifierSpec& v) {
  json actions = json::array();
  for (const auto& a : v.actions) actions.push_back(action_to_json(a));
  json prov = json::array();
  for (const auto& p : v.provenance)
    prov.push_back({{"transform", p.transform}, {"params", p.params}, {"input_hash", p.input_hash}});
  return {{"schema", "qipl.verifier/1"},
          {"q_M", v.q_M},
          {"q_W", v.q_W},
          {"output_qubit", v.output_qubit},
          {"starts_with", v.starts_with == StartsWith::Prover ? "prover" : "verifier"},
          {"actions", actions},
          {"provenance", prov}};
}

VerifierSpec verifier_from_json(const json& j) {
  VerifierSpec v;
  v.q_M = get<int>(j, "q_M");
  v.q_W = get<int>(j, "q_W");
  v.output_qubit = get<int>(j, "output_qubit");
  const auto sw = get_or<std::string>(j, "starts_with", "verifier");
  if (sw != "verifier" && sw != "prover")
    throw ParseError(fmt::format("starts_with must be 'verifier' or 'prover', got '{}'", sw));
  v.starts_with = sw == "prover" ? StartsWith::Prover : StartsWith::Verifier;
  const json& acts = field(j, "actions");
  if (!acts.is_array()) throw ParseError("'actions' must be an array");
  for (std::size_t i = 0; i < acts.size(); ++i) {
    try {
      v.actions.push_back(action_from_json(acts[i]));
    } catch (const ParseError& e) {
      throw ParseError(fmt::format("action {}: {}", i + 1, e.what()));
    }
  }
  if (j.contains("provenance"))
    for (const auto& p : field(j, "provenance"))
      v.provenance.push_back({get<std::string>(p, "transform"), get<std::string>(p, "params"),
                              get<std::string>(p, "input_hash")});
  return v;
}

json strategy_to_json(const ProverStrategy& p) {
  json acts = json::array();
  for (const auto& a : p.actions) acts.push_back(matrix_to_json(a));
  return {{"schema", "qipl.strategy/1"}, {"q_Q", p.q_Q}, {"actions", acts}};
}

ProverStrategy strategy_from_json(const json& j) {
  ProverStrategy p;
  p.q_Q = get<int>(j, "q_Q");
  for (const auto& a : field(j, "actions")) p.actions.push_back(matrix_from_json(a));
  return p;
}

json sac1_to_json(const Sac1Circuit& c) {
  json gates = json::array();
  for (std::size_t i = 0; i < c.gates.size(); ++i) {
    const Sac1Gate& g = c.gates[i];
    json e{{"id", int(i)}};
    if (g.kind == Sac1Kind::Input) {
      e["kind"] = "input";
      e["literal"] = g.negated ? -g.var : g.var;
    } else {
      e["kind"] = g.kind == Sac1Kind::Or ? "or" : "and";
      e["children"] = g.children;
    }
    gates.push_back(std::move(e));
  }
  return {{"num_inputs", c.num_inputs}, {"output", c.output}, {"gates", gates}};
}

Sac1Circuit sac1_from_json(const json& j) {
  Sac1Circuit c;
  c.num_inputs = get<int>(j, "num_inputs");
  const json& gates = field(j, "gates");
  if (!gates.is_array()) throw ParseError("'gates' must be an array");
  std::map<int, int> index;
  for (const auto& g : gates) {
    const int id = get<int>(g, "id");
    if (!index.emplace(id, int(index.size())).second)
      throw ParseError(fmt::format("duplicate gate id {}", id));
  }
  auto lookup = [&](int id) {
    const auto it = index.find(id);
    if (it == index.end()) throw ParseError(fmt::format("unknown gate id {}", id));
    return it->second;
  };
  for (const auto& g : gates) {
    Sac1Gate out;
    const auto kind = get<std::string>(g, "kind");
    if (kind == "input") {
      const int lit = get<int>(g, "literal");
      if (lit == 0) throw ParseError("input literal 0 is not allowed");
      out.kind = Sac1Kind::Input;
      out.var = std::abs(lit);
      out.negated = lit < 0;
    } else if (kind == "or" || kind == "and") {
      out.kind = kind == "or" ? Sac1Kind::Or : Sac1Kind::And;
      for (int ch : get<std::vector<int>>(g, "children")) out.children.push_back(lookup(ch));
    } else {
      throw ParseError(fmt::format("unknown SAC1 gate kind '{}'", kind));
    }
    c.gates.push_back(std::move(out));
  }
  c.output = lookup(get<int>(j, "output"));
  return c;
}

json prep_to_json(const StatePrepCircuit& c) {
  return {{"circuit", action_to_json(c.circuit)}, {"outputs", c.outputs}};
}

StatePrepCircuit prep_from_json(const json& j) {
  StatePrepCircuit c;
  c.circuit = action_from_json(field(j, "circuit"));
  c.outputs = get<std::vector<int>>(j, "outputs");
  return c;
}

json instance_to_json(const IndivProdInstance& inst) {
  json pairs = json::array();
  for (const auto& [q, qp] : inst.pairs) pairs.push_back({{"Q", prep_to_json(q)}, {"Qp", prep_to_json(qp)}});
  return {{"schema", "qipl.indivprod/1"},
          {"k", inst.k},
          {"alpha", inst.alpha},
          {"delta", inst.delta},
          {"pairs", pairs}};
}

IndivProdInstance instance_from_json(const json& j) {
  IndivProdInstance inst;
  inst.k = get<int>(j, "k");
  inst.alpha = get<double>(j, "alpha");
  inst.delta = get<double>(j, "delta");
  const json& pairs = field(j, "pairs");
  if (!pairs.is_array()) throw ParseError("'pairs' must be an array");
  for (const auto& p : pairs)
    inst.pairs.emplace_back(prep_from_json(field(p, "Q")), prep_from_json(field(p, "Qp")));
  return inst;
}

json witness_to_json(const WitnessFile& w) {
  json blocks = json::array();
  for (const auto& b : w.blocks) blocks.push_back(matrix_to_json(b));
  return {{"schema", "qipl.witness/1"}, {"u", w.u}, {"c", w.c}, {"blocks", blocks}};
}

WitnessFile witness_from_json(const json& j) {
  WitnessFile w;
  w.u = get_or<std::string>(j, "u", "");
  w.c = get<double>(j, "c");
  for (const auto& b : field(j, "blocks")) w.blocks.push_back(matrix_from_json(b));
  return w;
}

json sdp_program_to_json(const SdpProgram& p) {
  auto terms = [](const std::vector<SdpTerm>& ts) {
    json out = json::array();
    for (const auto& t : ts) out.push_back({{"block", t.block}, {"coeff", matrix_to_json(t.coeff)}});
    return out;
  };
  json blocks = json::array();
  for (const auto& b : p.blocks) {
    json e{{"name", b.name}, {"dim", b.dim}, {"qubit_dims", b.qubit_dims}};
    if (b.face) e["face"] = matrix_to_json(*b.face);
    blocks.push_back(std::move(e));
  }
  json cons = json::array();
  for (const auto& c : p.constraints)
    cons.push_back({{"label", c.label}, {"rhs", {c.rhs.real(), c.rhs.imag()}}, {"terms", terms(c.terms)}});
  return {{"schema", "qipl.sdp/1"},
          {"blocks", blocks},
          {"objective", terms(p.objective)},
          {"objective_offset", p.objective_offset},
          {"constraints", cons}};
}

SdpProgram sdp_program_from_json(const json& j) {
  auto terms = [](const json& arr) {
    std::vector<SdpTerm> out;
    for (const auto& t : arr) out.push_back({get<int>(t, "block"), matrix_from_json(field(t, "coeff"))});
    return out;
  };
  SdpProgram p;
  for (const auto& b : field(j, "blocks")) {
    SdpBlock blk;
    blk.name = get<std::string>(b, "name");
    blk.dim = get<int>(b, "dim");
    blk.qubit_dims = get<std::vector<int>>(b, "qubit_dims");
    if (b.contains("face")) blk.face = matrix_from_json(field(b, "face"));
    p.blocks.push_back(std::move(blk));
  }
  p.objective = terms(field(j, "objective"));
  p.objective_offset = get_or<double>(j, "objective_offset", 0.0);
  for (const auto& c : field(j, "constraints")) {
    const auto rhs = get<std::vector<double>>(c, "rhs");
    if (rhs.size() != 2) throw ParseError("constraint rhs must be [re, im]");
    p.constraints.push_back({terms(field(c, "terms")), cplx(rhs[0], rhs[1]), get<std::string>(c, "label")});
  }
  try {
    p.validate();
  } catch (const ArgumentError& e) {
    throw ParseError(e.what());
  }
  return p;
}

json parse_json_text(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(fmt::format("invalid JSON: {}", e.what()));
  }
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(fmt::format("cannot open '{}'", path));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string spec_hash(const VerifierSpec& v) {
  return fmt::format("{:016x}", fnv1a64(verifier_to_json(v).dump()));
}

}  // namespace qipl
