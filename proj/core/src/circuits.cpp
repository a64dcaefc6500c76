#include "qipl/circuits.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

namespace qipl {

namespace {

ComplexMatrix mat2(cplx a, cplx b, cplx c, cplx d) {
  ComplexMatrix m(2, 2);
  m << a, b, c, d;
  return m;
}

// Offsets of the 2^k basis values of `wires` inside an n-qubit index, and the
// list of base indices with all of those bits cleared.
struct WireLayout {
  std::vector<Eigen::Index> offsets;
  std::vector<Eigen::Index> bases;
};

WireLayout layout(int n, const std::vector<int>& wires) {
  WireLayout out;
  const int k = int(wires.size());
  Eigen::Index mask = 0;
  for (int w : wires) {
    if (w < 0 || w >= n) throw ArgumentError(fmt::format("wire {} out of range [0,{})", w, n));
    const Eigen::Index bit = Eigen::Index{1} << (n - 1 - w);
    if (mask & bit) throw ArgumentError(fmt::format("wire {} repeated", w));
    mask |= bit;
  }
  out.offsets.resize(std::size_t{1} << k);
  for (std::size_t x = 0; x < out.offsets.size(); ++x) {
    Eigen::Index off = 0;
    for (int i = 0; i < k; ++i)
      if ((x >> (k - 1 - i)) & 1) off |= Eigen::Index{1} << (n - 1 - wires[std::size_t(i)]);
    out.offsets[x] = off;
  }
  const Eigen::Index full = Eigen::Index{1} << n;
  out.bases.reserve(std::size_t(full >> k));
  for (Eigen::Index i = 0; i < full; ++i)
    if ((i & mask) == 0) out.bases.push_back(i);
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Gates

Gate Gate::h(int w) { return Gate{GateKind::H, {w}, {}}; }
Gate Gate::t(int w) { return Gate{GateKind::T, {w}, {}}; }
Gate Gate::x(int w) { return raw(mat2(0, 1, 1, 0), {w}); }
Gate Gate::cnot(int c, int t) { return Gate{GateKind::CNOT, {c, t}, {}}; }
Gate Gate::swap(int a, int b) { return Gate{GateKind::SWAP, {a, b}, {}}; }
Gate Gate::raw(ComplexMatrix u, std::vector<int> wires) {
  return Gate{GateKind::Raw, std::move(wires), std::move(u)};
}
Gate Gate::measure(int w) { return Gate{GateKind::Measure, {w}, {}}; }
Gate Gate::ancilla() { return Gate{GateKind::Ancilla, {}, {}}; }

ComplexMatrix Gate::unitary() const {
  const double r = 1.0 / std::sqrt(2.0);
  switch (kind) {
    case GateKind::H:
      return mat2(r, r, r, -r);
    case GateKind::T:
      return mat2(1, 0, 0, std::polar(1.0, std::numbers::pi / 4));
    case GateKind::CNOT: {
      ComplexMatrix m = ComplexMatrix::Zero(4, 4);
      m(0, 0) = m(1, 1) = m(2, 3) = m(3, 2) = 1;
      return m;
    }
    case GateKind::SWAP: {
      ComplexMatrix m = ComplexMatrix::Zero(4, 4);
      m(0, 0) = m(1, 2) = m(2, 1) = m(3, 3) = 1;
      return m;
    }
    case GateKind::Raw:
      return matrix;
    case GateKind::Measure:
    case GateKind::Ancilla:
      break;
  }
  throw ArgumentError("measure and ancilla gates have no unitary matrix");
}

Gate adjoint(const Gate& g) {
  switch (g.kind) {
    case GateKind::H:
    case GateKind::CNOT:
    case GateKind::SWAP:
      return g;
    case GateKind::T:
    case GateKind::Raw:
      return Gate::raw(g.unitary().adjoint(), g.wires);
    default:
      throw ArgumentError("measure and ancilla gates are not invertible");
  }
}

Gate controlled(const Gate& g, int control) {
  if (g.kind == GateKind::Measure || g.kind == GateKind::Ancilla)
    throw ArgumentError("cannot control a measure or ancilla gate");
  if (g.wires.size() > 2)
    throw ArgumentError("controlled gate would act on more than three wires");
  const ComplexMatrix u = g.unitary();
  const Eigen::Index d = u.rows();
  ComplexMatrix m = ComplexMatrix::Identity(2 * d, 2 * d);
  m.block(d, d, d, d) = u;
  std::vector<int> wires{control};
  wires.insert(wires.end(), g.wires.begin(), g.wires.end());
  return Gate::raw(std::move(m), std::move(wires));
}

// ---------------------------------------------------------------------------
// Actions and verifiers

int CircuitAction::environment_qubits() const {
  int e = 0;
  for (const auto& g : gates)
    if (g.kind == GateKind::Measure || g.kind == GateKind::Ancilla) ++e;
  return e;
}

int CircuitAction::measure_count() const {
  int e = 0;
  for (const auto& g : gates)
    if (g.kind == GateKind::Measure) ++e;
  return e;
}

std::vector<int> CircuitAction::measured_wires() const {
  std::vector<int> out;
  if (kind != ActionKind::AlmostUnitary) return out;
  for (int e = 0; e < environment_qubits(); ++e) out.push_back(in_qubits + e);
  return out;
}

int VerifierSpec::turns() const {
  const int k = int(actions.size());
  if (k == 0) return 0;
  return starts_with == StartsWith::Verifier ? 2 * (k - 1) : 2 * (k - 1) + 1;
}

int VerifierSpec::prover_actions() const { return (turns() + 1) / 2; }

bool VerifierSpec::has_measurements() const {
  for (const auto& a : actions)
    if (a.measure_count() > 0) return true;
  return false;
}

void validate_action(const CircuitAction& action) {
  if (action.in_qubits < 0) throw ValidationError("negative in_qubits");
  int live = action.in_qubits;
  for (std::size_t gi = 0; gi < action.gates.size(); ++gi) {
    const Gate& g = action.gates[gi];
    auto fail = [&](const std::string& why) {
      throw ValidationError(fmt::format("gate {}: {}", gi, why));
    };
    std::set<int> distinct(g.wires.begin(), g.wires.end());
    if (distinct.size() != g.wires.size()) fail("repeated wire");
    for (int w : g.wires)
      if (w < 0 || w >= live) fail(fmt::format("wire {} not available", w));
    switch (g.kind) {
      case GateKind::H:
      case GateKind::T:
        if (g.wires.size() != 1) fail("single-qubit gate needs one wire");
        break;
      case GateKind::CNOT:
      case GateKind::SWAP:
        if (g.wires.size() != 2) fail("two-qubit gate needs two wires");
        break;
      case GateKind::Raw: {
        if (g.wires.empty() || g.wires.size() > 3) fail("raw gate must act on 1 to 3 wires");
        const Eigen::Index d = Eigen::Index{1} << g.wires.size();
        if (g.matrix.rows() != d || g.matrix.cols() != d) fail("raw gate matrix has wrong shape");
        if (!all_finite(g.matrix) || !is_unitary(g.matrix, tol::structural))
          fail("raw gate matrix is not unitary");
        break;
      }
      case GateKind::Measure:
        if (g.wires.size() != 1) fail("measure names exactly one wire");
        if (action.kind == ActionKind::Unitary) fail("measure gate in a unitary action");
        ++live;
        break;
      case GateKind::Ancilla:
        if (!g.wires.empty()) fail("ancilla gate names no wire");
        if (action.kind != ActionKind::Isometric) fail("ancilla gate outside an isometric action");
        ++live;
        break;
    }
  }
}

std::vector<std::string> validate_verifier(const VerifierSpec& spec,
                                           const SizeCaps& caps) {
  std::vector<std::string> v;
  if (spec.q_M < 0 || spec.q_W < 0) v.push_back("negative register size");
  if (spec.register_qubits() > caps.max_register_qubits)
    v.push_back(fmt::format("q_M+q_W = {} exceeds cap {}", spec.register_qubits(),
                            caps.max_register_qubits));
  if (spec.actions.empty()) v.push_back("verifier has no actions");
  if (spec.turns() > caps.max_turns)
    v.push_back(fmt::format("{} turns exceed cap {}", spec.turns(), caps.max_turns));
  if (spec.output_qubit < 0 || spec.output_qubit >= spec.register_qubits())
    v.push_back(fmt::format("output qubit {} outside (M,W)", spec.output_qubit));
  for (std::size_t j = 0; j < spec.actions.size(); ++j) {
    const auto& a = spec.actions[j];
    if (a.in_qubits != spec.register_qubits())
      v.push_back(fmt::format("action {}: in_qubits {} != q_M+q_W = {}", j + 1,
                              a.in_qubits, spec.register_qubits()));
    if (a.kind == ActionKind::AlmostUnitary && a.measure_count() > caps.measure_cap)
      v.push_back(fmt::format("action {}: {} measurements exceed cap {}", j + 1,
                              a.measure_count(), caps.measure_cap));
    try {
      validate_action(a);
    } catch (const ValidationError& e) {
      v.push_back(fmt::format("action {}: {}", j + 1, e.what()));
    }
  }
  return v;
}

ComplexMatrix to_isometry(const CircuitAction& action) {
  validate_action(action);
  const int a = action.in_qubits;
  const int n = action.total_qubits();
  const Eigen::Index din = Eigen::Index{1} << a;
  const Eigen::Index dout = Eigen::Index{1} << n;
  ComplexMatrix v(dout, din);
  // Precompute gate matrices once; Measure becomes a CNOT onto its fresh wire.
  std::vector<std::pair<ComplexMatrix, std::vector<int>>> ops;
  int fresh = a;
  const ComplexMatrix cx = Gate::cnot(0, 1).unitary();
  for (const auto& g : action.gates) {
    if (g.kind == GateKind::Ancilla) {
      ++fresh;
    } else if (g.kind == GateKind::Measure) {
      ops.emplace_back(cx, std::vector<int>{g.wires[0], fresh++});
    } else {
      ops.emplace_back(g.unitary(), g.wires);
    }
  }
  for (Eigen::Index x = 0; x < din; ++x) {
    ComplexVector psi = ComplexVector::Zero(dout);
    psi(x << (n - a)) = 1.0;
    for (const auto& [u, w] : ops) apply_operator(psi, n, u, w);
    v.col(x) = psi;
  }
  return v;
}

VerifierSpec isometric_lift(const VerifierSpec& spec) {
  VerifierSpec out = spec;
  for (auto& a : out.actions)
    if (a.kind == ActionKind::AlmostUnitary) a.kind = ActionKind::Isometric;
  return out;
}

ProverStrategy identity_prover(const VerifierSpec& spec, int q_Q) {
  ProverStrategy p;
  p.q_Q = q_Q;
  const auto d = std::size_t{1} << (q_Q + spec.q_M);
  p.actions.assign(std::size_t(spec.prover_actions()), identity(d));
  return p;
}

int outcome_length(const VerifierSpec& verifier) {
  int len = 0;
  for (std::size_t j = 0; j + 1 < verifier.actions.size(); ++j)
    len += int(verifier.actions[j].measured_wires().size());
  return len;
}

// ---------------------------------------------------------------------------
// Protocol simulation

namespace {

void check_compatible(const VerifierSpec& v, const ProverStrategy& p) {
  const auto bad = validate_verifier(v, SizeCaps{64, 1 << 20, 1 << 20});
  if (!bad.empty()) throw CompatibilityError("invalid verifier: " + bad.front());
  if (p.q_Q < 0) throw CompatibilityError("negative prover register");
  if (int(p.actions.size()) != v.prover_actions())
    throw CompatibilityError(fmt::format("prover has {} actions, protocol needs {}",
                                         p.actions.size(), v.prover_actions()));
  const Eigen::Index d = Eigen::Index{1} << (p.q_Q + v.q_M);
  for (std::size_t j = 0; j < p.actions.size(); ++j) {
    if (p.actions[j].rows() != d || p.actions[j].cols() != d)
      throw CompatibilityError(fmt::format("prover action {} has shape {}x{}, expected {}",
                                           j + 1, p.actions[j].rows(),
                                           p.actions[j].cols(), d));
    if (!is_unitary(p.actions[j], 1e-8))
      throw CompatibilityError(fmt::format("prover action {} is not unitary", j + 1));
  }
}

struct SimResult {
  std::map<std::string, Branch> branches;
  double acceptance = 0.0;
};

SimResult simulate(const VerifierSpec& v, const ProverStrategy& p) {
  check_compatible(v, p);
  const int qQ = p.q_Q;
  int n = qQ + v.q_M + v.q_W;
  const auto prover_wires = wire_range(0, qQ + v.q_M);
  const auto mw_wires = wire_range(qQ, v.q_M + v.q_W);

  std::map<std::string, ComplexVector> branches;
  {
    ComplexVector init = ComplexVector::Zero(Eigen::Index{1} << n);
    init(0) = 1.0;
    branches.emplace("", std::move(init));
  }

  const std::size_t nv = v.actions.size();
  std::size_t next_prover = 0;
  auto prover_step = [&] {
    for (auto& [key, psi] : branches)
      apply_operator(psi, n, p.actions[next_prover], prover_wires);
    ++next_prover;
  };

  SimResult result;
  for (std::size_t j = 0; j < nv; ++j) {
    if (v.starts_with == StartsWith::Prover) prover_step();
    const CircuitAction& act = v.actions[j];
    const ComplexMatrix iso = to_isometry(act);
    const int e = act.environment_qubits();
    const bool last = (j + 1 == nv);
    std::map<std::string, ComplexVector> next;
    for (auto& [key, psi] : branches) {
      ComplexVector out = apply_isometry(psi, n, iso, mw_wires, e);
      if (act.kind == ActionKind::AlmostUnitary && !last && e > 0) {
        for (std::uint64_t o = 0; o < (std::uint64_t{1} << e); ++o) {
          std::string k = key;
          for (int b = e - 1; b >= 0; --b) k.push_back(((o >> b) & 1) ? '1' : '0');
          next.emplace(std::move(k), project_tail(out, e, o));
        }
      } else {
        next.emplace(key, std::move(out));
      }
    }
    branches = std::move(next);
    const bool live = !(act.kind == ActionKind::AlmostUnitary && !last);
    if (live) n += e;
    if (!last && v.starts_with == StartsWith::Verifier) prover_step();
  }

  const int out_wire = qQ + v.output_qubit;
  for (const auto& [key, psi] : branches) {
    Branch b;
    b.probability = psi.squaredNorm();
    const double joint = probability_one(psi, n, out_wire);
    b.conditional_acceptance = b.probability > 0 ? std::clamp(joint / b.probability, 0.0, 1.0) : 0.0;
    result.acceptance += joint;
    result.branches.emplace(key, b);
  }
  result.acceptance = std::clamp(result.acceptance, 0.0, 1.0);
  return result;
}

}  // namespace

double run_protocol(const VerifierSpec& verifier, const ProverStrategy& prover) {
  return simulate(verifier, prover).acceptance;
}

std::map<std::string, Branch> branch_probabilities(const VerifierSpec& verifier,
                                                   const ProverStrategy& prover) {
  return simulate(verifier, prover).branches;
}

// ---------------------------------------------------------------------------
// Kernels

std::vector<int> wire_range(int first, int count) {
  std::vector<int> w(std::size_t(std::max(0, count)));
  for (int i = 0; i < count; ++i) w[std::size_t(i)] = first + i;
  return w;
}

void apply_operator(ComplexVector& psi, int n, const ComplexMatrix& u,
                    const std::vector<int>& wires) {
  if (wires.empty()) {
    if (u.rows() == 1) psi *= u(0, 0);
    return;
  }
  const WireLayout lay = layout(n, wires);
  const Eigen::Index d = Eigen::Index(lay.offsets.size());
  if (u.rows() != d || u.cols() != d)
    throw ArgumentError("apply_operator: matrix does not match wire count");
  ComplexVector g(d), h(d);
  for (Eigen::Index base : lay.bases) {
    for (Eigen::Index x = 0; x < d; ++x) g(x) = psi(base + lay.offsets[std::size_t(x)]);
    h.noalias() = u * g;
    for (Eigen::Index x = 0; x < d; ++x) psi(base + lay.offsets[std::size_t(x)]) = h(x);
  }
}

ComplexVector apply_isometry(const ComplexVector& psi, int n, const ComplexMatrix& v,
                             const std::vector<int>& wires, int k) {
  const WireLayout lay = layout(n, wires);
  const Eigen::Index din = Eigen::Index(lay.offsets.size());
  const Eigen::Index de = Eigen::Index{1} << k;
  if (v.cols() != din || v.rows() != din * de)
    throw ArgumentError("apply_isometry: matrix does not match wire counts");
  if (psi.size() != (Eigen::Index{1} << n))
    throw ArgumentError("apply_isometry: state length mismatch");
  ComplexVector out = ComplexVector::Zero(psi.size() * de);
  ComplexVector g(din), h(din * de);
  for (Eigen::Index base : lay.bases) {
    for (Eigen::Index x = 0; x < din; ++x) g(x) = psi(base + lay.offsets[std::size_t(x)]);
    h.noalias() = v * g;
    for (Eigen::Index y = 0; y < din; ++y) {
      const Eigen::Index hi = (base + lay.offsets[std::size_t(y)]) << k;
      for (Eigen::Index e = 0; e < de; ++e) out(hi | e) = h(y * de + e);
    }
  }
  return out;
}

ComplexVector apply_isometry_adjoint(const ComplexVector& psi, int n,
                                     const ComplexMatrix& v,
                                     const std::vector<int>& wires, int k) {
  const int m = n - k;
  const WireLayout lay = layout(m, wires);
  const Eigen::Index din = Eigen::Index(lay.offsets.size());
  const Eigen::Index de = Eigen::Index{1} << k;
  if (v.cols() != din || v.rows() != din * de)
    throw ArgumentError("apply_isometry_adjoint: matrix does not match wire counts");
  if (psi.size() != (Eigen::Index{1} << n))
    throw ArgumentError("apply_isometry_adjoint: state length mismatch");
  ComplexVector out = ComplexVector::Zero(Eigen::Index{1} << m);
  ComplexVector g(din * de), h(din);
  for (Eigen::Index base : lay.bases) {
    for (Eigen::Index y = 0; y < din; ++y) {
      const Eigen::Index hi = (base + lay.offsets[std::size_t(y)]) << k;
      for (Eigen::Index e = 0; e < de; ++e) g(y * de + e) = psi(hi | e);
    }
    h.noalias() = v.adjoint() * g;
    for (Eigen::Index x = 0; x < din; ++x) out(base + lay.offsets[std::size_t(x)]) = h(x);
  }
  return out;
}

ComplexVector project_tail(const ComplexVector& psi, int k, std::uint64_t outcome) {
  const Eigen::Index de = Eigen::Index{1} << k;
  const Eigen::Index m = psi.size() / de;
  ComplexVector out(m);
  for (Eigen::Index i = 0; i < m; ++i) out(i) = psi(i * de + Eigen::Index(outcome));
  return out;
}

double probability_one(const ComplexVector& psi, int n, int wire) {
  const Eigen::Index bit = Eigen::Index{1} << (n - 1 - wire);
  double p = 0.0;
  for (Eigen::Index i = 0; i < psi.size(); ++i)
    if (i & bit) p += std::norm(psi(i));
  return p;
}

}  // namespace qipl
