#include "qipl/statetest.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "qipl/errors.hpp"
#include "qipl/random.hpp"

namespace qipl {

namespace {

DensityMatrix reduced(const ComplexVector& psi, int n, const std::vector<int>& keep) {
  return DensityMatrix::from_clipped(reduced_outer(psi, psi, n, keep),
                                     std::vector<int>(keep.size(), 1), true);
}

void require_unitary_verifier_first(const VerifierSpec& v, const char* what) {
  const auto bad = validate_verifier(v, SizeCaps{64, 1 << 20, 1 << 20});
  if (!bad.empty()) throw ArgumentError(fmt::format("{}: {}", what, bad.front()));
  if (v.starts_with != StartsWith::Verifier)
    throw ArgumentError(fmt::format("{} needs a protocol that starts with the verifier", what));
  for (const auto& a : v.actions)
    if (a.kind != ActionKind::Unitary || a.environment_qubits() > 0)
      throw ArgumentError(fmt::format("{} needs a unitary verifier", what));
}

// Unitary whose first column is the unit vector v.
ComplexMatrix complete_unitary(const ComplexVector& v) {
  const ComplexMatrix col = v;
  const Eigen::HouseholderQR<ComplexMatrix> qr(col);
  ComplexMatrix q = qr.householderQ();
  const cplx r00 = qr.matrixQR()(0, 0);
  q.col(0) *= r00;
  return q;
}

std::vector<DensityMatrix> prepare_all(const std::vector<StatePrepCircuit>& cs) {
  std::vector<std::optional<DensityMatrix>> tmp(cs.size());
  parallel_for(cs.size(), [&](std::size_t i) { tmp[i] = prepare_state(cs[i]); });
  std::vector<DensityMatrix> out;
  for (auto& t : tmp) out.push_back(std::move(*t));
  return out;
}

}  // namespace

void validate_prep(const StatePrepCircuit& c) {
  if (c.circuit.kind != ActionKind::Unitary || c.circuit.environment_qubits() > 0)
    throw ValidationError("state preparation circuit must be unitary");
  validate_action(c.circuit);
  if (c.outputs.empty()) throw ValidationError("state preparation has no output wires");
  std::set<int> seen;
  for (int w : c.outputs) {
    if (w < 0 || w >= c.circuit.in_qubits)
      throw ValidationError(fmt::format("output wire {} outside [0, {})", w, c.circuit.in_qubits));
    if (!seen.insert(w).second) throw ValidationError(fmt::format("output wire {} repeated", w));
  }
}

DensityMatrix prepare_state(const StatePrepCircuit& c) {
  validate_prep(c);
  const ComplexVector psi = to_isometry(c.circuit).col(0);
  return reduced(psi, c.circuit.in_qubits, c.outputs);
}

StatePrepCircuit density_prep_circuit(const ComplexMatrix& rho) {
  const Eigen::Index d = rho.rows();
  if (d != rho.cols() || d < 2 || d > 8 || (d & (d - 1)))
    throw ArgumentError("density_prep_circuit handles 1 to 3 qubits");
  const int n = int(std::log2(double(d)) + 0.5);
  const auto eg = eig_hermitian(hermitian_part(rho));
  ComplexVector amp(d);
  for (Eigen::Index k = 0; k < d; ++k) amp(k) = std::sqrt(std::max(0.0, eg.values(k)));
  if (amp.norm() < 1e-12) throw ArgumentError("density matrix has no positive part");
  amp /= amp.norm();

  StatePrepCircuit c;
  c.circuit.in_qubits = 2 * n;
  c.circuit.gates.push_back(Gate::raw(complete_unitary(amp), wire_range(n, n)));
  for (int i = 0; i < n; ++i) c.circuit.gates.push_back(Gate::cnot(n + i, i));
  c.circuit.gates.push_back(Gate::raw(polar_unitary(eg.vectors), wire_range(0, n)));
  c.outputs = wire_range(0, n);
  return c;
}

void validate_instance(const IndivProdInstance& inst, double promise_floor) {
  if (inst.k < 1 || std::size_t(inst.k) != inst.pairs.size())
    throw ValidationError(fmt::format("k = {} but {} pairs given", inst.k, inst.pairs.size()));
  for (std::size_t j = 0; j < inst.pairs.size(); ++j) {
    validate_prep(inst.pairs[j].first);
    validate_prep(inst.pairs[j].second);
    if (inst.pairs[j].first.outputs.size() != inst.pairs[j].second.outputs.size())
      throw ValidationError(fmt::format("pair {} has mismatched output sizes", j + 1));
  }
  if (inst.alpha - inst.delta * inst.k < promise_floor)
    throw ValidationError(fmt::format("alpha - delta k = {:.3g} is below the promise floor {:.3g}",
                                      inst.alpha - inst.delta * inst.k, promise_floor));
}

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Yes: return "yes";
    case Verdict::No: return "no";
    case Verdict::PromiseViolation: return "promise-violation";
  }
  return "?";
}

namespace {

std::vector<double> pair_distances(const IndivProdInstance& inst) {
  std::vector<double> t(inst.pairs.size());
  parallel_for(t.size(), [&](std::size_t j) {
    t[j] = trace_distance(prepare_state(inst.pairs[j].first), prepare_state(inst.pairs[j].second));
  });
  return t;
}

}  // namespace

IndivProdDecision decide_indivprod(const IndivProdInstance& inst, double promise_floor) {
  validate_instance(inst, promise_floor);
  IndivProdDecision d;
  d.distances = pair_distances(inst);
  const double threshold = inst.alpha / inst.k;
  for (std::size_t j = 0; j < d.distances.size(); ++j)
    if (d.distances[j] >= threshold) {
      d.verdict = Verdict::Yes;
      d.witness = int(j);
      d.report = fmt::format("T_{} = {:.6g} >= alpha/k = {:.6g}", j + 1, d.distances[j], threshold);
      return d;
    }
  const double worst = *std::max_element(d.distances.begin(), d.distances.end());
  if (worst <= inst.delta) {
    d.verdict = Verdict::No;
    d.report = fmt::format("max_j T_j = {:.6g} <= delta = {:.6g}", worst, inst.delta);
    return d;
  }
  d.verdict = Verdict::PromiseViolation;
  d.report = fmt::format("neither condition holds (delta = {:.6g}, alpha/k = {:.6g}):", inst.delta,
                         threshold);
  for (std::size_t j = 0; j < d.distances.size(); ++j)
    d.report += fmt::format(" T_{}={:.6g}", j + 1, d.distances[j]);
  return d;
}

ProductDistanceBounds product_distance_bounds(const IndivProdInstance& inst,
                                              std::size_t dim_cap) {
  validate_instance(inst, -1e300);
  ProductDistanceBounds b;
  const auto t = pair_distances(inst);
  b.lower = *std::max_element(t.begin(), t.end());
  for (double x : t) b.upper += x;

  int qubits = 0;
  for (const auto& p : inst.pairs) qubits += int(p.first.outputs.size());
  if (qubits < 62 && (std::size_t{1} << qubits) <= dim_cap) {
    std::vector<ComplexMatrix> a, c;
    for (const auto& p : inst.pairs) {
      a.push_back(prepare_state(p.first).matrix());
      c.push_back(prepare_state(p.second).matrix());
    }
    const std::vector<int> dims(std::size_t(qubits), 1);
    b.exact = trace_distance(DensityMatrix::from_clipped(tensor(a), dims, true),
                             DensityMatrix::from_clipped(tensor(c), dims, true));
  }
  return b;
}

IndivProdInstance build_hardness_instance(const VerifierSpec& verifier,
                                          const std::vector<StatePrepCircuit>& simulator,
                                          const HardnessParams& params) {
  require_unitary_verifier_first(verifier, "hardness construction");
  const int l = int(verifier.actions.size()) - 1;
  if (l <= 1)
    throw ArgumentError(fmt::format("hardness construction needs l >= 2 prover turns, got {}", l));
  if (int(simulator.size()) != l + 1)
    throw ArgumentError(fmt::format("need {} simulator circuits, got {}", l + 1, simulator.size()));
  const int mw = verifier.register_qubits();
  for (const auto& s : simulator) {
    validate_prep(s);
    if (int(s.outputs.size()) != mw)
      throw CompatibilityError(fmt::format("simulator outputs {} wires, (M, W) has {}",
                                           s.outputs.size(), mw));
  }
  if (!(0.0 <= params.s && params.s < params.c && params.c <= 1.0))
    throw ParameterError("need 0 <= s < c <= 1");

  auto w_part = [&](const std::vector<int>& outs) {
    return std::vector<int>(outs.begin() + verifier.q_M, outs.end());
  };
  IndivProdInstance inst;
  inst.k = l;
  for (int j = 1; j <= l; ++j) {
    StatePrepCircuit q = simulator[std::size_t(j - 1)];
    for (Gate g : verifier.actions[std::size_t(j - 1)].gates) {
      for (int& w : g.wires) w = q.outputs[std::size_t(w)];
      q.circuit.gates.push_back(std::move(g));
    }
    q.outputs = w_part(q.outputs);
    StatePrepCircuit qp = simulator[std::size_t(j)];
    qp.outputs = w_part(qp.outputs);
    inst.pairs.emplace_back(std::move(q), std::move(qp));
  }
  const double gap = std::sqrt(params.c) - std::sqrt(params.s);
  inst.alpha = gap * gap / (4.0 * (l - 1));
  inst.delta = 2.0 * params.delta;
  return inst;
}

std::vector<DensityMatrix> protocol_snapshots(const VerifierSpec& verifier,
                                              const ProverStrategy& prover) {
  require_unitary_verifier_first(verifier, "snapshots");
  const int l = int(verifier.actions.size()) - 1;
  if (int(prover.actions.size()) != l)
    throw CompatibilityError(fmt::format("prover has {} actions, protocol needs {}",
                                         prover.actions.size(), l));
  const int qQ = prover.q_Q, mw = verifier.register_qubits();
  const int n = qQ + mw;
  const Eigen::Index dp = Eigen::Index{1} << (qQ + verifier.q_M);
  for (const auto& p : prover.actions)
    if (p.rows() != dp || p.cols() != dp || !is_unitary(p, 1e-8))
      throw CompatibilityError("prover action has the wrong shape or is not unitary");
  const auto mw_wires = wire_range(qQ, mw), pw = wire_range(0, qQ + verifier.q_M);

  ComplexVector psi = ComplexVector::Zero(Eigen::Index{1} << n);
  psi(0) = 1.0;
  std::vector<DensityMatrix> out;
  for (int j = 0; j < l; ++j) {
    apply_operator(psi, n, to_isometry(verifier.actions[std::size_t(j)]), mw_wires);
    out.push_back(reduced(psi, n, mw_wires));
    apply_operator(psi, n, prover.actions[std::size_t(j)], pw);
    out.push_back(reduced(psi, n, mw_wires));
  }
  return out;
}

ConsistencyReport check_simulator_consistency(const VerifierSpec& verifier,
                                              const std::vector<StatePrepCircuit>& simulator,
                                              const ProverStrategy& prover) {
  const auto truth = protocol_snapshots(verifier, prover);
  const int l = int(verifier.actions.size()) - 1;
  if (int(simulator.size()) != l + 1)
    throw CompatibilityError(fmt::format("need {} simulator circuits, got {}", l + 1,
                                         simulator.size()));
  const int mw = verifier.register_qubits();
  for (const auto& s : simulator)
    if (int(s.outputs.size()) != mw)
      throw CompatibilityError("simulator output size differs from (M, W)");
  const auto sim = prepare_all(simulator);
  const std::vector<int> dims(std::size_t(mw), 1);

  ConsistencyReport r;
  for (int j = 1; j <= l; ++j) {
    const ComplexMatrix u = to_isometry(verifier.actions[std::size_t(j - 1)]);
    const DensityMatrix xi = DensityMatrix::from_clipped(
        u * sim[std::size_t(j - 1)].matrix() * u.adjoint(), dims, true);
    r.distances.push_back(trace_distance(xi, truth[std::size_t(2 * j - 2)]));
    r.distances.push_back(trace_distance(sim[std::size_t(j)], truth[std::size_t(2 * j - 1)]));
  }
  for (double d : r.distances) r.max_distance = std::max(r.max_distance, d);
  return r;
}

}  // namespace qipl
