#include <fmt/format.h>

#include <algorithm>
#include <cmath>

#include "qipl/sdp.hpp"

namespace qipl {

namespace {

// Verifier actions in verifier-first order; a prover-first protocol gets a
// leading identity turn so that every round is (verifier, prover).
std::vector<CircuitAction> normalized_actions(const VerifierSpec& v) {
  std::vector<CircuitAction> acts;
  if (v.starts_with == StartsWith::Prover) {
    CircuitAction id;
    id.kind = ActionKind::Unitary;
    id.in_qubits = v.register_qubits();
    acts.push_back(id);
  }
  acts.insert(acts.end(), v.actions.begin(), v.actions.end());
  return acts;
}

void require_valid(const VerifierSpec& v) {
  const auto bad = validate_verifier(v, SizeCaps{64, 1 << 20, 1 << 20});
  if (!bad.empty()) throw ArgumentError("invalid verifier: " + bad.front());
}

// V acting on the first register_qubits wires of an n-qubit register, fresh
// wires appended at the end.
ComplexMatrix extend(const ComplexMatrix& v, int mw, int n, int k) {
  const Eigen::Index din = Eigen::Index{1} << n;
  ComplexMatrix out(din << k, din);
  const auto wires = wire_range(0, mw);
  for (Eigen::Index x = 0; x < din; ++x) {
    ComplexVector e = ComplexVector::Zero(din);
    e(x) = 1.0;
    out.col(x) = apply_isometry(e, n, v, wires, k);
  }
  return out;
}

ComplexMatrix output_projector(int n, int wire) {
  const Eigen::Index d = Eigen::Index{1} << n;
  ComplexMatrix p = ComplexMatrix::Zero(d, d);
  const Eigen::Index bit = Eigen::Index{1} << (n - 1 - wire);
  for (Eigen::Index i = 0; i < d; ++i)
    if (i & bit) p(i, i) = 1.0;
  return p;
}

// Orthonormal Hermitian basis of the operators on span(u), u with orthonormal
// columns.
std::vector<ComplexMatrix> hermitian_basis(const ComplexMatrix& u) {
  const Eigen::Index d = u.cols();
  std::vector<ComplexMatrix> out;
  out.reserve(std::size_t(d * d));
  const double r = 1.0 / std::sqrt(2.0);
  for (Eigen::Index a = 0; a < d; ++a) {
    out.push_back(u.col(a) * u.col(a).adjoint());
    for (Eigen::Index b = a + 1; b < d; ++b) {
      const ComplexMatrix ab = u.col(a) * u.col(b).adjoint();
      out.push_back(r * (ab + ab.adjoint()));
      out.push_back(cplx(0, r) * (ab - ab.adjoint()));
    }
  }
  return out;
}

struct Support {
  ComplexMatrix basis;  // full eigenbasis, support vectors first
  Eigen::Index rank = 0;
};

Support support_of(const ComplexMatrix& psd) {
  const auto eg = eig_hermitian(hermitian_part(psd));
  const double top = eg.values.size() ? std::max(1.0, eg.values(0)) : 1.0;
  Support s;
  s.basis = eg.vectors;
  for (Eigen::Index k = 0; k < eg.values.size(); ++k)
    if (eg.values(k) > 1e-10 * top) ++s.rank;
  return s;
}

// Shared layout of both formulations. Round j maps X_{j-1} (on in_qubits[j])
// to the register (M, W, E...) of X_j through ops[j].
struct RoundData {
  std::vector<ComplexMatrix> ops;  // ops[j], j = 0..l-1, maps block j-1 -> block j
  std::vector<int> block_qubits;   // qubits of block j
  std::vector<std::vector<int>> block_dims;
  ComplexMatrix final_op;          // last verifier action on block l-1
  int final_out_qubits = 0;
};

SdpProgram assemble(const VerifierSpec& v, const RoundData& rd, bool normalized,
                    const std::string& prefix) {
  const int qm = v.q_M;
  const int mw = v.register_qubits();
  const std::size_t l = rd.ops.size();
  SdpProgram prog;

  ComplexVector zero = ComplexVector::Zero(Eigen::Index{1} << mw);
  zero(0) = 1.0;
  ComplexMatrix prev_support = zero * zero.adjoint();  // projector onto S_{j-1}

  for (std::size_t j = 0; j < l; ++j) {
    const int n = rd.block_qubits[j];
    const Eigen::Index dm = Eigen::Index{1} << qm;
    const ComplexMatrix& op = rd.ops[j];

    SdpBlock blk;
    blk.name = fmt::format("{}{}", prefix, j + 1);
    blk.dim = int(Eigen::Index{1} << n);
    blk.qubit_dims = rd.block_dims[j];

    const ComplexMatrix pushed = op * prev_support * op.adjoint();
    const Support sup =
        support_of(partial_trace_qubits(pushed, n, wire_range(qm, n - qm)));
    const ComplexMatrix tsup = sup.basis.leftCols(sup.rank);
    blk.face = tensor(identity(std::size_t(dm)), tsup);
    prev_support = tensor(identity(std::size_t(dm)), ComplexMatrix(tsup * tsup.adjoint()));
    prog.blocks.push_back(std::move(blk));

    // Off-support components vanish on both sides: X_j lives on the face and
    // the pushed previous face has its W-marginal inside the support.
    const ComplexMatrix idm = identity(std::size_t(dm));
    for (const auto& h : hermitian_basis(tsup)) {
      SdpConstraint c;
      c.label = fmt::format("ptrace[{}]", j + 1);
      const ComplexMatrix lifted = tensor(idm, h);
      c.terms.push_back({int(j), lifted});
      const ComplexMatrix back = hermitian_part(op.adjoint() * lifted * op);
      if (j == 0) {
        c.rhs = (zero.adjoint() * back * zero)(0, 0).real();
      } else {
        c.terms.push_back({int(j - 1), -back});
      }
      prog.constraints.push_back(std::move(c));
    }

    SdpConstraint tr;
    tr.label = fmt::format("trace[{}]", j + 1);
    tr.terms.push_back({int(j), identity(std::size_t(1) << n)});
    if (normalized) {
      tr.rhs = 1.0;
    } else {
      const ComplexMatrix kk = hermitian_part(op.adjoint() * op);
      if (j == 0) tr.rhs = (zero.adjoint() * kk * zero)(0, 0).real();
      else tr.terms.push_back({int(j - 1), -kk});
    }
    prog.constraints.push_back(std::move(tr));
  }

  const int out_n = rd.final_out_qubits;
  const ComplexMatrix pi = output_projector(out_n, v.output_qubit);
  const ComplexMatrix obj = hermitian_part(rd.final_op.adjoint() * pi * rd.final_op);
  if (l == 0) {
    prog.objective_offset = (zero.adjoint() * obj * zero)(0, 0).real();
  } else {
    prog.objective.push_back({int(l - 1), obj});
  }
  return prog;
}

}  // namespace

SdpProgram build_first_sdp(const VerifierSpec& verifier) {
  require_valid(verifier);
  for (std::size_t j = 0; j < verifier.actions.size(); ++j)
    if (verifier.actions[j].kind == ActionKind::AlmostUnitary)
      throw ScopeError(fmt::format(
          "action {} is almost-unitary; use build_second_sdp or lift the verifier first", j + 1));
  const auto acts = normalized_actions(verifier);
  const int mw = verifier.register_qubits();
  RoundData rd;
  int n = mw;
  std::vector<int> dims{verifier.q_M, verifier.q_W};
  for (std::size_t j = 0; j + 1 < acts.size(); ++j) {
    const int e = acts[j].environment_qubits();
    rd.ops.push_back(extend(to_isometry(acts[j]), mw, n, e));
    n += e;
    if (e > 0) dims.push_back(e);
    rd.block_qubits.push_back(n);
    rd.block_dims.push_back(dims);
  }
  const auto& last = acts.back();
  const int e = last.environment_qubits();
  rd.final_op = extend(to_isometry(last), mw, n, e);
  rd.final_out_qubits = n + e;
  return assemble(verifier, rd, true, "rho");
}

SdpProgram build_second_sdp(const VerifierSpec& verifier, const std::string& u) {
  require_valid(verifier);
  for (std::size_t j = 0; j < verifier.actions.size(); ++j)
    if (verifier.actions[j].kind == ActionKind::Isometric)
      throw ScopeError(fmt::format(
          "action {} is isometric with live environment; the branch program needs "
          "almost-unitary actions", j + 1));
  if (int(u.size()) != outcome_length(verifier))
    throw ArgumentError(fmt::format("outcome string has length {}, verifier needs {}",
                                    u.size(), outcome_length(verifier)));
  for (char ch : u)
    if (ch != '0' && ch != '1') throw ArgumentError("outcome string must be binary");

  const auto acts = normalized_actions(verifier);
  const int mw = verifier.register_qubits();
  const Eigen::Index d = Eigen::Index{1} << mw;
  RoundData rd;
  std::size_t pos = 0;
  for (std::size_t j = 0; j + 1 < acts.size(); ++j) {
    const ComplexMatrix iso = to_isometry(acts[j]);
    const int e = acts[j].environment_qubits();
    std::uint64_t outcome = 0;
    for (int b = 0; b < e; ++b) outcome = (outcome << 1) | std::uint64_t(u[pos++] == '1');
    ComplexMatrix k(d, d);
    for (Eigen::Index x = 0; x < d; ++x) k.row(x) = iso.row((x << e) | Eigen::Index(outcome));
    rd.ops.push_back(std::move(k));
    rd.block_qubits.push_back(mw);
    rd.block_dims.push_back({verifier.q_M, verifier.q_W});
  }
  const auto& last = acts.back();
  rd.final_op = to_isometry(last);
  rd.final_out_qubits = mw + last.environment_qubits();
  return assemble(verifier, rd, false, "rho");
}

OmegaResult omega_detailed(const VerifierSpec& verifier, const SolverOptions& options) {
  const VerifierSpec lifted = isometric_lift(verifier);
  const SdpProgram prog = build_first_sdp(lifted);
  OmegaResult r;
  r.solution = solve(prog, options);
  r.value = r.solution.objective_value;
  r.dual = r.solution.dual_value;
  return r;
}

double omega(const VerifierSpec& verifier, const SolverOptions& options) {
  return omega_detailed(verifier, options).value;
}

WitnessVerdict check_np_witness(const VerifierSpec& verifier, const std::string& u,
                                const std::vector<ComplexMatrix>& blocks, double c) {
  WitnessVerdict v;
  SdpProgram prog;
  try {
    prog = build_second_sdp(verifier, u);
  } catch (const Error& e) {
    v.reason = std::string("malformed instance: ") + e.what();
    return v;
  }
  if (blocks.size() != prog.blocks.size()) {
    v.reason = fmt::format("expected {} blocks, got {}", prog.blocks.size(), blocks.size());
    return v;
  }
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    const auto& x = blocks[i];
    const int dim = prog.blocks[i].dim;
    if (x.rows() != dim || x.cols() != dim) {
      v.reason = fmt::format("block {} has shape {}x{}, expected {}", i + 1, x.rows(), x.cols(), dim);
      return v;
    }
    if (!all_finite(x)) {
      v.reason = fmt::format("block {} has non-finite entries", i + 1);
      return v;
    }
  }
  // Residuals are reported even when a later check rejects the blocks.
  const auto res = prog.residuals(blocks);
  for (double r : res) v.max_residual = std::max(v.max_residual, r);
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    const auto& x = blocks[i];
    if (!is_hermitian(x, 1e-6)) {
      v.reason = fmt::format("block {} is not Hermitian", i + 1);
      return v;
    }
    if (min_eigenvalue(x) < -1e-6) {
      v.reason = fmt::format("block {} is not positive semidefinite", i + 1);
      return v;
    }
  }
  for (std::size_t k = 0; k < res.size(); ++k) {
    if (res[k] > 1e-6) {
      v.reason = fmt::format("constraint residual {:.3e} on {}", res[k], prog.constraints[k].label);
      return v;
    }
  }
  v.objective = prog.evaluate_objective(blocks);
  if (v.objective < c - 1e-6) {
    v.reason = fmt::format("objective below threshold ({:.9f} < {:.9f})", v.objective, c);
    return v;
  }
  v.accepted = true;
  v.reason = "ok";
  return v;
}

}  // namespace qipl
