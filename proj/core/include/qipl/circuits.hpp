#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "qipl/linalg.hpp"

namespace qipl {

enum class GateKind { H, T, CNOT, SWAP, Raw, Measure, Ancilla };

// A gate on explicit wires. For multi-wire gates the first listed wire is the
// most significant index of the gate matrix. Measure(w) copies w onto a fresh
// environment wire with a CNOT; Ancilla adds a fresh |0> wire. Fresh wires get
// consecutive indices after the action's input wires, in gate order.
struct Gate {
  GateKind kind = GateKind::H;
  std::vector<int> wires;
  ComplexMatrix matrix;  // only for Raw

  static Gate h(int w);
  static Gate t(int w);
  static Gate x(int w);
  static Gate cnot(int control, int target);
  static Gate swap(int a, int b);
  static Gate raw(ComplexMatrix u, std::vector<int> wires);
  static Gate measure(int w);
  static Gate ancilla();

  // Unitary matrix of a non-Measure, non-Ancilla gate.
  ComplexMatrix unitary() const;
};

Gate adjoint(const Gate& g);
// Gate conditioned on `control` being |1>. Fails for gates on more than two
// wires since the result must stay within three wires.
Gate controlled(const Gate& g, int control);

enum class ActionKind { Unitary, AlmostUnitary, Isometric };

struct CircuitAction {
  ActionKind kind = ActionKind::Unitary;
  int in_qubits = 0;
  std::vector<Gate> gates;

  // Fresh wires created by Measure/Ancilla gates.
  int environment_qubits() const;
  int measure_count() const;
  // Environment wires dephased at the end of the turn (all of them for
  // almost-unitary actions, none otherwise). Indices are relative to the
  // action's wire numbering.
  std::vector<int> measured_wires() const;
  int total_qubits() const { return in_qubits + environment_qubits(); }
};

enum class StartsWith { Verifier, Prover };

struct Provenance {
  std::string transform;
  std::string params;
  std::string input_hash;
};

struct VerifierSpec {
  int q_M = 0;
  int q_W = 0;
  std::vector<CircuitAction> actions;
  int output_qubit = 0;
  StartsWith starts_with = StartsWith::Verifier;
  std::vector<Provenance> provenance;

  int register_qubits() const { return q_M + q_W; }
  int turns() const;
  int prover_actions() const;
  bool has_measurements() const;
};

struct ProverStrategy {
  int q_Q = 0;
  std::vector<ComplexMatrix> actions;  // each on (Q, M), Q most significant
};

struct SizeCaps {
  int max_register_qubits = 12;
  int measure_cap = 16;
  int max_turns = 64;
};

// Throws ValidationError on malformed gates or wire references.
void validate_action(const CircuitAction& action);
std::vector<std::string> validate_verifier(const VerifierSpec& spec,
                                           const SizeCaps& caps = {});

ComplexMatrix to_isometry(const CircuitAction& action);

// Same gates, measurements deferred: every almost-unitary action becomes
// isometric with its measurement copies left live.
VerifierSpec isometric_lift(const VerifierSpec& spec);

// Trivial prover strategy (identity actions) for the given prover width.
ProverStrategy identity_prover(const VerifierSpec& spec, int q_Q);

double run_protocol(const VerifierSpec& verifier, const ProverStrategy& prover);

struct Branch {
  double probability = 0.0;
  double conditional_acceptance = 0.0;
};
// Keys are the concatenated outcome bits of the measured environment wires of
// V_1..V_l ('0'/'1' characters). Measurements in the final action are not
// part of the key.
std::map<std::string, Branch> branch_probabilities(const VerifierSpec& verifier,
                                                   const ProverStrategy& prover);
// Length of the outcome string u expected for this verifier.
int outcome_length(const VerifierSpec& verifier);

// ---- state-vector kernels (wire 0 is the most significant bit) ----

void apply_operator(ComplexVector& psi, int n_qubits, const ComplexMatrix& u,
                    const std::vector<int>& wires);
// Applies an isometry from wires to (wires, k fresh wires appended at the end
// of the register list). Returns the new state on n+k qubits.
ComplexVector apply_isometry(const ComplexVector& psi, int n_qubits,
                             const ComplexMatrix& v, const std::vector<int>& wires,
                             int k);
// Adjoint of apply_isometry; the k last wires are consumed.
ComplexVector apply_isometry_adjoint(const ComplexVector& psi, int n_qubits,
                                     const ComplexMatrix& v,
                                     const std::vector<int>& wires, int k);
// Projects the last k wires onto basis state `outcome` and drops them.
ComplexVector project_tail(const ComplexVector& psi, int k, std::uint64_t outcome);
// Probability that `wire` reads 1.
double probability_one(const ComplexVector& psi, int n_qubits, int wire);

// Wire list [first, first+count).
std::vector<int> wire_range(int first, int count);

}  // namespace qipl
