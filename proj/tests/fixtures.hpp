#pragma once

#include <cmath>
#include <vector>

#include "qipl/circuits.hpp"
#include "qipl/random.hpp"
#include "qipl/transforms.hpp"

namespace fixtures {

using namespace qipl;

inline CircuitAction action(int in, std::vector<Gate> gates = {},
                            ActionKind kind = ActionKind::Unitary) {
  CircuitAction a;
  a.kind = kind;
  a.in_qubits = in;
  a.gates = std::move(gates);
  return a;
}

// RY rotation that takes |0> to an amplitude sqrt(p) on |1>.
inline Gate ry_prob(double p, int wire) {
  return Gate::raw(ry_matrix(2.0 * std::asin(std::sqrt(p))), {wire});
}

// One prover message between two verifier actions; q_M = q_W = 1.
inline VerifierSpec two_turn(std::vector<Gate> v1, std::vector<Gate> v2, int output) {
  VerifierSpec v;
  v.q_M = 1;
  v.q_W = 1;
  v.output_qubit = output;
  v.actions = {action(2, std::move(v1)), action(2, std::move(v2))};
  return v;
}

// No messages at all: one action on a single M qubit accepting with p.
inline VerifierSpec no_turn(double p) {
  VerifierSpec v;
  v.q_M = 1;
  v.q_W = 0;
  v.output_qubit = 0;
  v.actions = {action(1, {ry_prob(p, 0)})};
  return v;
}

// Prover-first, three actions, W rotated by the last action only: the
// prover cannot help, so omega = p.
inline VerifierSpec five_turn_fixed(double p, Rng& rng) {
  VerifierSpec v;
  v.q_M = 1;
  v.q_W = 1;
  v.output_qubit = 1;
  v.starts_with = StartsWith::Prover;
  v.actions = {action(2, {Gate::raw(haar_unitary(2, rng), {0})}),
               action(2, {Gate::raw(haar_unitary(2, rng), {0})}),
               action(2, {ry_prob(p, 1)})};
  return v;
}

inline VerifierSpec random_unitary(Rng& rng, int actions,
                                   StartsWith first = StartsWith::Verifier) {
  RandomVerifierOptions o;
  o.actions = actions;
  o.starts_with = first;
  return random_verifier(o, rng);
}

}  // namespace fixtures
