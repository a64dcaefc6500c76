#pragma once

#include <cstdint>
#include <vector>

#include "qipl/circuits.hpp"

namespace qipl {

struct Dyadic {
  std::uint64_t num = 0;
  int log2_den = 0;
  double value() const;
};

// Smallest-denominator dyadic in [(3c+s)/4, c] with denominator at most
// 2^10, ties to the smaller value. Throws ParameterError if none exists.
Dyadic choose_dyadic_alpha(double c, double s);

// Appends a pseudo-copy of the output, returns W to the prover and accepts
// on the projection onto sqrt(1-a)|00> + sqrt(a)|11>. Two extra turns.
// Registers: M' = (M, X) with |X| = q_W, W' = (W, Z', A); output A.
VerifierSpec perfect_completeness_transform(const VerifierSpec& v, double c, double s);

// ceil(k / log2(1 / (1 - (c-s)^2/2))).
int repetition_count(int k, double c, double s);

// r sequential runs with prover-assisted cleanup of W between runs. Accepts
// iff every run accepted and every cleanup message was all-zero.
// Registers: M^ = (M, X), W^ = (W, S, T, A, scratch); output A.
VerifierSpec sequential_repetition(const VerifierSpec& v, int r);

// k copies side by side, output is the AND of the copies' outputs.
VerifierSpec parallel_repetition(const VerifierSpec& v, int k);

// (4m+1)-turn prover-first unitary verifier to a (2m+1)-turn one that runs
// the second half forward or the first half backward on a coin.
// Registers: M^ = (M, X, B), W^ = (W, coin, A, scratch); output A.
// Each application multiplies the environment of a verifier action, so a
// chain may apply it at most kMaxHalvingDepth times (tracked through the
// provenance trail); ArgumentError beyond that.
inline constexpr int kMaxHalvingDepth = 4;
VerifierSpec turn_halving(const VerifierSpec& v);

// 3-turn prover-first unitary verifier to message / one coin / message.
VerifierSpec single_coin_qmaml(const VerifierSpec& v3);

// Gate-level helpers shared by the compilers.
ComplexMatrix ry_matrix(double theta);
// X on target iff all controls are 1; uses scratch wires (returned clean),
// at least controls.size() - 2 of them.
std::vector<Gate> multi_controlled_x(const std::vector<int>& controls, int target,
                                     const std::vector<int>& scratch);
CircuitAction adjoint_action(const CircuitAction& a);

}  // namespace qipl
