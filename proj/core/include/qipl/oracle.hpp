#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "qipl/circuits.hpp"
#include "qipl/sdp.hpp"

namespace qipl {

struct SeeSawConfig {
  int restarts = 8;
  int iterations = 200;
  int prover_qubits = 0;  // 0 picks the default width, see default_prover_qubits
  std::uint64_t rng_seed = 0;
};

struct SeeSawResult {
  ProverStrategy strategy;
  double value = 0.0;      // run_protocol(verifier, strategy)
  int restarts_used = 0;
  int best_restart = -1;
  // Acceptance after each sweep of the winning restart; non-decreasing.
  std::vector<double> history;
};

// max(2 (q_M + q_W), q_M + q_W + total environment qubits of the lifted
// verifier). The second term covers purifications of the SDP blocks.
int default_prover_qubits(const VerifierSpec& verifier);

// Alternating optimisation over the prover's unitaries. Each step replaces
// one action by the unitary factor of its linear response, which never lowers
// the acceptance probability. Restarts run in parallel and are merged by max,
// ties going to the lower restart index, so the result depends only on the
// seed.
SeeSawResult see_saw_prover(const VerifierSpec& verifier, const SeeSawConfig& cfg = {});

// Same iteration started from a given strategy (no random restarts).
SeeSawResult see_saw_from(const VerifierSpec& verifier, const ProverStrategy& start,
                          int iterations);

// Turns a feasible solution of the first program for `verifier` (or for its
// isometric lift) into prover unitaries that realise it. Throws ArgumentError
// when the blocks do not fit the program or violate its constraints by more
// than 1e-5.
ProverStrategy purify_strategy(const VerifierSpec& verifier, const SdpSolution& solution);

}  // namespace qipl
