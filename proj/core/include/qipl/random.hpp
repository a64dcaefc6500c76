#pragma once

#include <cstdint>
#include <functional>
#include <random>

#include "qipl/circuits.hpp"
#include "qipl/linalg.hpp"

namespace qipl {

using Rng = std::mt19937_64;

// SplitMix64 mix of (seed, stream); gives independent child seeds so that
// parallel work produces the same results as serial work.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

ComplexMatrix haar_unitary(Eigen::Index dim, Rng& rng);
ComplexVector haar_state(Eigen::Index dim, Rng& rng);
// Random density matrix of the given rank (rank 0 means full rank) from the
// induced Hilbert-Schmidt measure.
ComplexMatrix random_density(Eigen::Index dim, Eigen::Index rank, Rng& rng);

struct RandomVerifierOptions {
  int q_M = 1;
  int q_W = 1;
  int actions = 2;
  StartsWith starts_with = StartsWith::Verifier;
  int output_qubit = -1;  // -1: last wire of (M, W)
  // Measured environment qubits added, one per action, to the first
  // `measurements` actions other than the last (making them almost-unitary).
  int measurements = 0;
};

// Haar-random unitary on (M, W) per action: one gate when q_M + q_W <= 3,
// otherwise brickwork layers of Haar two-qubit gates.
VerifierSpec random_verifier(const RandomVerifierOptions& opt, Rng& rng);

// Worker count from QIPL_LAB_THREADS (default 1, clamped to [1, 64]).
int worker_threads();

// Runs body(i) for i in [0, n) on up to worker_threads() threads. Each index
// runs exactly once; ordering across indices is unspecified.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace qipl
