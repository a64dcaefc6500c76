#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qipl/circuits.hpp"
#include "qipl/linalg.hpp"

namespace qipl {

// A unitary circuit run on |0...0>; the state is the reduced state of the
// output wires, in the listed order.
struct StatePrepCircuit {
  CircuitAction circuit;
  std::vector<int> outputs;
};

// Throws ValidationError for non-unitary circuits or bad output lists.
void validate_prep(const StatePrepCircuit& c);
DensityMatrix prepare_state(const StatePrepCircuit& c);

// Circuit on 2n wires (outputs 0..n-1, purifier n..2n-1) that prepares an
// n-qubit density matrix, n <= 3.
StatePrepCircuit density_prep_circuit(const ComplexMatrix& rho);

struct IndivProdInstance {
  int k = 0;
  std::vector<std::pair<StatePrepCircuit, StatePrepCircuit>> pairs;
  double alpha = 0.0;
  double delta = 0.0;
};

// Throws ValidationError: k != pairs.size(), mismatched output sizes, or
// alpha - delta k below the promise floor.
void validate_instance(const IndivProdInstance& inst, double promise_floor = 1e-3);

enum class Verdict { Yes, No, PromiseViolation };
const char* to_string(Verdict v);

struct IndivProdDecision {
  Verdict verdict = Verdict::PromiseViolation;
  int witness = -1;                // 0-based index with T_j >= alpha/k, yes only
  std::vector<double> distances;   // T(sigma_j, sigma'_j)
  std::string report;
};

IndivProdDecision decide_indivprod(const IndivProdInstance& inst, double promise_floor = 1e-3);

struct ProductDistanceBounds {
  double lower = 0.0;  // max_j T_j
  double upper = 0.0;  // sum_j T_j
  std::optional<double> exact;
};

// The exact distance of the two product states is computed when their
// dimension is at most dim_cap.
ProductDistanceBounds product_distance_bounds(const IndivProdInstance& inst,
                                              std::size_t dim_cap = 4096);

struct HardnessParams {
  double c = 2.0 / 3.0;
  double s = 1.0 / 3.0;
  double delta = 0.0;  // largest per-message simulator error
};

// simulator[j] prepares the approximation of the (M, W) snapshot after the
// prover's j-th message (j = 0..l, entry 0 being the initial state), with
// outputs listed as (M, W). The verifier must be unitary, start with the
// verifier and have l + 1 actions. Pair j compares V_j applied to entry j-1
// against entry j, both reduced to W.
IndivProdInstance build_hardness_instance(const VerifierSpec& verifier,
                                          const std::vector<StatePrepCircuit>& simulator,
                                          const HardnessParams& params);

struct ConsistencyReport {
  // Entry i is the distance after message i+1: odd messages compare
  // V_j(entry j-1) with the true state after V_j, even ones compare entry j
  // with the true state after the prover's j-th action.
  std::vector<double> distances;
  double max_distance = 0.0;
};

ConsistencyReport check_simulator_consistency(const VerifierSpec& verifier,
                                              const std::vector<StatePrepCircuit>& simulator,
                                              const ProverStrategy& prover);

// Reduced (M, W) states of the real protocol: entry 2j-2 after V_j and
// entry 2j-1 after the prover's j-th action, j = 1..l.
std::vector<DensityMatrix> protocol_snapshots(const VerifierSpec& verifier,
                                              const ProverStrategy& prover);

}  // namespace qipl
