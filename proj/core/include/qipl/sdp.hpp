#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "qipl/circuits.hpp"
#include "qipl/linalg.hpp"

namespace qipl {

struct SdpBlock {
  std::string name;
  int dim = 0;
  std::vector<int> qubit_dims;
  // Optional orthonormal basis (dim x r) of a face known to contain every
  // feasible value of this block. The solver optimizes X = B Y B^dagger over
  // r x r matrices Y. r may be 0, which pins the block to zero.
  std::optional<ComplexMatrix> face;
};

struct SdpTerm {
  int block = 0;
  ComplexMatrix coeff;  // Hermitian, block.dim x block.dim
};

// sum_i Tr(coeff_i X_i) = rhs
struct SdpConstraint {
  std::vector<SdpTerm> terms;
  cplx rhs = 0.0;
  std::string label;
};

struct SdpProgram {
  std::vector<SdpBlock> blocks;
  std::vector<SdpTerm> objective;  // maximize sum_i Tr(C_i X_i)
  std::vector<SdpConstraint> constraints;
  double objective_offset = 0.0;

  // Throws ArgumentError when shapes or Hermiticity are off.
  void validate() const;
  double evaluate_objective(const std::vector<ComplexMatrix>& x) const;
  // Residual Tr(A X) - b for every constraint.
  std::vector<double> residuals(const std::vector<ComplexMatrix>& x) const;
};

struct SdpSolution {
  std::vector<ComplexMatrix> blocks;
  Eigen::VectorXd y;  // multipliers of the (independent) constraints
  double objective_value = 0.0;
  double dual_value = 0.0;
  double gap = 0.0;
  double primal_residual = 0.0;  // Frobenius norm over all constraints
  double dual_residual = 0.0;
  int iterations = 0;
};

struct SolverOptions {
  double tol = 1e-7;
  int max_iterations = 200;
  double step_fraction = 0.98;
  double infeasibility_bound = 1e8;
};

class InfeasibleError : public Error {
 public:
  InfeasibleError(const std::string& what, Eigen::VectorXd certificate)
      : Error(what), certificate_(std::move(certificate)) {}
  const Eigen::VectorXd& certificate() const { return certificate_; }

 private:
  Eigen::VectorXd certificate_;
};

class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, SdpSolution best)
      : Error(what), best_(std::move(best)) {}
  const SdpSolution& best() const { return best_; }

 private:
  SdpSolution best_;
};

SdpSolution solve(const SdpProgram& program, const SolverOptions& options = {});

// One block per round; odd turn counts get a leading identity verifier turn.
// Almost-unitary actions are out of scope (ScopeError): lift them first or
// use the second formulation.
SdpProgram build_first_sdp(const VerifierSpec& verifier);

// Branch-u program with unnormalized blocks on (M', W). u holds one '0'/'1'
// per measured environment wire of V_1..V_l.
SdpProgram build_second_sdp(const VerifierSpec& verifier, const std::string& u);

struct OmegaResult {
  double value = 0.0;
  double dual = 0.0;
  SdpSolution solution;
};

OmegaResult omega_detailed(const VerifierSpec& verifier, const SolverOptions& options = {});
double omega(const VerifierSpec& verifier, const SolverOptions& options = {});

struct WitnessVerdict {
  bool accepted = false;
  std::string reason;
  double max_residual = 0.0;
  double objective = 0.0;
};

WitnessVerdict check_np_witness(const VerifierSpec& verifier, const std::string& u,
                                const std::vector<ComplexMatrix>& blocks, double c);

}  // namespace qipl
