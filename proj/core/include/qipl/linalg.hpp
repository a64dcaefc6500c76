#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstddef>
#include <vector>

#include "qipl/errors.hpp"

namespace qipl {

using cplx = std::complex<double>;
using ComplexMatrix =
    Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ComplexVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

namespace tol {
inline constexpr double structural = 1e-10;
inline constexpr double agreement = 1e-4;
inline constexpr double bound = 1e-6;
}  // namespace tol

// Largest matrix dimension any operation here will produce. Shared by all
// threads; set it once at start-up.
std::size_t dimension_cap();
void set_dimension_cap(std::size_t cap);

ComplexMatrix identity(std::size_t dim);
ComplexMatrix tensor(const ComplexMatrix& a, const ComplexMatrix& b);
ComplexMatrix tensor(const std::vector<ComplexMatrix>& factors);
ComplexVector tensor(const ComplexVector& a, const ComplexVector& b);

ComplexMatrix adjoint(const ComplexMatrix& m);
bool all_finite(const ComplexMatrix& m);
bool is_hermitian(const ComplexMatrix& m, double eps = tol::structural);
bool is_unitary(const ComplexMatrix& m, double eps = tol::structural);
// Columns orthonormal: V^dagger V = I.
bool is_isometry(const ComplexMatrix& m, double eps = tol::structural);
ComplexMatrix hermitian_part(const ComplexMatrix& m);

struct EigenDecomposition {
  RealVector values;      // descending
  ComplexMatrix vectors;  // column k pairs with values[k]
};

EigenDecomposition eig_hermitian(const ComplexMatrix& m);

// Zero out eigenvalues that are negative or below a relative noise floor,
// then rebuild. The result is PSD by construction.
ComplexMatrix clip_psd(const ComplexMatrix& m);
ComplexMatrix psd_sqrt(const ComplexMatrix& m);
double min_eigenvalue(const ComplexMatrix& m);

// Polar factor U of an arbitrary square matrix G = U |G|.
ComplexMatrix polar_unitary(const ComplexMatrix& g);

class DensityMatrix {
 public:
  DensityMatrix(ComplexMatrix matrix, std::vector<int> qubit_dims,
                bool normalized = true);

  // Symmetrizes and clips tiny negative eigenvalues before validating; for
  // solver output that is PSD only to solver precision.
  static DensityMatrix from_clipped(const ComplexMatrix& matrix,
                                    std::vector<int> qubit_dims,
                                    bool normalized);
  static DensityMatrix pure(const ComplexVector& psi,
                            std::vector<int> qubit_dims);

  const ComplexMatrix& matrix() const { return matrix_; }
  const std::vector<int>& qubit_dims() const { return qubit_dims_; }
  bool normalized() const { return normalized_; }
  int num_qubits() const;
  Eigen::Index dim() const { return matrix_.rows(); }
  double trace() const;

 private:
  ComplexMatrix matrix_;
  std::vector<int> qubit_dims_;
  bool normalized_;
};

// keep lists subsystem indices into rho.qubit_dims(), in the order they
// should appear in the result.
DensityMatrix partial_trace(const DensityMatrix& rho,
                            const std::vector<int>& keep);

// Qubit-level partial trace of an arbitrary operator on n qubits. Wire 0 is
// the most significant bit of the basis index.
ComplexMatrix partial_trace_qubits(const ComplexMatrix& m, int n_qubits,
                                   const std::vector<int>& keep);

// Tr_rest(|a><b|) for vectors on n qubits, without forming the outer product.
ComplexMatrix reduced_outer(const ComplexVector& a, const ComplexVector& b,
                            int n_qubits, const std::vector<int>& keep);

double trace_distance(const DensityMatrix& rho, const DensityMatrix& sigma);
double fidelity(const DensityMatrix& rho, const DensityMatrix& sigma);

}  // namespace qipl
