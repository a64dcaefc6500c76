#include "qipl/linalg.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>

namespace qipl {

namespace {

std::atomic<std::size_t> g_dim_cap{std::size_t{1} << 14};

void check_dim(std::size_t d) {
  if (d > g_dim_cap.load()) {
    throw DimensionError(
        fmt::format("dimension {} exceeds cap {}", d, g_dim_cap.load()));
  }
}

double noise_floor(const RealVector& vals) {
  double scale = 1.0;
  if (vals.size() > 0) scale = std::max(1.0, vals.cwiseAbs().maxCoeff());
  return 1e-14 * scale * std::max<Eigen::Index>(1, vals.size());
}

// Index map for splitting n qubits into kept wires (in the caller's order)
// and the remaining wires (ascending). table[a * d_rest + r] = full index.
std::vector<Eigen::Index> split_table(int n, const std::vector<int>& keep,
                                      Eigen::Index& d_keep,
                                      Eigen::Index& d_rest) {
  std::vector<bool> kept(n, false);
  for (int w : keep) {
    if (w < 0 || w >= n || kept[w]) {
      throw ArgumentError(fmt::format("invalid or repeated wire {}", w));
    }
    kept[w] = true;
  }
  std::vector<int> rest;
  for (int w = 0; w < n; ++w)
    if (!kept[w]) rest.push_back(w);
  d_keep = Eigen::Index{1} << keep.size();
  d_rest = Eigen::Index{1} << rest.size();
  std::vector<Eigen::Index> table(std::size_t(d_keep * d_rest));
  const Eigen::Index full = Eigen::Index{1} << n;
  for (Eigen::Index i = 0; i < full; ++i) {
    Eigen::Index a = 0, r = 0;
    for (int w : keep) a = (a << 1) | ((i >> (n - 1 - w)) & 1);
    for (int w : rest) r = (r << 1) | ((i >> (n - 1 - w)) & 1);
    table[std::size_t(a * d_rest + r)] = i;
  }
  return table;
}

}  // namespace

std::size_t dimension_cap() { return g_dim_cap.load(); }
void set_dimension_cap(std::size_t cap) { g_dim_cap.store(cap); }

ComplexMatrix identity(std::size_t dim) {
  check_dim(dim);
  return ComplexMatrix::Identity(Eigen::Index(dim), Eigen::Index(dim));
}

ComplexMatrix tensor(const ComplexMatrix& a, const ComplexMatrix& b) {
  const std::size_t rows = std::size_t(a.rows()) * std::size_t(b.rows());
  const std::size_t cols = std::size_t(a.cols()) * std::size_t(b.cols());
  check_dim(rows);
  check_dim(cols);
  ComplexMatrix out(rows, cols);
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

ComplexMatrix tensor(const std::vector<ComplexMatrix>& factors) {
  ComplexMatrix out = ComplexMatrix::Identity(1, 1);
  for (const auto& f : factors) out = tensor(out, f);
  return out;
}

ComplexVector tensor(const ComplexVector& a, const ComplexVector& b) {
  check_dim(std::size_t(a.size()) * std::size_t(b.size()));
  ComplexVector out(a.size() * b.size());
  for (Eigen::Index i = 0; i < a.size(); ++i)
    out.segment(i * b.size(), b.size()) = a(i) * b;
  return out;
}

ComplexMatrix adjoint(const ComplexMatrix& m) { return m.adjoint(); }

bool all_finite(const ComplexMatrix& m) {
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    const cplx z = m.data()[i];
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
  }
  return true;
}

bool is_hermitian(const ComplexMatrix& m, double eps) {
  if (m.rows() != m.cols()) return false;
  if (m.size() == 0) return true;
  return (m - m.adjoint()).cwiseAbs().maxCoeff() <= eps;
}

bool is_isometry(const ComplexMatrix& m, double eps) {
  if (m.rows() < m.cols()) return false;
  const ComplexMatrix g = m.adjoint() * m;
  return (g - ComplexMatrix::Identity(m.cols(), m.cols())).cwiseAbs().maxCoeff() <=
         eps;
}

bool is_unitary(const ComplexMatrix& m, double eps) {
  return m.rows() == m.cols() && is_isometry(m, eps);
}

ComplexMatrix hermitian_part(const ComplexMatrix& m) {
  return 0.5 * (m + m.adjoint());
}

EigenDecomposition eig_hermitian(const ComplexMatrix& m) {
  if (!is_hermitian(m)) throw ArgumentError("eig_hermitian: matrix is not Hermitian");
  const Eigen::MatrixXcd h = hermitian_part(m);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
  if (es.info() != Eigen::Success)
    throw ArgumentError("eig_hermitian: eigensolver failed");
  const Eigen::Index n = h.rows();
  EigenDecomposition out;
  out.values.resize(n);
  out.vectors.resize(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    out.values(k) = es.eigenvalues()(n - 1 - k);
    out.vectors.col(k) = es.eigenvectors().col(n - 1 - k);
  }
  return out;
}

namespace {
ComplexMatrix spectral_apply(const ComplexMatrix& m, bool take_sqrt) {
  const Eigen::MatrixXcd h = hermitian_part(m);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
  RealVector vals = es.eigenvalues();
  const double floor = noise_floor(vals);
  for (Eigen::Index k = 0; k < vals.size(); ++k) {
    if (vals(k) <= floor) vals(k) = 0.0;
    else if (take_sqrt) vals(k) = std::sqrt(vals(k));
  }
  const Eigen::MatrixXcd& q = es.eigenvectors();
  return q * vals.asDiagonal() * q.adjoint();
}
}  // namespace

ComplexMatrix clip_psd(const ComplexMatrix& m) { return spectral_apply(m, false); }
ComplexMatrix psd_sqrt(const ComplexMatrix& m) { return spectral_apply(m, true); }

double min_eigenvalue(const ComplexMatrix& m) {
  if (m.rows() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(
      Eigen::MatrixXcd(hermitian_part(m)), Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

ComplexMatrix polar_unitary(const ComplexMatrix& g) {
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(Eigen::MatrixXcd(g),
                                         Eigen::ComputeFullU | Eigen::ComputeFullV);
  return svd.matrixU() * svd.matrixV().adjoint();
}

// ---------------------------------------------------------------------------

DensityMatrix::DensityMatrix(ComplexMatrix matrix, std::vector<int> qubit_dims,
                             bool normalized)
    : matrix_(std::move(matrix)),
      qubit_dims_(std::move(qubit_dims)),
      normalized_(normalized) {
  if (matrix_.rows() != matrix_.cols())
    throw ArgumentError("density matrix must be square");
  if (!all_finite(matrix_)) throw ArgumentError("density matrix has non-finite entries");
  int total = 0;
  for (int q : qubit_dims_) {
    if (q < 0) throw ArgumentError("negative subsystem size");
    total += q;
  }
  if (total >= 62 || (Eigen::Index{1} << total) != matrix_.rows())
    throw ArgumentError(fmt::format("qubit_dims sum {} does not match dimension {}",
                                    total, matrix_.rows()));
  check_dim(std::size_t(matrix_.rows()));
  if (!is_hermitian(matrix_)) throw ArgumentError("density matrix is not Hermitian");
  if (min_eigenvalue(matrix_) < -tol::structural)
    throw ArgumentError("density matrix is not positive semidefinite");
  if (normalized_ && std::abs(trace() - 1.0) > tol::structural)
    throw ArgumentError(fmt::format("density matrix trace {} is not 1", trace()));
}

DensityMatrix DensityMatrix::from_clipped(const ComplexMatrix& matrix,
                                          std::vector<int> qubit_dims,
                                          bool normalized) {
  ComplexMatrix m = clip_psd(matrix);
  if (normalized) {
    const double t = m.trace().real();
    if (t <= 0) throw ArgumentError("cannot normalize a zero matrix");
    m /= t;
  }
  return DensityMatrix(std::move(m), std::move(qubit_dims), normalized);
}

DensityMatrix DensityMatrix::pure(const ComplexVector& psi,
                                  std::vector<int> qubit_dims) {
  const double n = psi.norm();
  if (n <= 0) throw ArgumentError("zero state vector");
  const ComplexVector v = psi / n;
  return DensityMatrix(v * v.adjoint(), std::move(qubit_dims), true);
}

int DensityMatrix::num_qubits() const {
  return std::accumulate(qubit_dims_.begin(), qubit_dims_.end(), 0);
}

double DensityMatrix::trace() const { return matrix_.trace().real(); }

ComplexMatrix partial_trace_qubits(const ComplexMatrix& m, int n_qubits,
                                   const std::vector<int>& keep) {
  if (m.rows() != (Eigen::Index{1} << n_qubits) || m.cols() != m.rows())
    throw ArgumentError("partial_trace_qubits: shape does not match qubit count");
  Eigen::Index dk = 0, dr = 0;
  const auto table = split_table(n_qubits, keep, dk, dr);
  ComplexMatrix out = ComplexMatrix::Zero(dk, dk);
  for (Eigen::Index a = 0; a < dk; ++a)
    for (Eigen::Index b = 0; b < dk; ++b) {
      cplx s = 0;
      for (Eigen::Index r = 0; r < dr; ++r)
        s += m(table[std::size_t(a * dr + r)], table[std::size_t(b * dr + r)]);
      out(a, b) = s;
    }
  return out;
}

ComplexMatrix reduced_outer(const ComplexVector& a, const ComplexVector& b,
                            int n_qubits, const std::vector<int>& keep) {
  const Eigen::Index full = Eigen::Index{1} << n_qubits;
  if (a.size() != full || b.size() != full)
    throw ArgumentError("reduced_outer: vector length does not match qubit count");
  Eigen::Index dk = 0, dr = 0;
  const auto table = split_table(n_qubits, keep, dk, dr);
  Eigen::MatrixXcd am(dk, dr), bm(dk, dr);
  for (Eigen::Index x = 0; x < dk; ++x)
    for (Eigen::Index r = 0; r < dr; ++r) {
      const auto i = table[std::size_t(x * dr + r)];
      am(x, r) = a(i);
      bm(x, r) = b(i);
    }
  return am * bm.adjoint();
}

DensityMatrix partial_trace(const DensityMatrix& rho,
                            const std::vector<int>& keep) {
  const auto& dims = rho.qubit_dims();
  std::vector<int> offset(dims.size() + 1, 0);
  for (std::size_t i = 0; i < dims.size(); ++i) offset[i + 1] = offset[i] + dims[i];
  std::vector<int> wires;
  std::vector<int> new_dims;
  std::vector<bool> seen(dims.size(), false);
  for (int s : keep) {
    if (s < 0 || std::size_t(s) >= dims.size() || seen[std::size_t(s)])
      throw ArgumentError(fmt::format("partial_trace: invalid subsystem {}", s));
    seen[std::size_t(s)] = true;
    for (int w = offset[std::size_t(s)]; w < offset[std::size_t(s) + 1]; ++w)
      wires.push_back(w);
    new_dims.push_back(dims[std::size_t(s)]);
  }
  ComplexMatrix red = partial_trace_qubits(rho.matrix(), rho.num_qubits(), wires);
  return DensityMatrix(hermitian_part(red), std::move(new_dims), rho.normalized());
}

namespace {
void require_comparable(const DensityMatrix& a, const DensityMatrix& b) {
  if (a.dim() != b.dim()) throw ArgumentError("dimension mismatch");
  if (!a.normalized() || !b.normalized())
    throw ArgumentError("distance measures need normalized states");
}
}  // namespace

double trace_distance(const DensityMatrix& rho, const DensityMatrix& sigma) {
  require_comparable(rho, sigma);
  const Eigen::MatrixXcd diff = hermitian_part(rho.matrix() - sigma.matrix());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(diff, Eigen::EigenvaluesOnly);
  const double t = 0.5 * es.eigenvalues().cwiseAbs().sum();
  return std::clamp(t, 0.0, 1.0);
}

double fidelity(const DensityMatrix& rho, const DensityMatrix& sigma) {
  require_comparable(rho, sigma);
  const Eigen::MatrixXcd prod = psd_sqrt(rho.matrix()) * psd_sqrt(sigma.matrix());
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(prod);
  return std::clamp(svd.singularValues().sum(), 0.0, 1.0);
}

}  // namespace qipl
