#include "qipl/random.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

#include <fmt/format.h>

#include "qipl/errors.hpp"

namespace qipl {

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

namespace {
Eigen::MatrixXcd ginibre(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  std::normal_distribution<double> n01(0.0, 1.0);
  Eigen::MatrixXcd g(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) g(i, j) = cplx(n01(rng), n01(rng));
  return g;
}
}  // namespace

ComplexMatrix haar_unitary(Eigen::Index dim, Rng& rng) {
  const Eigen::MatrixXcd g = ginibre(dim, dim, rng);
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(g);
  Eigen::MatrixXcd q = qr.householderQ() * Eigen::MatrixXcd::Identity(dim, dim);
  const Eigen::MatrixXcd r = qr.matrixQR().triangularView<Eigen::Upper>();
  // Mezzadri's phase fix makes the distribution exactly Haar.
  for (Eigen::Index k = 0; k < dim; ++k) {
    const double a = std::abs(r(k, k));
    const cplx ph = a > 0 ? r(k, k) / a : cplx(1.0);
    q.col(k) *= ph;
  }
  return q;
}

ComplexVector haar_state(Eigen::Index dim, Rng& rng) {
  ComplexVector v = ginibre(dim, 1, rng).col(0);
  return v / v.norm();
}

ComplexMatrix random_density(Eigen::Index dim, Eigen::Index rank, Rng& rng) {
  if (rank <= 0 || rank > dim) rank = dim;
  const Eigen::MatrixXcd g = ginibre(dim, rank, rng);
  Eigen::MatrixXcd rho = g * g.adjoint();
  rho /= rho.trace().real();
  return hermitian_part(rho);
}

int worker_threads() {
  const char* env = std::getenv("QIPL_LAB_THREADS");
  if (env == nullptr) return 1;
  const int n = std::atoi(env);
  return std::clamp(n, 1, 64);
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
  const std::size_t workers = std::min<std::size_t>(std::size_t(worker_threads()), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < workers; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

VerifierSpec random_verifier(const RandomVerifierOptions& opt, Rng& rng) {
  const int mw = opt.q_M + opt.q_W;
  if (opt.q_M < 0 || opt.q_W < 0 || mw < 1 || opt.actions < 1)
    throw ArgumentError("random verifier needs a non-empty register and at least one action");
  if (opt.measurements < 0 || opt.measurements > opt.actions - 1)
    throw ArgumentError(fmt::format("at most {} actions can carry a measurement", opt.actions - 1));
  VerifierSpec v;
  v.q_M = opt.q_M;
  v.q_W = opt.q_W;
  v.starts_with = opt.starts_with;
  v.output_qubit = opt.output_qubit < 0 ? mw - 1 : opt.output_qubit;
  std::uniform_int_distribution<int> pick_wire(0, mw - 1);
  for (int j = 0; j < opt.actions; ++j) {
    CircuitAction a;
    a.in_qubits = mw;
    if (mw <= 3) {
      a.gates.push_back(Gate::raw(haar_unitary(Eigen::Index{1} << mw, rng), wire_range(0, mw)));
    } else {
      for (int layer = 0; layer < mw; ++layer)
        for (int w = layer % 2; w + 1 < mw; w += 2)
          a.gates.push_back(Gate::raw(haar_unitary(4, rng), {w, w + 1}));
    }
    if (j < opt.measurements) {
      a.kind = ActionKind::AlmostUnitary;
      a.gates.push_back(Gate::measure(pick_wire(rng)));
    }
    v.actions.push_back(std::move(a));
  }
  return v;
}

}  // namespace qipl
