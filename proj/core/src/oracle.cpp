#include "qipl/oracle.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

#include "qipl/random.hpp"

namespace qipl {

namespace {

// The protocol as a flat list of steps acting on (Q, M, W, E...). Verifier
// environment wires stay live, which leaves the acceptance probability of
// the original verifier unchanged because nothing touches them again.
struct Step {
  bool prover = false;
  std::size_t index = 0;  // prover action index
  ComplexMatrix iso;      // verifier steps only
  int env = 0;
};

struct Chain {
  std::vector<Step> steps;
  std::vector<int> qubits_before;  // register width before each step
  int final_qubits = 0;
  int q_Q = 0, q_M = 0, q_W = 0;
  int out_wire = 0;
  std::vector<int> prover_wires, mw_wires;
  std::vector<std::size_t> prover_steps;  // step position of each prover action
};

Chain make_chain(const VerifierSpec& v, int q_Q) {
  Chain c;
  c.q_Q = q_Q;
  c.q_M = v.q_M;
  c.q_W = v.q_W;
  c.out_wire = q_Q + v.output_qubit;
  c.prover_wires = wire_range(0, q_Q + v.q_M);
  c.mw_wires = wire_range(q_Q, v.register_qubits());
  std::size_t next = 0;
  auto add_prover = [&] {
    c.prover_steps.push_back(c.steps.size());
    c.steps.push_back(Step{true, next++, {}, 0});
  };
  for (std::size_t j = 0; j < v.actions.size(); ++j) {
    if (v.starts_with == StartsWith::Prover) add_prover();
    c.steps.push_back(Step{false, 0, to_isometry(v.actions[j]), v.actions[j].environment_qubits()});
    if (j + 1 < v.actions.size() && v.starts_with == StartsWith::Verifier) add_prover();
  }
  int n = q_Q + v.register_qubits();
  for (const auto& s : c.steps) {
    c.qubits_before.push_back(n);
    n += s.env;
  }
  c.final_qubits = n;
  return c;
}

ComplexVector forward_step(const Chain& c, std::size_t s, const ComplexVector& psi,
                           const std::vector<ComplexMatrix>& p) {
  const Step& st = c.steps[s];
  const int n = c.qubits_before[s];
  if (st.prover) {
    ComplexVector out = psi;
    apply_operator(out, n, p[st.index], c.prover_wires);
    return out;
  }
  return apply_isometry(psi, n, st.iso, c.mw_wires, st.env);
}

ComplexVector backward_step(const Chain& c, std::size_t s, const ComplexVector& psi,
                            const std::vector<ComplexMatrix>& p) {
  const Step& st = c.steps[s];
  const int n = c.qubits_before[s];
  if (st.prover) {
    ComplexVector out = psi;
    apply_operator(out, n, p[st.index].adjoint(), c.prover_wires);
    return out;
  }
  return apply_isometry_adjoint(psi, n + st.env, st.iso, c.mw_wires, st.env);
}

void project_accept(const Chain& c, ComplexVector& psi) {
  const Eigen::Index bit = Eigen::Index{1} << (c.final_qubits - 1 - c.out_wire);
  for (Eigen::Index i = 0; i < psi.size(); ++i)
    if (!(i & bit)) psi(i) = 0.0;
}

class SeeSaw {
 public:
  SeeSaw(const Chain& chain, std::vector<ComplexMatrix> actions)
      : c_(chain), p_(std::move(actions)) {
    states_.resize(c_.steps.size() + 1);
    states_[0] = ComplexVector::Zero(Eigen::Index{1} << c_.qubits_before[0]);
    states_[0](0) = 1.0;
    refresh_from(0);
  }

  double value() const {
    ComplexVector f = states_.back();
    project_accept(c_, f);
    return f.squaredNorm();
  }

  // One pass over all prover actions.
  void sweep() {
    for (std::size_t i = 0; i < c_.prover_steps.size(); ++i) update(i);
  }

  const std::vector<ComplexMatrix>& actions() const { return p_; }

 private:
  void refresh_from(std::size_t s) {
    for (std::size_t t = s; t < c_.steps.size(); ++t)
      states_[t + 1] = forward_step(c_, t, states_[t], p_);
  }

  void update(std::size_t i) {
    const std::size_t s = c_.prover_steps[i];
    const ComplexVector& psi = states_[s];
    ComplexVector phi = states_.back();
    project_accept(c_, phi);
    for (std::size_t t = c_.steps.size(); t-- > s + 1;) phi = backward_step(c_, t, phi, p_);
    // Tr(P G) = <phi| (P x I) |psi>
    const ComplexMatrix g = reduced_outer(psi, phi, c_.qubits_before[s], c_.prover_wires);
    Eigen::JacobiSVD<ComplexMatrix> svd(g, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const ComplexMatrix cand = svd.matrixV() * svd.matrixU().adjoint();
    const double gain_new = (cand * g).trace().real();
    const double gain_old = (p_[i] * g).trace().real();
    if (gain_new <= gain_old + 1e-15) return;
    p_[i] = cand;
    refresh_from(s);
  }

  const Chain& c_;
  std::vector<ComplexMatrix> p_;
  std::vector<ComplexVector> states_;  // states_[s] = state before step s
};

struct RunOutcome {
  std::vector<ComplexMatrix> actions;
  double value = 0.0;
  std::vector<double> history;
};

RunOutcome iterate(const Chain& chain, std::vector<ComplexMatrix> start, int iterations) {
  SeeSaw ss(chain, std::move(start));
  RunOutcome out;
  double prev = ss.value();
  out.history.push_back(prev);
  for (int it = 0; it < iterations; ++it) {
    ss.sweep();
    const double v = ss.value();
    out.history.push_back(v);
    if (v - prev < 1e-13) break;
    prev = v;
  }
  out.actions = ss.actions();
  out.value = out.history.back();
  return out;
}

}  // namespace

int default_prover_qubits(const VerifierSpec& verifier) {
  int env = 0;
  for (const auto& a : verifier.actions) env += a.environment_qubits();
  const int mw = verifier.register_qubits();
  return std::max(2 * mw, mw + env);
}

SeeSawResult see_saw_prover(const VerifierSpec& verifier, const SeeSawConfig& cfg) {
  if (cfg.restarts < 1 || cfg.iterations < 1)
    throw ArgumentError("see-saw needs at least one restart and one iteration");
  const int q_Q = cfg.prover_qubits > 0 ? cfg.prover_qubits : default_prover_qubits(verifier);
  const VerifierSpec lifted = isometric_lift(verifier);
  const Chain chain = make_chain(lifted, q_Q);
  const Eigen::Index d = Eigen::Index{1} << (q_Q + verifier.q_M);
  const std::size_t np = chain.prover_steps.size();

  std::vector<RunOutcome> runs(std::size_t(cfg.restarts));
  parallel_for(runs.size(), [&](std::size_t r) {
    Rng rng(derive_seed(cfg.rng_seed, r));
    std::vector<ComplexMatrix> start;
    for (std::size_t i = 0; i < np; ++i) start.push_back(haar_unitary(d, rng));
    runs[r] = iterate(chain, std::move(start), cfg.iterations);
  });

  std::size_t best = 0;
  for (std::size_t r = 1; r < runs.size(); ++r)
    if (runs[r].value > runs[best].value) best = r;

  SeeSawResult res;
  res.strategy.q_Q = q_Q;
  res.strategy.actions = std::move(runs[best].actions);
  res.history = std::move(runs[best].history);
  res.restarts_used = cfg.restarts;
  res.best_restart = int(best);
  res.value = run_protocol(verifier, res.strategy);
  return res;
}

SeeSawResult see_saw_from(const VerifierSpec& verifier, const ProverStrategy& start,
                          int iterations) {
  if (int(start.actions.size()) != verifier.prover_actions())
    throw CompatibilityError("starting strategy has the wrong number of actions");
  const Chain chain = make_chain(isometric_lift(verifier), start.q_Q);
  RunOutcome run = iterate(chain, start.actions, std::max(1, iterations));
  SeeSawResult res;
  res.strategy.q_Q = start.q_Q;
  res.strategy.actions = std::move(run.actions);
  res.history = std::move(run.history);
  res.restarts_used = 0;
  res.value = run_protocol(verifier, res.strategy);
  return res;
}

ProverStrategy purify_strategy(const VerifierSpec& verifier, const SdpSolution& solution) {
  const VerifierSpec lifted = isometric_lift(verifier);
  const SdpProgram prog = build_first_sdp(lifted);
  if (solution.blocks.size() != prog.blocks.size())
    throw ArgumentError(fmt::format("solution has {} blocks, program has {}",
                                    solution.blocks.size(), prog.blocks.size()));
  for (std::size_t j = 0; j < prog.blocks.size(); ++j)
    if (solution.blocks[j].rows() != prog.blocks[j].dim ||
        solution.blocks[j].cols() != prog.blocks[j].dim)
      throw ArgumentError(fmt::format("block {} has the wrong shape", j + 1));
  const auto res = prog.residuals(solution.blocks);
  for (std::size_t k = 0; k < res.size(); ++k)
    if (res[k] > 1e-5)
      throw ArgumentError(fmt::format("solution violates {} by {:.3e}",
                                      prog.constraints[k].label, res[k]));

  // Verifier actions in verifier-first order, as in the program.
  std::vector<CircuitAction> acts;
  if (lifted.starts_with == StartsWith::Prover) {
    CircuitAction id;
    id.in_qubits = lifted.register_qubits();
    acts.push_back(id);
  }
  acts.insert(acts.end(), lifted.actions.begin(), lifted.actions.end());

  const int mw = lifted.register_qubits();
  const std::size_t l = prog.blocks.size();
  int widest = mw;
  for (const auto& b : prog.blocks) {
    int q = 0;
    for (int d : b.qubit_dims) q += d;
    widest = std::max(widest, q);
  }
  const int q_Q = widest;
  const auto mw_wires = wire_range(q_Q, mw);
  const auto qm_wires = wire_range(0, q_Q + lifted.q_M);

  ProverStrategy strat;
  strat.q_Q = q_Q;
  int nb = mw;  // qubits of the verifier-side register after round j
  ComplexVector phi = ComplexVector::Zero(Eigen::Index{1} << (q_Q + nb));
  phi(0) = 1.0;
  for (std::size_t j = 0; j < l; ++j) {
    const int e = acts[j].environment_qubits();
    const ComplexVector psi = apply_isometry(phi, q_Q + nb, to_isometry(acts[j]), mw_wires, e);
    nb += e;

    const ComplexMatrix x = clip_psd(hermitian_part(solution.blocks[j]));
    const auto eg = eig_hermitian(x);
    const Eigen::Index db = Eigen::Index{1} << nb;
    ComplexVector target = ComplexVector::Zero(Eigen::Index{1} << (q_Q + nb));
    const double tr = std::max(eg.values.sum(), 1e-300);
    for (Eigen::Index k = 0; k < eg.values.size(); ++k) {
      const double lam = std::max(0.0, eg.values(k)) / tr;
      if (lam <= 0.0) continue;
      target.segment(k * db, db) = std::sqrt(lam) * eg.vectors.col(k);
    }
    const ComplexMatrix g = reduced_outer(psi, target, q_Q + nb, qm_wires);
    Eigen::JacobiSVD<ComplexMatrix> svd(g, Eigen::ComputeFullU | Eigen::ComputeFullV);
    strat.actions.push_back(svd.matrixV() * svd.matrixU().adjoint());
    phi = std::move(target);
  }
  return strat;
}

}  // namespace qipl
