// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Every random choice is seeded, so reruns print the same
// numbers.

#include <fmt/format.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "qipl/classical.hpp"
#include "qipl/oracle.hpp"
#include "qipl/sac1.hpp"
#include "qipl/sat3.hpp"
#include "qipl/sdp.hpp"
#include "qipl/statetest.hpp"
#include "qipl/transforms.hpp"
#include "sac1_gen.hpp"

using namespace qipl;
using fixtures::action;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ---- 1 ------------------------------------------------------------------

Outcome sdp_oracle_agreement() {
  const auto t0 = std::chrono::steady_clock::now();
  double worst_diff = 0.0, worst_gap = -1.0;
  for (int i = 0; i < 25; ++i) {
    Rng rng(derive_seed(101, std::uint64_t(i)));
    const VerifierSpec v = fixtures::random_unitary(rng, 2 + i % 2);
    const OmegaResult om = omega_detailed(v);
    SeeSawConfig cfg;
    cfg.rng_seed = std::uint64_t(i);
    const SeeSawResult ss = see_saw_prover(v, cfg);
    worst_diff = std::max(worst_diff, std::abs(om.value - ss.value));
    worst_gap = std::max(worst_gap, om.dual - om.value);
  }
  const double secs = seconds_since(t0);
  Outcome o;
  o.pass = worst_diff <= 1e-4 && worst_gap <= 1e-6 && secs < 300.0;
  o.detail = fmt::format("25 verifiers, max |sdp-seesaw| = {:.2e}, max dual-primal = {:.2e}, {:.1f} s",
                         worst_diff, worst_gap, secs);
  return o;
}

// ---- 2 ------------------------------------------------------------------

Outcome sandwich() {
  int branches = 0;
  double worst_low = -1.0, worst_high = -1.0;
  for (int i = 0; i < 10; ++i) {
    Rng rng(derive_seed(202, std::uint64_t(i)));
    RandomVerifierOptions o;
    o.actions = 2 + i % 2;
    o.measurements = 1 + i % 2;
    const VerifierSpec v = random_verifier(o, rng);
    const double w = omega(v);
    SeeSawConfig cfg;
    cfg.restarts = 4;
    cfg.rng_seed = std::uint64_t(i);
    const SeeSawResult ss = see_saw_prover(v, cfg);
    for (const auto& [u, br] : branch_probabilities(v, ss.strategy)) {
      const double hat = solve(build_second_sdp(v, u)).objective_value;
      worst_low = std::max(worst_low, br.probability * br.conditional_acceptance - hat);
      worst_high = std::max(worst_high, hat - w);
      ++branches;
    }
  }
  Outcome o;
  o.pass = worst_low <= 1e-4 && worst_high <= 1e-4;
  o.detail = fmt::format("{} branches on 10 verifiers, max(branch - hat) = {:.2e}, max(hat - omega) = {:.2e}",
                         branches, worst_low, worst_high);
  return o;
}

// ---- 3 ------------------------------------------------------------------

// The prover decides, through a controlled flip, how much weight the
// private coin's two outcomes get: omega = max(p, 1-p), and every value in
// between is reachable.
VerifierSpec adjustable(double p, Rng& rng) {
  return fixtures::two_turn({fixtures::ry_prob(p, 1), Gate::raw(haar_unitary(2, rng), {0})},
                            {Gate::raw(haar_unitary(2, rng), {0}), Gate::cnot(0, 1)}, 1);
}

// The prover's message is scrambled and discarded: omega = p.
VerifierSpec fixed(double p, Rng& rng) {
  return fixtures::two_turn({fixtures::ry_prob(p, 1), Gate::raw(haar_unitary(2, rng), {0})},
                            {Gate::raw(haar_unitary(2, rng), {0})}, 1);
}

Outcome perfect_completeness() {
  const double c = 2.0 / 3.0, s = 1.0 / 3.0, bound = 1.0 - (c - s) * (c - s) / 2.0;
  Rng rng(303);
  std::uniform_real_distribution<double> yes_p(c, 1.0), no_p(0.0, s);
  double worst_yes = 1.0, worst_no = 0.0, min_in = 1.0, max_in = 0.0;
  for (int i = 0; i < 10; ++i) {
    const VerifierSpec y = adjustable(yes_p(rng), rng);
    const VerifierSpec n = fixed(no_p(rng), rng);
    min_in = std::min(min_in, omega(y));
    max_in = std::max(max_in, omega(n));
    worst_yes = std::min(worst_yes, omega(perfect_completeness_transform(y, c, s)));
    worst_no = std::max(worst_no, omega(perfect_completeness_transform(n, c, s)));
  }
  Outcome o;
  o.pass = min_in >= c - 1e-6 && max_in <= s + 1e-6 && worst_yes >= 1.0 - 1e-6 &&
           worst_no <= bound + 1e-6;
  o.detail = fmt::format("yes inputs >= {:.4f} -> min {:.8f}; no inputs <= {:.4f} -> max {:.6f} (bound {:.6f})",
                         min_in, worst_yes, max_in, worst_no, bound);
  return o;
}

// ---- 4 ------------------------------------------------------------------

Outcome parallel_multiplicativity() {
  double worst = 0.0;
  for (int i = 0; i < 10; ++i) {
    Rng rng(derive_seed(404, std::uint64_t(i)));
    const VerifierSpec v = fixtures::random_unitary(rng, 2, i % 2 ? StartsWith::Prover : StartsWith::Verifier);
    const double w = omega(v);
    worst = std::max(worst, std::abs(omega(parallel_repetition(v, 2)) - w * w));
  }
  Outcome o;
  o.pass = worst <= 1e-5;
  o.detail = fmt::format("10 verifiers, max |omega(VxV) - omega(V)^2| = {:.2e}", worst);
  return o;
}

// ---- 5 ------------------------------------------------------------------

Outcome turn_halving_bounds() {
  double worst_complete = 1.0, worst_margin = 1.0;
  for (int i = 0; i < 3; ++i) {
    Rng rng(derive_seed(505, std::uint64_t(i)));
    worst_complete = std::min(worst_complete, omega(turn_halving(fixtures::five_turn_fixed(1.0, rng))));
    const VerifierSpec v = fixtures::five_turn_fixed(1.0 / 16.0, rng);
    const double s = omega(v);
    const double bound = (1.0 + std::sqrt(s)) / 2.0;
    worst_margin = std::min(worst_margin, bound - omega(turn_halving(v)));
  }
  // Random scramblers on (M, W0) and a private coin on W1 that is XORed into
  // the output: omega = max(p, 1 - p) and the halved bound is tight.
  Rng rng(509);
  auto on3 = [](std::vector<Gate> g) { return action(3, std::move(g)); };
  VerifierSpec r;
  r.q_M = 1;
  r.q_W = 2;
  r.output_qubit = 2;
  r.starts_with = StartsWith::Prover;
  r.actions = {on3({Gate::raw(haar_unitary(4, rng), {0, 1}), fixtures::ry_prob(0.5, 2)}),
               on3({Gate::raw(haar_unitary(4, rng), {0, 1})}),
               on3({Gate::raw(haar_unitary(4, rng), {0, 1}), Gate::cnot(1, 2)})};
  const double s = omega(r);
  const double halved = omega(turn_halving(r));
  worst_margin = std::min(worst_margin, (1.0 + std::sqrt(s)) / 2.0 - halved);

  Outcome o;
  o.pass = worst_complete >= 1.0 - 1e-6 && worst_margin >= -1e-6;
  o.detail = fmt::format("complete -> min {:.8f}; s = 1/16 (bound 5/8) and s = {:.4f} (bound {:.4f}, halved {:.4f}): "
                         "min (bound - halved) = {:.2e}",
                         worst_complete, s, (1.0 + std::sqrt(s)) / 2.0, halved, worst_margin);
  return o;
}

// ---- 6 ------------------------------------------------------------------

Cnf3Formula formula(int n, std::vector<std::array<int, 3>> clauses) {
  Cnf3Formula f;
  f.num_vars = n;
  f.clauses = std::move(clauses);
  return f;
}

Outcome sat_protocol() {
  const Cnf3Formula example = formula(4, {{1, 2, 3}, {-4, -2, 3}, {4, -1, -3}});
  const std::vector<bool> alpha{true, true, true, true};
  const SatTranscript t = honest_3sat_prover(example, alpha);
  const std::vector<int> msgs = transcript_messages(example, t);
  Rng rng(606);
  int honest_ok = 0;
  for (int i = 0; i < 100; ++i) {
    const FingerprintParams pr = draw_3sat_params(example, rng);
    const ClassicalProtocolSpec proto = build_3sat_protocol(example, pr);
    if (run_3sat_verifier(example, pr, t).accepted && count_accepting(proto, msgs) == proto.coin_count)
      ++honest_ok;
  }

  const std::vector<Cnf3Formula> toys{
      formula(1, {{1, 1, 1}, {-1, -1, -1}}),
      formula(2, {{1, 1, 2}, {1, 1, -2}, {-1, -1, 2}, {-1, -1, -2}}),
      formula(3, {{1, 1, 1}, {-1, 2, 3}, {-2, -2, -2}, {-3, -3, -3}}),
  };
  int mismatches = 0, exact_draws = 0;
  std::string rates;
  bool rates_ok = true;
  for (std::size_t f = 0; f < toys.size(); ++f) {
    const SatEncoding enc = sat_encoding(toys[f]);
    Rng draw(derive_seed(607, f));
    for (int i = 0; i < 40; ++i, ++exact_draws) {
      const FingerprintParams pr = draw_3sat_params(toys[f], draw);
      const double v = enumerate_classical(build_3sat_protocol(toys[f], pr)).value;
      if (v != (oracle::sat_prover_can_collide(toys[f], enc, pr.p, pr.r) ? 1.0 : 0.0)) ++mismatches;
    }
    int collisions = 0;
    const int n = 10'000;
    for (int i = 0; i < n; ++i) {
      const FingerprintParams pr = draw_3sat_params(toys[f], draw);
      collisions += oracle::sat_prover_can_collide(toys[f], enc, pr.p, pr.r);
    }
    const double rate = double(collisions) / n;
    const double bound = fingerprint_collision_bound(enc.b, enc.ell);
    rates_ok = rates_ok && rate <= 10.0 * bound;
    rates += fmt::format("{}{:.4f}/{:.4f}", f ? ", " : "", rate, bound);
  }
  Outcome o;
  o.pass = honest_ok == 100 && mismatches == 0 && rates_ok;
  o.detail = fmt::format("honest accepted {}/100; enumeration vs collision oracle {} mismatches on {} draws; "
                         "collision rate/bound over 10^4 draws: {}",
                         honest_ok, mismatches, exact_draws, rates);
  return o;
}

// ---- 7 ------------------------------------------------------------------

Outcome sac1_exact() {
  std::mt19937_64 rng(707);
  int matches = 0, yes = 0, yes_one = 0, no = 0, no_bounded = 0;
  for (int i = 0; i < 500; ++i) {
    const int gates = std::uniform_int_distribution<int>(3, 12)(rng);
    const Sac1Circuit c = fixtures::random_sac1(rng, 3, gates);
    std::vector<bool> x(3);
    for (auto&& b : x) b = std::bernoulli_distribution(0.5)(rng);
    const Rational g = sac1_game_value(c, x);
    const auto en = enumerate_classical(build_sac1_protocol(c, x));
    if (en.exact && g == make_rational(en.accepted_weight, en.total_weight)) ++matches;
    if (sac1_evaluate(c, x)) {
      ++yes;
      yes_one += g == Rational{1, 1};
    } else {
      ++no;
      no_bounded += g.value() <= 1.0 - std::ldexp(1.0, -c.depth()) + 1e-15;
    }
  }
  Outcome o;
  o.pass = matches == 500 && yes_one == yes && no_bounded == no && yes > 0 && no > 0;
  o.detail = fmt::format("exact matches {}/500; yes {}/{} at 1; no {}/{} within 1 - 2^-depth",
                         matches, yes_one, yes, no_bounded, no);
  return o;
}

// ---- 8 ------------------------------------------------------------------

Outcome np_witness() {
  struct Extracted {
    VerifierSpec v;
    std::string u;
    std::vector<ComplexMatrix> blocks;
    double c;
  };
  std::vector<Extracted> all;
  int accepted = 0;
  for (int i = 0; i < 4; ++i) {
    Rng rng(derive_seed(808, std::uint64_t(i)));
    RandomVerifierOptions o;
    o.actions = 2 + i % 2;
    o.measurements = 1 + i % 2;
    const VerifierSpec v = random_verifier(o, rng);
    std::size_t bits = 0;
    for (const auto& a : v.actions) bits += a.measured_wires().size();
    for (std::uint64_t m = 0; m < (std::uint64_t{1} << bits); ++m) {
      std::string u;
      for (std::size_t b = 0; b < bits; ++b) u += (m >> (bits - 1 - b)) & 1 ? '1' : '0';
      const SdpSolution s = solve(build_second_sdp(v, u));
      const bool ok = check_np_witness(v, u, s.blocks, s.objective_value).accepted;
      accepted += ok;
      all.push_back({v, u, s.blocks, s.objective_value});
    }
  }
  Rng rng(809);
  int rejected = 0;
  for (int t = 0; t < 50; ++t) {
    const Extracted& e = all[std::size_t(t) % all.size()];
    std::vector<ComplexMatrix> bad = e.blocks;
    ComplexMatrix& b = bad[std::uniform_int_distribution<std::size_t>(0, bad.size() - 1)(rng)];
    const auto r = std::uniform_int_distribution<Eigen::Index>(0, b.rows() - 1)(rng);
    const auto c = std::uniform_int_distribution<Eigen::Index>(0, b.cols() - 1)(rng);
    const double phase = std::uniform_real_distribution<double>(0.0, 2.0 * M_PI)(rng);
    b(r, c) += std::polar(1e-2, phase);
    rejected += !check_np_witness(e.v, e.u, bad, e.c).accepted;
  }
  Outcome o;
  o.pass = accepted == int(all.size()) && rejected == 50;
  o.detail = fmt::format("extracted witnesses accepted {}/{}; perturbed rejected {}/50", accepted,
                         all.size(), rejected);
  return o;
}

// ---- 9 ------------------------------------------------------------------

StatePrepCircuit prep(int wires, std::vector<Gate> gates, std::vector<int> outputs) {
  return StatePrepCircuit{action(wires, std::move(gates)), std::move(outputs)};
}

// Verifier-first, four actions on (M, W), only the first one rotating W.
VerifierSpec rotating_verifier(double p) {
  VerifierSpec v;
  v.q_M = 1;
  v.q_W = 1;
  v.output_qubit = 1;
  v.actions = {action(2, {fixtures::ry_prob(p, 1)}), action(2), action(2), action(2)};
  return v;
}

bool averaging_holds(const IndivProdInstance& inst) {
  const auto b = product_distance_bounds(inst);
  if (!b.exact) return false;
  return b.lower >= *b.exact / double(inst.k) - 1e-9 && *b.exact <= b.upper + 1e-9;
}

Outcome hardness_chain() {
  const double c = 2.0 / 3.0, s = 1.0 / 3.0;
  const int l = 3;
  const double alpha = std::pow(std::sqrt(c) - std::sqrt(s), 2) / (4.0 * (l - 1));
  double worst_margin = 1.0;
  int averaging_ok = 0, averaging_total = 0;
  for (double p : {0.0, 0.1, 0.25, 1.0 / 3.0}) {
    const VerifierSpec v = rotating_verifier(p);
    const ProverStrategy id = identity_prover(v, 0);
    const auto snaps = protocol_snapshots(v, id);
    std::vector<StatePrepCircuit> sim{prep(2, {}, {0, 1})};
    for (std::size_t j = 1; j < snaps.size(); j += 2) sim.push_back(density_prep_circuit(snaps[j].matrix()));
    // The simulated last snapshot claims acceptance c although omega <= s.
    sim.back() = prep(2, {fixtures::ry_prob(c, 1)}, {0, 1});
    const IndivProdInstance inst = build_hardness_instance(v, sim, {c, s, 0.0});
    const auto b = product_distance_bounds(inst);
    worst_margin = std::min(worst_margin, b.exact.value_or(-1.0) - alpha);
    averaging_ok += averaging_holds(inst);
    ++averaging_total;
  }

  // Ground truth: RY rotations of |0> at trace distance d from |0>.
  auto at_distance = [](double d) { return prep(1, {fixtures::ry_prob(d * d, 0)}, {0}); };
  Rng rng(909);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  int correct = 0;
  std::map<std::string, int> seen;
  for (int i = 0; i < 50; ++i) {
    IndivProdInstance inst;
    inst.k = 1 + i % 3;
    inst.delta = 0.05 + 0.1 * unit(rng);
    inst.alpha = std::min(1.0, inst.k * inst.delta + 0.05 + 0.5 * unit(rng));
    const double lo = inst.delta, hi = inst.alpha / inst.k;
    std::vector<double> d(std::size_t(inst.k));
    const int mode = i % 3;  // 0 yes, 1 no, 2 between the thresholds
    for (auto& x : d) x = lo * unit(rng);
    if (mode == 0) d[std::size_t(i) % d.size()] = hi + (1.0 - hi) * unit(rng);
    if (mode == 2) d[0] = lo + (hi - lo) * (0.1 + 0.8 * unit(rng));
    for (double x : d) inst.pairs.emplace_back(at_distance(0.0), at_distance(x));
    const Verdict truth = mode == 0 ? Verdict::Yes : mode == 1 ? Verdict::No : Verdict::PromiseViolation;
    const auto dec = decide_indivprod(inst);
    correct += dec.verdict == truth;
    ++seen[to_string(truth)];
    averaging_ok += averaging_holds(inst);
    ++averaging_total;
  }
  Outcome o;
  o.pass = worst_margin >= -1e-6 && correct == 50 && averaging_ok == averaging_total;
  o.detail = fmt::format("alpha = {:.6f}, min (exact - alpha) = {:.4e}; verdicts {}/50 (yes {}, no {}, "
                         "promise-violation {}); averaging {}/{}",
                         alpha, worst_margin, correct, seen["yes"], seen["no"],
                         seen["promise-violation"], averaging_ok, averaging_total);
  return o;
}

// ---- 10 -----------------------------------------------------------------

DensityMatrix qubit_state(Rng& rng) {
  const Eigen::Index rank = std::bernoulli_distribution(0.3)(rng) ? 1 : 0;
  return DensityMatrix(random_density(2, rank, rng), {1});
}

// Random qubit channel: a two-qubit unitary against a fresh |0>, then the
// ancilla is discarded.
DensityMatrix channel(const ComplexMatrix& u, const DensityMatrix& rho) {
  ComplexMatrix zero = ComplexMatrix::Zero(2, 2);
  zero(0, 0) = 1.0;
  const ComplexMatrix big = u * tensor(rho.matrix(), zero) * u.adjoint();
  return partial_trace(DensityMatrix::from_clipped(big, {1, 1}, true), {0});
}

Outcome distance_suite() {
  Rng rng(1010);
  int violations = 0;
  double worst = 0.0;
  auto check = [&](double slack_used) {
    worst = std::max(worst, slack_used);
    if (slack_used > 1e-9) ++violations;
  };
  for (int i = 0; i < 10'000; ++i) {
    const DensityMatrix a1 = qubit_state(rng), b1 = qubit_state(rng);
    const DensityMatrix a2 = qubit_state(rng), b2 = qubit_state(rng);
    const double t1 = trace_distance(a1, b1), t2 = trace_distance(a2, b2);
    const double tp = trace_distance(DensityMatrix(tensor(a1.matrix(), a2.matrix()), {1, 1}),
                                     DensityMatrix(tensor(b1.matrix(), b2.matrix()), {1, 1}));
    check(std::max(t1, t2) - tp);  // each factor below the product
    check(tp - (t1 + t2));         // product below the sum

    const ComplexMatrix u = haar_unitary(4, rng);
    const DensityMatrix ea = channel(u, a1), eb = channel(u, b1);
    check(trace_distance(ea, eb) - t1);  // data processing, trace distance

    const ComplexMatrix v = haar_unitary(2, rng);
    const double tv = trace_distance(DensityMatrix::from_clipped(v * a1.matrix() * v.adjoint(), {1}, true),
                                     DensityMatrix::from_clipped(v * b1.matrix() * v.adjoint(), {1}, true));
    check(std::abs(tv - t1));  // unitary invariance

    check(fidelity(a1, b1) - fidelity(ea, eb));  // data processing, fidelity
  }
  Outcome o;
  o.pass = violations == 0;
  o.detail = fmt::format("10^4 tuples, {} violations beyond 1e-9, largest excess {:.2e}", violations, worst);
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"SDP and see-saw agree", sdp_oracle_agreement},
      {"branch sandwich", sandwich},
      {"perfect completeness", perfect_completeness},
      {"parallel repetition is multiplicative", parallel_multiplicativity},
      {"turn halving", turn_halving_bounds},
      {"3-SAT protocol", sat_protocol},
      {"SAC1 game value", sac1_exact},
      {"NP witness check", np_witness},
      {"state-testing hardness chain", hardness_chain},
      {"distance-measure inequalities", distance_suite},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, fmt::format("threw: {}", e.what())};
    }
    failed += !o.pass;
    fmt::print("{} {:>2} {}: {} [{:.1f} s]\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first,
               o.detail, seconds_since(t0));
    std::fflush(stdout);
  }
  fmt::print("{} of {} criteria passed\n", criteria.size() - std::size_t(failed), criteria.size());
  return failed == 0 ? 0 : 1;
}
