#include <gtest/gtest.h>

#include <cmath>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "qipl/oracle.hpp"
#include "qipl/sdp.hpp"
#include "qipl/transforms.hpp"

using namespace qipl;
using fixtures::action;

namespace {

// Prover-first, two actions; W is rotated by the last action only.
VerifierSpec three_turn_fixed(double p, Rng& rng) {
  VerifierSpec v;
  v.q_M = 1;
  v.q_W = 1;
  v.output_qubit = 1;
  v.starts_with = StartsWith::Prover;
  v.actions = {action(2, {Gate::raw(haar_unitary(2, rng), {0})}),
               action(2, {fixtures::ry_prob(p, 1)})};
  return v;
}

// Acceptance fixed by a private rotation, whatever the prover sends.
VerifierSpec fixed_acceptance(double p) {
  return fixtures::two_turn({fixtures::ry_prob(p, 1)}, {}, 1);
}

}  // namespace

TEST(Dyadic, TwoThirdsOneThirdPicksFiveEighths) {
  const Dyadic a = choose_dyadic_alpha(2.0 / 3.0, 1.0 / 3.0);
  EXPECT_EQ(a.num, 5u);
  EXPECT_EQ(a.log2_den, 3);
  EXPECT_DOUBLE_EQ(a.value(), 0.625);
}

TEST(Dyadic, MatchesExhaustiveScan) {
  for (int cn = 1; cn <= 12; ++cn)
    for (int sn = 0; sn < cn; ++sn) {
      // interval [(3c+s)/4, c] with c = cn/12, s = sn/12
      const auto [num, k] = oracle::dyadic_scan(3 * cn + sn, 48, cn, 12);
      ASSERT_GE(num, 0);
      const Dyadic d = choose_dyadic_alpha(cn / 12.0, sn / 12.0);
      EXPECT_EQ(d.value(), double(num) / double(std::int64_t{1} << k)) << cn << "/" << sn;
    }
}

TEST(Dyadic, EmptyIntervalIsAParameterError) {
  EXPECT_THROW(choose_dyadic_alpha(0.5 + 1e-9, 0.5), ParameterError);
  EXPECT_THROW(choose_dyadic_alpha(0.3, 0.4), ParameterError);
}

TEST(Repetition, CountFormula) {
  // log2(1 / (1 - 1/8)) = 0.19265...
  EXPECT_EQ(repetition_count(1, 1.0, 0.5), 6);
  EXPECT_EQ(repetition_count(2, 1.0, 0.5), 11);
  EXPECT_THROW(repetition_count(0, 1.0, 0.5), ParameterError);
}

TEST(Helpers, RyMatrix) {
  const ComplexMatrix r = ry_matrix(0.8);
  EXPECT_NEAR(r(0, 0).real(), std::cos(0.4), 1e-15);
  EXPECT_NEAR(r(1, 0).real(), std::sin(0.4), 1e-15);
  EXPECT_TRUE(is_unitary(r));
}

TEST(Helpers, MultiControlledXTruthTable) {
  for (int nc = 1; nc <= 5; ++nc) {
    std::vector<int> ctrl;
    for (int i = 0; i < nc; ++i) ctrl.push_back(i);
    const int target = nc;
    std::vector<int> scratch;
    for (int i = 0; i < std::max(0, nc - 2); ++i) scratch.push_back(nc + 1 + i);
    const int n = nc + 1 + int(scratch.size());
    const auto gates = multi_controlled_x(ctrl, target, scratch);
    const CircuitAction a = action(n, gates);
    const ComplexMatrix u = to_isometry(a);
    for (int c = 0; c < (1 << nc); ++c)
      for (int t = 0; t < 2; ++t) {
        const Eigen::Index in = (Eigen::Index(c) << (n - nc)) | (Eigen::Index(t) << (n - nc - 1));
        const int flip = c == (1 << nc) - 1 ? 1 : 0;
        const Eigen::Index want = (Eigen::Index(c) << (n - nc)) | (Eigen::Index(t ^ flip) << (n - nc - 1));
        EXPECT_NEAR(std::abs(u(want, in)), 1.0, 1e-12) << nc << " " << c << " " << t;
      }
  }
  EXPECT_THROW(multi_controlled_x({0, 1, 2, 3}, 4, {}), ArgumentError);
}

TEST(Helpers, AdjointActionInverts) {
  Rng rng(1);
  const CircuitAction a =
      action(3, {Gate::raw(haar_unitary(4, rng), {2, 0}), Gate::h(1), Gate::t(2), Gate::cnot(1, 0)});
  const ComplexMatrix u = to_isometry(a);
  EXPECT_LT((to_isometry(adjoint_action(a)) * u - identity(8)).norm(), 1e-12);
}

TEST(PerfectCompleteness, ShapeAndProvenance) {
  const VerifierSpec v = fixtures::two_turn({}, {}, 0);
  const VerifierSpec out = perfect_completeness_transform(v, 2.0 / 3.0, 1.0 / 3.0);
  EXPECT_EQ(out.turns(), v.turns() + 2);
  EXPECT_EQ(out.q_M, v.q_M + v.q_W);
  EXPECT_TRUE(validate_verifier(out).empty());
  ASSERT_FALSE(out.provenance.empty());
  EXPECT_EQ(out.provenance.back().transform, "perfect_completeness");
  EXPECT_FALSE(out.provenance.back().input_hash.empty());
}

TEST(PerfectCompleteness, YesSideBecomesPerfect) {
  // The prover controls the output, so it can hit the target acceptance.
  const VerifierSpec v = fixtures::two_turn({}, {}, 0);
  EXPECT_NEAR(omega(perfect_completeness_transform(v, 2.0 / 3.0, 1.0 / 3.0)), 1.0, 1e-6);
}

TEST(PerfectCompleteness, NoSideStaysBelowBound) {
  const double bound = 1.0 - (1.0 / 9.0) / 2.0;  // 17/18
  for (double p : {0.0, 0.2, 1.0 / 3.0}) {
    const double w = omega(perfect_completeness_transform(fixed_acceptance(p), 2.0 / 3.0, 1.0 / 3.0));
    EXPECT_LE(w, bound + 1e-6) << p;
  }
}

TEST(Sequential, SingleRunKeepsValue) {
  for (double p : {1.0, 0.7}) {
    const VerifierSpec t = fixtures::no_turn(p);
    EXPECT_NEAR(omega(sequential_repetition(t, 1)), p, 1e-6);
  }
}

TEST(Sequential, TwoRuns) {
  EXPECT_NEAR(omega(sequential_repetition(fixtures::no_turn(1.0), 2)), 1.0, 1e-6);
  EXPECT_LE(omega(sequential_repetition(fixtures::no_turn(0.7), 2)), 0.49 + 1e-4);
}

TEST(Sequential, RegisterCapIsEnforced) {
  Rng rng(2);
  RandomVerifierOptions o;
  o.q_M = 2;
  o.q_W = 3;
  EXPECT_THROW(sequential_repetition(random_verifier(o, rng), 4), SizeError);
  EXPECT_THROW(sequential_repetition(fixtures::no_turn(1.0), 0), ArgumentError);
}

TEST(Parallel, Multiplicative) {
  const VerifierSpec half = fixtures::two_turn({Gate::h(1)}, {}, 1);
  EXPECT_NEAR(omega(parallel_repetition(half, 1)), 0.5, 1e-6);
  EXPECT_NEAR(omega(parallel_repetition(half, 2)), 0.25, 1e-5);
  EXPECT_NEAR(omega(parallel_repetition(fixtures::two_turn({}, {}, 0), 2)), 1.0, 1e-6);
  Rng rng(3);
  const VerifierSpec v = fixtures::random_unitary(rng, 2);
  const double w = omega(v);
  EXPECT_NEAR(omega(parallel_repetition(v, 2)), w * w, 1e-5);
}

TEST(Parallel, CapExceeded) {
  EXPECT_THROW(parallel_repetition(fixtures::two_turn({}, {}, 0), 7), SizeError);
}

TEST(Parallel, AfterPerfectCompletenessSquares) {
  const VerifierSpec pc =
      perfect_completeness_transform(fixtures::no_turn(1.0 / 3.0), 2.0 / 3.0, 1.0 / 3.0);
  const double w = omega(pc);
  EXPECT_NEAR(omega(parallel_repetition(pc, 2)), w * w, 1e-4);
}

TEST(TurnHalving, CompleteInputStaysComplete) {
  Rng rng(4);
  const VerifierSpec v = fixtures::five_turn_fixed(1.0, rng);
  ASSERT_EQ(v.turns(), 5);
  const VerifierSpec h = turn_halving(v);
  EXPECT_EQ(h.turns(), 3);
  EXPECT_NEAR(omega(h), 1.0, 1e-6);
}

TEST(TurnHalving, SoundnessOneSixteenth) {
  Rng rng(5);
  const VerifierSpec v = fixtures::five_turn_fixed(1.0 / 16.0, rng);
  EXPECT_NEAR(omega(v), 1.0 / 16.0, 1e-6);
  EXPECT_LE(omega(turn_halving(v)), 5.0 / 8.0 + 1e-6);
}

TEST(TurnHalving, WrongShapesRejected) {
  Rng rng(6);
  EXPECT_THROW(turn_halving(fixtures::random_unitary(rng, 2)), ArgumentError);  // 4 turns
  EXPECT_THROW(turn_halving(three_turn_fixed(1.0, rng)), ArgumentError);
}

TEST(TurnHalving, ChainDepthIsLimited) {
  Rng rng(9);
  VerifierSpec v = fixtures::five_turn_fixed(1.0, rng);
  for (int i = 0; i + 1 < kMaxHalvingDepth; ++i) v.provenance.push_back({"turn_halving", "m=2", "0"});
  EXPECT_NO_THROW(turn_halving(v));
  v.provenance.push_back({"turn_halving", "m=2", "0"});
  EXPECT_THROW(turn_halving(v), ArgumentError);
}

TEST(TurnHalving, BackwardBranchOnHonestIdentityRunAccepts) {
  // All actions identity: the backward branch sees W = 0 and accepts, and so
  // does the forward branch when the output is prepared by the last action.
  VerifierSpec v;
  v.q_M = 1;
  v.q_W = 1;
  v.output_qubit = 1;
  v.starts_with = StartsWith::Prover;
  v.actions = {action(2), action(2), action(2, {Gate::x(1)})};
  const VerifierSpec h = turn_halving(v);
  EXPECT_NEAR(run_protocol(h, identity_prover(h, 1)), 1.0, 1e-12);
}

TEST(SingleCoin, CompletenessAndSoundness) {
  Rng rng(7);
  const VerifierSpec yes = three_turn_fixed(1.0, rng);
  ASSERT_EQ(yes.turns(), 3);
  EXPECT_NEAR(omega(single_coin_qmaml(yes)), 1.0, 1e-6);
  const VerifierSpec no = three_turn_fixed(1.0 / 16.0, rng);
  EXPECT_LE(omega(single_coin_qmaml(no)), 5.0 / 8.0 + 1e-6);
  EXPECT_THROW(single_coin_qmaml(fixtures::five_turn_fixed(1.0, rng)), ArgumentError);
}

TEST(SingleCoin, CoinIsUniformWhateverTheProverDoes) {
  Rng rng(8);
  VerifierSpec out = single_coin_qmaml(three_turn_fixed(0.3, rng));
  // The coin sits just before the output wire. Its basis populations are
  // untouched by gates controlled on it, so read it after the first action.
  const int coin = out.output_qubit - 1;
  out.actions[1] = action(out.register_qubits());
  out.output_qubit = coin;
  for (int i = 0; i < 5; ++i) {
    ProverStrategy p;
    p.q_Q = 1;
    const Eigen::Index d = Eigen::Index{1} << (1 + out.q_M);
    p.actions = {haar_unitary(d, rng), haar_unitary(d, rng)};
    EXPECT_NEAR(run_protocol(out, p), 0.5, 1e-12);
  }
}
