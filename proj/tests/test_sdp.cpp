#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "fixtures.hpp"
#include "qipl/oracle.hpp"
#include "qipl/sdp.hpp"

using namespace qipl;
using fixtures::action;

namespace {

SdpProgram one_block(int dim) {
  SdpProgram p;
  SdpBlock b;
  b.name = "X";
  b.dim = dim;
  b.qubit_dims = {dim == 1 ? 0 : int(std::log2(dim))};
  p.blocks.push_back(b);
  return p;
}

// A W coin prepared by H that the prover never sees decides acceptance.
VerifierSpec private_coin() { return fixtures::two_turn({Gate::h(1)}, {}, 1); }

std::set<std::string> labels(const SdpProgram& p) {
  std::set<std::string> out;
  for (const auto& c : p.constraints) out.insert(c.label);
  return out;
}

CircuitAction relabel(const CircuitAction& a, const std::vector<int>& perm) {
  CircuitAction out = a;
  for (auto& g : out.gates)
    for (auto& w : g.wires)
      if (w < int(perm.size())) w = perm[std::size_t(w)];
  return out;
}

}  // namespace

TEST(Solve, RankOneProjectorOverStates) {
  SdpProgram p = one_block(2);
  ComplexMatrix plus(2, 2);
  plus << 0.5, 0.5, 0.5, 0.5;
  p.objective.push_back({0, plus});
  p.constraints.push_back({{{0, identity(2)}}, 1.0, "trace"});
  const SdpSolution s = solve(p);
  EXPECT_NEAR(s.objective_value, 1.0, tol::bound);
  EXPECT_LE(std::abs(s.dual_value - s.objective_value), tol::bound);
  EXPECT_LE(s.primal_residual, 1e-7);
}

TEST(Solve, ScalarBlock) {
  SdpProgram p = one_block(1);
  p.objective.push_back({0, identity(1)});
  p.constraints.push_back({{{0, identity(1)}}, 0.5, "pin"});
  EXPECT_NEAR(solve(p).objective_value, 0.5, 1e-7);
}

TEST(Solve, InfeasibleProgramGivesCertificate) {
  SdpProgram p = one_block(1);
  p.objective.push_back({0, identity(1)});
  p.constraints.push_back({{{0, identity(1)}}, -1.0, "negative"});
  EXPECT_THROW(solve(p), InfeasibleError);
}

TEST(Solve, DeterministicAcrossRuns) {
  Rng rng(1);
  const VerifierSpec v = fixtures::random_unitary(rng, 2);
  const SdpSolution a = solve(build_first_sdp(v)), b = solve(build_first_sdp(v));
  EXPECT_EQ(a.objective_value, b.objective_value);
  EXPECT_EQ(a.iterations, b.iterations);
}

TEST(FirstProgram, ProverWritableMessageAccepts) {
  EXPECT_NEAR(omega(fixtures::two_turn({}, {}, 0)), 1.0, 1e-6);
}

TEST(FirstProgram, UntouchedPrivateWireRejects) {
  EXPECT_NEAR(omega(fixtures::two_turn({}, {}, 1)), 0.0, 1e-6);
}

TEST(FirstProgram, PrivateCoinGivesOneHalf) {
  EXPECT_NEAR(omega(private_coin()), 0.5, 1e-6);
}

TEST(FirstProgram, BlockAndConstraintFamilies) {
  Rng rng(2);
  const VerifierSpec v = fixtures::random_unitary(rng, 3);  // l = 2 rounds
  const SdpProgram p = build_first_sdp(v);
  ASSERT_EQ(p.blocks.size(), 2u);
  EXPECT_EQ(labels(p), (std::set<std::string>{"ptrace[1]", "ptrace[2]", "trace[1]", "trace[2]"}));
  EXPECT_NO_THROW(p.validate());
}

TEST(FirstProgram, OddTurnCountGetsLeadingVerifierTurn) {
  Rng rng(3);
  const VerifierSpec v = fixtures::random_unitary(rng, 2, StartsWith::Prover);  // 3 turns
  EXPECT_EQ(v.turns(), 3);
  EXPECT_EQ(build_first_sdp(v).blocks.size(), 2u);
}

TEST(FirstProgram, AlmostUnitaryIsOutOfScope) {
  VerifierSpec v = fixtures::two_turn({Gate::measure(1)}, {}, 1);
  v.actions[0].kind = ActionKind::AlmostUnitary;
  EXPECT_THROW(build_first_sdp(v), ScopeError);
  EXPECT_NO_THROW(build_first_sdp(isometric_lift(v)));
}

TEST(FirstProgram, RelabelingMessageWiresKeepsValue) {
  Rng rng(4);
  RandomVerifierOptions o;
  o.q_M = 2;
  o.q_W = 1;
  o.actions = 2;
  const VerifierSpec v = random_verifier(o, rng);
  VerifierSpec w = v;
  for (auto& a : w.actions) a = relabel(a, {1, 0});
  EXPECT_NEAR(omega(v), omega(w), 1e-6);
}

TEST(SecondProgram, MeasurementFreeMatchesFirst) {
  Rng rng(5);
  const VerifierSpec v = fixtures::random_unitary(rng, 3);
  const SdpProgram a = build_first_sdp(v), b = build_second_sdp(v, "");
  ASSERT_EQ(a.blocks.size(), b.blocks.size());
  for (std::size_t j = 0; j < a.blocks.size(); ++j) EXPECT_EQ(a.blocks[j].dim, b.blocks[j].dim);
  EXPECT_NEAR(solve(a).objective_value, solve(b).objective_value, 1e-6);
}

TEST(SecondProgram, ImpossibleBranchHasValueZero) {
  VerifierSpec v = fixtures::two_turn({Gate::measure(1)}, {Gate::x(1)}, 1);
  v.actions[0].kind = ActionKind::AlmostUnitary;
  // W starts at |0>, so outcome 1 never happens.
  const auto b = branch_probabilities(v, identity_prover(v, 1));
  EXPECT_NEAR(b.at("1").probability, 0.0, 1e-12);
  EXPECT_NEAR(solve(build_second_sdp(v, "1")).objective_value, 0.0, 1e-6);
  EXPECT_NEAR(solve(build_second_sdp(v, "0")).objective_value, 1.0, 1e-6);
}

TEST(SecondProgram, OutcomeStringChecked) {
  VerifierSpec v = fixtures::two_turn({Gate::measure(1)}, {}, 1);
  v.actions[0].kind = ActionKind::AlmostUnitary;
  EXPECT_THROW(build_second_sdp(v, ""), ArgumentError);
  EXPECT_THROW(build_second_sdp(v, "01"), ArgumentError);
  EXPECT_THROW(build_second_sdp(v, "x"), ArgumentError);
}

TEST(SecondProgram, SandwichOnRandomBranches) {
  Rng rng(6);
  RandomVerifierOptions o;
  o.actions = 2;
  o.measurements = 1;
  for (int i = 0; i < 3; ++i) {
    const VerifierSpec v = random_verifier(o, rng);
    const double w = omega(v);
    SeeSawConfig cfg;
    cfg.restarts = 4;
    cfg.rng_seed = std::uint64_t(i);
    const auto ss = see_saw_prover(v, cfg);
    for (const auto& [u, br] : branch_probabilities(v, ss.strategy)) {
      const double hat = solve(build_second_sdp(v, u)).objective_value;
      EXPECT_LE(br.probability * br.conditional_acceptance - 1e-4, hat) << u;
      EXPECT_LE(hat, w + 1e-4) << u;
    }
  }
}

TEST(Witness, SolverSolutionAcceptedAndTamperingRejected) {
  Rng rng(7);
  RandomVerifierOptions o;
  o.actions = 2;
  o.measurements = 1;
  const VerifierSpec v = random_verifier(o, rng);
  const SdpSolution s = solve(build_second_sdp(v, "0"));
  const double c = s.objective_value;

  const WitnessVerdict ok = check_np_witness(v, "0", s.blocks, c);
  EXPECT_TRUE(ok.accepted) << ok.reason;

  std::vector<ComplexMatrix> bad = s.blocks;
  bad[0](0, 0) += 1e-2;
  const WitnessVerdict r = check_np_witness(v, "0", bad, c);
  EXPECT_FALSE(r.accepted);
  EXPECT_NE(r.reason.find("residual"), std::string::npos) << r.reason;

  const WitnessVerdict high = check_np_witness(v, "0", s.blocks, c + 0.1);
  EXPECT_FALSE(high.accepted);
  EXPECT_NE(high.reason.find("objective"), std::string::npos) << high.reason;

  EXPECT_FALSE(check_np_witness(v, "0", {}, c).accepted);
}

TEST(Omega, DualBracketsPrimal) {
  Rng rng(8);
  for (int i = 0; i < 3; ++i) {
    const OmegaResult r = omega_detailed(fixtures::random_unitary(rng, 2));
    EXPECT_GE(r.dual - r.value, -1e-6);
    EXPECT_LE(r.dual - r.value, 1e-6);
    EXPECT_GE(r.value, -1e-7);
    EXPECT_LE(r.value, 1.0 + 1e-7);
  }
}
