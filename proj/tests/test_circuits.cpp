#include <gtest/gtest.h>

#include <cmath>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "qipl/circuits.hpp"
#include "qipl/random.hpp"

using namespace qipl;
using fixtures::action;

namespace {

ProverStrategy prover_with(int q_Q, std::vector<ComplexMatrix> acts) {
  ProverStrategy p;
  p.q_Q = q_Q;
  p.actions = std::move(acts);
  return p;
}

ComplexMatrix pauli_x() {
  ComplexMatrix x(2, 2);
  x << 0, 1, 1, 0;
  return x;
}

// W coin measured by V1; V2 rotates M by RY only when the coin is 1.
VerifierSpec coin_branch_verifier(double p) {
  VerifierSpec v;
  v.q_M = 1;
  v.q_W = 1;
  v.output_qubit = 0;
  v.actions = {action(2, {Gate::h(1), Gate::measure(1)}, ActionKind::AlmostUnitary),
               action(2, {controlled(fixtures::ry_prob(p, 0), 1)})};
  return v;
}

}  // namespace

TEST(ToIsometry, UnitaryActionIsItsMatrix) {
  const ComplexMatrix h = to_isometry(action(1, {Gate::h(0)}));
  const double s = 1.0 / std::sqrt(2.0);
  ComplexMatrix want(2, 2);
  want << s, s, s, -s;
  EXPECT_LT((h - want).norm(), 1e-14);
}

TEST(ToIsometry, MeasureCopiesTheBasisState) {
  const ComplexMatrix v = to_isometry(action(1, {Gate::measure(0)}, ActionKind::AlmostUnitary));
  ComplexMatrix want = ComplexMatrix::Zero(4, 2);
  want(0, 0) = 1;  // |0> -> |00>
  want(3, 1) = 1;  // |1> -> |11>
  EXPECT_LT((v - want).norm(), 1e-14);
}

TEST(ToIsometry, AncillaAppendsZero) {
  const ComplexMatrix v = to_isometry(action(1, {Gate::ancilla()}, ActionKind::Isometric));
  ComplexMatrix want = ComplexMatrix::Zero(4, 2);
  want(0, 0) = 1;
  want(2, 1) = 1;
  EXPECT_LT((v - want).norm(), 1e-14);
}

TEST(ToIsometry, RandomActionsAreIsometries) {
  Rng rng(1);
  for (int i = 0; i < 10; ++i) {
    CircuitAction a = action(2, {Gate::raw(haar_unitary(4, rng), {1, 0}), Gate::measure(1),
                                 Gate::cnot(2, 0), Gate::measure(0)},
                             ActionKind::AlmostUnitary);
    const ComplexMatrix v = to_isometry(a);
    EXPECT_EQ(v.rows(), 16);
    EXPECT_TRUE(is_isometry(v, 1e-10));
  }
}

TEST(ToIsometry, RejectsNonUnitaryRawGate) {
  ComplexMatrix m(2, 2);
  m << 1, 1, 0, 1;
  EXPECT_THROW(to_isometry(action(1, {Gate::raw(m, {0})})), ValidationError);
  EXPECT_THROW(to_isometry(action(1, {Gate::measure(0)})), ValidationError);
}

TEST(RunProtocol, PreparedWireAcceptsWhateverTheProverDoes) {
  Rng rng(2);
  const VerifierSpec v = fixtures::two_turn({Gate::x(1)}, {}, 1);
  for (int i = 0; i < 5; ++i)
    EXPECT_NEAR(run_protocol(v, prover_with(1, {haar_unitary(4, rng)})), 1.0, 1e-12);
}

TEST(RunProtocol, UntouchedPrivateWireRejects) {
  Rng rng(3);
  const VerifierSpec v = fixtures::two_turn({}, {}, 1);
  EXPECT_NEAR(run_protocol(v, prover_with(1, {haar_unitary(4, rng)})), 0.0, 1e-12);
}

TEST(RunProtocol, ProverFlippingMessageIsAccepted) {
  VerifierSpec v = fixtures::two_turn({}, {Gate::measure(0)}, 0);
  v.actions[1].kind = ActionKind::AlmostUnitary;
  EXPECT_NEAR(run_protocol(v, prover_with(0, {pauli_x()})), 1.0, 1e-12);
  EXPECT_NEAR(run_protocol(v, identity_prover(v, 0)), 0.0, 1e-12);
}

TEST(RunProtocol, IdentityGatesDoNotMatter) {
  Rng rng(4);
  for (int i = 0; i < 5; ++i) {
    const VerifierSpec v = fixtures::random_unitary(rng, 3);
    VerifierSpec padded = v;
    for (auto& a : padded.actions) {
      a.gates.insert(a.gates.begin(), Gate::raw(identity(2), {1}));
      a.gates.push_back(Gate::h(0));
      a.gates.push_back(Gate::h(0));
    }
    const ProverStrategy p = prover_with(2, {haar_unitary(8, rng), haar_unitary(8, rng)});
    EXPECT_NEAR(run_protocol(v, p), run_protocol(padded, p), 1e-12);
  }
}

TEST(RunProtocol, IncompatibleProverThrows) {
  const VerifierSpec v = fixtures::two_turn({}, {}, 0);
  EXPECT_THROW(run_protocol(v, prover_with(1, {})), CompatibilityError);
  EXPECT_THROW(run_protocol(v, prover_with(1, {identity(2)})), CompatibilityError);
  ComplexMatrix m = identity(4);
  m(0, 0) = 2.0;
  EXPECT_THROW(run_protocol(v, prover_with(1, {m})), CompatibilityError);
}

TEST(Branches, UnitaryVerifierHasOneEmptyBranch) {
  Rng rng(5);
  const VerifierSpec v = fixtures::random_unitary(rng, 2);
  const auto b = branch_probabilities(v, identity_prover(v, 1));
  ASSERT_EQ(b.size(), 1u);
  EXPECT_EQ(b.begin()->first, "");
  EXPECT_NEAR(b.begin()->second.probability, 1.0, 1e-12);
}

TEST(Branches, CoinSplitsEvenlyWithBranchDependentAcceptance) {
  const VerifierSpec v = coin_branch_verifier(0.36);
  EXPECT_EQ(outcome_length(v), 1);
  const auto b = branch_probabilities(v, identity_prover(v, 0));
  ASSERT_EQ(b.size(), 2u);
  // By hand: coin 0 leaves M at |0>, coin 1 rotates it to acceptance 0.36.
  EXPECT_NEAR(b.at("0").probability, 0.5, 1e-12);
  EXPECT_NEAR(b.at("1").probability, 0.5, 1e-12);
  EXPECT_NEAR(b.at("0").conditional_acceptance, 0.0, 1e-12);
  EXPECT_NEAR(b.at("1").conditional_acceptance, 0.36, 1e-12);
  EXPECT_NEAR(run_protocol(v, identity_prover(v, 0)), 0.18, 1e-12);
}

TEST(Branches, DecompositionSumsToTotal) {
  Rng rng(6);
  RandomVerifierOptions o;
  o.actions = 3;
  o.measurements = 2;
  for (int i = 0; i < 5; ++i) {
    const VerifierSpec v = random_verifier(o, rng);
    const ProverStrategy p = prover_with(1, {haar_unitary(4, rng), haar_unitary(4, rng)});
    double total = 0.0, mass = 0.0;
    for (const auto& [u, br] : branch_probabilities(v, p)) {
      EXPECT_EQ(int(u.size()), outcome_length(v));
      mass += br.probability;
      total += br.probability * br.conditional_acceptance;
    }
    EXPECT_NEAR(mass, 1.0, 1e-9);
    EXPECT_NEAR(total, run_protocol(v, p), 1e-9);
  }
}

TEST(Pinching, MeasuringTwiceEqualsMeasuringOnce) {
  Rng rng(7);
  for (int i = 0; i < 5; ++i) {
    const ComplexMatrix u = haar_unitary(4, rng);
    VerifierSpec once = fixtures::two_turn({Gate::raw(u, {0, 1}), Gate::measure(1)},
                                           {Gate::raw(haar_unitary(4, rng), {0, 1})}, 1);
    once.actions[0].kind = ActionKind::AlmostUnitary;
    VerifierSpec twice = once;
    twice.actions[0].gates.push_back(Gate::measure(1));
    const ProverStrategy p = prover_with(1, {haar_unitary(4, rng)});
    EXPECT_NEAR(run_protocol(once, p), run_protocol(twice, p), 1e-12);
  }
  // Same property on a density matrix with a hand-written dephasing map.
  const ComplexMatrix rho = random_density(4, 0, rng);
  auto dephase = [](ComplexMatrix m, int bit) {
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      for (Eigen::Index c = 0; c < m.cols(); ++c)
        if (((r >> bit) & 1) != ((c >> bit) & 1)) m(r, c) = 0.0;
    return m;
  };
  EXPECT_LT((dephase(dephase(rho, 0), 0) - dephase(rho, 0)).norm(), 1e-15);
}

TEST(Validate, ReportsCapViolations) {
  const VerifierSpec ok = fixtures::two_turn({}, {}, 0);
  EXPECT_TRUE(validate_verifier(ok).empty());

  VerifierSpec wide = ok;
  wide.actions[1].in_qubits = 3;
  EXPECT_FALSE(validate_verifier(wide).empty());

  VerifierSpec many = ok;
  many.actions[0].kind = ActionKind::AlmostUnitary;
  for (int i = 0; i < 3; ++i) many.actions[0].gates.push_back(Gate::measure(0));
  SizeCaps caps;
  caps.measure_cap = 2;
  EXPECT_FALSE(validate_verifier(many, caps).empty());
  EXPECT_TRUE(validate_verifier(many).empty());

  VerifierSpec big = ok;
  big.q_W = 12;
  for (auto& a : big.actions) a.in_qubits = 13;
  EXPECT_FALSE(validate_verifier(big).empty());
}

TEST(Gates, ControlledAndAdjoint) {
  Rng rng(8);
  const ComplexMatrix u = haar_unitary(2, rng);
  const Gate c = controlled(Gate::raw(u, {1}), 0);
  ASSERT_EQ(c.wires.size(), 2u);
  const ComplexMatrix cu = c.unitary();
  ComplexMatrix want = identity(4);
  want.bottomRightCorner(2, 2) = u;
  EXPECT_LT((cu - want).norm(), 1e-12);
  EXPECT_LT((adjoint(c).unitary() * cu - identity(4)).norm(), 1e-12);
  EXPECT_THROW(controlled(Gate::raw(identity(8), {0, 1, 2}), 3), ArgumentError);
}

TEST(Kernels, ApplyOperatorMatchesKron) {
  Rng rng(9);
  const ComplexVector psi = haar_state(8, rng);
  const ComplexMatrix u = haar_unitary(2, rng);
  ComplexVector got = psi;
  apply_operator(got, 3, u, {1});
  const ComplexVector want = oracle::kron(oracle::kron(identity(2), u), identity(2)) * psi;
  EXPECT_LT((got - want).norm(), 1e-12);
}
