#include <gtest/gtest.h>

#include "scramble/protocol.hpp"
#include "test_support.hpp"

namespace scramble {
namespace {

using namespace testing;

Scrambler identity_scrambler(int n) {
  return Scrambler::explicit_unitary(ComplexMatrix::Identity(Index{1} << n, Index{1} << n));
}

BathState random_bath(int n_bath, Rng& rng) {
  switch (rng() % 3) {
    case 0:
      return MaximallyMixedBath{};
    case 1: {
      std::vector<BlochAxis> axes;
      for (int k = 0; k < n_bath; ++k) axes.push_back(BlochAxis::random(rng));
      return ProductBath{axes};
    }
    default:
      return DensityMatrix::from_matrix(random_density(Index{1} << n_bath, rng));
  }
}

/// Small shared fixture: one saturated N_s = 8 spin bath.
class Saturated : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    Rng rng(2024);
    scrambler_ = new Scrambler(Scrambler::spin_bath(sample_spin_bath(8, 1.0, rng), 0.0));
  }
  static void TearDownTestSuite() {
    delete scrambler_;
    scrambler_ = nullptr;
  }
  static ProtocolConfig config(BlochAxis bob) {
    return ProtocolConfig{.scrambler = *scrambler_, .bob = bob, .t1 = 20.0, .t2 = 20.0};
  }
  static Scrambler* scrambler_;
};

Scrambler* Saturated::scrambler_ = nullptr;

TEST(CorrelatorAverage, Conventions) {
  EXPECT_NEAR(std::abs(correlator_average(id(8), MaximallyMixedBath{}) - 2.0), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(correlator_average(embed(sz(), 0, 3), MaximallyMixedBath{})), 0.0, 1e-15);
  const ComplexMatrix zz = embed(sz(), 0, 3) * embed(sz(), 0, 3);
  EXPECT_NEAR(std::abs(correlator_average(zz, MaximallyMixedBath{}) - 2.0), 0.0, 1e-15);
  Rng rng(1);
  const ComplexMatrix rho_b = random_density(4, rng);
  const ComplexMatrix op = random_matrix(8, 8, rng);
  const Complex oracle = (op * kron(id(2), rho_b)).trace();
  EXPECT_NEAR(std::abs(correlator_average(op, DensityMatrix::from_matrix(rho_b)) - oracle), 0.0,
              1e-12);
}

TEST(BathStates, FactorReproducesDensity) {
  Rng rng(2);
  for (int trial = 0; trial < 6; ++trial) {
    const BathState b = random_bath(3, rng);
    const ComplexMatrix w = bath_factor(b, 3);
    EXPECT_LT(max_diff(w * w.adjoint(), bath_density(b, 3)), 1e-12);
    EXPECT_NEAR(bath_density(b, 3).trace().real(), 1.0, 1e-12);
  }
}

TEST(JointProbability, IdentityScramblerExamples) {
  ProtocolConfig all_z{.scrambler = identity_scrambler(3)};
  EXPECT_NEAR(joint_probability_heisenberg(all_z), 1.0, 1e-14);
  EXPECT_NEAR(joint_probability_channel(all_z), 1.0, 1e-14);
  ProtocolConfig bob_x{.scrambler = identity_scrambler(3), .bob = BlochAxis::X()};
  EXPECT_NEAR(joint_probability_heisenberg(bob_x), 0.25, 1e-14);
  EXPECT_NEAR(joint_probability_channel(bob_x), 0.25, 1e-14);
}

TEST(JointProbability, HeisenbergMatchesChannelOnFourQubitCircuit) {
  Rng rng(3);
  ProtocolConfig cfg{.scrambler = Scrambler::circuit(build_random_circuit(4, 6, rng)),
                     .initial = BlochAxis::random(rng),
                     .bob = BlochAxis::random(rng),
                     .alice = BlochAxis::random(rng)};
  for (int b : {1, -1})
    for (int a : {1, -1})
      EXPECT_NEAR(joint_probability_heisenberg(cfg, b, a), joint_probability_channel(cfg, b, a), 1e-10);
}

TEST(JointProbability, HeisenbergMatchesChannelOnSeededInstances) {
  Rng rng(4);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 3 + trial % 3;
    Scrambler s = [&] {
      switch (trial % 4) {
        case 0:
          return Scrambler::spin_bath(sample_spin_bath(n - 1, 1.0, rng), 0.0);
        case 1:
          return Scrambler::circuit(build_random_circuit(n, 4, rng));
        case 2:
          return Scrambler::explicit_unitary(haar_unitary(Index{1} << n, rng));
        default:
          return Scrambler::spin_bath(sample_spin_bath(n - 1, 2.0, rng), 0.0);
      }
    }();
    std::uniform_real_distribution<double> t(0.0, 10.0);
    ProtocolConfig cfg{.scrambler = s,
                       .initial = BlochAxis::random(rng),
                       .bob = BlochAxis::random(rng),
                       .alice = BlochAxis::random(rng),
                       .t1 = t(rng),
                       .t2 = t(rng),
                       .reversed = trial % 2 == 0,
                       .bath = random_bath(n - 1, rng)};
    const int b = rng() % 2 ? 1 : -1;
    const int a = rng() % 2 ? 1 : -1;
    EXPECT_NEAR(joint_probability_heisenberg(cfg, b, a), joint_probability_channel(cfg, b, a), 1e-10)
        << "trial " << trial;
  }
}

TEST(JointProbability, Normalization) {
  Rng rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    ProtocolConfig cfg{.scrambler = Scrambler::explicit_unitary(haar_unitary(8, rng)),
                       .initial = BlochAxis::random(rng),
                       .bob = BlochAxis::random(rng),
                       .alice = BlochAxis::random(rng),
                       .bath = random_bath(2, rng)};
    for (int b : {1, -1}) {
      const double sum_alice = joint_probability_channel(cfg, b, 1) + joint_probability_channel(cfg, b, -1);
      const ComplexMatrix u = cfg.scrambler.unitary();
      const ComplexVector psi = PureState::along(cfg.initial).amplitudes();
      const ComplexMatrix rho = u * kron(psi * psi.adjoint(), bath_density(cfg.bath, 2)) * u.adjoint();
      const double pr = (embed(projector_along(std::get<BlochAxis>(cfg.bob), b), 0, 3) * rho).trace().real();
      EXPECT_NEAR(sum_alice, pr, 1e-12);
    }
    const double both_bob = joint_probability_heisenberg(cfg, 1, 1) + joint_probability_heisenberg(cfg, -1, 1);
    EXPECT_GE(both_bob, -1e-12);
    EXPECT_LE(both_bob, 1.0 + 1e-12);
    EXPECT_NEAR(both_bob, final_probability(cfg), 1e-12);
  }
}

TEST(FinalProbability, AliceOutcomesSumToOne) {
  Rng rng(6);
  for (int trial = 0; trial < 20; ++trial) {
    ProtocolConfig cfg{.scrambler = Scrambler::spin_bath(sample_spin_bath(4, 1.0, rng), 0.0),
                       .initial = BlochAxis::random(rng),
                       .bob = SphereSample{3, rng()},
                       .alice = BlochAxis::random(rng),
                       .t1 = 1.0 + trial,
                       .t2 = 2.0 + trial,
                       .reversed = trial % 2 == 0,
                       .bath = random_bath(4, rng)};
    EXPECT_NEAR(final_probability(cfg, 1) + final_probability(cfg, -1), 1.0, 1e-12);
  }
}

TEST(FinalProbability, TrivialScrambler) {
  ProtocolConfig cfg{.scrambler = identity_scrambler(3)};
  EXPECT_NEAR(final_probability(cfg), 1.0, 1e-14);
  const DensityMatrix rf = final_central_state(cfg);
  EXPECT_LT(max_diff(rf.matrix(), tomography(0, 0, 1).matrix()), 1e-14);
}

TEST(Reconstruct, InvertsRecoveryLaw) {
  ComplexMatrix rf = ComplexMatrix::Zero(2, 2);
  rf.diagonal() << 0.75, 0.25;
  ComplexMatrix ri = ComplexMatrix::Zero(2, 2);
  ri(0, 0) = 1.0;
  EXPECT_LT(max_diff(reconstruct_initial(DensityMatrix::from_matrix(rf)).matrix(), ri), 1e-14);
}

TEST_F(Saturated, RecoveryLawAndAxisProbabilities) {
  ProtocolConfig cfg = config(BlochAxis::normalized(0.3, -0.5, 0.8));
  const DensityMatrix rf = final_central_state(cfg);
  ComplexMatrix expected = ComplexMatrix::Zero(2, 2);
  expected.diagonal() << 0.75, 0.25;
  EXPECT_LT(trace_distance(rf.matrix(), expected), 0.02);
  EXPECT_NEAR(final_probability(cfg), 0.75, 0.02);
  cfg.alice = BlochAxis::X();
  EXPECT_NEAR(final_probability(cfg), 0.5, 0.02);
}

TEST_F(Saturated, RecoveryMapPreservesDistinguishability) {
  Rng rng(7);
  for (int trial = 0; trial < 5; ++trial) {
    ProtocolConfig a = config(BlochAxis::random(rng));
    ProtocolConfig b = a;
    a.initial = BlochAxis::random(rng);
    b.initial = BlochAxis::random(rng);
    const double df = trace_distance(final_central_state(a).matrix(), final_central_state(b).matrix());
    const double di = trace_distance(DensityMatrix::from_pure(PureState::along(a.initial)).matrix(),
                                     DensityMatrix::from_pure(PureState::along(b.initial)).matrix());
    EXPECT_NEAR(df, 0.5 * di, 0.03);
  }
}

TEST_F(Saturated, BobAxisIndependence) {
  Rng rng(8);
  double lo = 1.0, hi = 0.0;
  for (int k = 0; k < 20; ++k) {
    const double p = final_probability(config(BlochAxis::random(rng)));
    lo = std::min(lo, p);
    hi = std::max(hi, p);
  }
  EXPECT_LT(hi - lo, 0.03);
}

TEST_F(Saturated, BathStateIndependence) {
  Rng rng(9);
  ProtocolConfig cfg = config(BlochAxis::random(rng));
  const double mixed = final_probability(cfg);
  std::vector<BlochAxis> axes;
  for (int k = 0; k < 8; ++k) axes.push_back(BlochAxis::random(rng));
  cfg.bath = ProductBath{axes};
  EXPECT_LT(std::abs(final_probability(cfg) - mixed), 0.03);
}

TEST_F(Saturated, JointProbabilityReducesToTwoPointTerm) {
  Rng rng(10);
  ProtocolConfig cfg = config(BlochAxis::random(rng));
  // ⟨σ_f σ_i⟩ = 2 for parallel axes
  EXPECT_LT(std::abs(joint_probability_heisenberg(cfg) - 0.25 - 2.0 / 16.0), 0.02);
}

TEST(EchoGridEngine, MatchesDirectEvaluation) {
  Rng rng(11);
  ProtocolConfig cfg{.scrambler = Scrambler::spin_bath(sample_spin_bath(5, 1.0, rng), 0.0),
                     .initial = BlochAxis::random(rng),
                     .bob = std::vector<BlochAxis>{BlochAxis::random(rng), BlochAxis::random(rng)},
                     .alice = BlochAxis::random(rng)};
  const std::vector<double> t1{0.0, 1.5, 7.0};
  const std::vector<double> t2{0.5, 3.0, 7.0, 11.0};
  const auto grids = EchoGridEngine(cfg).evaluate(t1, t2);
  for (std::size_t i = 0; i < t1.size(); ++i) {
    for (std::size_t j = 0; j < t2.size(); ++j) {
      ProtocolConfig point = cfg;
      point.t1 = t1[i];
      point.t2 = t2[j];
      EXPECT_NEAR(grids.reversed.prob[i][j], final_probability(point), 1e-10);
      point.reversed = false;
      EXPECT_NEAR(grids.forward.prob[i][j], final_probability(point), 1e-10);
    }
  }
  EXPECT_EQ(grids.reversed.t1, t1);
  EXPECT_EQ(grids.forward.t2, t2);
}

TEST(EchoGridEngine, WorkerCountDoesNotChangeResults) {
  Rng rng(12);
  ProtocolConfig cfg{.scrambler = Scrambler::spin_bath(sample_spin_bath(5, 1.0, rng), 0.0),
                     .bob = BlochAxis::random(rng)};
  const std::vector<double> t{1.0, 2.0, 3.0, 4.0, 5.0};
  const auto one = echo_grid(cfg, t, t, true, 1);
  const auto four = echo_grid(cfg, t, t, true, 4);
  EXPECT_EQ(one.prob, four.prob);
}

TEST(NoHiding, PauliAveragedProbabilitiesAreExact) {
  ProtocolConfig cfg{.scrambler = Scrambler::no_hiding(),
                     .bath = ProductBath{{BlochAxis::X(), BlochAxis::X()}}};
  const auto p = pauli_set_averaged_probability(cfg, true);
  EXPECT_NEAR(p[0], 0.5, 1e-10);
  EXPECT_NEAR(p[1], 0.5, 1e-10);
  EXPECT_NEAR(p[2], 0.75, 1e-10);
  const auto q = pauli_set_averaged_probability(cfg, false);
  EXPECT_GT(std::abs(q[2] - 0.75) + std::abs(q[0] - 0.5) + std::abs(q[1] - 0.5), 1e-3);
}

TEST(NoHiding, TomographyRecoversInitialState) {
  ProtocolConfig cfg{.scrambler = Scrambler::no_hiding(),
                     .bob = PauliSet{true},
                     .bath = ProductBath{{BlochAxis::X(), BlochAxis::X()}},
                     .shots = 8192};
  Rng rng(13);
  const RecoveryResult r = recover_with_tomography(cfg, rng);
  EXPECT_GE(r.fidelity, 0.98);
  cfg.shots = 1;
  const RecoveryResult one = recover_with_tomography(cfg, rng);
  EXPECT_NEAR(one.reconstructed.trace(), 1.0, 1e-12);
  EXPECT_GE(one.reconstructed.min_eigenvalue(), -1e-12);
  cfg.shots = 10'000'000;
  const RecoveryResult many = recover_with_tomography(cfg, rng);
  const RecoveryResult exact = run_protocol_density(cfg);
  EXPECT_LT(trace_distance(many.final_state.matrix(), exact.final_state.matrix()), 2e-3);
  EXPECT_NEAR(exact.fidelity, 1.0, 1e-10);
  cfg.shots.reset();
  EXPECT_THROW(recover_with_tomography(cfg, rng), std::invalid_argument);
}

TEST(Protocol, RejectsBadInput) {
  ProtocolConfig cfg{.scrambler = identity_scrambler(2), .t1 = -1.0};
  EXPECT_THROW(final_probability(cfg), std::invalid_argument);
  ProtocolConfig multi{.scrambler = identity_scrambler(2), .bob = PauliSet{}};
  EXPECT_THROW(joint_probability_heisenberg(multi), std::invalid_argument);
  EXPECT_THROW(EchoGridEngine{multi}, std::invalid_argument);
}

}  // namespace
}  // namespace scramble
