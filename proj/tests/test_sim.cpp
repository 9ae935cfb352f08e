#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "fixtures.hpp"
#include "occfluct/dv_solver.hpp"
#include "occfluct/errors.hpp"
#include "occfluct/sim.hpp"

using namespace occfluct;

namespace {

RateMatrix two_state(double k12, double k21) {
  Matrix k(2, 2);
  k << 0.0, k12, k21, 0.0;
  return RateMatrix(StateSpace::indexed(2), k);
}

RateMatrix uniform_chain(std::size_t n) {
  Matrix m = Matrix::Ones(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  m.diagonal().setZero();
  return RateMatrix(StateSpace::indexed(n), m);
}

}  // namespace

TEST(RandomStream, UniformRangeAndDeterminism) {
  RandomStream a(42), b(42);
  for (int i = 0; i < 1000; ++i) {
    const double u = a.uniform();
    EXPECT_GE(u, 0.0);
    EXPECT_LT(u, 1.0);
    EXPECT_EQ(u, b.uniform());
  }
  RandomStream c(1);
  for (int i = 0; i < 1000; ++i) EXPECT_GT(c.exponential(3.0), 0.0);
}

TEST(RandomStream, SplitStreamsDiffer) {
  EXPECT_NE(derive_seed(7, 0), derive_seed(7, 1));
  EXPECT_NE(derive_seed(7, 0), derive_seed(8, 0));
  RandomStream a = RandomStream::split(7, 0), b = RandomStream::split(7, 1);
  EXPECT_NE(a.uniform(), b.uniform());
}

TEST(Gillespie, SameSeedSameTrajectory) {
  fixtures::Rng rng(1);
  const auto k = fixtures::random_dense(rng, 4);
  EXPECT_EQ(gillespie(k, 0, 50.0, 99), gillespie(k, 0, 50.0, 99));
  EXPECT_NE(gillespie(k, 0, 50.0, 99), gillespie(k, 0, 50.0, 100));
}

TEST(Gillespie, TrajectoryInvariants) {
  fixtures::Rng rng(2);
  const auto k = fixtures::random_dense(rng, 5);
  const Trajectory t = gillespie(k, 2, 100.0, 5);
  EXPECT_EQ(t.initial(), 2u);
  std::size_t prev = t.initial();
  double last = 0.0;
  for (std::size_t i = 0; i < t.jump_count(); ++i) {
    EXPECT_GT(t.jump_times()[i], last);
    EXPECT_LT(t.jump_times()[i], t.horizon());
    EXPECT_NE(t.states()[i], prev);
    EXPECT_GT(k(prev, t.states()[i]), 0.0);
    prev = t.states()[i];
    last = t.jump_times()[i];
  }
}

TEST(Gillespie, MeanHoldingTimeIsInverseExitRate) {
  const double k12 = 2.5;
  const auto k = two_state(k12, 0.8);
  const Trajectory t = gillespie(k, 0, 1.8e5, 3);
  // Complete sojourns in state 0.
  std::vector<double> holds;
  double entered = 0.0;
  std::size_t state = t.initial();
  for (std::size_t i = 0; i < t.jump_count(); ++i) {
    if (state == 0) holds.push_back(t.jump_times()[i] - entered);
    state = t.states()[i];
    entered = t.jump_times()[i];
  }
  ASSERT_GT(holds.size(), 100000u);
  const double mean = std::accumulate(holds.begin(), holds.end(), 0.0) / holds.size();
  // Exponential law: standard deviation equals the mean.
  const double se = (1.0 / k12) / std::sqrt(static_cast<double>(holds.size()));
  EXPECT_LT(std::abs(mean - 1.0 / k12), 3.0 * se);
}

TEST(Gillespie, JumpCountMatchesStationaryFlux) {
  const auto k = uniform_chain(3);
  const double T = 1e4;
  // Jumps form a Poisson process of rate 2; variance of the count equals its mean.
  const double expected = T * 2.0;
  const Trajectory t = gillespie(k, 0, T, 11);
  EXPECT_LT(std::abs(static_cast<double>(t.jump_count()) - expected), 3.0 * std::sqrt(expected));
}

TEST(Gillespie, AbsorbingStateStaysPut) {
  const auto k = two_state(0.0, 1.0);
  const Trajectory t = gillespie(k, 0, 10.0, 1);
  EXPECT_EQ(t.jump_count(), 0u);
  const OccupationRecord occ = occupation(t);
  EXPECT_EQ(occ.fractions(0), 1.0);
  EXPECT_EQ(occ.fractions(1), 0.0);
}

TEST(Occupation, HandBuiltTrajectories) {
  const StateSpace s = StateSpace::indexed(2);
  const Trajectory halves(s, 0, {1.0}, {1}, 2.0);
  const OccupationRecord occ = occupation(halves);
  EXPECT_EQ(occ.fractions(0), 0.5);
  EXPECT_EQ(occ.fractions(1), 0.5);
  EXPECT_EQ(occ.horizon, 2.0);
  EXPECT_THROW(Trajectory(s, 0, {3.0}, {1}, 2.0), Error);
  EXPECT_THROW(Trajectory(s, 0, {1.0}, {0}, 2.0), Error);
}

TEST(Occupation, FractionsSumToOneAndConverge) {
  fixtures::Rng rng(4);
  const auto k = fixtures::random_dense(rng, 4);
  const ProbDist rho = stationary_distribution(k);
  std::vector<double> errors;
  for (const double T : {1e2, 1e3, 1e4}) {
    const auto records = occupation_samples(k, 0, T, 16, 21);
    double worst = 0.0;
    for (const auto& r : records) {
      EXPECT_NEAR(r.fractions.vector().sum(), 1.0, 1e-12);
      worst = std::max(worst, (r.fractions.vector() - rho.vector()).cwiseAbs().maxCoeff());
    }
    errors.push_back(worst);
  }
  // Error scales like sqrt(C / T); fit C at the shortest horizon and allow a factor 5.
  const double C = errors[0] * errors[0] * 1e2;
  EXPECT_LE(errors[1], 5.0 * std::sqrt(C / 1e3));
  EXPECT_LE(errors[2], 5.0 * std::sqrt(C / 1e4));
}

TEST(Occupation, SamplesAreReproducible) {
  fixtures::Rng rng(5);
  const auto k = fixtures::random_dense(rng, 3);
  const auto a = occupation_samples(k, 1, 20.0, 64, 77);
  const auto b = occupation_samples(k, 1, 20.0, 64, 77);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].fractions.vector(), b[i].fractions.vector());
  // Sample i uses the stream derived from (seed, i), independent of batching.
  const Trajectory t3 = gillespie(k, 1, 20.0, derive_seed(77, 3));
  EXPECT_EQ(occupation(t3).fractions.vector(), a[3].fractions.vector());
}

TEST(FeynmanKac, ConstantPotentialIsExact) {
  fixtures::Rng rng(6);
  const auto k = fixtures::random_dense(rng, 3);
  const auto est = feynman_kac_estimate(k, Vector::Constant(3, 0.37), 50.0, 200, 1);
  EXPECT_NEAR(est.lambda, 0.37, 1e-14);
  EXPECT_NEAR(est.standard_error, 0.0, 1e-14);
}

TEST(FeynmanKac, MatchesPerronValueOnTwoStateChain) {
  const auto k = two_state(1.5, 0.7);
  Vector V(2);
  V << 0.2, -0.1;
  const auto est = feynman_kac_estimate(k, V, 200.0, 4000, 3);
  const double exact = principal_eigenvalue_dense(k, V);
  EXPECT_LT(std::abs(est.lambda - exact), 3.0 * est.standard_error + 1.0 / 200.0);
}

TEST(FeynmanKac, CertificatePotentialHasZeroEigenvalue) {
  fixtures::Rng rng(7);
  const auto k = fixtures::random_dense(rng, 3);
  // mu close to rho keeps V* small; for large V* the weights are too heavy-tailed
  // for a plain average over 4000 paths.
  const Vector rho = stationary_distribution(k).vector();
  Vector w = rho;
  for (auto& v : w) v *= 1.0 + fixtures::uniform(rng, -0.3, 0.3);
  const ProbDist mu = ProbDist::normalized(k.space(), w);
  const DVResult r = dv_rate(k, mu);
  const TiltCertificate c = tilt_certificate(k, r, mu);
  const auto est = feynman_kac_estimate(k, c.potential, 200.0, 4000, 9);
  EXPECT_LT(std::abs(est.lambda), 3.0 * est.standard_error + 1.0 / 200.0);
}

TEST(FeynmanKac, DeterministicAndGuarded) {
  fixtures::Rng rng(8);
  const auto k = fixtures::random_dense(rng, 3);
  Vector V(3);
  V << 0.3, -0.2, 0.1;
  const auto a = feynman_kac_estimate(k, V, 30.0, 500, 5);
  const auto b = feynman_kac_estimate(k, V, 30.0, 500, 5);
  EXPECT_EQ(a.lambda, b.lambda);
  EXPECT_EQ(a.standard_error, b.standard_error);

  Vector huge(3);
  huge << 100.0, -100.0, 0.0;
  try {
    feynman_kac_estimate(k, huge, 200.0, 200, 5);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::OverflowGuard);
  }
}

TEST(PairwiseSum, ExactOnSmallIntegersAndCompensatesDrift) {
  std::vector<double> ints(1000);
  std::iota(ints.begin(), ints.end(), 1.0);
  EXPECT_EQ(pairwise_sum(ints), 500500.0);
  std::vector<double> tenths(1 << 20, 0.1);
  EXPECT_NEAR(pairwise_sum(tenths), 0.1 * (1 << 20), 1e-8);
  EXPECT_EQ(pairwise_sum(std::span<const double>{}), 0.0);
}
