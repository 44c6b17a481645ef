#include <gtest/gtest.h>

#include "polarimetry/simkit.hpp"
#include "test_util.hpp"

using namespace polarimetry;

TEST(Simkit, SamplingIsSeeded) {
  const auto p = ModalParams::make(2, 1, 0.4);
  const auto a = sample_counts(p, ReceiverSpec::stokes(), 10, 42);
  const auto b = sample_counts(p, ReceiverSpec::stokes(), 10, 42);
  const auto c = sample_counts(p, ReceiverSpec::stokes(), 10, 43);
  EXPECT_EQ(a.counts, b.counts);
  EXPECT_NE(a.counts, c.counts);
  EXPECT_EQ(a.counts.size(), 6u);
  EXPECT_EQ(sample_counts(p, ReceiverSpec::tetrahedron(0.5), 10, 1).counts.size(), 4u);
}

TEST(Simkit, CountMeansFollowArmMeans) {
  const auto p = ModalParams::make(1.5, 1.0, -0.6);
  const auto spec = ReceiverSpec::stokes();
  const auto m = arm_means(p, spec, Scenario{}).means;
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(6);
  const int draws = 4000;
  const std::int64_t shots = 5;
  for (int i = 0; i < draws; ++i) {
    const auto c = sample_counts(p, spec, shots, splitmix64(i));
    for (int a = 0; a < 6; ++a) sum(a) += static_cast<double>(c.counts[a]);
  }
  for (int a = 0; a < 6; ++a) {
    const double mean = sum(a) / draws;
    const double expected = shots * m(a);
    EXPECT_NEAR(mean, expected, 5 * std::sqrt(expected / draws) + 1e-12) << "arm " << a;
  }
}

TEST(Simkit, NaiveEstimateInvertsMeans) {
  // Feeding the exact expected counts returns the true Stokes vector.
  const auto p = ModalParams::make(1.3, 0.8, 1.1);
  CountRecord c;
  c.shots = 1;
  c.receiver = ReceiverSpec::stokes();
  // Scale so the expected counts are integers up to rounding well below tolerance.
  const double scale = 1e9;
  c.shots = static_cast<std::int64_t>(scale);
  for (double n : arm_means(p, c.receiver, Scenario{}).means) {
    c.counts.push_back(std::llround(n * scale));
  }
  const auto est = naive_stokes_estimate(c);
  const auto s = stokes_from_modal(p);
  EXPECT_NEAR(est.s0, s.s0, 1e-8);
  EXPECT_NEAR(est.s1, s.s1, 1e-8);
  EXPECT_NEAR(est.s2, s.s2, 1e-8);
  EXPECT_NEAR(est.s3, s.s3, 1e-8);

  c.receiver = ReceiverSpec::tetrahedron(0.5);
  c.counts.resize(4);
  try {
    naive_stokes_estimate(c);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::WrongReceiver);
  }
}

TEST(Simkit, MleRecoversTruthFromLargeSamples) {
  std::mt19937_64 rng(71);
  for (int i = 0; i < 10; ++i) {
    const auto p = testutil::random_state(rng, 2.0, 0.2);
    for (const auto& spec : {ReceiverSpec::stokes(), ReceiverSpec::tetrahedron(0.45)}) {
      const auto c = sample_counts(p, spec, 2000000, 100 + i);
      const auto r = mle_estimate(c, Scenario{});
      EXPECT_TRUE(r.converged);
      const auto s = stokes_from_modal(r.params);
      const auto t = stokes_from_modal(p);
      EXPECT_NEAR(s.s1, t.s1, 0.01);
      EXPECT_NEAR(s.s2, t.s2, 0.01);
      EXPECT_NEAR(s.s3, t.s3, 0.01);

      const auto k = mle_estimate(c, Scenario{true, false}, p.s0());
      EXPECT_NEAR(k.params.s0(), p.s0(), 1e-12);
    }
  }
}

TEST(Simkit, MleErrors) {
  CountRecord c;
  c.receiver = ReceiverSpec::stokes();
  c.counts = {0, 0, 0, 0, 0, 0};
  try {
    mle_estimate(c, Scenario{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::AllZeroCounts);
  }
  c.counts = {1, 2, 3};
  try {
    mle_estimate(c, Scenario{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::BadArity);
  }
  c.counts = {1, 2, 3, 4, 5, 6};
  EXPECT_THROW(mle_estimate(c, Scenario{true, false}, 0.0), Error);
}

TEST(Simkit, BenchmarkIsDeterministic) {
  const auto p = ModalParams::make(2, 1.5, 0.7);
  const auto a = mse_benchmark(p, ReceiverSpec::stokes(), Scenario{}, 50, 10, Estimator::Mle, 9);
  const auto b = mse_benchmark(p, ReceiverSpec::stokes(), Scenario{}, 50, 10, Estimator::Mle, 9);
  EXPECT_EQ(a.per_parameter_mse, b.per_parameter_mse);
  EXPECT_EQ(a.total, b.total);
  EXPECT_EQ(a.trials, 50);
  EXPECT_EQ(splitmix64(0), splitmix64(0));
  EXPECT_NE(splitmix64(0), splitmix64(1));
}

TEST(Simkit, NaiveEstimatorMseMatchesPoissonNoise) {
  // The linear estimator's shots-normalized MSE is sum_j 9 S0 / 3 = 9 S0 for any state.
  const double s0 = 4.0;
  const auto p = testutil::from_stokes(s0, 2.0, 2.0, 2.0 * std::sqrt(2.0));
  const auto r = mse_benchmark(p, ReceiverSpec::stokes(), Scenario{}, 20000, 3, Estimator::Naive, 5);
  EXPECT_NEAR(r.total / s0, 9.0, 0.3);
  for (std::size_t k = 0; k < 3; ++k) EXPECT_LT(std::abs(r.bias[k]), 4 * r.stderr_[k]);
  EXPECT_EQ(r.excluded, 0);
}
