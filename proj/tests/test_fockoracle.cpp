#include <gtest/gtest.h>

#include <gsl/gsl_randist.h>

#include "polarimetry/fockoracle.hpp"
#include "test_util.hpp"

using namespace polarimetry;
using namespace polarimetry::fock;
using cd = std::complex<double>;

TEST(Fock, Indexing) {
  EXPECT_EQ(index(0, 0), 0);
  EXPECT_EQ(index(0, 1), 1);
  EXPECT_EQ(index(1, 0), 2);
  EXPECT_EQ(dimension(3), 10);
  EXPECT_EQ(default_cutoff(4.0), 34);
}

TEST(Fock, VacuumAndSingleMode) {
  const auto vac = coherent_two_mode(ModalParams{}, 5);
  EXPECT_DOUBLE_EQ(std::abs(vac.amplitudes(0)), 1.0);
  EXPECT_DOUBLE_EQ(vac.amplitudes.squaredNorm(), 1.0);

  const auto ops = stokes_operators(20);
  const auto one = coherent_two_mode(ModalParams::make(1, 0, 0), 20);
  EXPECT_NEAR(expectation(ops.s[0], one), 1.0, 1e-10);
  EXPECT_NEAR(expectation(ops.s[1], one), 1.0, 1e-10);
}

TEST(Fock, NormDeficitFollowsPoissonTail) {
  const auto psi = coherent_two_mode(ModalParams::make(std::sqrt(2.0), std::sqrt(2.0), 0.1), 40);
  EXPECT_LT(1.0 - psi.amplitudes.squaredNorm(), 1e-10);
  EXPECT_NEAR(1.0 - psi.amplitudes.squaredNorm(), psi.tail_mass, 1e-14);
  try {
    coherent_two_mode(ModalParams::make(3, 0, 0), 10);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::CutoffTooSmall);
  }
}

TEST(Fock, MeansAndVariances) {
  std::mt19937_64 rng(41);
  for (int i = 0; i < 20; ++i) {
    const auto p = testutil::random_state(rng, 0.2 + 0.19 * i, 0.0);
    const int cutoff = default_cutoff(p.s0());
    const auto ops = stokes_operators(cutoff);
    const auto psi = coherent_two_mode(p, cutoff);
    const auto s = stokes_from_modal(p);
    const double ref[4] = {s.s0, s.s1, s.s2, s.s3};
    for (int j = 0; j < 4; ++j) EXPECT_NEAR(expectation(ops.s[j], psi), ref[j], 1e-8);
    for (int j = 1; j < 4; ++j) EXPECT_NEAR(variance(ops.s[j], psi), s.s0, 1e-6 * s.s0);
  }
}

TEST(Fock, SchwingerCommutators) {
  // S3 = i(a^dag b - b^dag a) fixes the sign: [S_j, S_k] = -2i eps_jkl S_l.
  const auto ops = stokes_operators(14);
  EXPECT_LT(commutator_residual(ops, 1, 2, 3, cd(0, -2)), 1e-10);
  EXPECT_LT(commutator_residual(ops, 2, 3, 1, cd(0, -2)), 1e-10);
  EXPECT_LT(commutator_residual(ops, 3, 1, 2, cd(0, -2)), 1e-10);
  EXPECT_GT(commutator_residual(ops, 1, 2, 3, cd(0, 2)), 1.0);
  // S0 commutes with everything.
  EXPECT_LT(commutator_residual(ops, 0, 1, 2, cd(0, 0)), 1e-12);
  EXPECT_LT(commutator_residual(ops, 0, 3, 2, cd(0, 0)), 1e-12);
}

TEST(Fock, PhaseAverage) {
  const auto vac = phase_average(coherent_two_mode(ModalParams{}, 3));
  EXPECT_DOUBLE_EQ(vac.rho(0, 0).real(), 1.0);
  EXPECT_DOUBLE_EQ(vac.rho.cwiseAbs().sum(), 1.0);

  const auto p = ModalParams::make(1.2, 0.9, 0.5, 0.8);
  const int cutoff = default_cutoff(p.s0());
  const auto rho = phase_average(coherent_two_mode(p, cutoff));
  EXPECT_LT(photon_number_commutator(rho), 1e-12);
  EXPECT_NEAR(rho.rho.trace().real(), 1.0, 1e-10);
  for (int n = 0; n <= cutoff; ++n) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(rho.block(n));
    const auto lam = eig.eigenvalues();
    EXPECT_NEAR(lam.maxCoeff(), gsl_ran_poisson_pdf(static_cast<unsigned>(n), p.s0()), 1e-10);
    // Rank one per block.
    EXPECT_LT(lam.sum() - lam.maxCoeff(), 1e-12);
  }
}

TEST(Fock, NumericalQfiExamples) {
  const auto p = ModalParams::make(1, 1, 0.2);
  const Eigen::Matrix3d expected = Eigen::Vector3d(4, 4, 2).asDiagonal();
  for (bool known : {true, false}) {
    const auto q = numerical_qfi(p, {false, known}, 40);
    EXPECT_LT((q.qfi.entries - expected).cwiseAbs().maxCoeff(), 1e-6);
  }
  const auto vac = numerical_qfi(ModalParams{}, {false, true}, 6);
  EXPECT_LT(vac.qfi.entries.row(2).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_LT(vac.qfi.entries.col(2).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Fock, FiniteDifferencePathAgrees) {
  const auto p = ModalParams::make(1.1, 0.6, -0.7);
  const int cutoff = default_cutoff(p.s0());
  for (const Scenario sc : {Scenario{false, false}, Scenario{false, true}, Scenario{true, false},
                            Scenario{true, true}}) {
    const auto a = numerical_qfi(p, sc, cutoff, DerivativeMode::Analytic);
    const auto f = numerical_qfi(p, sc, cutoff, DerivativeMode::FiniteDifference);
    EXPECT_LT((a.qfi.entries - f.qfi.entries).cwiseAbs().maxCoeff(), 1e-6);
  }
}

TEST(Fock, AnalyticDerivativesMatchDifferences) {
  const auto p = ModalParams::make(0.8, 1.3, 0.4, -0.2);
  const int cutoff = 30;
  const auto d = coherent_derivatives(p, cutoff);
  const double h = 1e-6;
  auto amp = [&](ModalParams q) { return coherent_two_mode(q, cutoff).amplitudes; };
  ModalParams up = p, dn = p;
  up.a_h += h;
  dn.a_h -= h;
  EXPECT_LT(((amp(up) - amp(dn)) / (2 * h) - d[0]).cwiseAbs().maxCoeff(), 1e-8);
  up = dn = p;
  up.phi_plus += h;
  dn.phi_plus -= h;
  EXPECT_LT(((amp(up) - amp(dn)) / (2 * h) - d[3]).cwiseAbs().maxCoeff(), 1e-8);
}
