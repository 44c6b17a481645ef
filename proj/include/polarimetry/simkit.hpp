#pragma once

// Monte-Carlo photon counting and Stokes estimation.

#include <cstdint>
#include <vector>

#include "polarimetry/polcore.hpp"
#include "polarimetry/receivers.hpp"

namespace polarimetry {

struct CountRecord {
  std::vector<std::int64_t> counts;  // one per arm, in ReceiverSpec::arm_labels order
  std::int64_t shots = 1;
  ReceiverSpec receiver;
  std::uint64_t seed = 0;
};

/// One Poisson draw per arm with mean shots * n (shots are aggregated exactly).
CountRecord sample_counts(const ModalParams& p, const ReceiverSpec& spec, std::int64_t shots,
                          std::uint64_t seed);

/// Moment inversion for the Stokes receiver; the result need not be fully polarized.
StokesVector naive_stokes_estimate(const CountRecord& c);

struct MleResult {
  ModalParams params;
  bool converged = false;
  int iterations = 0;
};

/// Maximizes sum_a (k_a ln(shots n_a) - shots n_a) over (a_h, a_v, phi_minus), or
/// over (a_h, phi_minus) on the sphere of radius `known_s0` when the power is known.
MleResult mle_estimate(const CountRecord& c, const Scenario& scenario, double known_s0 = 0.0);

enum class Estimator { Naive, Mle };

struct MseReport {
  std::vector<double> per_parameter_mse;  // shots-normalized, (S1, S2, S3)
  double total = 0.0;
  int trials = 0;
  int excluded = 0;       // estimator failures left out of the averages
  int not_converged = 0;  // MLE runs that hit the iteration cap (kept)
  std::vector<double> bias;    // mean estimate minus truth, per parameter
  std::vector<double> stderr_;  // standard error of that mean
};

/// splitmix64 step; per-trial seeds are splitmix64(seed + trial).
std::uint64_t splitmix64(std::uint64_t x);

MseReport mse_benchmark(const ModalParams& p, const ReceiverSpec& spec, const Scenario& scenario,
                        int trials, std::int64_t shots, Estimator estimator, std::uint64_t seed);

}  // namespace polarimetry
