#pragma once

#include <cstddef>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "occfluct/markov.hpp"

namespace occfluct {

/// Seedable 64-bit stream with portable uniform and exponential draws.
/// Engine is std::mt19937_64, whose output sequence is fixed by the standard;
/// variates are formed by hand so results do not depend on the library's distributions.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

  /// Stream for the index-th parallel task of a run with the given seed.
  static RandomStream split(std::uint64_t seed, std::uint64_t index);

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  /// Strictly positive exponential variate.
  double exponential(double rate) {
    const double open = (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
    return -std::log(open) / rate;
  }

 private:
  std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x);

/// Seed of the index-th independent stream derived from a run seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

/// Piecewise-constant path on [0, horizon).
class Trajectory {
 public:
  Trajectory(StateSpace space, std::size_t initial, std::vector<double> jump_times, std::vector<std::size_t> states,
             double horizon);

  const StateSpace& space() const noexcept { return space_; }
  std::size_t initial() const noexcept { return initial_; }
  const std::vector<double>& jump_times() const noexcept { return jump_times_; }
  /// states()[i] is entered at jump_times()[i].
  const std::vector<std::size_t>& states() const noexcept { return states_; }
  double horizon() const noexcept { return horizon_; }
  std::size_t jump_count() const noexcept { return jump_times_.size(); }

  friend bool operator==(const Trajectory&, const Trajectory&) = default;

 private:
  StateSpace space_;
  std::size_t initial_;
  std::vector<double> jump_times_;
  std::vector<std::size_t> states_;
  double horizon_;
};

/// Exact (Gillespie) sample path; deterministic in the seed.
Trajectory gillespie(const RateMatrix& k, std::size_t x0, double horizon, std::uint64_t seed);

struct OccupationRecord {
  ProbDist fractions;
  double horizon;
};

/// Fraction of [0, T) spent in each state.
OccupationRecord occupation(const Trajectory& trajectory);

/// Independent runs with per-run streams RandomStream::split(seed, i).
std::vector<OccupationRecord> occupation_samples(const RateMatrix& k, std::size_t x0, double horizon,
                                                 std::size_t n_samples, std::uint64_t seed);

struct FeynmanKacEstimate {
  double lambda;
  double standard_error;  // delta method on the log-mean
  std::size_t n_samples;
};

/// (1/T) log E[exp(int_0^T V(X_t) dt)] with X_0 drawn from the stationary law.
/// V is shifted by max V internally. Throws OverflowGuard when the sampled
/// exponents spread over more than 700.
FeynmanKacEstimate feynman_kac_estimate(const RateMatrix& k, const Vector& potential, double horizon,
                                        std::size_t n_samples, std::uint64_t seed);

/// Pairwise summation; the result depends only on the order of values.
double pairwise_sum(std::span<const double> values);

}  // namespace occfluct
