#pragma once

#include <limits>

#include "occfluct/markov.hpp"

namespace occfluct {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Nonnegative rate, possibly +infinity.
struct EntropyRate {
  double value = 0.0;

  bool is_infinite() const { return value == kInfinity; }
};

/// Energies, edge inverse temperatures and reference inverse temperature
/// attached to a chain satisfying local detailed balance.
class ThermoModel {
 public:
  static constexpr double kLocalBalanceTolerance = 1e-9;

  /// edge_beta is read on pairs with k(x,y) > 0 and must be symmetric there.
  ThermoModel(RateMatrix k, Vector energy, Matrix edge_beta, double beta_ref);

  /// Every edge at beta_ref.
  static ThermoModel equilibrium(RateMatrix k, Vector energy, double beta_ref);

  const RateMatrix& rates() const noexcept { return k_; }
  const Vector& energy() const noexcept { return energy_; }
  const Matrix& edge_beta() const noexcept { return edge_beta_; }
  double beta_ref() const noexcept { return beta_ref_; }

  /// Boltzmann-Gibbs law at beta_ref.
  ProbDist boltzmann() const;

 private:
  RateMatrix k_;
  Vector energy_;
  Matrix edge_beta_;
  double beta_ref_;
};

EntropyRate entropy_production_rate(const RateMatrix& k, const ProbDist& mu);

/// S(mu | rho); +infinity unless mu << rho.
double relative_entropy(const ProbDist& mu, const ProbDist& rho);

struct EntropySplit {
  double system;     // may be +infinity when mu has zeros
  double reservoir;
};

EntropySplit entropy_decomposition(const ThermoModel& model, const ProbDist& mu);

struct EntropyDecayCheck {
  double sigma;
  double relative_entropy_decay;  // -d/dt S(mu_t | rho) at t = 0
};

/// Under detailed balance sigma(mu) equals the decay rate of S(mu_t | rho).
/// Throws NotDetailedBalance.
EntropyDecayCheck relative_entropy_decay_check(const RateMatrix& k, const ProbDist& mu);

}  // namespace occfluct
