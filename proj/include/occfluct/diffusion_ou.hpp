#pragma once

#include <span>
#include <vector>

namespace occfluct::ou {

/// Behaviour of the state variable under kinematical time reversal.
enum class Parity { Even, Odd };

/// dX = (drive - friction X) dt + sqrt(2 friction / beta) dW.
class OUModel {
 public:
  OUModel(double drive, double friction, double beta, Parity parity);

  double drive() const noexcept { return drive_; }
  double friction() const noexcept { return friction_; }
  double beta() const noexcept { return beta_; }
  Parity parity() const noexcept { return parity_; }

  double stationary_mean() const noexcept { return drive_ / friction_; }
  double stationary_variance() const noexcept { return 1.0 / beta_; }

 private:
  double drive_;
  double friction_;
  double beta_;
  Parity parity_;
};

struct GaussianDist {
  GaussianDist(double mean, double variance);

  double mean;
  double variance;
};

GaussianDist stationary_law(const OUModel& model);

/// Series RL circuit driven by an emf with Johnson-Nyquist noise on R.
class CircuitModel {
 public:
  CircuitModel(double resistance, double inductance, double emf, double beta);

  double resistance() const noexcept { return resistance_; }
  double inductance() const noexcept { return inductance_; }
  double emf() const noexcept { return emf_; }
  double beta() const noexcept { return beta_; }

  /// Current dynamics as an odd-parity OU process: friction R/L, drive emf/L, beta' = beta L.
  OUModel current_dynamics() const;

 private:
  double resistance_;
  double inductance_;
  double emf_;
  double beta_;
};

/// <(f')^2 / f>_rho with f = d mu / d rho, Gaussian closed form.
double fisher_information(const OUModel& model, const GaussianDist& mu);

/// DV functional (friction / (4 beta)) <(f')^2 / f>_rho.
double ou_dv_rate(const OUModel& model, const GaussianDist& mu);

/// Entropy production rate for the model's parity.
double ou_entropy_production(const OUModel& model, const GaussianDist& mu);

/// Same functionals by adaptive Gauss-Kronrod quadrature of the score
/// (log f)' against mu, over the hull of mean +- 12 sd for mu and rho.
double ou_dv_rate_quadrature(const OUModel& model, const GaussianDist& mu);
double ou_entropy_production_quadrature(const OUModel& model, const GaussianDist& mu);

/// I(mu) - (sigma(mu) + sigma(rho) - 2 beta drive <v>_mu) / 4 for an odd model.
double ou_modified_identity_residual(const OUModel& model, const GaussianDist& mu);

/// Means m with sigma(N(m, variance)) = beta * drive * m. Throws ConstraintInfeasible if none.
std::vector<double> constrained_means(const OUModel& model, double variance);

struct MaxEntropyProductionCheck {
  bool holds = false;
  double stationary_sigma = 0.0;
  double max_sigma = 0.0;  // over the constrained set
  std::vector<GaussianDist> points;
  std::vector<double> sigma;
};

/// Builds the constrained set from the given variances (plus the stationary
/// variance) and checks sigma(mu) <= sigma(rho) on it, with equality at rho.
MaxEntropyProductionCheck ou_max_ep_principle_check(const OUModel& model, std::span<const double> variances);

struct ContractedRate {
  double closed_form;       // (beta R / 4) (jbar - emf / R)^2
  double numerical;         // inf over Gaussian variances of the DV functional at mean jbar
  double argmin_variance;
};

ContractedRate circuit_contracted_rate(const CircuitModel& circuit, double jbar);

}  // namespace occfluct::ou
