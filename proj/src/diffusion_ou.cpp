#include "occfluct/diffusion_ou.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/minima.hpp>

#include "occfluct/errors.hpp"

namespace occfluct::ou {

OUModel::OUModel(double drive, double friction, double beta, Parity parity)
    : drive_(drive), friction_(friction), beta_(beta), parity_(parity) {
  if (!std::isfinite(drive_)) throw Error(ErrorKind::InvalidInput, "drive must be finite");
  if (!(friction_ > 0.0) || !std::isfinite(friction_)) throw Error(ErrorKind::InvalidInput, "friction must be > 0");
  if (!(beta_ > 0.0) || !std::isfinite(beta_)) throw Error(ErrorKind::InvalidInput, "beta must be > 0");
}

GaussianDist::GaussianDist(double mean_, double variance_) : mean(mean_), variance(variance_) {
  if (!std::isfinite(mean)) throw Error(ErrorKind::InvalidInput, "mean must be finite");
  if (!(variance > 0.0) || !std::isfinite(variance)) throw Error(ErrorKind::InvalidInput, "variance must be > 0");
}

GaussianDist stationary_law(const OUModel& model) {
  return GaussianDist(model.stationary_mean(), model.stationary_variance());
}

CircuitModel::CircuitModel(double resistance, double inductance, double emf, double beta)
    : resistance_(resistance), inductance_(inductance), emf_(emf), beta_(beta) {
  if (!(resistance_ > 0.0) || !std::isfinite(resistance_)) throw Error(ErrorKind::InvalidInput, "R must be > 0");
  if (!(inductance_ > 0.0) || !std::isfinite(inductance_)) throw Error(ErrorKind::InvalidInput, "L must be > 0");
  if (!std::isfinite(emf_)) throw Error(ErrorKind::InvalidInput, "emf must be finite");
  if (!(beta_ > 0.0) || !std::isfinite(beta_)) throw Error(ErrorKind::InvalidInput, "beta must be > 0");
}

OUModel CircuitModel::current_dynamics() const {
  return OUModel(emf_ / inductance_, resistance_ / inductance_, beta_ * inductance_, Parity::Odd);
}

namespace {

// (log f)'(x) = a x + b with f = N(m, s^2) / N(m0, s0^2).
struct Score {
  double a;
  double b;
};

Score score(const OUModel& model, const GaussianDist& mu) {
  const double s0sq = model.stationary_variance();
  const double m0 = model.stationary_mean();
  return Score{1.0 / s0sq - 1.0 / mu.variance, mu.mean / mu.variance - m0 / s0sq};
}

// Offset added to the score by the odd-parity entropy production.
double odd_shift(const OUModel& model) { return model.beta() * model.drive() / model.friction(); }

// E_mu[(a x + b + c)^2] by quadrature.
double score_moment_quadrature(const OUModel& model, const GaussianDist& mu, double shift) {
  const double s = std::sqrt(mu.variance);
  const double s0 = std::sqrt(model.stationary_variance());
  const double m0 = model.stationary_mean();
  const double lo = std::min(mu.mean - 12.0 * s, m0 - 12.0 * s0);
  const double hi = std::max(mu.mean + 12.0 * s, m0 + 12.0 * s0);
  const double norm = 1.0 / (s * std::sqrt(2.0 * std::numbers::pi));
  const auto integrand = [&](double x) {
    const double z = (x - mu.mean) / s;
    const double density = norm * std::exp(-0.5 * z * z);
    // Scores of the two Gaussians, differenced directly.
    const double slope = -(x - mu.mean) / mu.variance + (x - m0) / model.stationary_variance() + shift;
    return density * slope * slope;
  };
  double error = 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(integrand, lo, hi, 20, 1e-13, &error);
}

}  // namespace

double fisher_information(const OUModel& model, const GaussianDist& mu) {
  const double s0sq = model.stationary_variance();
  const double a = 1.0 / s0sq - 1.0 / mu.variance;
  const double dm = mu.mean - model.stationary_mean();
  return mu.variance * a * a + dm * dm / (s0sq * s0sq);
}

double ou_dv_rate(const OUModel& model, const GaussianDist& mu) {
  return model.friction() / (4.0 * model.beta()) * fisher_information(model, mu);
}

double ou_entropy_production(const OUModel& model, const GaussianDist& mu) {
  const double prefactor = model.friction() / model.beta();
  if (model.parity() == Parity::Even) return prefactor * fisher_information(model, mu);
  const auto [a, b] = score(model, mu);
  const double centre = a * mu.mean + b + odd_shift(model);
  return prefactor * (mu.variance * a * a + centre * centre);
}

double ou_dv_rate_quadrature(const OUModel& model, const GaussianDist& mu) {
  return model.friction() / (4.0 * model.beta()) * score_moment_quadrature(model, mu, 0.0);
}

double ou_entropy_production_quadrature(const OUModel& model, const GaussianDist& mu) {
  const double shift = model.parity() == Parity::Odd ? odd_shift(model) : 0.0;
  return model.friction() / model.beta() * score_moment_quadrature(model, mu, shift);
}

double ou_modified_identity_residual(const OUModel& model, const GaussianDist& mu) {
  if (model.parity() != Parity::Odd) throw Error(ErrorKind::InvalidInput, "modified identity needs odd parity");
  const double sigma_rho = ou_entropy_production(model, stationary_law(model));
  const double rhs = 0.25 * (ou_entropy_production(model, mu) + sigma_rho -
                             2.0 * model.beta() * model.drive() * mu.mean);
  return ou_dv_rate(model, mu) - rhs;
}

std::vector<double> constrained_means(const OUModel& model, double variance) {
  if (model.parity() != Parity::Odd) throw Error(ErrorKind::InvalidInput, "constraint is defined for odd parity");
  // With d = m - m0 the constraint reads gamma beta d^2 + beta E d + (gamma / beta) a^2 s^2 = 0.
  const double gamma = model.friction();
  const double beta = model.beta();
  const double a = 1.0 / model.stationary_variance() - 1.0 / variance;
  const double qa = gamma * beta;
  const double qb = beta * model.drive();
  const double qc = gamma / beta * a * a * variance;
  const double disc = qb * qb - 4.0 * qa * qc;
  if (disc < 0.0) throw Error(ErrorKind::ConstraintInfeasible, "no mean satisfies the constraint at this variance");
  // Cancellation-free roots.
  const double root = std::sqrt(disc);
  const double q = -0.5 * (qb + std::copysign(root, qb));
  std::vector<double> means;
  if (q == 0.0) {
    means.push_back(model.stationary_mean());
  } else {
    means.push_back(model.stationary_mean() + q / qa);
    means.push_back(model.stationary_mean() + qc / q);
  }
  for (const double m : means) {
    const GaussianDist mu(m, variance);
    const double violation = ou_entropy_production(model, mu) - beta * model.drive() * m;
    if (std::abs(violation) > 1e-9) throw Error(ErrorKind::SolverFailure, "constraint solve is inaccurate");
  }
  return means;
}

MaxEntropyProductionCheck ou_max_ep_principle_check(const OUModel& model, std::span<const double> variances) {
  MaxEntropyProductionCheck check;
  const GaussianDist rho = stationary_law(model);
  check.stationary_sigma = ou_entropy_production(model, rho);
  check.max_sigma = -std::numeric_limits<double>::infinity();

  std::vector<double> all(variances.begin(), variances.end());
  all.push_back(rho.variance);
  bool equality_at_rho = false;
  for (const double variance : all) {
    for (const double m : constrained_means(model, variance)) {
      const GaussianDist mu(m, variance);
      const double sigma = ou_entropy_production(model, mu);
      check.points.push_back(mu);
      check.sigma.push_back(sigma);
      check.max_sigma = std::max(check.max_sigma, sigma);
      const bool at_rho = std::abs(m - rho.mean) <= 1e-12 * std::max(1.0, std::abs(rho.mean)) &&
                          std::abs(variance - rho.variance) <= 1e-12 * rho.variance;
      if (at_rho && std::abs(sigma - check.stationary_sigma) <= 1e-10) equality_at_rho = true;
    }
  }
  check.holds = equality_at_rho && check.max_sigma <= check.stationary_sigma + 1e-10;
  return check;
}

ContractedRate circuit_contracted_rate(const CircuitModel& circuit, double jbar) {
  const OUModel dynamics = circuit.current_dynamics();
  const double offset = jbar - circuit.emf() / circuit.resistance();
  ContractedRate out{};
  out.closed_form = circuit.beta() * circuit.resistance() / 4.0 * offset * offset;

  const double log_s0sq = std::log(dynamics.stationary_variance());
  const auto objective = [&](double log_variance) {
    return ou_dv_rate(dynamics, GaussianDist(jbar, std::exp(log_variance)));
  };
  const auto [arg, value] = boost::math::tools::brent_find_minima(objective, log_s0sq - 20.0, log_s0sq + 20.0,
                                                                   std::numeric_limits<double>::digits / 2);
  out.numerical = value;
  out.argmin_variance = std::exp(arg);
  return out;
}

}  // namespace occfluct::ou
