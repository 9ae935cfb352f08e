#include "occfluct/thermo.hpp"

#include <cmath>

#include "occfluct/errors.hpp"

namespace occfluct {

ThermoModel::ThermoModel(RateMatrix k, Vector energy, Matrix edge_beta, double beta_ref)
    : k_(std::move(k)), energy_(std::move(energy)), edge_beta_(std::move(edge_beta)), beta_ref_(beta_ref) {
  const auto n = static_cast<Eigen::Index>(k_.size());
  if (energy_.size() != n || edge_beta_.rows() != n || edge_beta_.cols() != n)
    throw Error(ErrorKind::InvalidInput, "thermodynamic data does not match the state space");
  if (!std::isfinite(beta_ref_)) throw Error(ErrorKind::InvalidInput, "reference inverse temperature must be finite");
  for (Eigen::Index x = 0; x < n; ++x) {
    for (Eigen::Index y = x + 1; y < n; ++y) {
      const double fwd = k_(x, y);
      const double bwd = k_(y, x);
      if (fwd == 0.0 && bwd == 0.0) continue;
      if (edge_beta_(x, y) != edge_beta_(y, x))
        throw Error(ErrorKind::InvalidInput, "edge inverse temperatures must be symmetric");
      // Local detailed balance forces k(x,y) > 0 <=> k(y,x) > 0.
      if (fwd == 0.0 || bwd == 0.0)
        throw Error(ErrorKind::LocalDetailedBalanceViolated,
                    "one-way edge " + k_.space().label(x) + " -> " + k_.space().label(y));
      const double mismatch = std::log(fwd / bwd) - edge_beta_(x, y) * (energy_(x) - energy_(y));
      if (!(std::abs(mismatch) <= kLocalBalanceTolerance))
        throw Error(ErrorKind::LocalDetailedBalanceViolated,
                    "edge " + k_.space().label(x) + " <-> " + k_.space().label(y));
    }
  }
}

ThermoModel ThermoModel::equilibrium(RateMatrix k, Vector energy, double beta_ref) {
  const auto n = static_cast<Eigen::Index>(k.size());
  return ThermoModel(std::move(k), std::move(energy), Matrix::Constant(n, n, beta_ref), beta_ref);
}

ProbDist ThermoModel::boltzmann() const {
  const Vector log_w = -beta_ref_ * energy_;
  const Vector w = (log_w.array() - log_w.maxCoeff()).exp();
  return ProbDist::normalized(k_.space(), w);
}

EntropyRate entropy_production_rate(const RateMatrix& k, const ProbDist& mu) {
  const auto n = static_cast<Eigen::Index>(k.size());
  double total = 0.0;
  // Symmetrized: each unordered pair contributes (a - b) log(a / b) >= 0.
  for (Eigen::Index x = 0; x < n; ++x) {
    for (Eigen::Index y = x + 1; y < n; ++y) {
      const double a = mu(x) * k(x, y);
      const double b = mu(y) * k(y, x);
      if (a == 0.0 && b == 0.0) continue;
      if (a == 0.0 || b == 0.0) return EntropyRate{kInfinity};
      total += (a - b) * std::log(a / b);
    }
  }
  if (std::isnan(total)) throw Error(ErrorKind::SolverFailure, "entropy production evaluated to NaN");
  return EntropyRate{total};
}

double relative_entropy(const ProbDist& mu, const ProbDist& rho) {
  double total = 0.0;
  for (std::size_t x = 0; x < mu.size(); ++x) {
    if (mu(x) == 0.0) continue;
    if (rho(x) == 0.0) return kInfinity;
    total += mu(x) * std::log(mu(x) / rho(x));
  }
  return total;
}

EntropySplit entropy_decomposition(const ThermoModel& model, const ProbDist& mu) {
  const auto& k = model.rates();
  const auto& energy = model.energy();
  const double beta = model.beta_ref();
  const auto n = static_cast<Eigen::Index>(k.size());
  double system = 0.0;
  double reservoir = 0.0;
  for (Eigen::Index x = 0; x < n; ++x) {
    for (Eigen::Index y = x + 1; y < n; ++y) {
      if (k(x, y) == 0.0) continue;
      const double a = mu(x) * k(x, y);
      const double b = mu(y) * k(y, x);
      const double gap = energy(x) - energy(y);
      reservoir += (model.edge_beta()(x, y) - beta) * gap * (a - b);
      if (a == 0.0 && b == 0.0) continue;
      if (a == 0.0 || b == 0.0) {
        system = kInfinity;
        continue;
      }
      if (system != kInfinity) system += (a - b) * (std::log(mu(x) / mu(y)) + beta * gap);
    }
  }
  return EntropySplit{system, reservoir};
}

EntropyDecayCheck relative_entropy_decay_check(const RateMatrix& k, const ProbDist& mu) {
  const ProbDist rho = stationary_distribution(k);
  if (!is_detailed_balance(k, rho, default_balance_tolerance(k, rho)))
    throw Error(ErrorKind::NotDetailedBalance, "chain is not reversible");
  const Vector dmu = generator_from_rates(k.matrix()).transpose() * mu.vector();
  double decay = 0.0;
  for (std::size_t x = 0; x < mu.size(); ++x) {
    const auto i = static_cast<Eigen::Index>(x);
    if (dmu(i) == 0.0) continue;
    if (mu(x) == 0.0) {
      // Mass flows into an empty state: -log(0) * dmu > 0.
      decay = kInfinity;
      break;
    }
    decay -= std::log(mu(x) / rho(x)) * dmu(i);
  }
  return EntropyDecayCheck{entropy_production_rate(k, mu).value, decay};
}

}  // namespace occfluct
