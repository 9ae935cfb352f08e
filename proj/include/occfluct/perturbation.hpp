#pragma once

#include <span>
#include <vector>

#include "occfluct/markov.hpp"

namespace occfluct {

/// Rates k(eps) = k0 + eps * k1 around a reversible k0, valid for |eps| <= eps_max.
class PerturbationFamily {
 public:
  /// Validates reversibility of k0, the support of k1, nonnegativity and
  /// irreducibility of k(eps) on [-eps_max, eps_max].
  PerturbationFamily(RateMatrix k0, Matrix k1, double eps_max);

  const RateMatrix& base() const noexcept { return k0_; }
  const Matrix& direction() const noexcept { return k1_; }
  double eps_max() const noexcept { return eps_max_; }
  const ProbDist& reference() const noexcept { return rho0_; }
  const StateSpace& space() const noexcept { return k0_.space(); }

  RateMatrix rates_at(double eps) const;

 private:
  RateMatrix k0_;
  Matrix k1_;
  double eps_max_;
  ProbDist rho0_;
};

/// mu(eps) = rho0 (1 + eps f1) with <f1>_rho0 = 0.
class DistFamily {
 public:
  DistFamily(const PerturbationFamily& family, Vector f1);

  /// Subtracts <f1>_rho0 first.
  static DistFamily centered(const PerturbationFamily& family, Vector f1);

  const Vector& direction() const noexcept { return f1_; }
  ProbDist at(double eps) const;

 private:
  ProbDist rho0_;
  Vector f1_;
};

/// L+ = D^{-1} L^T D with D = diag(rho0): the adjoint in L^2(rho0).
Matrix adjoint_matrix(const Matrix& generator, const ProbDist& rho0);
Vector adjoint_apply(const RateMatrix& k, const ProbDist& rho0, const Vector& phi);

/// h1 with L0 h1 = -L1+ 1 and <h1>_rho0 = 0: first-order density of rho(eps) w.r.t. rho0.
Vector first_order_stationary(const PerturbationFamily& family);

/// g1* = (f1 - h1) / 2, checked against 2 L0 g1 = L0 f1 + L1+ 1.
Vector first_order_maximizer(const PerturbationFamily& family, const DistFamily& dist);

/// -<sqrt(F) L(eps) sqrt(F)> with F = dmu(eps)/drho(eps), weighted by rho(eps).
double dv_leading_order(const PerturbationFamily& family, const DistFamily& dist, double eps);

/// c in I(mu(eps)) = c eps^2 + o(eps^2), from
/// -(1/4) <f1 L0 f1 - h1 L0 h1 + 2 L1 f1 - 2 L1 h1>_rho0.
double dv_quadratic_coefficient(const PerturbationFamily& family, const DistFamily& dist);

struct ScanRow {
  double eps;
  double I;  // dv_rate(k(eps), mu(eps))
  double Q;  // (sigma(mu(eps)) - sigma(rho(eps))) / 4
  double diff;
  double diff_over_eps2;
  double I_over_eps2;
  double Q_over_eps2;
};

/// Rows ordered as in eps_grid. Grid points are evaluated concurrently.
std::vector<ScanRow> theorem_main_scan(const PerturbationFamily& family, const DistFamily& dist,
                                       std::span<const double> eps_grid);

/// 10^-1, 10^-1.5, ..., 10^-4.
std::vector<double> default_eps_grid();

}  // namespace occfluct
