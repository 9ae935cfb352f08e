#pragma once

#include <cstddef>
#include <optional>

#include "occfluct/markov.hpp"

namespace occfluct {

struct DVOptions {
  /// State whose log-weight is pinned to zero during optimization.
  std::size_t gauge_state = 0;
  /// Stop when the sup-norm gradient falls below this times max(1, max exit rate).
  double gradient_tolerance = 1e-12;
  int max_iterations = 200;
  /// |u| beyond this bound in the log domain counts as divergence.
  double divergence_bound = 50.0;
};

/// Optimality evidence for an interior maximizer g* of the DV objective.
struct TiltCertificate {
  static constexpr double kSuccessTolerance = 1e-8;
  static constexpr double kFailureTolerance = 1e-6;

  Vector potential;                 // V* = -(L g*) / g*
  double eigen_residual = 0.0;      // |(L + diag V*) g*|_inf / |g*|_inf
  double mean_residual = 0.0;       // |<V*>_mu - I(mu)|
  double principal_eigenvalue = 0.0;  // of L + diag V*, by power iteration; should be 0
  double stationarity_residual = 0.0;  // |grad F|_inf at the maximizer

  double max_residual() const;
};

struct DVResult {
  double value = 0.0;
  /// False when mu has zeros: the supremum is then approached only as some log-weights go to -inf.
  bool interior = true;
  /// Maximizer with unit arithmetic mean; set only for interior results.
  std::optional<Vector> maximizer;
  std::optional<TiltCertificate> certificate;
  int iterations = 0;
};

/// I(mu) = sup_{g>0} -<Lg/g>_mu by concave maximization over u = log g.
/// Throws NotIrreducible, InvalidInput, or SolverFailure.
DVResult dv_rate(const RateMatrix& k, const ProbDist& mu, const DVOptions& options = {});

/// Dirichlet form of sqrt(dmu/drho) for a reversible chain. Throws NotDetailedBalance.
double dv_rate_reversible(const RateMatrix& k, const ProbDist& mu);

/// Smallest nonzero eigenvalue of -L in L^2(rho). Throws NotDetailedBalance.
double spectral_gap(const RateMatrix& k);

/// Throws CertificateFailed if any residual exceeds 1e-6, InvalidInput if r has no maximizer.
TiltCertificate tilt_certificate(const RateMatrix& k, const DVResult& r, const ProbDist& mu);

/// Principal eigenvalue of L + diag(V) by shifted power iteration.
double principal_eigenvalue_power(const RateMatrix& k, const Vector& potential);

/// Principal eigenvalue of L + diag(V) from a dense nonsymmetric eigensolve.
double principal_eigenvalue_dense(const RateMatrix& k, const Vector& potential);

}  // namespace occfluct
