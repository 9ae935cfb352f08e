#include "occfluct/dv_solver.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Eigenvalues>

#include "occfluct/errors.hpp"

namespace occfluct {

double TiltCertificate::max_residual() const {
  return std::max({eigen_residual, mean_residual, std::abs(principal_eigenvalue), stationarity_residual});
}

namespace {

using Index = Eigen::Index;

// F(u) = sum_x mu(x) sum_y k(x,y) (1 - exp(u(y) - u(x))), concave in u.
struct LogObjective {
  const Matrix& rates;
  const Vector& weights;

  double value(const Vector& u) const {
    double total = 0.0;
    for (Index x = 0; x < rates.rows(); ++x) {
      if (weights(x) == 0.0) continue;
      double row = 0.0;
      for (Index y = 0; y < rates.cols(); ++y) {
        if (rates(x, y) != 0.0) row -= rates(x, y) * std::expm1(u(y) - u(x));
      }
      total += weights(x) * row;
    }
    return total;
  }

  // Edge weights w(x,y) = mu(x) k(x,y) exp(u(y) - u(x)).
  Matrix flux(const Vector& u) const {
    Matrix w = Matrix::Zero(rates.rows(), rates.cols());
    for (Index x = 0; x < rates.rows(); ++x) {
      for (Index y = 0; y < rates.cols(); ++y) {
        if (rates(x, y) != 0.0) w(x, y) = weights(x) * rates(x, y) * std::exp(u(y) - u(x));
      }
    }
    return w;
  }

  // dF/du(z) = outflow(z) - inflow(z).
  static Vector gradient(const Matrix& w) { return w.rowwise().sum() - w.colwise().sum().transpose(); }

  // Negated Hessian: weighted graph Laplacian of w + w^T, positive semidefinite.
  static Matrix neg_hessian(const Matrix& w) {
    const Matrix sym = w + w.transpose();
    Matrix h = -sym;
    h.diagonal() = sym.rowwise().sum() - sym.diagonal();
    return h;
  }
};

Vector drop(const Vector& v, Index skip) {
  Vector out(v.size() - 1);
  for (Index i = 0, j = 0; i < v.size(); ++i) {
    if (i != skip) out(j++) = v(i);
  }
  return out;
}

Matrix drop(const Matrix& m, Index skip) {
  Matrix out(m.rows() - 1, m.cols() - 1);
  for (Index i = 0, r = 0; i < m.rows(); ++i) {
    if (i == skip) continue;
    for (Index j = 0, c = 0; j < m.cols(); ++j) {
      if (j != skip) out(r, c++) = m(i, j);
    }
    ++r;
  }
  return out;
}

Vector lift(const Vector& v, Index skip) {
  Vector out = Vector::Zero(v.size() + 1);
  for (Index i = 0, j = 0; i < out.size(); ++i) {
    if (i != skip) out(i) = v(j++);
  }
  return out;
}

struct NewtonOutcome {
  Vector u;
  double value;
  int iterations;
};

// Damped Newton ascent on F over R^n with u(gauge) = 0. Requires a finite maximizer.
NewtonOutcome maximize_interior(const Matrix& rates, const Vector& weights, Vector u, Index gauge,
                                const DVOptions& options) {
  const LogObjective objective{rates, weights};
  const double scale = std::max(1.0, rates.rowwise().sum().maxCoeff());
  const double tolerance = options.gradient_tolerance * scale;
  u.array() -= u(gauge);

  double value = objective.value(u);
  for (int iter = 0; iter < options.max_iterations; ++iter) {
    const Matrix w = objective.flux(u);
    const Vector grad = drop(LogObjective::gradient(w), gauge);
    const double grad_norm = grad.cwiseAbs().maxCoeff();
    if (grad_norm <= tolerance) return {u, value, iter};

    Vector step;
    const Eigen::LDLT<Matrix> ldlt(drop(LogObjective::neg_hessian(w), gauge));
    if (ldlt.info() == Eigen::Success && ldlt.isPositive() && (ldlt.vectorD().array() > 0.0).all()) {
      step = ldlt.solve(grad);
    }
    if (step.size() == 0 || !step.allFinite() || step.dot(grad) <= 0.0) step = grad;  // gradient ascent fallback

    const double slope = step.dot(grad);
    double t = 1.0;
    Vector trial;
    double trial_value = value;
    bool accepted = false;
    while (t > 1e-16) {
      trial = u + t * lift(step, gauge);
      trial_value = objective.value(trial);
      if (trial_value >= value + 1e-4 * t * slope) {
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) {
      // No representable ascent left; accept if the gradient is already at roundoff scale.
      if (grad_norm <= 1e-8 * scale) return {u, value, iter};
      throw Error(ErrorKind::SolverFailure, "line search failed in DV maximization");
    }
    u = std::move(trial);
    value = trial_value;
    if (u.cwiseAbs().maxCoeff() > options.divergence_bound)
      throw Error(ErrorKind::SolverFailure, "DV maximizer diverged for a strictly positive distribution");
  }
  const Matrix w = objective.flux(u);
  if (drop(LogObjective::gradient(w), gauge).cwiseAbs().maxCoeff() <= 1e-8 * scale)
    return {u, value, options.max_iterations};
  throw Error(ErrorKind::SolverFailure, "DV maximization did not converge");
}

Vector warm_start(const Vector& weights, const Vector& rho) {
  Vector u = Vector::Zero(weights.size());
  for (Index x = 0; x < weights.size(); ++x) {
    if (weights(x) > 0.0) u(x) = 0.5 * std::log(weights(x) / rho(x));
  }
  return u;
}

// Strongly connected components of the positive-rate graph restricted to `members`.
std::vector<std::vector<Index>> strong_components(const Matrix& rates, const std::vector<Index>& members) {
  const auto m = members.size();
  std::vector<std::vector<bool>> reach(m, std::vector<bool>(m, false));
  for (std::size_t i = 0; i < m; ++i) {
    reach[i][i] = true;
    std::vector<std::size_t> stack{i};
    while (!stack.empty()) {
      const auto a = stack.back();
      stack.pop_back();
      for (std::size_t b = 0; b < m; ++b) {
        if (!reach[i][b] && rates(members[a], members[b]) > 0.0) {
          reach[i][b] = true;
          stack.push_back(b);
        }
      }
    }
  }
  std::vector<int> comp(m, -1);
  std::vector<std::vector<Index>> components;
  for (std::size_t i = 0; i < m; ++i) {
    if (comp[i] >= 0) continue;
    components.emplace_back();
    for (std::size_t j = 0; j < m; ++j) {
      if (reach[i][j] && reach[j][i]) {
        comp[j] = static_cast<int>(components.size() - 1);
        components.back().push_back(members[j]);
      }
    }
  }
  return components;
}

// Supremum of F when mu vanishes somewhere. Transitions leaving supp(mu), and transitions
// between strongly connected components of the graph on supp(mu), can have their
// exp(u(y) - u(x)) factor driven to zero, so they contribute their full flux; the remaining
// within-component problems have interior maximizers.
double boundary_supremum(const Matrix& rates, const Vector& mu, const DVOptions& options) {
  std::vector<Index> support;
  for (Index x = 0; x < mu.size(); ++x) {
    if (mu(x) > 0.0) support.push_back(x);
  }
  const auto components = strong_components(rates, support);
  std::vector<int> comp_of(static_cast<std::size_t>(mu.size()), -1);
  for (std::size_t c = 0; c < components.size(); ++c) {
    for (auto x : components[c]) comp_of[static_cast<std::size_t>(x)] = static_cast<int>(c);
  }

  double total = 0.0;
  for (auto x : support) {
    for (Index y = 0; y < rates.cols(); ++y) {
      if (y != x && comp_of[static_cast<std::size_t>(y)] != comp_of[static_cast<std::size_t>(x)])
        total += mu(x) * rates(x, y);
    }
  }
  for (const auto& members : components) {
    if (members.size() < 2) continue;
    const auto m = static_cast<Index>(members.size());
    Matrix sub_rates(m, m);
    Vector sub_mu(m);
    for (Index i = 0; i < m; ++i) {
      sub_mu(i) = mu(members[static_cast<std::size_t>(i)]);
      for (Index j = 0; j < m; ++j) {
        sub_rates(i, j) = (i == j) ? 0.0 : rates(members[static_cast<std::size_t>(i)], members[static_cast<std::size_t>(j)]);
      }
    }
    const double mass = sub_mu.sum();
    const Vector weights = sub_mu / mass;
    const RateMatrix sub_chain(StateSpace::indexed(static_cast<std::size_t>(m)), sub_rates);
    const Vector sub_rho = stationary_distribution(sub_chain).vector();
    DVOptions sub_options = options;
    sub_options.gauge_state = 0;
    const auto outcome = maximize_interior(sub_rates, weights, warm_start(weights, sub_rho), 0, sub_options);
    total += mass * outcome.value;
  }
  return total;
}

TiltCertificate build_certificate(const RateMatrix& k, const Vector& g, const ProbDist& mu, double value) {
  const Matrix L = generator_from_rates(k.matrix());
  TiltCertificate cert;
  cert.potential = -(L * g).cwiseQuotient(g);
  const Vector tilted = L * g + cert.potential.cwiseProduct(g);
  cert.eigen_residual = tilted.cwiseAbs().maxCoeff() / g.cwiseAbs().maxCoeff();
  cert.mean_residual = std::abs(mu.vector().dot(cert.potential) - value);
  cert.principal_eigenvalue = principal_eigenvalue_power(k, cert.potential);
  const Vector u = g.array().log();
  const LogObjective objective{k.matrix(), mu.vector()};
  cert.stationarity_residual = LogObjective::gradient(objective.flux(u)).cwiseAbs().maxCoeff();
  return cert;
}

}  // namespace

DVResult dv_rate(const RateMatrix& k, const ProbDist& mu, const DVOptions& options) {
  if (!(mu.space() == k.space())) throw Error(ErrorKind::InvalidInput, "distribution and rates use different spaces");
  if (options.gauge_state >= k.size()) throw Error(ErrorKind::InvalidInput, "gauge state out of range");
  const ProbDist rho = stationary_distribution(k);  // throws NotIrreducible

  DVResult result;
  if (!mu.strictly_positive()) {
    // With irreducible rates, some transition leaves supp(mu) and pushes u to -inf there.
    result.interior = false;
    result.value = boundary_supremum(k.matrix(), mu.vector(), options);
    return result;
  }

  const auto gauge = static_cast<Index>(options.gauge_state);
  const auto outcome = maximize_interior(k.matrix(), mu.vector(), warm_start(mu.vector(), rho.vector()), gauge, options);
  result.value = std::max(outcome.value, 0.0);
  result.iterations = outcome.iterations;
  Vector g = outcome.u.array().exp();
  g /= g.mean();
  result.certificate = build_certificate(k, g, mu, result.value);
  result.maximizer = std::move(g);
  return result;
}

double dv_rate_reversible(const RateMatrix& k, const ProbDist& mu) {
  if (!(mu.space() == k.space())) throw Error(ErrorKind::InvalidInput, "distribution and rates use different spaces");
  const ProbDist rho = stationary_distribution(k);
  if (!is_detailed_balance(k, rho, default_balance_tolerance(k, rho)))
    throw Error(ErrorKind::NotDetailedBalance, "chain is not reversible");
  const Vector root_f = mu.vector().cwiseQuotient(rho.vector()).cwiseSqrt();
  double form = 0.0;
  for (Index x = 0; x < root_f.size(); ++x) {
    for (Index y = 0; y < root_f.size(); ++y) {
      const double d = root_f(y) - root_f(x);
      form += rho(static_cast<std::size_t>(x)) * k(static_cast<std::size_t>(x), static_cast<std::size_t>(y)) * d * d;
    }
  }
  return 0.5 * form;
}

double spectral_gap(const RateMatrix& k) {
  const ProbDist rho = stationary_distribution(k);
  if (!is_detailed_balance(k, rho, default_balance_tolerance(k, rho)))
    throw Error(ErrorKind::NotDetailedBalance, "chain is not reversible");
  const Vector root = rho.vector().cwiseSqrt();
  // D^{1/2} (-L) D^{-1/2} is symmetric under detailed balance.
  Matrix sym = root.asDiagonal() * (-generator_from_rates(k.matrix())) * root.cwiseInverse().asDiagonal();
  sym = 0.5 * (sym + sym.transpose()).eval();
  const Eigen::SelfAdjointEigenSolver<Matrix> solver(sym, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw Error(ErrorKind::SolverFailure, "symmetric eigensolve failed");
  return solver.eigenvalues()(1);
}

double principal_eigenvalue_power(const RateMatrix& k, const Vector& potential) {
  Matrix A = generator_from_rates(k.matrix());
  A.diagonal() += potential;
  const double shift = 1.0 + A.diagonal().cwiseAbs().maxCoeff();
  A.diagonal().array() += shift;

  // Collatz-Wielandt bounds min/max (Ax)_i / x_i bracket the Perron root.
  Vector x = Vector::Ones(A.rows());
  double lower = 0.0;
  double upper = 0.0;
  for (int iter = 0; iter < 100000; ++iter) {
    const Vector y = A * x;
    const Vector ratio = y.cwiseQuotient(x);
    lower = ratio.minCoeff();
    upper = ratio.maxCoeff();
    if (upper - lower <= 1e-12 * std::max(1.0, std::abs(upper - shift))) break;
    x = y / y.maxCoeff();
  }
  return 0.5 * (lower + upper) - shift;
}

double principal_eigenvalue_dense(const RateMatrix& k, const Vector& potential) {
  Matrix A = generator_from_rates(k.matrix());
  A.diagonal() += potential;
  const Eigen::EigenSolver<Matrix> solver(A, false);
  if (solver.info() != Eigen::Success) throw Error(ErrorKind::SolverFailure, "dense eigensolve failed");
  return solver.eigenvalues().real().maxCoeff();
}

TiltCertificate tilt_certificate(const RateMatrix& k, const DVResult& r, const ProbDist& mu) {
  if (!r.maximizer) throw Error(ErrorKind::InvalidInput, "no interior maximizer to certify");
  auto cert = build_certificate(k, *r.maximizer, mu, r.value);
  if (cert.max_residual() > TiltCertificate::kFailureTolerance)
    throw Error(ErrorKind::CertificateFailed, "tilted generator residuals exceed 1e-6");
  return cert;
}

}  // namespace occfluct
