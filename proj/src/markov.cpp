#include "occfluct/markov.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <sstream>

#include <unsupported/Eigen/MatrixFunctions>

#include "occfluct/errors.hpp"

namespace occfluct {

StateSpace::StateSpace(std::vector<std::string> labels) : labels_(std::move(labels)) {
  if (labels_.size() < 2) throw Error(ErrorKind::InvalidInput, "state space needs at least two states");
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (!index_.emplace(labels_[i], i).second)
      throw Error(ErrorKind::InvalidInput, "duplicate state label '" + labels_[i] + "'");
  }
}

StateSpace StateSpace::indexed(std::size_t n) {
  std::vector<std::string> labels(n);
  for (std::size_t i = 0; i < n; ++i) labels[i] = std::to_string(i);
  return StateSpace(std::move(labels));
}

std::size_t StateSpace::index_of(const std::string& label) const {
  auto it = index_.find(label);
  if (it == index_.end()) throw Error(ErrorKind::InvalidInput, "unknown state '" + label + "'");
  return it->second;
}

RateMatrix::RateMatrix(StateSpace space, Matrix rates) : space_(std::move(space)), k_(std::move(rates)) {
  const auto n = static_cast<Eigen::Index>(space_.size());
  if (k_.rows() != n || k_.cols() != n)
    throw Error(ErrorKind::InvalidInput, "rate matrix shape does not match the state space");
  for (Eigen::Index x = 0; x < n; ++x) {
    if (k_(x, x) != 0.0) throw Error(ErrorKind::InvalidInput, "rate matrix diagonal must be zero");
    for (Eigen::Index y = 0; y < n; ++y) {
      if (!std::isfinite(k_(x, y)) || k_(x, y) < 0.0)
        throw Error(ErrorKind::InvalidInput, "rates must be finite and nonnegative");
    }
  }
}

ProbDist::ProbDist(StateSpace space, Vector p) : space_(std::move(space)), p_(std::move(p)) {
  if (p_.size() != static_cast<Eigen::Index>(space_.size()))
    throw Error(ErrorKind::InvalidInput, "distribution length does not match the state space");
  for (Eigen::Index i = 0; i < p_.size(); ++i) {
    if (!std::isfinite(p_(i)) || p_(i) < 0.0)
      throw Error(ErrorKind::InvalidInput, "probabilities must be finite and nonnegative");
  }
  if (std::abs(p_.sum() - 1.0) > kNormTolerance) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "probabilities sum to " << p_.sum() << ", not 1";
    throw Error(ErrorKind::InvalidInput, msg.str());
  }
}

ProbDist ProbDist::normalized(StateSpace space, Vector weights) {
  const double total = weights.sum();
  if (!(total > 0.0) || !std::isfinite(total))
    throw Error(ErrorKind::InvalidInput, "weights must have positive finite total mass");
  weights /= total;
  return ProbDist(std::move(space), std::move(weights));
}

ProbDist ProbDist::uniform(StateSpace space) {
  const auto n = static_cast<Eigen::Index>(space.size());
  return ProbDist(std::move(space), Vector::Constant(n, 1.0 / static_cast<double>(n)));
}

ProbDist ProbDist::point_mass(StateSpace space, std::size_t x) {
  Vector p = Vector::Zero(static_cast<Eigen::Index>(space.size()));
  p(static_cast<Eigen::Index>(x)) = 1.0;
  return ProbDist(std::move(space), std::move(p));
}

Matrix generator_from_rates(const Matrix& rates) {
  Matrix L = rates;
  L.diagonal().setZero();
  L.diagonal() = -L.rowwise().sum();
  return L;
}

Generator build_generator(const RateMatrix& k) { return Generator{k.space(), generator_from_rates(k.matrix())}; }

namespace {

std::vector<bool> reachable(const Matrix& rates, std::size_t start, bool reverse) {
  const auto n = static_cast<std::size_t>(rates.rows());
  std::vector<bool> seen(n, false);
  std::queue<std::size_t> queue;
  seen[start] = true;
  queue.push(start);
  while (!queue.empty()) {
    const auto x = queue.front();
    queue.pop();
    for (std::size_t y = 0; y < n; ++y) {
      const double rate = reverse ? rates(y, x) : rates(x, y);
      if (rate > 0.0 && !seen[y]) {
        seen[y] = true;
        queue.push(y);
      }
    }
  }
  return seen;
}

bool all_true(const std::vector<bool>& v) { return std::all_of(v.begin(), v.end(), [](bool b) { return b; }); }

}  // namespace

bool is_irreducible(const RateMatrix& k) {
  return all_true(reachable(k.matrix(), 0, false)) && all_true(reachable(k.matrix(), 0, true));
}

ProbDist stationary_distribution(const RateMatrix& k) {
  if (!is_irreducible(k)) throw Error(ErrorKind::NotIrreducible, "rate graph is not strongly connected");
  const auto n = static_cast<Eigen::Index>(k.size());
  const Matrix L = generator_from_rates(k.matrix());

  // [L^T; 1^T] rho = [0; 1], solved in least squares.
  Matrix A(n + 1, n);
  A.topRows(n) = L.transpose();
  A.row(n).setOnes();
  Vector b = Vector::Zero(n + 1);
  b(n) = 1.0;
  const auto qr = A.colPivHouseholderQr();
  Vector rho = qr.solve(b);
  // One step of iterative refinement.
  rho += qr.solve(b - A * rho);

  const double scale = std::max(1.0, k.max_exit_rate());
  const double residual = (rho.transpose() * L).cwiseAbs().maxCoeff();
  if (!rho.allFinite() || residual > 1e-12 * scale)
    throw Error(ErrorKind::SolverFailure, "stationary solve residual too large");
  if (rho.minCoeff() < 1e-14) throw Error(ErrorKind::SolverFailure, "stationary solve returned a non-positive mass");
  rho /= rho.sum();
  return ProbDist(k.space(), std::move(rho));
}

bool is_detailed_balance(const RateMatrix& k, const ProbDist& rho, double tol) {
  const auto n = static_cast<Eigen::Index>(k.size());
  for (Eigen::Index x = 0; x < n; ++x) {
    for (Eigen::Index y = x + 1; y < n; ++y) {
      if (std::abs(rho(x) * k(x, y) - rho(y) * k(y, x)) > tol) return false;
    }
  }
  return true;
}

double default_balance_tolerance(const RateMatrix& k, const ProbDist& rho) {
  const Matrix flux = rho.vector().asDiagonal() * k.matrix();
  return 1e-10 * flux.maxCoeff();
}

RateMatrix reversible_rates_from_potential(const StateSpace& space, std::span<const SymmetricEdge> edges,
                                           const Vector& potential, double beta) {
  const auto n = space.size();
  if (potential.size() != static_cast<Eigen::Index>(n))
    throw Error(ErrorKind::InvalidInput, "potential length does not match the state space");
  Matrix rates = Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (const auto& e : edges) {
    if (e.a >= n || e.b >= n || e.a == e.b) throw Error(ErrorKind::InvalidInput, "invalid edge endpoints");
    if (!(e.prefactor > 0.0)) throw Error(ErrorKind::InvalidInput, "edge prefactors must be positive");
    const auto a = static_cast<Eigen::Index>(e.a);
    const auto b = static_cast<Eigen::Index>(e.b);
    if (rates(a, b) != 0.0) throw Error(ErrorKind::InvalidInput, "duplicate edge");
    rates(a, b) = e.prefactor * std::exp(-beta * (potential(b) - potential(a)) / 2.0);
    rates(b, a) = e.prefactor * std::exp(-beta * (potential(a) - potential(b)) / 2.0);
  }
  if (!all_true(reachable(rates, 0, false))) throw Error(ErrorKind::DisconnectedGraph, "edge graph is disconnected");
  return RateMatrix(space, std::move(rates));
}

namespace {

constexpr std::size_t kDenseExpLimit = 64;

Vector evolve_rk4(const Matrix& L, Vector mu, double t) {
  const double max_diag = L.diagonal().cwiseAbs().maxCoeff();
  if (max_diag == 0.0) return mu;
  const double nominal = 0.01 / max_diag;
  const double steps_real = std::ceil(t / nominal);
  if (steps_real > 1e9) throw Error(ErrorKind::StepSizeUnderflow, "too many RK4 steps for the requested horizon");
  const auto steps = static_cast<long long>(steps_real);
  const double h = t / static_cast<double>(steps);
  const Matrix Lt = L.transpose();
  for (long long s = 0; s < steps; ++s) {
    const Vector k1 = Lt * mu;
    const Vector k2 = Lt * (mu + 0.5 * h * k1);
    const Vector k3 = Lt * (mu + 0.5 * h * k2);
    const Vector k4 = Lt * (mu + h * k3);
    mu += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return mu;
}

}  // namespace

ProbDist evolve_master(const RateMatrix& k, const ProbDist& mu0, double t) {
  if (!(t >= 0.0) || !std::isfinite(t)) throw Error(ErrorKind::InvalidInput, "evolution time must be finite and >= 0");
  if (!(mu0.space() == k.space())) throw Error(ErrorKind::InvalidInput, "distribution and rates use different spaces");
  if (t == 0.0) return mu0;

  const Matrix L = generator_from_rates(k.matrix());
  Vector mu;
  if (k.size() <= kDenseExpLimit) {
    const Matrix propagator = (t * L).exp();
    mu = propagator.transpose() * mu0.vector();
  } else {
    mu = evolve_rk4(L, mu0.vector(), t);
  }
  if (!mu.allFinite() || std::abs(mu.sum() - 1.0) > 1e-10)
    throw Error(ErrorKind::SolverFailure, "master equation evolution lost normalization");
  // Roundoff can leave entries of order -1e-17.
  mu = mu.cwiseMax(0.0);
  return ProbDist::normalized(k.space(), std::move(mu));
}

}  // namespace occfluct
