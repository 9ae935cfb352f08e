#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "occfluct/markov.hpp"
#include "occfluct/perturbation.hpp"

namespace fixtures {

using occfluct::Matrix;
using occfluct::ProbDist;
using occfluct::RateMatrix;
using occfluct::StateSpace;
using occfluct::Vector;

using Rng = std::mt19937_64;

inline double uniform(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }
inline double normal(Rng& rng) { return std::normal_distribution<double>(0.0, 1.0)(rng); }

// Undirected edge set: the chain 0-1-...-(n-1), closed into a ring when asked,
// plus each remaining pair with probability p.
inline std::vector<std::pair<std::size_t, std::size_t>> random_edges(Rng& rng, std::size_t n, bool ring, double p) {
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  for (std::size_t x = 0; x + 1 < n; ++x) edges.emplace_back(x, x + 1);
  if (ring && n > 2) edges.emplace_back(n - 1, 0);
  for (std::size_t x = 0; x < n; ++x) {
    for (std::size_t y = x + 2; y < n; ++y) {
      if (ring && x == 0 && y == n - 1) continue;
      if (uniform(rng, 0.0, 1.0) < p) edges.emplace_back(x, y);
    }
  }
  return edges;
}

// k(x,y) = nu exp(-(V_y - V_x)/2) on a random graph: reversible w.r.t. exp(-V).
inline RateMatrix random_reversible(Rng& rng, std::size_t n, bool ring = false, double p = 0.6) {
  Vector V(static_cast<Eigen::Index>(n));
  for (auto& v : V) v = normal(rng);
  Matrix k = Matrix::Zero(V.size(), V.size());
  for (const auto& [x, y] : random_edges(rng, n, ring, p)) {
    const double nu = uniform(rng, 0.5, 2.0);
    const auto a = static_cast<Eigen::Index>(x);
    const auto b = static_cast<Eigen::Index>(y);
    k(a, b) = nu * std::exp(-(V(b) - V(a)) / 2.0);
    k(b, a) = nu * std::exp(-(V(a) - V(b)) / 2.0);
  }
  return RateMatrix(StateSpace::indexed(n), std::move(k));
}

// Independent positive rates on every ordered pair: generically not reversible.
inline RateMatrix random_dense(Rng& rng, std::size_t n, double lo = 0.2, double hi = 2.0) {
  const auto m = static_cast<Eigen::Index>(n);
  Matrix k = Matrix::Zero(m, m);
  for (Eigen::Index x = 0; x < m; ++x)
    for (Eigen::Index y = 0; y < m; ++y)
      if (x != y) k(x, y) = uniform(rng, lo, hi);
  return RateMatrix(StateSpace::indexed(n), std::move(k));
}

inline ProbDist random_positive(Rng& rng, const StateSpace& space, double lo = 0.1, double hi = 1.0) {
  Vector w(static_cast<Eigen::Index>(space.size()));
  for (auto& v : w) v = uniform(rng, lo, hi);
  return ProbDist::normalized(space, std::move(w));
}

struct Driven {
  occfluct::PerturbationFamily family;
  occfluct::DistFamily dist;
};

// Reversible base, direction k1 = u k0 with u uniform in (-1, 1) per ordered pair,
// and f1 centered under rho0 and scaled so that eps_max |f1| <= 1.
inline Driven random_driven(Rng& rng, std::size_t n, bool ring, double eps_max = 0.1) {
  RateMatrix k0 = random_reversible(rng, n, ring);
  Matrix k1 = Matrix::Zero(k0.matrix().rows(), k0.matrix().cols());
  for (Eigen::Index x = 0; x < k1.rows(); ++x)
    for (Eigen::Index y = 0; y < k1.cols(); ++y)
      if (k0.matrix()(x, y) > 0.0) k1(x, y) = uniform(rng, -1.0, 1.0) * k0.matrix()(x, y);
  occfluct::PerturbationFamily family(std::move(k0), std::move(k1), eps_max);
  Vector f1(static_cast<Eigen::Index>(n));
  for (auto& v : f1) v = normal(rng);
  f1.array() -= family.reference().vector().dot(f1);
  const double bound = 0.9 / (eps_max * f1.cwiseAbs().maxCoeff());
  if (bound < 1.0) f1 *= bound;
  occfluct::DistFamily dist(family, std::move(f1));
  return Driven{std::move(family), std::move(dist)};
}

// Transitive closure by Floyd-Warshall; independent of the library's search.
inline bool strongly_connected_oracle(const Matrix& k) {
  const auto n = k.rows();
  std::vector<std::vector<bool>> reach(static_cast<std::size_t>(n), std::vector<bool>(static_cast<std::size_t>(n)));
  for (Eigen::Index x = 0; x < n; ++x)
    for (Eigen::Index y = 0; y < n; ++y) reach[x][y] = x == y || k(x, y) > 0.0;
  for (Eigen::Index m = 0; m < n; ++m)
    for (Eigen::Index x = 0; x < n; ++x)
      for (Eigen::Index y = 0; y < n; ++y)
        if (reach[x][m] && reach[m][y]) reach[x][y] = true;
  for (const auto& row : reach)
    for (const bool r : row)
      if (!r) return false;
  return true;
}

// Two-state DV functional by golden-section search over the log ratio t = log(g2/g1)
// of F = a (1 - e^t) + b (1 - e^-t), a = mu1 k12, b = mu2 k21.
inline double two_state_dv_oracle(double a, double b) {
  const auto F = [&](double t) { return a * (1.0 - std::exp(t)) + b * (1.0 - std::exp(-t)); };
  double lo = -40.0, hi = 40.0;
  const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
  for (int i = 0; i < 300; ++i) {
    const double c = hi - phi * (hi - lo);
    const double d = lo + phi * (hi - lo);
    if (F(c) > F(d)) hi = d;
    else lo = c;
  }
  return F((lo + hi) / 2.0);
}

// Least-squares slope of log y against log x.
inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace fixtures
