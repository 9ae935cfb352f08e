#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

namespace occfluct {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Ordered, duplicate-free set of state labels.
class StateSpace {
 public:
  explicit StateSpace(std::vector<std::string> labels);

  /// States named "0", "1", ..., "n-1".
  static StateSpace indexed(std::size_t n);

  std::size_t size() const noexcept { return labels_.size(); }
  const std::string& label(std::size_t i) const { return labels_.at(i); }
  const std::vector<std::string>& labels() const noexcept { return labels_; }

  /// Throws InvalidInput for an unknown label.
  std::size_t index_of(const std::string& label) const;
  bool contains(const std::string& label) const { return index_.count(label) != 0; }

  friend bool operator==(const StateSpace& a, const StateSpace& b) { return a.labels_ == b.labels_; }

 private:
  std::vector<std::string> labels_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Transition rates k(x, y) >= 0 with zero diagonal.
class RateMatrix {
 public:
  RateMatrix(StateSpace space, Matrix rates);

  const StateSpace& space() const noexcept { return space_; }
  std::size_t size() const noexcept { return space_.size(); }
  const Matrix& matrix() const noexcept { return k_; }
  double operator()(std::size_t x, std::size_t y) const { return k_(x, y); }

  double exit_rate(std::size_t x) const { return k_.row(x).sum(); }
  double max_exit_rate() const { return k_.rowwise().sum().maxCoeff(); }

 private:
  StateSpace space_;
  Matrix k_;
};

/// L(x,y) = k(x,y) off the diagonal, rows summing to zero.
struct Generator {
  StateSpace space;
  Matrix L;
};

/// Probability vector on a state space; entries sum to one within 1e-12.
class ProbDist {
 public:
  static constexpr double kNormTolerance = 1e-12;

  ProbDist(StateSpace space, Vector p);

  /// Rescales nonnegative weights to unit mass.
  static ProbDist normalized(StateSpace space, Vector weights);
  static ProbDist uniform(StateSpace space);
  static ProbDist point_mass(StateSpace space, std::size_t x);

  const StateSpace& space() const noexcept { return space_; }
  std::size_t size() const noexcept { return space_.size(); }
  const Vector& vector() const noexcept { return p_; }
  double operator()(std::size_t x) const { return p_(x); }

  bool strictly_positive() const { return (p_.array() > 0.0).all(); }

 private:
  StateSpace space_;
  Vector p_;
};

/// Generator matrix for an arbitrary real rate array (signed rates allowed).
Matrix generator_from_rates(const Matrix& rates);

Generator build_generator(const RateMatrix& k);

/// Strong connectivity of the graph of strictly positive rates.
bool is_irreducible(const RateMatrix& k);

/// Unique invariant law rho with rho L = 0. Throws NotIrreducible or SolverFailure.
ProbDist stationary_distribution(const RateMatrix& k);

bool is_detailed_balance(const RateMatrix& k, const ProbDist& rho, double tol);

/// 1e-10 times the largest probability flux rho(x) k(x,y).
double default_balance_tolerance(const RateMatrix& k, const ProbDist& rho);

struct SymmetricEdge {
  std::size_t a;
  std::size_t b;
  double prefactor;  // nu(a,b) = nu(b,a) > 0
};

/// k(x,y) = nu(x,y) exp(-beta (V(y) - V(x)) / 2); reversible w.r.t. exp(-beta V).
RateMatrix reversible_rates_from_potential(const StateSpace& space, std::span<const SymmetricEdge> edges,
                                           const Vector& potential, double beta);

/// Solution of the master equation d mu/dt = mu L at time t.
ProbDist evolve_master(const RateMatrix& k, const ProbDist& mu0, double t);

}  // namespace occfluct
