#include "occfluct/perturbation.hpp"

#include <cmath>
#include <future>

#include "occfluct/dv_solver.hpp"
#include "occfluct/errors.hpp"
#include "occfluct/thermo.hpp"

namespace occfluct {

using Index = Eigen::Index;

PerturbationFamily::PerturbationFamily(RateMatrix k0, Matrix k1, double eps_max)
    : k0_(std::move(k0)), k1_(std::move(k1)), eps_max_(eps_max), rho0_(stationary_distribution(k0_)) {
  const auto n = static_cast<Index>(k0_.size());
  if (k1_.rows() != n || k1_.cols() != n) throw Error(ErrorKind::InvalidInput, "k1 shape does not match k0");
  if (!(eps_max_ > 0.0) || !std::isfinite(eps_max_)) throw Error(ErrorKind::InvalidInput, "eps_max must be positive");
  const double tol = 1e-12 * std::max(1.0, k0_.max_exit_rate());
  if (!is_detailed_balance(k0_, rho0_, tol)) throw Error(ErrorKind::NotDetailedBalance, "k0 is not reversible");
  for (Index x = 0; x < n; ++x) {
    if (k1_(x, x) != 0.0) throw Error(ErrorKind::InvalidInput, "k1 diagonal must be zero");
    for (Index y = 0; y < n; ++y) {
      if (!std::isfinite(k1_(x, y))) throw Error(ErrorKind::InvalidInput, "k1 must be finite");
      if (k0_(static_cast<std::size_t>(x), static_cast<std::size_t>(y)) == 0.0 && k1_(x, y) != 0.0)
        throw Error(ErrorKind::InvalidInput, "k1 must vanish where k0 does");
    }
  }
  // k(eps) is affine in eps: nonnegativity and the positive support are decided at the endpoints.
  for (const double eps : {-eps_max_, eps_max_}) {
    const Matrix rates = k0_.matrix() + eps * k1_;
    if (rates.minCoeff() < 0.0)
      throw Error(ErrorKind::InvalidInput, "k0 + eps k1 has negative rates within |eps| <= eps_max");
    if (!is_irreducible(RateMatrix(k0_.space(), rates)))
      throw Error(ErrorKind::NotIrreducible, "k0 + eps k1 loses irreducibility within |eps| <= eps_max");
  }
}

RateMatrix PerturbationFamily::rates_at(double eps) const {
  if (!(std::abs(eps) <= eps_max_)) throw Error(ErrorKind::InvalidInput, "|eps| exceeds eps_max");
  Matrix rates = k0_.matrix() + eps * k1_;
  // Rates that cancel to roundoff at |eps| = eps_max.
  rates = rates.cwiseMax(0.0);
  return RateMatrix(k0_.space(), std::move(rates));
}

DistFamily::DistFamily(const PerturbationFamily& family, Vector f1) : rho0_(family.reference()), f1_(std::move(f1)) {
  if (f1_.size() != static_cast<Index>(family.space().size()))
    throw Error(ErrorKind::InvalidInput, "f1 length does not match the state space");
  if (!f1_.allFinite()) throw Error(ErrorKind::InvalidInput, "f1 must be finite");
  if (std::abs(rho0_.vector().dot(f1_)) > 1e-12) throw Error(ErrorKind::InvalidInput, "<f1>_rho0 must vanish");
  if (family.eps_max() * f1_.cwiseAbs().maxCoeff() > 1.0)
    throw Error(ErrorKind::InvalidInput, "rho0 (1 + eps f1) turns negative within |eps| <= eps_max");
}

DistFamily DistFamily::centered(const PerturbationFamily& family, Vector f1) {
  if (f1.size() != static_cast<Index>(family.space().size()))
    throw Error(ErrorKind::InvalidInput, "f1 length does not match the state space");
  f1.array() -= family.reference().vector().dot(f1);
  return DistFamily(family, std::move(f1));
}

ProbDist DistFamily::at(double eps) const {
  Vector p = rho0_.vector().cwiseProduct((1.0 + eps * f1_.array()).matrix());
  return ProbDist::normalized(rho0_.space(), p.cwiseMax(0.0));
}

Matrix adjoint_matrix(const Matrix& generator, const ProbDist& rho0) {
  const Vector& d = rho0.vector();
  return d.cwiseInverse().asDiagonal() * generator.transpose() * d.asDiagonal();
}

Vector adjoint_apply(const RateMatrix& k, const ProbDist& rho0, const Vector& phi) {
  if (!rho0.strictly_positive()) throw Error(ErrorKind::InvalidInput, "reference measure must be strictly positive");
  return adjoint_matrix(generator_from_rates(k.matrix()), rho0) * phi;
}

namespace {

double residual_scale(const PerturbationFamily& family) {
  return std::max({1.0, family.base().max_exit_rate(), family.direction().cwiseAbs().rowwise().sum().maxCoeff()});
}

}  // namespace

Vector first_order_stationary(const PerturbationFamily& family) {
  const auto n = static_cast<Index>(family.space().size());
  const Vector& rho0 = family.reference().vector();
  const Matrix L0 = generator_from_rates(family.base().matrix());
  const Matrix L1 = generator_from_rates(family.direction());
  const Vector rhs = -(adjoint_matrix(L1, family.reference()) * Vector::Ones(n));

  // Bordered system [L0 1; rho0^T 0] [h; lambda] = [rhs; 0]. The constant column is outside
  // the range of L0 (which is rho0-orthogonal to constants), so the system is regular.
  Matrix A = Matrix::Zero(n + 1, n + 1);
  A.topLeftCorner(n, n) = L0;
  A.topRightCorner(n, 1).setOnes();
  A.bottomLeftCorner(1, n) = rho0.transpose();
  Vector b = Vector::Zero(n + 1);
  b.head(n) = rhs;
  const auto lu = A.fullPivLu();
  if (!lu.isInvertible()) throw Error(ErrorKind::SolverFailure, "bordered system for h1 is singular");
  const Vector sol = lu.solve(b);
  const Vector h1 = sol.head(n);

  const double residual = (L0 * h1 - rhs).cwiseAbs().maxCoeff();
  if (!h1.allFinite() || residual > 1e-11 * residual_scale(family))
    throw Error(ErrorKind::SolverFailure, "h1 residual exceeds 1e-11");
  return h1;
}

Vector first_order_maximizer(const PerturbationFamily& family, const DistFamily& dist) {
  const auto n = static_cast<Index>(family.space().size());
  const Vector h1 = first_order_stationary(family);
  const Vector& f1 = dist.direction();
  const Vector g1 = 0.5 * (f1 - h1);

  const Matrix L0 = generator_from_rates(family.base().matrix());
  const Matrix L1 = generator_from_rates(family.direction());
  const Vector lhs = 2.0 * (L0 * g1);
  const Vector rhs = L0 * f1 + adjoint_matrix(L1, family.reference()) * Vector::Ones(n);
  if ((lhs - rhs).cwiseAbs().maxCoeff() > 1e-11 * residual_scale(family) * std::max(1.0, f1.cwiseAbs().maxCoeff()))
    throw Error(ErrorKind::SolverFailure, "g1 does not solve the first-order maximizer equation");
  return g1;
}

double dv_leading_order(const PerturbationFamily& family, const DistFamily& dist, double eps) {
  const RateMatrix k = family.rates_at(eps);
  const ProbDist rho = stationary_distribution(k);
  const ProbDist mu = dist.at(eps);
  const Vector root = mu.vector().cwiseQuotient(rho.vector()).cwiseSqrt();
  // -<g L g>_rho = (1/2) sum rho(x) k(x,y) (g(y) - g(x))^2 for stationary rho.
  double form = 0.0;
  const auto n = static_cast<Index>(k.size());
  for (Index x = 0; x < n; ++x) {
    for (Index y = 0; y < n; ++y) {
      const double d = root(y) - root(x);
      form += rho(static_cast<std::size_t>(x)) * k(static_cast<std::size_t>(x), static_cast<std::size_t>(y)) * d * d;
    }
  }
  return 0.5 * form;
}

double dv_quadratic_coefficient(const PerturbationFamily& family, const DistFamily& dist) {
  const Vector& rho0 = family.reference().vector();
  const Matrix L0 = generator_from_rates(family.base().matrix());
  const Matrix L1 = generator_from_rates(family.direction());
  const Vector h1 = first_order_stationary(family);
  const Vector& f1 = dist.direction();
  const auto mean = [&](const Vector& v) { return rho0.dot(v); };
  return -0.25 * (mean(f1.cwiseProduct(L0 * f1)) - mean(h1.cwiseProduct(L0 * h1)) + 2.0 * mean(L1 * f1) -
                  2.0 * mean(L1 * h1));
}

std::vector<ScanRow> theorem_main_scan(const PerturbationFamily& family, const DistFamily& dist,
                                       std::span<const double> eps_grid) {
  if (eps_grid.empty()) throw Error(ErrorKind::InvalidInput, "empty eps grid");
  for (const double eps : eps_grid) {
    if (eps == 0.0 || !(std::abs(eps) <= family.eps_max()))
      throw Error(ErrorKind::InvalidInput, "grid points must be nonzero with |eps| <= eps_max");
  }
  const auto evaluate = [&family, &dist](double eps) {
    const RateMatrix k = family.rates_at(eps);
    const ProbDist mu = dist.at(eps);
    const ProbDist rho = stationary_distribution(k);
    const double I = dv_rate(k, mu).value;
    const double Q = 0.25 * (entropy_production_rate(k, mu).value - entropy_production_rate(k, rho).value);
    const double e2 = eps * eps;
    return ScanRow{eps, I, Q, I - Q, (I - Q) / e2, I / e2, Q / e2};
  };
  std::vector<std::future<ScanRow>> pending;
  pending.reserve(eps_grid.size());
  for (const double eps : eps_grid) pending.push_back(std::async(std::launch::async, evaluate, eps));
  std::vector<ScanRow> rows;
  rows.reserve(pending.size());
  for (auto& f : pending) rows.push_back(f.get());
  return rows;
}

std::vector<double> default_eps_grid() {
  std::vector<double> grid;
  for (int i = 0; i <= 6; ++i) grid.push_back(std::pow(10.0, -1.0 - 0.5 * i));
  return grid;
}

}  // namespace occfluct
