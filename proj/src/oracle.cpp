#include "kinmax/oracle.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <string>

#include "kinmax/errors.hpp"
#include "kinmax/functionals.hpp"
#include "kinmax/roots.hpp"

namespace kinmax {
namespace {

struct Problem {
  const VelocityGrid& grid;
  double T_ref;
  double epsilon;
  double measure;           // h^n V
  Eigen::MatrixXd phi;      // constraint functions, one column each
  Eigen::VectorXd target;   // sum measure f phi = target
};

// The ascent works in theta = log(f / (1 + eps f)), where dF/df = -|zeta|^2/(2T) - 1 - theta
// and f = e^theta / (1 - eps e^theta).
Eigen::ArrayXd occupancy(double epsilon, const Eigen::ArrayXd& theta) {
  const Eigen::ArrayXd g = theta.exp();
  return epsilon == 0.0 ? g : (g / (1.0 - epsilon * g)).eval();
}

// Antiderivative of occupancy in theta, the convex dual potential.
Eigen::ArrayXd potential(double epsilon, const Eigen::ArrayXd& theta) {
  const Eigen::ArrayXd g = theta.exp();
  return epsilon == 0.0 ? g : (-(1.0 - epsilon * g).log() / epsilon).eval();
}

bool admissible(double epsilon, const Eigen::ArrayXd& theta) {
  if (!theta.allFinite()) return false;
  return epsilon <= 0.0 || (epsilon * theta.exp() < 1.0).all();
}

double objective(const Problem& p, const Eigen::ArrayXd& f, const SpatialGrid& space) {
  DistributionField field{p.grid, space, f};
  return free_functional(field, p.T_ref, p.epsilon).F;
}

double constraint_residual(const Problem& p, const Eigen::ArrayXd& f) {
  const Eigen::VectorXd achieved = p.measure * (p.phi.transpose() * f.matrix());
  const double scale = std::max(1.0, p.target.cwiseAbs().maxCoeff());
  return (achieved - p.target).cwiseAbs().maxCoeff() / scale;
}

// Gradient step in theta with the multipliers fitted under the inverse
// Hessian weights f (1 + eps f), so the step keeps the constraints to first order.
Eigen::ArrayXd projected_gradient(const Problem& p, const Eigen::ArrayXd& theta, const Eigen::ArrayXd& f) {
  const Eigen::ArrayXd g = -p.grid.speed2 / (2.0 * p.T_ref) - 1.0 - theta;
  const Eigen::ArrayXd weight = f * (1.0 + p.epsilon * f);
  const Eigen::MatrixXd weighted = p.phi.transpose() * weight.matrix().asDiagonal();
  const Eigen::VectorXd lambda = (weighted * p.phi).ldlt().solve(weighted * g.matrix());
  return g - (p.phi * lambda).array();
}

// theta <- theta + phi mu with mu from damped Newton on the convex dual
// psi(mu) = sum measure P(theta + phi mu) - mu . target.
Eigen::ArrayXd lagrange_correction(const Problem& p, const Eigen::ArrayXd& theta) {
  const int m = static_cast<int>(p.phi.cols());
  Eigen::VectorXd mu = Eigen::VectorXd::Zero(m);
  auto shifted = [&](const Eigen::VectorXd& v) { return (theta + (p.phi * v).array()).eval(); };
  auto psi = [&](const Eigen::VectorXd& v) -> double {
    const Eigen::ArrayXd t = shifted(v);
    if (!admissible(p.epsilon, t)) return INFINITY;
    return p.measure * potential(p.epsilon, t).sum() - v.dot(p.target);
  };
  auto residual_of = [&](const Eigen::VectorXd& v) -> Eigen::VectorXd {
    return p.measure * (p.phi.transpose() * occupancy(p.epsilon, shifted(v)).matrix()) - p.target;
  };
  const double tol = 1e-14 * std::max(1.0, p.target.cwiseAbs().maxCoeff());
  Eigen::VectorXd residual = residual_of(mu);
  for (int it = 0; it < 200 && residual.cwiseAbs().maxCoeff() > tol; ++it) {
    const Eigen::ArrayXd f = occupancy(p.epsilon, shifted(mu));
    const Eigen::ArrayXd weight = f * (1.0 + p.epsilon * f);
    const Eigen::MatrixXd hessian = p.measure * (p.phi.transpose() * weight.matrix().asDiagonal() * p.phi);
    const Eigen::VectorXd direction = -hessian.ldlt().solve(residual);
    // Armijo on psi; near the root psi stalls at rounding level, where a
    // decrease of the residual is accepted instead.
    const double current = psi(mu);
    double step = 1.0;
    for (;; step *= 0.5) {
      const Eigen::VectorXd next = mu + step * direction;
      const double value = psi(next);
      if (std::isfinite(value) && (value <= current + 1e-4 * step * residual.dot(direction) ||
                                   residual_of(next).norm() < residual.norm())) {
        break;
      }
      if (step < 1e-12) return shifted(mu);
    }
    mu += step * direction;
    residual = residual_of(mu);
  }
  return shifted(mu);
}

OracleResult ascend(const Problem& p, double tol, double V_omega, const OracleOptions& options) {
  if (!(tol > 0.0)) throw DomainError("oracle: tol must be > 0");
  const SpatialGrid space = SpatialGrid::single(V_omega);
  Eigen::ArrayXd f;
  if (options.init) {
    if (options.init->velocity.size() != p.grid.size() || options.init->space.cells() != 1) {
      throw DomainError("oracle: init field does not match the grid");
    }
    f = options.init->values.col(0);
  } else {
    f = Eigen::ArrayXd::Constant(p.grid.size(), p.target(0) / (p.measure * p.grid.size()));
    if (p.epsilon < 0.0) f = f.min(-0.5 / p.epsilon);
  }
  if (!f.allFinite() || (f <= 0.0).any() || (p.epsilon < 0.0 && ((1.0 + p.epsilon * f) <= 0.0).any())) {
    throw DomainError("oracle: initial field must be positive and admissible");
  }
  Eigen::ArrayXd theta = (f / (1.0 + p.epsilon * f)).log();
  if (!options.init) {
    theta = lagrange_correction(p, theta);
    f = occupancy(p.epsilon, theta);
  }

  OracleResult out;
  double eta = 1.0;
  double F = objective(p, f, space);
  for (int it = 0;; ++it) {
    const Eigen::ArrayXd direction = projected_gradient(p, theta, f);
    out.gradient_norm = direction.abs().maxCoeff();
    out.constraint_residual = constraint_residual(p, f);
    out.iterations = it;
    if (out.gradient_norm < tol && out.constraint_residual < 1e-10) break;
    if (it >= options.max_iterations) {
      throw ConvergenceError("oracle: no convergence after " + std::to_string(it) +
                                 " iterations (projected gradient " + std::to_string(out.gradient_norm) + ")",
                             out.gradient_norm);
    }
    // Backtracking on F; the correction restores the constraints exactly.
    for (;;) {
      Eigen::ArrayXd trial = theta + eta * direction;
      if (admissible(p.epsilon, trial)) {
        trial = lagrange_correction(p, trial);
        if (admissible(p.epsilon, trial)) {
          const Eigen::ArrayXd f_trial = occupancy(p.epsilon, trial);
          const double F_trial = objective(p, f_trial, space);
          if (F_trial >= F - 1e-14 * std::max(1.0, std::abs(F))) {
            theta = trial;
            f = f_trial;
            F = F_trial;
            eta = std::min(1.0, 2.0 * eta);
            break;
          }
        }
      }
      eta *= 0.5;
      if (eta < 1e-12) {
        throw ConvergenceError("oracle: step size underflow (projected gradient " +
                                   std::to_string(out.gradient_norm) + ")",
                               out.gradient_norm);
      }
    }
  }
  out.field = DistributionField{p.grid, space, f};
  return out;
}

}  // namespace

OracleResult maximize_F_fixed_rho(const VelocityGrid& grid, double rho, double T_ref, double epsilon,
                                  double tol, double V_omega, const OracleOptions& options) {
  if (!(rho > 0.0)) throw DomainError("maximize_F_fixed_rho: rho must be > 0");
  if (!(T_ref > 0.0)) throw DomainError("maximize_F_fixed_rho: T_ref must be > 0");
  if (!(V_omega > 0.0)) throw DomainError("maximize_F_fixed_rho: V_omega must be > 0");
  if (!std::isfinite(epsilon)) throw DomainError("maximize_F_fixed_rho: epsilon must be finite");
  Problem p{grid, T_ref, epsilon, grid.cell_volume() * V_omega,
            Eigen::MatrixXd::Ones(grid.size(), 1), Eigen::VectorXd::Constant(1, rho)};
  return ascend(p, tol, V_omega, options);
}

OracleResult minimize_dist_constrained(const VelocityGrid& grid, double rho, double E1,
                                       const Eigen::VectorXd& U, double T_ref, double tol,
                                       double V_omega, const OracleOptions& options) {
  if (!(rho > 0.0)) throw DomainError("minimize_dist_constrained: rho must be > 0");
  if (!(T_ref > 0.0)) throw DomainError("minimize_dist_constrained: T_ref must be > 0");
  if (U.size() != grid.n) throw DomainError("minimize_dist_constrained: U must have n entries");
  if (!(E1 > U.squaredNorm() / (2.0 * rho))) {
    throw InfeasibleMomentsError("minimize_dist_constrained: E1 <= |U|^2/(2 rho)");
  }
  Eigen::MatrixXd phi(grid.size(), grid.n + 2);
  phi.col(0).setOnes();
  phi.middleCols(1, grid.n) = grid.nodes;
  phi.col(grid.n + 1) = 0.5 * grid.speed2.matrix();
  Eigen::VectorXd target(grid.n + 2);
  target << rho, U, E1;
  Problem p{grid, T_ref, 0.0, grid.cell_volume() * V_omega, phi, target};
  return ascend(p, tol, V_omega, options);
}

namespace {

// x - 1 - log x, with a series for x near 1.
double y_of(double x) {
  const double d = x - 1.0;
  if (std::abs(d) < 1e-3) {
    return d * d * (0.5 - d * (1.0 / 3.0 - d * (0.25 - d * (0.2 - d / 6.0))));
  }
  return d - std::log(x);
}

}  // namespace

RootPair limit_roots(double c) {
  if (!(c >= 0.0) || !std::isfinite(c)) {
    throw DomainError("limit_roots: c must be >= 0 (x - 1 - log x >= 0 has no root below 0)");
  }
  RootPair out;
  out.c = c;
  if (c == 0.0) return out;
  out.unique = false;
  // Lower root in t = log x on [-(c + 2), 0], where y(e^t) = e^t - 1 - t > c.
  auto g_lower = [c](double t) { return y_of(std::exp(t)) - c; };
  const double t = bisect(g_lower, -(c + 2.0), 0.0, 1e-15).root;
  out.lower = std::exp(t);
  double hi = 2.0;
  while (y_of(hi) <= c) hi *= 2.0;
  auto g_upper = [c](double x) { return y_of(x) - c; };
  out.upper = bisect(g_upper, 1.0, hi, 1e-13 * hi).root;
  return out;
}

}  // namespace kinmax
