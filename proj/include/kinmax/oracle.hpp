#pragma once

#include <Eigen/Core>
#include <optional>

#include "kinmax/grid.hpp"

namespace kinmax {

struct OracleOptions {
  int max_iterations = 5000;
  std::optional<DistributionField> init;  ///< default: uniform field with the target mass
};

struct OracleResult {
  DistributionField field;
  int iterations = 0;
  double gradient_norm = 0.0;       ///< max-norm of the projected gradient of F
  double constraint_residual = 0.0; ///< max relative constraint violation
};

/// Maximizes F_eps(f) = -E/T + S_eps over {f >= 0, mass = rho} on a
/// homogeneous field of volume V_omega by projected ascent in
/// theta = log(f / (1 + eps f)), each step followed by a Lagrange correction
/// of the mass and a backtracking test on F.
/// Converges when the projected gradient max-norm is below tol and the mass
/// residual below 1e-10; ConvergenceError otherwise.
OracleResult maximize_F_fixed_rho(const VelocityGrid& grid, double rho, double T_ref, double epsilon,
                                  double tol, double V_omega = 1.0, const OracleOptions& options = {});

/// Minimizes dist{M, f} (M at T_ref) over f >= 0 with fixed mass rho,
/// momentum U and energy E1, with the constraints {1, zeta, |zeta|^2 / 2}
/// enforced by Newton on the dual. InfeasibleMomentsError when
/// E1 <= |U|^2 / (2 rho).
OracleResult minimize_dist_constrained(const VelocityGrid& grid, double rho, double E1,
                                       const Eigen::VectorXd& U, double T_ref, double tol,
                                       double V_omega = 1.0, const OracleOptions& options = {});

struct RootPair {
  double c = 0.0;
  double lower = 1.0;
  double upper = 1.0;
  bool unique = true;
};

/// Roots of y(x) = x - 1 - log x = c, to 1e-12. DomainError for c < 0.
RootPair limit_roots(double c);

}  // namespace kinmax
