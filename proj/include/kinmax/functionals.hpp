#pragma once

#include <Eigen/Core>

#include "kinmax/equilibria.hpp"
#include "kinmax/grid.hpp"

namespace kinmax {

struct MomentSummary {
  double rho_total = 0.0;
  Eigen::ArrayXd rho_x;    ///< density per spatial cell
  Eigen::VectorXd U;       ///< total momentum
  Eigen::MatrixXd u_x;     ///< n x cells mean velocity (zero in empty cells)
  double E_total = 0.0;

  /// T1 = 2E/(n rho) - |U|^2/(n rho^2); zero for an empty field.
  double temperature(int n) const;
};

/// Midpoint sums of f, zeta f and |zeta|^2 f / 2.
MomentSummary moments(const DistributionField& field);

/// -sum f log f with 0 log 0 = 0.
double entropy_classical(const DistributionField& field);

/// -sum [f log f - (1/eps)(1 + eps f) log(1 + eps f) + f]; eps = 0 gives
/// entropy_classical. Throws DomainError where 1 + eps f <= 0.
double entropy_quantum(const DistributionField& field, double epsilon);

struct FunctionalReport {
  double S = 0.0;
  double E = 0.0;
  double F = 0.0;                ///< -E/T_ref + S
  double quadrature_tail = 0.0;  ///< Gaussian mass outside the velocity box
};

FunctionalReport free_functional(const DistributionField& field, double T_ref, double epsilon = 0.0);

/// Closed-form F for a Maxwellian with parameters spec evaluated at T_ref:
/// -n rho T/(2 T_ref) - rho |u|^2/(2 T_ref) - rho log C + n rho / 2.
double f_closed_maxwellian(const MaxwellianSpec& spec, double T_ref);

/// Mass outside the velocity box of the Maxwellian matching the field's moments.
double gaussian_tail_estimate(const DistributionField& field);

struct DistanceReport {
  double value = 0.0;          ///< F(ref) - F(field)
  double kl_integral = 0.0;    ///< sum M (1 - f/M + (f/M) log(f/M)) (classical only)
  double kl_equivalent = 0.0;  ///< kl_integral plus the mass and momentum correction terms
  double quadrature_tail = 0.0;
};

/// dist{ref, f} = F(ref) - F(f), both by quadrature on the field's grid.
/// For eps != 0 the reference is M_eps at ref_spec's (rho, T, V_omega, n).
/// Requires |mass(f) - rho| <= 1e-6 rho (PreconditionError otherwise).
DistanceReport distance_report(const MaxwellianSpec& ref_spec, const DistributionField& field,
                               double T_ref, double epsilon = 0.0);
double distance(const MaxwellianSpec& ref_spec, const DistributionField& field, double T_ref,
                double epsilon = 0.0);

/// Classical: G^ = F(M^) - F(f) with F(M^) = rho^ = (2 pi T)^{n/2} V / e.
/// Quantum: G_eps = F_eps(M_eps) - F_eps(f) with M_eps at the field's mass.
double lyapunov(const DistributionField& field, double T_ref, double V_omega, int n,
                double epsilon = 0.0);

/// Pointwise integrand of F: -|zeta|^2 f / (2T) - [entropy density of f].
double free_integrand(double f, double speed2, double T_ref, double epsilon = 0.0);

}  // namespace kinmax
