#pragma once

#include <Eigen/Core>
#include <optional>
#include <string_view>

namespace kinmax {

/// Classical global Maxwellian
///   M(zeta) = rho / (V (2 pi T)^{n/2}) exp(-|zeta - u|^2 / (2T)),
/// whose integral over Omega x R^n is rho.
struct MaxwellianSpec {
  int n = 2;
  double rho = 1.0;
  Eigen::VectorXd u;  ///< bulk velocity; empty means zero
  double T = 1.0;
  double V_omega = 1.0;

  void validate() const;
  double prefactor() const;             ///< rho / (V (2 pi T)^{n/2})
  Eigen::VectorXd velocity() const;     ///< u, zero-filled when empty
  double log_density(const Eigen::Ref<const Eigen::VectorXd>& zeta) const;
};

double eval_classical(const MaxwellianSpec& spec, const Eigen::Ref<const Eigen::VectorXd>& zeta);

/// The Maxwellian whose functional F attains the global maximum:
/// u = 0 and rho = (2 pi T)^{n/2} V / e.
MaxwellianSpec m_hat(double T, double V_omega, int n);

struct ExtremalMaxwellian {
  double T1 = 0.0;
  MaxwellianSpec spec;
  double distance = 0.0;  ///< dist{M, M2} against the reference M at T_ref
};

/// Minimizer of dist{M, f} over densities with total mass rho, energy E1 and
/// momentum U: the Maxwellian with bulk velocity U/rho and temperature
/// T1 = 2 E1 / (n rho) - |U|^2 / (n rho^2).
ExtremalMaxwellian extremal_from_moments(double rho, double E1, const Eigen::VectorXd& U,
                                         double T_ref, double V_omega, int n);

/// Closed-form dist{M, M2} = (n rho / 2)(x - 1 - log x) + |U|^2 / (2 rho T), x = T1/T.
double extremal_distance(double rho, double T1, const Eigen::VectorXd& U, double T_ref, int n);

enum class Regime { fermion, classical, boson, boson_threshold };
std::string_view to_string(Regime regime);

struct SolveReport {
  double C = 0.0;
  int iterations = 0;
  double residual = 0.0;  ///< |(2 pi T)^{n/2} V C L_{n/2}(C eps) - rho| / rho
  Regime regime = Regime::classical;
};

/// Solves (2 pi T)^{n/2} V C L_{n/2}(C eps) = rho for C > 0 with C eps <= 1.
/// Throws NoSolutionError for bosons (eps > 0, n > 2) above the threshold
/// mass; at the threshold returns C = 1/eps with regime boson_threshold.
SolveReport solve_normalization(double rho, double T, double V_omega, int n, double epsilon,
                                double tol = 1e-12);

/// Fixed point of z = C0 eps / L_{n/2}(z). Returns nullopt when successive
/// differences stop contracting; callers then use solve_normalization.
std::optional<double> iterate_z(double C0_epsilon, int n, double tol = 1e-14,
                                int max_iterations = 1000);

/// Bose/Fermi equilibrium M_eps = g / (1 - eps g), g = C exp(-|zeta|^2 / (2T)).
struct QuantumEquilibrium {
  int n = 2;
  double T = 1.0;
  double V_omega = 1.0;
  double epsilon = 0.0;
  double C = 1.0;
  double rho = 1.0;  ///< realized total mass

  void validate() const;
  double z() const { return C * epsilon; }
};

/// Builds M_eps for the given mass through solve_normalization.
QuantumEquilibrium quantum_equilibrium(double rho, double T, double V_omega, int n,
                                       double epsilon, double tol = 1e-12);

double eval_quantum(const QuantumEquilibrium& eq, const Eigen::Ref<const Eigen::VectorXd>& zeta);

/// E_eps = (n rho T / 2) L_{n/2+1}(C eps) / L_{n/2}(C eps).
double quantum_energy(const QuantumEquilibrium& eq);

/// S(M_eps, eps) = E/T - (1 + log C) rho + 2E/(nT); reduces to the classical
/// E/T - rho log C0 at eps = 0.
double quantum_entropy_closed(const QuantumEquilibrium& eq);

/// F_eps(M_eps) = -E/T + S.
double quantum_free_closed(const QuantumEquilibrium& eq);

struct QuantumDeltas {
  double C0 = 0.0;
  double C = 0.0;
  double dE = 0.0, dS = 0.0, dF = 0.0;
  double predicted_dE = 0.0, predicted_dS = 0.0, predicted_dF = 0.0;
};

/// Differences of energy, entropy and F between M_eps and the classical
/// Maxwellian of the same mass, with their leading-order small-eps terms.
QuantumDeltas quantum_deltas(double rho, double T, double V_omega, int n, double epsilon);

}  // namespace kinmax
