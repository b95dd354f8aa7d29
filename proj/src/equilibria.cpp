#include "kinmax/equilibria.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "kinmax/errors.hpp"
#include "kinmax/roots.hpp"
#include "kinmax/specfun.hpp"

namespace kinmax {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double thermal_volume(double T, double V_omega, int n) {
  return std::pow(kTwoPi * T, 0.5 * n) * V_omega;
}

void require_positive(double value, const char* what) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    throw DomainError(std::string(what) + " must be finite and > 0");
  }
}

// L_{n/2}(z); diverged evaluations become +inf so root brackets stay ordered.
double L_value(double s, double z) {
  const auto r = polylog_L(s, z);
  return r.diverged ? std::numeric_limits<double>::infinity() : r.value;
}

}  // namespace

void MaxwellianSpec::validate() const {
  if (n < 1) throw DomainError("MaxwellianSpec: n must be >= 1");
  require_positive(rho, "MaxwellianSpec.rho");
  require_positive(T, "MaxwellianSpec.T");
  require_positive(V_omega, "MaxwellianSpec.V_omega");
  if (u.size() != 0 && u.size() != n) throw DomainError("MaxwellianSpec: u must have n entries");
}

double MaxwellianSpec::prefactor() const { return rho / thermal_volume(T, V_omega, n); }

Eigen::VectorXd MaxwellianSpec::velocity() const {
  return u.size() == 0 ? Eigen::VectorXd::Zero(n) : u;
}

double MaxwellianSpec::log_density(const Eigen::Ref<const Eigen::VectorXd>& zeta) const {
  const double r2 = u.size() == 0 ? zeta.squaredNorm() : (zeta - u).squaredNorm();
  return std::log(prefactor()) - r2 / (2.0 * T);
}

double eval_classical(const MaxwellianSpec& spec, const Eigen::Ref<const Eigen::VectorXd>& zeta) {
  if (zeta.size() != spec.n) throw DomainError("eval_classical: zeta must have n entries");
  return std::exp(spec.log_density(zeta));
}

MaxwellianSpec m_hat(double T, double V_omega, int n) {
  require_positive(T, "m_hat: T");
  require_positive(V_omega, "m_hat: V_omega");
  if (n < 1) throw DomainError("m_hat: n must be >= 1");
  MaxwellianSpec spec;
  spec.n = n;
  spec.T = T;
  spec.V_omega = V_omega;
  spec.rho = thermal_volume(T, V_omega, n) / std::numbers::e;
  return spec;
}

double extremal_distance(double rho, double T1, const Eigen::VectorXd& U, double T_ref, int n) {
  const double x = T1 / T_ref;
  return 0.5 * n * rho * (x - 1.0 - std::log(x)) + U.squaredNorm() / (2.0 * rho * T_ref);
}

ExtremalMaxwellian extremal_from_moments(double rho, double E1, const Eigen::VectorXd& U,
                                         double T_ref, double V_omega, int n) {
  require_positive(rho, "extremal_from_moments: rho");
  require_positive(T_ref, "extremal_from_moments: T_ref");
  require_positive(V_omega, "extremal_from_moments: V_omega");
  if (n < 1 || U.size() != n) throw DomainError("extremal_from_moments: U must have n entries");
  const double kinetic = U.squaredNorm() / (2.0 * rho);
  if (!(E1 > kinetic)) {
    throw InfeasibleMomentsError("extremal_from_moments: E1 <= |U|^2/(2 rho), no positive temperature");
  }
  ExtremalMaxwellian out;
  out.T1 = 2.0 * E1 / (n * rho) - U.squaredNorm() / (n * rho * rho);
  out.spec.n = n;
  out.spec.rho = rho;
  out.spec.u = U / rho;
  out.spec.T = out.T1;
  out.spec.V_omega = V_omega;
  out.distance = extremal_distance(rho, out.T1, U, T_ref, n);
  return out;
}

std::string_view to_string(Regime regime) {
  switch (regime) {
    case Regime::fermion: return "fermion";
    case Regime::classical: return "classical";
    case Regime::boson: return "boson";
    case Regime::boson_threshold: return "boson_threshold";
  }
  return "unknown";
}

SolveReport solve_normalization(double rho, double T, double V_omega, int n, double epsilon,
                                double tol) {
  require_positive(rho, "solve_normalization: rho");
  require_positive(T, "solve_normalization: T");
  require_positive(V_omega, "solve_normalization: V_omega");
  require_positive(tol, "solve_normalization: tol");
  if (n < 1) throw DomainError("solve_normalization: n must be >= 1");
  if (!std::isfinite(epsilon)) throw DomainError("solve_normalization: epsilon must be finite");

  const double C0 = rho / thermal_volume(T, V_omega, n);
  if (epsilon == 0.0) return {C0, 0, 0.0, Regime::classical};

  const double s = 0.5 * n;
  // Residual in units of C0, i.e. relative to rho.
  auto g = [&](double C) { return C * L_value(s, C * epsilon) / C0 - 1.0; };

  SolveReport report;
  double lo = 0.0, hi = 0.0;
  if (epsilon < 0.0) {
    report.regime = Regime::fermion;
    lo = C0;
    hi = 2.0 * C0 / L_value(s, -C0 * std::abs(epsilon));
    while (g(hi) <= 0.0) {
      lo = hi;
      hi *= 2.0;
    }
  } else {
    report.regime = Regime::boson;
    if (n > 2) {
      const double L_one = zeta(s);
      const double excess = C0 * epsilon / L_one - 1.0;
      if (std::abs(excess) <= tol) {
        report.regime = Regime::boson_threshold;
        report.C = 1.0 / epsilon;
        report.residual = std::abs(report.C * L_one / C0 - 1.0);
        return report;
      }
      if (excess > 0.0) {
        throw NoSolutionError(
            "solve_normalization: boson mass exceeds the threshold (2 pi T)^{n/2} V zeta(n/2) / eps");
      }
    }
    lo = 0.0;
    hi = std::min(C0, 1.0 / epsilon);
  }

  const auto root = bracketed_newton(g, lo, hi, 1e-15);
  report.C = root.root;
  report.iterations = root.iterations;
  report.residual = std::abs(g(report.C));
  // Near the boson threshold dg/dC blows up like (1 - C eps)^{-1/2}, and the
  // spread of g across neighbouring doubles can exceed tol.
  const double floor = std::abs(g(std::nextafter(report.C, hi)) - g(std::nextafter(report.C, lo)));
  if (!(report.residual < std::max(tol, floor))) {
    throw ConvergenceError("solve_normalization: residual above tolerance", report.residual);
  }
  return report;
}

std::optional<double> iterate_z(double C0_epsilon, int n, double tol, int max_iterations) {
  if (n < 1) throw DomainError("iterate_z: n must be >= 1");
  if (C0_epsilon == 0.0) return 0.0;
  const double s = 0.5 * n;
  double z = C0_epsilon;
  double last_step = std::numeric_limits<double>::infinity();
  for (int it = 0; it < max_iterations; ++it) {
    const auto L = polylog_L(s, z);
    if (L.diverged) return std::nullopt;
    const double next = C0_epsilon / L.value;
    const double step = std::abs(next - z);
    if (step <= tol) return next;
    if (it > 0 && step >= last_step) return std::nullopt;
    last_step = step;
    z = next;
  }
  return std::nullopt;
}

void QuantumEquilibrium::validate() const {
  if (n < 1) throw DomainError("QuantumEquilibrium: n must be >= 1");
  require_positive(T, "QuantumEquilibrium.T");
  require_positive(V_omega, "QuantumEquilibrium.V_omega");
  require_positive(C, "QuantumEquilibrium.C");
  require_positive(rho, "QuantumEquilibrium.rho");
  if (C * epsilon > 1.0 + 1e-12) throw DomainError("QuantumEquilibrium: C eps must be <= 1");
}

QuantumEquilibrium quantum_equilibrium(double rho, double T, double V_omega, int n,
                                       double epsilon, double tol) {
  const auto report = solve_normalization(rho, T, V_omega, n, epsilon, tol);
  return {n, T, V_omega, epsilon, report.C, rho};
}

double eval_quantum(const QuantumEquilibrium& eq, const Eigen::Ref<const Eigen::VectorXd>& zeta) {
  if (zeta.size() != eq.n) throw DomainError("eval_quantum: zeta must have n entries");
  const double g = eq.C * std::exp(-zeta.squaredNorm() / (2.0 * eq.T));
  return g / (1.0 - eq.epsilon * g);
}

double quantum_energy(const QuantumEquilibrium& eq) {
  eq.validate();
  const double classical = 0.5 * eq.n * eq.rho * eq.T;
  if (eq.epsilon == 0.0) return classical;
  const double s = 0.5 * eq.n;
  const double z = std::min(eq.z(), 1.0);
  const auto upper = polylog_L(s + 1.0, z);
  const auto lower = polylog_L(s, z);
  if (lower.diverged) throw DomainError("quantum_energy: L_{n/2}(C eps) diverges (C eps = 1, n <= 2)");
  return classical * upper.value / lower.value;
}

double quantum_entropy_closed(const QuantumEquilibrium& eq) {
  const double E = quantum_energy(eq);
  return E / eq.T - (1.0 + std::log(eq.C)) * eq.rho + 2.0 * E / (eq.n * eq.T);
}

double quantum_free_closed(const QuantumEquilibrium& eq) {
  return -quantum_energy(eq) / eq.T + quantum_entropy_closed(eq);
}

QuantumDeltas quantum_deltas(double rho, double T, double V_omega, int n, double epsilon) {
  const auto report = solve_normalization(rho, T, V_omega, n, epsilon);
  QuantumDeltas out;
  out.C0 = rho / thermal_volume(T, V_omega, n);
  out.C = report.C;
  const QuantumEquilibrium eq{n, T, V_omega, epsilon, report.C, rho};
  const double E_c = 0.5 * n * rho * T;
  const double S_c = E_c / T - rho * std::log(out.C0);
  // Subtract in the grouped form so that small-eps differences keep their digits.
  out.dE = quantum_energy(eq) - E_c;
  const double log_ratio = std::log1p((out.C - out.C0) / out.C0);
  out.dS = (n + 2.0) / (n * T) * out.dE - rho * log_ratio;
  out.dF = 2.0 / (n * T) * out.dE - rho * log_ratio;
  // Consistency with the ungrouped closed forms.
  const double S_direct = quantum_entropy_closed(eq) - S_c;
  if (std::abs(S_direct - out.dS) > 1e-9 * std::max(1.0, std::abs(S_c))) {
    throw Error("quantum_deltas: grouped and direct entropy differences disagree");
  }
  const double scale = rho * out.C0 * epsilon / std::pow(2.0, 0.5 * n);
  out.predicted_dE = -n * T * scale / 4.0;
  out.predicted_dS = -(n - 2.0) * scale / 4.0;
  out.predicted_dF = scale / 2.0;
  return out;
}

}  // namespace kinmax
