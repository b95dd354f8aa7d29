#include "kinmax/functionals.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "kinmax/errors.hpp"

namespace kinmax {
namespace {

// (1 + x) log(1 + x) / x - 1, with its alternating series near 0.
double q_term(double x) {
  if (std::abs(x) < 1e-4) {
    return x / 2.0 - x * x / 6.0 + x * x * x / 12.0 - x * x * x * x / 20.0;
  }
  return (1.0 + x) * std::log1p(x) / x - 1.0;
}

// f log f - (1/eps)(1 + eps f) log(1 + eps f) + f.
double entropy_density(double f, double epsilon) {
  if (f <= 0.0) return 0.0;
  const double classical = f * std::log(f);
  if (epsilon == 0.0) return classical;
  return classical - f * q_term(epsilon * f);
}

void require_admissible(const DistributionField& field, double epsilon) {
  if (epsilon >= 0.0) return;
  if (((1.0 + epsilon * field.values) <= 0.0).any()) {
    throw DomainError("entropy_quantum: 1 + eps f <= 0 (fermion over-occupancy)");
  }
}

double weighted_sum(const DistributionField& field, const Eigen::ArrayXXd& density) {
  return (density.colwise().sum().transpose() * field.cell_measures()).sum();
}

double energy(const DistributionField& field) {
  const Eigen::ArrayXXd weighted = field.values.colwise() * (0.5 * field.velocity.speed2);
  return weighted_sum(field, weighted);
}

}  // namespace

double MomentSummary::temperature(int n) const {
  if (!(rho_total > 0.0)) return 0.0;
  return 2.0 * E_total / (n * rho_total) - U.squaredNorm() / (n * rho_total * rho_total);
}

MomentSummary moments(const DistributionField& field) {
  field.validate();
  const double dv = field.velocity.cell_volume();
  const int n = field.n();
  MomentSummary out;
  out.rho_x = field.values.colwise().sum().transpose() * dv;
  out.rho_total = (out.rho_x * field.space.widths).sum();
  // n x cells momentum densities.
  const Eigen::MatrixXd momentum = field.velocity.nodes.transpose() * field.values.matrix() * dv;
  out.U = momentum * field.space.widths.matrix();
  out.u_x = Eigen::MatrixXd::Zero(n, field.space.cells());
  for (int c = 0; c < field.space.cells(); ++c) {
    if (out.rho_x(c) > 0.0) out.u_x.col(c) = momentum.col(c) / out.rho_x(c);
  }
  out.E_total = energy(field);
  return out;
}

double entropy_classical(const DistributionField& field) {
  field.validate();
  const Eigen::ArrayXXd density = field.values.unaryExpr([](double f) { return entropy_density(f, 0.0); });
  return -weighted_sum(field, density);
}

double entropy_quantum(const DistributionField& field, double epsilon) {
  if (epsilon == 0.0) return entropy_classical(field);
  if (!std::isfinite(epsilon)) throw DomainError("entropy_quantum: epsilon must be finite");
  field.validate();
  require_admissible(field, epsilon);
  const Eigen::ArrayXXd density =
      field.values.unaryExpr([epsilon](double f) { return entropy_density(f, epsilon); });
  return -weighted_sum(field, density);
}

double gaussian_tail_estimate(const DistributionField& field) {
  const auto m = moments(field);
  const double T1 = m.temperature(field.n());
  if (!(m.rho_total > 0.0) || !(T1 > 0.0)) return 0.0;
  const double scale = std::sqrt(2.0 * T1);
  const double zmax = field.velocity.zeta_max;
  double log_inside = 0.0;
  for (int a = 0; a < field.n(); ++a) {
    const double u = m.U(a) / m.rho_total;
    const double outside = 0.5 * (std::erfc((zmax - u) / scale) + std::erfc((zmax + u) / scale));
    log_inside += std::log1p(-std::min(outside, 1.0));
  }
  return -m.rho_total * std::expm1(log_inside);
}

FunctionalReport free_functional(const DistributionField& field, double T_ref, double epsilon) {
  if (!(T_ref > 0.0)) throw DomainError("free_functional: T_ref must be > 0");
  FunctionalReport report;
  report.S = entropy_quantum(field, epsilon);
  report.E = energy(field);
  report.F = -report.E / T_ref + report.S;
  report.quadrature_tail = gaussian_tail_estimate(field);
  return report;
}

double f_closed_maxwellian(const MaxwellianSpec& spec, double T_ref) {
  spec.validate();
  if (!(T_ref > 0.0)) throw DomainError("f_closed_maxwellian: T_ref must be > 0");
  const double u2 = spec.velocity().squaredNorm();
  const double n = spec.n;
  return -n * spec.rho * spec.T / (2.0 * T_ref) - spec.rho * u2 / (2.0 * T_ref) -
         spec.rho * std::log(spec.prefactor()) + 0.5 * n * spec.rho;
}

DistanceReport distance_report(const MaxwellianSpec& ref_spec, const DistributionField& field,
                               double T_ref, double epsilon) {
  ref_spec.validate();
  field.validate();
  if (ref_spec.n != field.n()) throw DomainError("distance: dimension mismatch");
  const double mass = total_mass(field);
  if (std::abs(mass - ref_spec.rho) > 1e-6 * ref_spec.rho) {
    throw PreconditionError("distance: field mass differs from the reference mass by more than 1e-6 relative");
  }

  DistanceReport out;
  DistributionField ref;
  if (epsilon == 0.0) {
    ref = sample_maxwellian(ref_spec, field.velocity, field.space);
  } else {
    if (!ref_spec.velocity().isZero()) throw DomainError("distance: quantum reference must have u = 0");
    const auto eq = quantum_equilibrium(ref_spec.rho, ref_spec.T, ref_spec.V_omega, ref_spec.n, epsilon);
    ref = sample_quantum(eq, field.velocity, field.space);
  }
  const auto F_ref = free_functional(ref, T_ref, epsilon);
  const auto F_field = free_functional(field, T_ref, epsilon);
  out.value = F_ref.F - F_field.F;
  out.quadrature_tail = std::max(F_ref.quadrature_tail, F_field.quadrature_tail);
  out.kl_integral = std::numeric_limits<double>::quiet_NaN();
  out.kl_equivalent = std::numeric_limits<double>::quiet_NaN();
  if (epsilon != 0.0 || ref_spec.T != T_ref) return out;

  // Integral form sum M (1 - f/M + (f/M) log(f/M)); equals F(M) - F(f) up to
  // the mass and momentum mismatch terms.
  const Eigen::RowVectorXd u = ref_spec.velocity().transpose();
  const Eigen::ArrayXd r2 = (field.velocity.nodes.rowwise() - u).rowwise().squaredNorm().array();
  const double log_C = std::log(ref_spec.prefactor());
  const Eigen::ArrayXd log_M = log_C - r2 / (2.0 * T_ref);
  Eigen::ArrayXXd kl(field.values.rows(), field.values.cols());
  for (Eigen::Index c = 0; c < kl.cols(); ++c) {
    for (Eigen::Index k = 0; k < kl.rows(); ++k) {
      const double f = field.values(k, c);
      const double M = ref.values(k, c);
      kl(k, c) = f > 0.0 ? M - f + f * (std::log(f) - log_M(k)) : M;
    }
  }
  out.kl_integral = weighted_sum(field, kl);
  const auto m_field = moments(field);
  const auto m_ref = moments(ref);
  const double d_rho = m_field.rho_total - m_ref.rho_total;
  out.kl_equivalent = out.kl_integral + d_rho * (1.0 + log_C) +
                      u.dot((m_field.U - m_ref.U).transpose()) / T_ref -
                      u.squaredNorm() * d_rho / (2.0 * T_ref);
  const double scale = std::abs(F_ref.F) + std::abs(F_field.F) + ref_spec.rho;
  if (std::abs(out.kl_equivalent - out.value) > 1e-9 * scale + 5.0 * out.quadrature_tail) {
    throw Error("distance: F difference and integral form disagree beyond quadrature tolerance");
  }
  return out;
}

double distance(const MaxwellianSpec& ref_spec, const DistributionField& field, double T_ref,
                double epsilon) {
  return distance_report(ref_spec, field, T_ref, epsilon).value;
}

double lyapunov(const DistributionField& field, double T_ref, double V_omega, int n, double epsilon) {
  if (n != field.n()) throw DomainError("lyapunov: dimension mismatch");
  const double F_field = free_functional(field, T_ref, epsilon).F;
  if (epsilon == 0.0) return m_hat(T_ref, V_omega, n).rho - F_field;
  const auto eq = quantum_equilibrium(total_mass(field), T_ref, V_omega, n, epsilon);
  return quantum_free_closed(eq) - F_field;
}

double free_integrand(double f, double speed2, double T_ref, double epsilon) {
  if (f < 0.0) throw DomainError("free_integrand: f must be >= 0");
  if (epsilon != 0.0 && !(1.0 + epsilon * f > 0.0)) {
    throw DomainError("free_integrand: 1 + eps f <= 0");
  }
  return -speed2 * f / (2.0 * T_ref) - entropy_density(f, epsilon);
}

}  // namespace kinmax
