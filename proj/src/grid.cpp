#include "kinmax/grid.hpp"

#include <cmath>
#include <string>

#include "kinmax/errors.hpp"

namespace kinmax {

double VelocityGrid::cell_volume() const { return std::pow(spacing(), n); }

int VelocityGrid::axis_index(int k, int axis) const {
  for (int a = 0; a < axis; ++a) k /= points_per_axis;
  return k % points_per_axis;
}

VelocityGrid make_velocity_grid(int n, int points_per_axis, double zeta_max) {
  if (n < 1 || n > 3) throw DomainError("make_velocity_grid: n must be 1, 2 or 3");
  if (points_per_axis < 2) throw DomainError("make_velocity_grid: need at least 2 points per axis");
  if (!(zeta_max > 0.0) || !std::isfinite(zeta_max)) {
    throw DomainError("make_velocity_grid: zeta_max must be finite and > 0");
  }
  VelocityGrid grid;
  grid.n = n;
  grid.points_per_axis = points_per_axis;
  grid.zeta_max = zeta_max;
  const int N = points_per_axis;
  int total = 1;
  for (int a = 0; a < n; ++a) total *= N;
  const double h = grid.spacing();
  grid.nodes.resize(total, n);
  grid.mirror.resize(total);
  for (int k = 0; k < total; ++k) {
    int rest = k, stride = 1, mirrored = 0;
    for (int a = 0; a < n; ++a) {
      const int i = rest % N;
      rest /= N;
      grid.nodes(k, a) = -zeta_max + (i + 0.5) * h;
      mirrored += (N - 1 - i) * stride;
      stride *= N;
    }
    grid.mirror(k) = mirrored;
  }
  grid.speed2 = grid.nodes.rowwise().squaredNorm().array();
  return grid;
}

VelocityGrid default_velocity_grid(int n, double T, double u_max, int points_per_axis) {
  if (!(T > 0.0)) throw DomainError("default_velocity_grid: T must be > 0");
  return make_velocity_grid(n, points_per_axis, std::abs(u_max) + 6.0 * std::sqrt(T));
}

SpatialGrid SpatialGrid::single(double V_omega) {
  if (!(V_omega > 0.0)) throw DomainError("SpatialGrid::single: volume must be > 0");
  SpatialGrid g;
  g.widths = Eigen::ArrayXd::Constant(1, V_omega);
  return g;
}

SpatialGrid SpatialGrid::uniform_slab(int cells, double length) {
  if (cells < 1) throw DomainError("SpatialGrid::uniform_slab: need at least one cell");
  if (!(length > 0.0)) throw DomainError("SpatialGrid::uniform_slab: length must be > 0");
  SpatialGrid g;
  g.widths = Eigen::ArrayXd::Constant(cells, length / cells);
  g.slab = true;
  return g;
}

void DistributionField::validate() const {
  if (values.rows() != velocity.size() || values.cols() != space.cells()) {
    throw DomainError("DistributionField: values shape does not match the grids");
  }
  if (!values.allFinite()) throw DomainError("DistributionField: non-finite values");
  if ((values < 0.0).any()) throw DomainError("DistributionField: negative values");
}

DistributionField make_field(const VelocityGrid& velocity, const SpatialGrid& space) {
  return {velocity, space, Eigen::ArrayXXd::Zero(velocity.size(), space.cells())};
}

namespace {

void require_matching_volume(double V_omega, const SpatialGrid& space, const char* who) {
  if (std::abs(space.volume() - V_omega) > 1e-12 * V_omega) {
    throw DomainError(std::string(who) + ": spatial grid volume differs from V_omega");
  }
}

}  // namespace

DistributionField sample_maxwellian(const MaxwellianSpec& spec, const VelocityGrid& velocity,
                                    const SpatialGrid& space) {
  spec.validate();
  if (spec.n != velocity.n) throw DomainError("sample_maxwellian: dimension mismatch");
  require_matching_volume(spec.V_omega, space, "sample_maxwellian");
  const Eigen::RowVectorXd u = spec.velocity().transpose();
  const Eigen::ArrayXd r2 = (velocity.nodes.rowwise() - u).rowwise().squaredNorm().array();
  const Eigen::ArrayXd column = spec.prefactor() * (-r2 / (2.0 * spec.T)).exp();
  DistributionField field = make_field(velocity, space);
  field.values.colwise() = column;
  return field;
}

DistributionField sample_maxwellian(const MaxwellianSpec& spec, const VelocityGrid& velocity) {
  return sample_maxwellian(spec, velocity, SpatialGrid::single(spec.V_omega));
}

DistributionField sample_quantum(const QuantumEquilibrium& eq, const VelocityGrid& velocity,
                                 const SpatialGrid& space) {
  eq.validate();
  if (eq.n != velocity.n) throw DomainError("sample_quantum: dimension mismatch");
  require_matching_volume(eq.V_omega, space, "sample_quantum");
  const Eigen::ArrayXd g = eq.C * (-velocity.speed2 / (2.0 * eq.T)).exp();
  DistributionField field = make_field(velocity, space);
  field.values.colwise() = g / (1.0 - eq.epsilon * g);
  return field;
}

DistributionField sample_quantum(const QuantumEquilibrium& eq, const VelocityGrid& velocity) {
  return sample_quantum(eq, velocity, SpatialGrid::single(eq.V_omega));
}

double total_mass(const DistributionField& field) {
  return (field.values.colwise().sum().transpose() * field.cell_measures()).sum();
}

DistributionField renormalized(const DistributionField& field, double rho) {
  if (!(rho > 0.0)) throw DomainError("renormalized: rho must be > 0");
  const double mass = total_mass(field);
  if (!(mass > 0.0)) throw DomainError("renormalized: field has zero mass");
  DistributionField out = field;
  out.values *= rho / mass;
  return out;
}

}  // namespace kinmax
