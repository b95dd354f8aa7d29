#pragma once

#include <Eigen/Core>

#include "kinmax/equilibria.hpp"

namespace kinmax {

/// Uniform midpoint grid on [-zeta_max, zeta_max]^n with points_per_axis
/// nodes per axis, nodes at -zeta_max + (i + 1/2) h. Node k has axis indices
/// (i0, i1, ...) with k = i0 + N i1 + N^2 i2.
struct VelocityGrid {
  int n = 2;
  int points_per_axis = 0;
  double zeta_max = 0.0;
  Eigen::MatrixXd nodes;     ///< size() x n
  Eigen::ArrayXd speed2;     ///< |zeta_k|^2
  Eigen::ArrayXi mirror;     ///< index of -zeta_k

  int size() const { return static_cast<int>(nodes.rows()); }
  double spacing() const { return 2.0 * zeta_max / points_per_axis; }
  double cell_volume() const;  ///< h^n
  int axis_index(int k, int axis) const;
};

VelocityGrid make_velocity_grid(int n, int points_per_axis, double zeta_max);

/// zeta_max = |u|_inf + 6 sqrt(T) with 64 points per axis.
VelocityGrid default_velocity_grid(int n, double T, double u_max = 0.0, int points_per_axis = 64);

/// One cell of volume V_omega (homogeneous) or a slab [0, L] cut into cells
/// along x1.
struct SpatialGrid {
  Eigen::ArrayXd widths;
  bool slab = false;

  static SpatialGrid single(double V_omega);
  static SpatialGrid uniform_slab(int cells, double length);

  int cells() const { return static_cast<int>(widths.size()); }
  double volume() const { return widths.sum(); }
};

/// Nonnegative f on velocity x space cells; values(k, c) is f at velocity
/// node k in spatial cell c.
struct DistributionField {
  VelocityGrid velocity;
  SpatialGrid space;
  Eigen::ArrayXXd values;

  int n() const { return velocity.n; }
  void validate() const;  ///< shapes and f >= 0
  double measure(int cell) const { return velocity.cell_volume() * space.widths(cell); }
  /// Per-cell measure row, for weighted column sums.
  Eigen::ArrayXd cell_measures() const { return velocity.cell_volume() * space.widths; }
};

DistributionField make_field(const VelocityGrid& velocity, const SpatialGrid& space);

/// Spatially homogeneous field sampling the classical Maxwellian. The space
/// grid volume must equal spec.V_omega.
DistributionField sample_maxwellian(const MaxwellianSpec& spec, const VelocityGrid& velocity,
                                    const SpatialGrid& space);
DistributionField sample_maxwellian(const MaxwellianSpec& spec, const VelocityGrid& velocity);

DistributionField sample_quantum(const QuantumEquilibrium& eq, const VelocityGrid& velocity,
                                 const SpatialGrid& space);
DistributionField sample_quantum(const QuantumEquilibrium& eq, const VelocityGrid& velocity);

double total_mass(const DistributionField& field);

/// Copy of field scaled to total mass rho.
DistributionField renormalized(const DistributionField& field, double rho);

}  // namespace kinmax
