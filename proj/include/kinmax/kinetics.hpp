#pragma once

#include <Eigen/Core>
#include <memory>
#include <string_view>
#include <vector>

#include "kinmax/equilibria.hpp"
#include "kinmax/grid.hpp"

namespace kinmax {

enum class KernelKind { maxwell_pseudo, hard_sphere };

/// lattice: collisions whose post-collision velocities are grid nodes, with
/// angular weight 2 pi / K per lattice point on each collision circle.
/// Conservative, H-theorem exact, Q(M) = 0 on the grid.
/// interpolated: uniform sigma nodes with bilinear interpolation of the
/// off-grid post-collision values.
enum class CollisionScheme { lattice, interpolated };

struct CollisionKernelSpec {
  KernelKind kind = KernelKind::maxwell_pseudo;
  double b0 = 1.0;
  int sigma_quadrature_points = 16;  ///< interpolated scheme only
  CollisionScheme scheme = CollisionScheme::lattice;
  bool project = true;  ///< apply the conservative projection

  void validate() const;
};

enum class BoundaryKind { periodic, bounce_back, maxwellian_diffusion };

struct BoundarySpec {
  BoundaryKind kind = BoundaryKind::periodic;
  MaxwellianSpec wall;  ///< diffusion: wall Maxwellian (u = 0; only T is used)
  double kappa = 1.0;   ///< diffusion: re-emitted fraction of the outgoing mass flux
};

enum class StepHint { conservative_step, dissipative_step, injecting_step };
std::string_view to_string(StepHint hint);

struct FluxReport {
  double A = 0.0;       ///< outward energy flux through the walls
  double B_flux = 0.0;  ///< outward mass flux through the walls
  StepHint hint = StepHint::conservative_step;
};

enum class Integrator { rk2, euler };

struct StepOptions {
  Integrator integrator = Integrator::rk2;
  double flux_tol = 1e-10;
};

struct StepResult {
  DistributionField field;
  FluxReport flux;
  double clamped_mass = 0.0;
};

/// Precomputed collision tables for one velocity grid; reusable across calls.
class CollisionOperator {
 public:
  CollisionOperator(const VelocityGrid& grid, const CollisionKernelSpec& kernel);
  ~CollisionOperator();
  CollisionOperator(CollisionOperator&&) noexcept;
  CollisionOperator& operator=(CollisionOperator&&) noexcept;

  /// Q(f, f) (eps = 0) or the quantum operator for one velocity column.
  Eigen::ArrayXd apply(const Eigen::ArrayXd& f, double epsilon = 0.0) const;
  const VelocityGrid& grid() const;
  const CollisionKernelSpec& kernel() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Classical Q(f, f) on an n = 2 velocity grid; DomainError otherwise.
Eigen::ArrayXd classical_collision(const VelocityGrid& grid, const Eigen::ArrayXd& f,
                                   const CollisionKernelSpec& kernel);

/// Quantum operator with f'f'_*(1+eps f)(1+eps f_*) - f f_*(1+eps f')(1+eps f'_*).
/// eps = 0 returns classical_collision. DomainError where 1 + eps f <= 0.
Eigen::ArrayXd quantum_collision(const VelocityGrid& grid, const Eigen::ArrayXd& f, double epsilon,
                                 const CollisionKernelSpec& kernel);

struct InvariantResiduals {
  double r0 = 0.0;
  Eigen::VectorXd r_i;
  double r_energy = 0.0;

  double max_abs() const;
};

/// Midpoint sums of phi Q for phi in {1, zeta_i, |zeta|^2}.
InvariantResiduals collision_invariant_residuals(const VelocityGrid& grid, const Eigen::ArrayXd& Q);

/// Removes the components of Q along {1, zeta_i, |zeta|^2} by a weighted
/// least-squares correction with an f-independent Gaussian window.
Eigen::ArrayXd conservative_projection(const VelocityGrid& grid, const Eigen::ArrayXd& Q);

/// Default time step 0.1 / (b0 rho_max), rho_max the largest cell density.
double default_dt(const DistributionField& field, const CollisionKernelSpec& kernel);

/// One explicit step of df/dt + zeta_1 df/dx = Q. Slab fields use first-order
/// upwind transport (CFL dt zeta_max / dx <= 0.9, StepRejectedError
/// otherwise). Negative values are clamped; StepRejectedError if the clamped
/// mass exceeds 1e-6 rho.
StepResult step(const DistributionField& state, double dt, const CollisionOperator& collision,
                double epsilon, const BoundarySpec& boundary, const StepOptions& options = {});
StepResult step(const DistributionField& state, double dt, const CollisionKernelSpec& kernel,
                double epsilon, const BoundarySpec& boundary, const StepOptions& options = {});

enum class FluxClass { conservative, dissipative, neither };
std::string_view to_string(FluxClass c);

FluxClass classify(const std::vector<FluxReport>& history, double flux_tol);

struct MonitorRecord {
  double t = 0.0;
  double S = 0.0;
  double E = 0.0;
  double F = 0.0;
  double G = 0.0;  ///< G^ (eps = 0) or G_eps
  double A = 0.0;
  double B = 0.0;
  double rho = 0.0;
  Eigen::VectorXd U;
  double clamped_mass = 0.0;
};

struct MonitoredRun {
  std::vector<MonitorRecord> series;  ///< steps + 1 records, the first at t = 0
  std::vector<FluxReport> fluxes;
  DistributionField final_field;
};

MonitoredRun run_monitored(const DistributionField& init, int steps, double dt,
                           const CollisionKernelSpec& kernel, double epsilon,
                           const BoundarySpec& boundary, double T_ref,
                           const StepOptions& options = {});

/// Worker count for collision loops: KM_THREADS if set, else the OpenMP
/// default (1 without OpenMP).
int worker_threads();

}  // namespace kinmax
