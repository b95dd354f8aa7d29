#include "kinmax/kinetics.hpp"

#include <cmath>
#include <string>

#include "kinmax/errors.hpp"
#include "kinmax/functionals.hpp"

namespace kinmax {
namespace {

struct StageFlux {
  double A = 0.0;
  double B = 0.0;
};

// Upwind face values for every velocity at every face; faces 0 and cells()
// are the walls.
Eigen::ArrayXXd face_values(const DistributionField& field, const BoundarySpec& boundary,
                            const Eigen::ArrayXd& wall_profile) {
  const auto& grid = field.velocity;
  const int cells = field.space.cells();
  const int size = grid.size();
  const Eigen::ArrayXd zeta1 = grid.nodes.col(0).array();
  Eigen::ArrayXXd faces(size, cells + 1);
  for (int face = 1; face < cells; ++face) {
    faces.col(face) = (zeta1 > 0.0).select(field.values.col(face - 1), field.values.col(face));
  }

  Eigen::ArrayXd left_ghost(size), right_ghost(size);
  const auto& first = field.values.col(0);
  const auto& last = field.values.col(cells - 1);
  const double dv = grid.cell_volume();
  switch (boundary.kind) {
    case BoundaryKind::periodic:
      left_ghost = last;
      right_ghost = first;
      break;
    case BoundaryKind::bounce_back:
      for (int k = 0; k < size; ++k) {
        left_ghost(k) = first(grid.mirror(k));
        right_ghost(k) = last(grid.mirror(k));
      }
      break;
    case BoundaryKind::maxwellian_diffusion: {
      // rho_minus = kappa x outgoing mass flux; the wall profile carries unit
      // emitted flux.
      const double out_left = ((zeta1 < 0.0).select(-zeta1 * first, 0.0)).sum() * dv;
      const double out_right = ((zeta1 > 0.0).select(zeta1 * last, 0.0)).sum() * dv;
      left_ghost = boundary.kappa * out_left * wall_profile;
      right_ghost = boundary.kappa * out_right * wall_profile;
      break;
    }
  }
  faces.col(0) = (zeta1 > 0.0).select(left_ghost, first);
  faces.col(cells) = (zeta1 > 0.0).select(last, right_ghost);
  return faces;
}

// Wall profile M_b / (sum over emitted half-space of |zeta_1| M_b dv).
Eigen::ArrayXd diffusion_profile(const VelocityGrid& grid, const BoundarySpec& boundary) {
  if (boundary.kind != BoundaryKind::maxwellian_diffusion) return {};
  if (!(boundary.wall.T > 0.0)) throw DomainError("BoundarySpec: wall temperature must be > 0");
  if (!(boundary.kappa >= 0.0 && boundary.kappa <= 1.0)) {
    throw DomainError("BoundarySpec: kappa must lie in [0, 1]");
  }
  if (boundary.wall.u.size() != 0 && !boundary.wall.u.isZero()) {
    throw DomainError("BoundarySpec: wall Maxwellian must have u = 0");
  }
  const Eigen::ArrayXd shape = (-grid.speed2 / (2.0 * boundary.wall.T)).exp();
  const Eigen::ArrayXd zeta1 = grid.nodes.col(0).array();
  // The profile is even in zeta_1, so both half-spaces carry the same flux.
  const double flux = ((zeta1 > 0.0).select(zeta1 * shape, 0.0)).sum() * grid.cell_volume();
  return shape / flux;
}

// Time derivative and wall fluxes for one stage.
Eigen::ArrayXXd rhs(const DistributionField& field, const CollisionOperator& collision, double epsilon,
                    const BoundarySpec& boundary, const Eigen::ArrayXd& wall_profile, StageFlux& flux) {
  const int cells = field.space.cells();
  Eigen::ArrayXXd out(field.values.rows(), cells);
#ifdef KINMAX_HAVE_OPENMP
#pragma omp parallel for schedule(dynamic, 1) num_threads(cells > 1 ? worker_threads() : 1)
#endif
  for (int c = 0; c < cells; ++c) out.col(c) = collision.apply(field.values.col(c), epsilon);
  flux = {};
  if (!field.space.slab) return out;

  const auto& grid = field.velocity;
  const Eigen::ArrayXd zeta1 = grid.nodes.col(0).array();
  const Eigen::ArrayXXd faces = face_values(field, boundary, wall_profile);
  Eigen::ArrayXXd face_flux = faces.colwise() * zeta1;
  for (int c = 0; c < cells; ++c) {
    out.col(c) -= (face_flux.col(c + 1) - face_flux.col(c)) / field.space.widths(c);
  }
  const double dv = grid.cell_volume();
  const Eigen::ArrayXd net = face_flux.col(cells) - face_flux.col(0);  // outward normals +x, -x
  flux.B = net.sum() * dv;
  flux.A = (0.5 * grid.speed2 * net).sum() * dv;
  return out;
}

StepHint hint_for(double A, double flux_tol) {
  if (std::abs(A) <= flux_tol) return StepHint::conservative_step;
  return A > 0.0 ? StepHint::dissipative_step : StepHint::injecting_step;
}

}  // namespace

std::string_view to_string(StepHint hint) {
  switch (hint) {
    case StepHint::conservative_step: return "conservative_step";
    case StepHint::dissipative_step: return "dissipative_step";
    case StepHint::injecting_step: return "injecting_step";
  }
  return "unknown";
}

std::string_view to_string(FluxClass c) {
  switch (c) {
    case FluxClass::conservative: return "conservative";
    case FluxClass::dissipative: return "dissipative";
    case FluxClass::neither: return "neither";
  }
  return "unknown";
}

double default_dt(const DistributionField& field, const CollisionKernelSpec& kernel) {
  kernel.validate();
  const double rho_max = moments(field).rho_x.maxCoeff();
  if (!(rho_max > 0.0)) throw DomainError("default_dt: field has zero mass");
  return 0.1 / (kernel.b0 * rho_max);
}

StepResult step(const DistributionField& state, double dt, const CollisionOperator& collision,
                double epsilon, const BoundarySpec& boundary, const StepOptions& options) {
  state.validate();
  if (!(dt > 0.0) || !std::isfinite(dt)) throw DomainError("step: dt must be finite and > 0");
  if (state.velocity.size() != collision.grid().size() ||
      state.velocity.zeta_max != collision.grid().zeta_max) {
    throw DomainError("step: collision operator built for a different velocity grid");
  }
  if (state.space.slab) {
    const double cfl = dt * state.velocity.zeta_max / state.space.widths.minCoeff();
    if (cfl > 0.9) {
      throw StepRejectedError("step: CFL number " + std::to_string(cfl) + " exceeds 0.9");
    }
  }
  const Eigen::ArrayXd wall_profile =
      state.space.slab ? diffusion_profile(state.velocity, boundary) : Eigen::ArrayXd();

  StepResult result{state, {}, 0.0};
  StageFlux first;
  const Eigen::ArrayXXd k1 = rhs(state, collision, epsilon, boundary, wall_profile, first);
  if (options.integrator == Integrator::euler) {
    result.field.values = state.values + dt * k1;
    result.flux.A = first.A;
    result.flux.B_flux = first.B;
  } else {
    DistributionField predictor = state;
    predictor.values = state.values + dt * k1;
    // Fermion stages may overshoot 1 + eps f > 0 before the final average.
    predictor.values = predictor.values.max(0.0);
    if (epsilon < 0.0) predictor.values = predictor.values.min(-1.0 / epsilon * (1.0 - 1e-12));
    StageFlux second;
    const Eigen::ArrayXXd k2 = rhs(predictor, collision, epsilon, boundary, wall_profile, second);
    result.field.values = state.values + 0.5 * dt * (k1 + k2);
    result.flux.A = 0.5 * (first.A + second.A);
    result.flux.B_flux = 0.5 * (first.B + second.B);
  }
  result.flux.hint = hint_for(result.flux.A, options.flux_tol);

  const Eigen::ArrayXXd negative = result.field.values.min(0.0);
  if ((negative < 0.0).any()) {
    result.clamped_mass = -(negative.colwise().sum().transpose() * state.cell_measures()).sum();
    result.field.values = result.field.values.max(0.0);
    const double rho = total_mass(state);
    if (result.clamped_mass > 1e-6 * rho) {
      throw StepRejectedError("step: clamped negative mass " + std::to_string(result.clamped_mass) +
                              " exceeds 1e-6 rho");
    }
  }
  if (!result.field.values.allFinite()) throw StepRejectedError("step: non-finite values");
  if (epsilon < 0.0 && ((1.0 + epsilon * result.field.values) <= 0.0).any()) {
    throw DomainError("step: 1 + eps f <= 0 after the step (fermion over-occupancy)");
  }
  return result;
}

StepResult step(const DistributionField& state, double dt, const CollisionKernelSpec& kernel,
                double epsilon, const BoundarySpec& boundary, const StepOptions& options) {
  return step(state, dt, CollisionOperator(state.velocity, kernel), epsilon, boundary, options);
}

FluxClass classify(const std::vector<FluxReport>& history, double flux_tol) {
  if (history.empty()) throw DomainError("classify: empty flux history");
  bool conservative = true, dissipative = true;
  for (const auto& f : history) {
    if (std::abs(f.A) > flux_tol) conservative = false;
    if (f.A < -flux_tol) dissipative = false;
  }
  if (conservative) return FluxClass::conservative;
  return dissipative ? FluxClass::dissipative : FluxClass::neither;
}

MonitoredRun run_monitored(const DistributionField& init, int steps, double dt,
                           const CollisionKernelSpec& kernel, double epsilon,
                           const BoundarySpec& boundary, double T_ref, const StepOptions& options) {
  if (steps < 0) throw DomainError("run_monitored: steps must be >= 0");
  const CollisionOperator collision(init.velocity, kernel);
  const double V = init.space.volume();
  const int n = init.n();
  auto record = [&](double t, const DistributionField& f, const FluxReport& flux, double clamped) {
    const auto report = free_functional(f, T_ref, epsilon);
    const auto m = moments(f);
    MonitorRecord r;
    r.t = t;
    r.S = report.S;
    r.E = report.E;
    r.F = report.F;
    r.G = lyapunov(f, T_ref, V, n, epsilon);
    r.A = flux.A;
    r.B = flux.B_flux;
    r.rho = m.rho_total;
    r.U = m.U;
    r.clamped_mass = clamped;
    return r;
  };

  MonitoredRun run;
  run.series.reserve(static_cast<size_t>(steps) + 1);
  run.fluxes.reserve(static_cast<size_t>(steps));
  run.series.push_back(record(0.0, init, {}, 0.0));
  DistributionField current = init;
  for (int i = 1; i <= steps; ++i) {
    auto result = step(current, dt, collision, epsilon, boundary, options);
    current = std::move(result.field);
    run.fluxes.push_back(result.flux);
    run.series.push_back(record(i * dt, current, result.flux, result.clamped_mass));
  }
  run.final_field = std::move(current);
  return run;
}

}  // namespace kinmax
