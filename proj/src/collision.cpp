#include <Eigen/Cholesky>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <string>
#include <vector>

#include "kinmax/errors.hpp"
#include "kinmax/kinetics.hpp"

#ifdef KINMAX_HAVE_OPENMP
#include <omp.h>
#endif

namespace kinmax {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
// Fixed number of partial-sum buffers so results do not depend on the thread count.
constexpr int kChunks = 32;

struct Shift {
  int wx, wy;
};

// Integer points w != 0, d on the circle w.(w - d) = 0, and the total count
// K(d) including the two trivial ones.
void circle_points(int dx, int dy, std::vector<Shift>& out, int& count) {
  out.clear();
  count = 0;
  if (dx == 0 && dy == 0) return;
  const double cx = 0.5 * dx;
  const double r = 0.5 * std::sqrt(static_cast<double>(dx * dx + dy * dy));
  const int lo = static_cast<int>(std::floor(cx - r)) - 1;
  const int hi = static_cast<int>(std::ceil(cx + r)) + 1;
  for (int wx = lo; wx <= hi; ++wx) {
    const long disc = static_cast<long>(dy) * dy - 4L * wx * (wx - dx);
    if (disc < 0) continue;
    const long s = std::lround(std::sqrt(static_cast<double>(disc)));
    if (s * s != disc) continue;
    for (long sign : {-1L, 1L}) {
      if (s == 0 && sign > 0) break;
      const long twice = dy + sign * s;
      if (twice % 2 != 0) continue;
      const int wy = static_cast<int>(twice / 2);
      ++count;
      const bool trivial = (wx == 0 && wy == 0) || (wx == dx && wy == dy);
      if (!trivial) out.push_back({wx, wy});
    }
  }
}

// Linear offset i + N j of an index difference is positive (|i| < N).
bool positive(int i, int j) { return j > 0 || (j == 0 && i > 0); }

double kernel_value(const CollisionKernelSpec& kernel, double relative_speed) {
  return kernel.kind == KernelKind::maxwell_pseudo ? kernel.b0 : kernel.b0 * relative_speed;
}

// Bilinear interpolation on the midpoint grid; zero outside the node hull.
double interpolate(const VelocityGrid& grid, const Eigen::ArrayXd& f, double x, double y) {
  const int N = grid.points_per_axis;
  const double h = grid.spacing();
  const double sx = (x + grid.zeta_max) / h - 0.5;
  const double sy = (y + grid.zeta_max) / h - 0.5;
  const int ix = static_cast<int>(std::floor(sx));
  const int iy = static_cast<int>(std::floor(sy));
  const double tx = sx - ix, ty = sy - iy;
  auto at = [&](int i, int j) {
    return (i < 0 || j < 0 || i >= N || j >= N) ? 0.0 : f(i + N * j);
  };
  return (1.0 - tx) * ((1.0 - ty) * at(ix, iy) + ty * at(ix, iy + 1)) +
         tx * ((1.0 - ty) * at(ix + 1, iy) + ty * at(ix + 1, iy + 1));
}

Eigen::MatrixXd invariant_basis(const VelocityGrid& grid) {
  Eigen::MatrixXd phi(grid.size(), grid.n + 2);
  phi.col(0).setOnes();
  phi.middleCols(1, grid.n) = grid.nodes;
  phi.col(grid.n + 1) = grid.speed2.matrix();
  return phi;
}

Eigen::ArrayXd projection_window(const VelocityGrid& grid) {
  const double s = grid.zeta_max / 3.0;
  return (-grid.speed2 / (2.0 * s * s)).exp();
}

}  // namespace

void CollisionKernelSpec::validate() const {
  if (!(b0 > 0.0) || !std::isfinite(b0)) throw DomainError("CollisionKernelSpec: b0 must be > 0");
  if (scheme == CollisionScheme::interpolated && sigma_quadrature_points < 2) {
    throw DomainError("CollisionKernelSpec: need at least 2 sigma nodes");
  }
}

struct CollisionOperator::Impl {
  VelocityGrid grid;
  CollisionKernelSpec kernel;
  // Lattice tables, indexed by d = q - p in index units.
  int span = 0;                      // 2N - 1
  std::vector<int> table_start;      // span * span + 1
  std::vector<Shift> shifts;
  std::vector<double> event_weight;  // per d: 2 h^2 (2 pi / K) B
  // Projection.
  Eigen::MatrixXd phi;
  Eigen::ArrayXd window;
  Eigen::LDLT<Eigen::MatrixXd> gram;

  int d_index(int dx, int dy) const {
    const int N = grid.points_per_axis;
    return (dx + N - 1) + span * (dy + N - 1);
  }

  void build_lattice() {
    const int N = grid.points_per_axis;
    const double h = grid.spacing();
    span = 2 * N - 1;
    table_start.assign(static_cast<size_t>(span) * span + 1, 0);
    event_weight.assign(static_cast<size_t>(span) * span, 0.0);
    std::vector<Shift> points;
    for (int dy = -(N - 1); dy <= N - 1; ++dy) {
      for (int dx = -(N - 1); dx <= N - 1; ++dx) {
        const int idx = d_index(dx, dy);
        int count = 0;
        circle_points(dx, dy, points, count);
        table_start[idx] = static_cast<int>(shifts.size());
        // Keep one representative per unordered quartet {p, q} -> {p + w, q - w}:
        // p is the smallest linear index and p + w < q - w.
        for (const Shift& w : points) {
          if (positive(w.wx, w.wy) && positive(dx - 2 * w.wx, dy - 2 * w.wy)) shifts.push_back(w);
        }
        if (count > 0) {
          const double g = h * std::sqrt(static_cast<double>(dx * dx + dy * dy));
          event_weight[idx] = 2.0 * h * h * (kTwoPi / count) * kernel_value(kernel, g);
        }
      }
    }
    // Entries are filled in d_index order, so starts are increasing.
    table_start[static_cast<size_t>(span) * span] = static_cast<int>(shifts.size());
  }

  template <bool Quantum>
  Eigen::ArrayXd lattice(const Eigen::ArrayXd& f, double epsilon) const {
    const int N = grid.points_per_axis;
    const int size = grid.size();
    Eigen::ArrayXXd partial = Eigen::ArrayXXd::Zero(size, kChunks);
#ifdef KINMAX_HAVE_OPENMP
#pragma omp parallel for schedule(dynamic, 1) num_threads(worker_threads())
#endif
    for (int chunk = 0; chunk < kChunks; ++chunk) {
      double* Q = partial.col(chunk).data();
      for (int p = chunk; p < size; p += kChunks) {
        const int px = p % N, py = p / N;
        const double fp = f(p);
        for (int q = p + 1; q < size; ++q) {
          const int qx = q % N, qy = q / N;
          const int idx = d_index(qx - px, qy - py);
          const int begin = table_start[idx], end = table_start[idx + 1];
          if (begin == end) continue;
          const double fq = f(q);
          const double weight = event_weight[idx];
          for (int e = begin; e < end; ++e) {
            const Shift w = shifts[e];
            const int ax = px + w.wx, ay = py + w.wy;
            const int bx = qx - w.wx, by = qy - w.wy;
            if (ax < 0 || ay < 0 || ax >= N || ay >= N || bx < 0 || by < 0 || bx >= N || by >= N) continue;
            const int a = ax + N * ay, b = bx + N * by;
            const double fa = f(a), fb = f(b);
            double delta;
            if constexpr (Quantum) {
              delta = fa * fb * (1.0 + epsilon * fp) * (1.0 + epsilon * fq) -
                      fp * fq * (1.0 + epsilon * fa) * (1.0 + epsilon * fb);
            } else {
              delta = fa * fb - fp * fq;
            }
            delta *= weight;
            Q[p] += delta;
            Q[q] += delta;
            Q[a] -= delta;
            Q[b] -= delta;
          }
        }
      }
    }
    Eigen::ArrayXd out = Eigen::ArrayXd::Zero(size);
    for (int chunk = 0; chunk < kChunks; ++chunk) out += partial.col(chunk);
    return out;
  }

  template <bool Quantum>
  Eigen::ArrayXd interpolated(const Eigen::ArrayXd& f, double epsilon) const {
    const int size = grid.size();
    const int M = kernel.sigma_quadrature_points;
    const double h = grid.spacing();
    Eigen::ArrayXd cos_t(M), sin_t(M);
    for (int m = 0; m < M; ++m) {
      const double theta = kTwoPi * (m + 0.5) / M;
      cos_t(m) = std::cos(theta);
      sin_t(m) = std::sin(theta);
    }
    const double sigma_weight = kTwoPi / M;
    Eigen::ArrayXd out(size);
#ifdef KINMAX_HAVE_OPENMP
#pragma omp parallel for schedule(static) num_threads(worker_threads())
#endif
    for (int p = 0; p < size; ++p) {
      const double x = grid.nodes(p, 0), y = grid.nodes(p, 1);
      const double fp = f(p);
      double sum = 0.0;
      for (int q = 0; q < size; ++q) {
        if (q == p) continue;
        const double xs = grid.nodes(q, 0), ys = grid.nodes(q, 1);
        const double g = std::hypot(x - xs, y - ys);
        const double cx = 0.5 * (x + xs), cy = 0.5 * (y + ys);
        const double half = 0.5 * g;
        const double fq = f(q);
        double inner = 0.0;
        for (int m = 0; m < M; ++m) {
          const double fa = interpolate(grid, f, cx + half * cos_t(m), cy + half * sin_t(m));
          const double fb = interpolate(grid, f, cx - half * cos_t(m), cy - half * sin_t(m));
          if constexpr (Quantum) {
            inner += fa * fb * (1.0 + epsilon * fp) * (1.0 + epsilon * fq) -
                     fp * fq * (1.0 + epsilon * fa) * (1.0 + epsilon * fb);
          } else {
            inner += fa * fb - fp * fq;
          }
        }
        sum += kernel_value(kernel, g) * inner;
      }
      out(p) = h * h * sigma_weight * sum;
    }
    return out;
  }

  Eigen::ArrayXd project(const Eigen::ArrayXd& Q) const {
    const Eigen::VectorXd moments = phi.transpose() * Q.matrix();
    const Eigen::VectorXd lambda = gram.solve(moments);
    return Q - window * (phi * lambda).array();
  }
};

CollisionOperator::CollisionOperator(const VelocityGrid& grid, const CollisionKernelSpec& kernel)
    : impl_(std::make_unique<Impl>()) {
  if (grid.n != 2) {
    throw DomainError("collision operator: only n = 2 velocity grids are supported (got n = " +
                      std::to_string(grid.n) + ")");
  }
  kernel.validate();
  impl_->grid = grid;
  impl_->kernel = kernel;
  if (kernel.scheme == CollisionScheme::lattice) impl_->build_lattice();
  impl_->phi = invariant_basis(grid);
  impl_->window = projection_window(grid);
  impl_->gram.compute(impl_->phi.transpose() * impl_->window.matrix().asDiagonal() * impl_->phi);
}

CollisionOperator::~CollisionOperator() = default;
CollisionOperator::CollisionOperator(CollisionOperator&&) noexcept = default;
CollisionOperator& CollisionOperator::operator=(CollisionOperator&&) noexcept = default;

const VelocityGrid& CollisionOperator::grid() const { return impl_->grid; }
const CollisionKernelSpec& CollisionOperator::kernel() const { return impl_->kernel; }

Eigen::ArrayXd CollisionOperator::apply(const Eigen::ArrayXd& f, double epsilon) const {
  if (f.size() != impl_->grid.size()) throw DomainError("collision: f does not match the grid");
  if (!std::isfinite(epsilon)) throw DomainError("collision: epsilon must be finite");
  if ((f < 0.0).any()) throw DomainError("collision: f must be >= 0");
  if (epsilon < 0.0 && ((1.0 + epsilon * f) <= 0.0).any()) {
    throw DomainError("quantum collision: 1 + eps f <= 0 (fermion over-occupancy)");
  }
  const bool lattice = impl_->kernel.scheme == CollisionScheme::lattice;
  Eigen::ArrayXd Q;
  if (epsilon == 0.0) {
    Q = lattice ? impl_->lattice<false>(f, 0.0) : impl_->interpolated<false>(f, 0.0);
  } else {
    Q = lattice ? impl_->lattice<true>(f, epsilon) : impl_->interpolated<true>(f, epsilon);
  }
  return impl_->kernel.project ? impl_->project(Q) : Q;
}

Eigen::ArrayXd classical_collision(const VelocityGrid& grid, const Eigen::ArrayXd& f,
                                   const CollisionKernelSpec& kernel) {
  return CollisionOperator(grid, kernel).apply(f, 0.0);
}

Eigen::ArrayXd quantum_collision(const VelocityGrid& grid, const Eigen::ArrayXd& f, double epsilon,
                                 const CollisionKernelSpec& kernel) {
  return CollisionOperator(grid, kernel).apply(f, epsilon);
}

double InvariantResiduals::max_abs() const {
  double m = std::max(std::abs(r0), std::abs(r_energy));
  if (r_i.size() > 0) m = std::max(m, r_i.cwiseAbs().maxCoeff());
  return m;
}

InvariantResiduals collision_invariant_residuals(const VelocityGrid& grid, const Eigen::ArrayXd& Q) {
  if (Q.size() != grid.size()) throw DomainError("collision_invariant_residuals: size mismatch");
  const double dv = grid.cell_volume();
  InvariantResiduals r;
  r.r0 = Q.sum() * dv;
  r.r_i = grid.nodes.transpose() * Q.matrix() * dv;
  r.r_energy = (grid.speed2 * Q).sum() * dv;
  return r;
}

Eigen::ArrayXd conservative_projection(const VelocityGrid& grid, const Eigen::ArrayXd& Q) {
  if (Q.size() != grid.size()) throw DomainError("conservative_projection: size mismatch");
  const Eigen::MatrixXd phi = invariant_basis(grid);
  const Eigen::ArrayXd window = projection_window(grid);
  const Eigen::MatrixXd gram = phi.transpose() * window.matrix().asDiagonal() * phi;
  const Eigen::VectorXd lambda = gram.ldlt().solve(phi.transpose() * Q.matrix());
  return Q - window * (phi * lambda).array();
}

int worker_threads() {
  int cap = 1;
#ifdef KINMAX_HAVE_OPENMP
  cap = omp_get_max_threads();
#endif
  if (const char* env = std::getenv("KM_THREADS")) {
    char* end = nullptr;
    const long requested = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && requested >= 1) return std::min(cap, static_cast<int>(requested));
  }
  return cap;
}

}  // namespace kinmax
