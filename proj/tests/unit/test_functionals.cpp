#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "kinmax/equilibria.hpp"
#include "kinmax/errors.hpp"
#include "kinmax/functionals.hpp"
#include "kinmax/grid.hpp"
#include "kinmax/quadrature.hpp"

using namespace kinmax;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kUnitT = 1.0 / (2.0 * kPi);

// Integral over R^2 of g(x, y) on [-w, w]^2 by nested adaptive quadrature.
template <class G>
double plane_integral(G&& g, double w) {
  auto inner = [&](double y) {
    return integrate([&](double x) { return g(x, y); }, -w, w, 1e-14, 1e-13).value;
  };
  return integrate(inner, -w, w, 1e-13, 1e-12).value;
}

DistributionField perturbed(const DistributionField& base, std::mt19937_64& rng, double amplitude) {
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  DistributionField out = base;
  for (Eigen::Index k = 0; k < out.values.size(); ++k) {
    out.values.data()[k] *= 1.0 + amplitude * unit(rng);
  }
  return out;
}

}  // namespace

TEST_CASE("moments of a sampled Maxwellian") {
  MaxwellianSpec spec{2, 1.0, Eigen::Vector2d::Zero(), kUnitT, 1.0};
  const auto field = sample_maxwellian(spec, default_velocity_grid(2, kUnitT));
  const auto m = moments(field);
  CHECK(std::abs(m.rho_total - 1.0) < 1e-6);
  CHECK(m.U.norm() < 1e-9);
  CHECK(std::abs(m.E_total - kUnitT) < 1e-6);
  CHECK(m.temperature(2) == doctest::Approx(kUnitT).epsilon(1e-6));

  auto zero = field;
  zero.values.setZero();
  const auto z = moments(zero);
  CHECK(z.rho_total == 0.0);
  CHECK(z.U.isZero());
  CHECK(z.E_total == 0.0);
}

TEST_CASE("moments recover the extremal Maxwellian") {
  const auto ext = extremal_from_moments(1.0, 2.0, Eigen::Vector2d(1.0, 0.0), 1.0, 1.0, 2);
  const auto field = sample_maxwellian(ext.spec, default_velocity_grid(2, ext.T1, 1.0));
  const auto m = moments(field);
  CHECK(std::abs(m.rho_total - 1.0) < 1e-6);
  CHECK(std::abs(m.E_total - 2.0) < 1e-6);
  CHECK(std::abs(m.U(0) - 1.0) < 1e-6);
  CHECK(std::abs(m.U(1)) < 1e-9);
}

TEST_CASE("moments on a slab") {
  const auto grid = make_velocity_grid(2, 16, 3.0);
  const auto space = SpatialGrid::uniform_slab(4, 2.0);
  auto field = make_field(grid, space);
  for (int c = 0; c < 4; ++c) field.values.col(c) = (c + 1.0) * (-grid.speed2).exp();
  const auto m = moments(field);
  CHECK(m.rho_total == doctest::Approx((m.rho_x * space.widths).sum()));
  CHECK(m.rho_x(3) == doctest::Approx(4.0 * m.rho_x(0)));
}

TEST_CASE("Cauchy-Schwarz bound on random fields") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const auto grid = make_velocity_grid(2, 12, 2.0);
  for (int trial = 0; trial < 20; ++trial) {
    auto field = make_field(grid, SpatialGrid::single(1.0));
    for (Eigen::Index k = 0; k < field.values.size(); ++k) field.values.data()[k] = unit(rng);
    const auto m = moments(field);
    CHECK(m.E_total >= m.U.squaredNorm() / (2.0 * m.rho_total));
  }
}

TEST_CASE("classical entropy") {
  const auto grid = default_velocity_grid(2, kUnitT);
  SUBCASE("constant one has zero entropy") {
    auto field = make_field(grid, SpatialGrid::single(1.0));
    field.values.setOnes();
    CHECK(entropy_classical(field) == 0.0);
  }
  SUBCASE("vacuum cells contribute nothing") {
    auto field = make_field(grid, SpatialGrid::single(1.0));
    CHECK(entropy_classical(field) == 0.0);
  }
  SUBCASE("F(M^) = rho^") {
    const auto hat = m_hat(kUnitT, 1.0, 2);
    const auto field = sample_maxwellian(hat, grid);
    CHECK(std::abs(free_functional(field, kUnitT).F - hat.rho) < 1e-8);
  }
  SUBCASE("F(M) = 0 when rho = V (2 pi T)^{n/2}") {
    const auto field = sample_maxwellian({2, 1.0, {}, kUnitT, 1.0}, grid);
    const auto report = free_functional(field, kUnitT);
    CHECK(std::abs(report.F) < 1e-6);
    CHECK(report.F == doctest::Approx(-report.E / kUnitT + report.S));
  }
}

TEST_CASE("quantum entropy") {
  const auto grid = make_velocity_grid(2, 32, 2.5);
  const MaxwellianSpec spec{2, 1.3, Eigen::Vector2d(0.2, -0.1), 0.3, 1.0};
  const auto field = sample_maxwellian(spec, grid);
  const double S_c = entropy_classical(field);
  CHECK(entropy_quantum(field, 0.0) == S_c);
  CHECK(std::abs(entropy_quantum(field, 1e-8) - S_c) < 1e-6);

  // S(f, eps) - S_c - (eps/2) sum f^2 is second order.
  const double sum_f2 = field.values.square().sum() * grid.cell_volume();
  auto residual = [&](double eps) { return entropy_quantum(field, eps) - S_c - 0.5 * eps * sum_f2; };
  for (double eps : {0.02, -0.02}) {
    CHECK(residual(eps) / residual(0.5 * eps) == doctest::Approx(4.0).epsilon(0.05));
  }

  auto over = field;
  over.values(5, 0) = 1.0;
  CHECK_THROWS_AS(entropy_quantum(over, -1.0), DomainError);
  CHECK_NOTHROW(entropy_quantum(over, 0.5));
}

TEST_CASE("free functional matches closed forms") {
  SUBCASE("M at T_ref") {
    const MaxwellianSpec spec{2, 1.4, {}, 0.8, 2.0};
    const auto field = sample_maxwellian(spec, default_velocity_grid(2, spec.T), SpatialGrid::single(2.0));
    const double closed = -spec.rho * std::log(spec.rho / (spec.V_omega * 2.0 * kPi * spec.T));
    CHECK(f_closed_maxwellian(spec, spec.T) == doctest::Approx(closed).epsilon(1e-14));
    CHECK(std::abs(free_functional(field, spec.T).F - closed) < 1e-6);
  }
  SUBCASE("M1 at T1 != T_ref") {
    const double T = 0.5, T1 = 1.1, rho = 0.9, V = 1.0;
    const MaxwellianSpec spec{2, rho, {}, T1, V};
    const double closed = -rho * (std::log(rho / (V * 2.0 * kPi * T1)) - (1.0 - T1 / T));
    CHECK(f_closed_maxwellian(spec, T) == doctest::Approx(closed).epsilon(1e-14));
    const auto field = sample_maxwellian(spec, default_velocity_grid(2, T1));
    CHECK(std::abs(free_functional(field, T).F - closed) < 1e-6);
  }
  SUBCASE("M2 includes the bulk kinetic term") {
    const auto ext = extremal_from_moments(1.0, 2.0, Eigen::Vector2d(1.0, 0.0), 1.0, 1.0, 2);
    const auto field = sample_maxwellian(ext.spec, default_velocity_grid(2, ext.T1, 1.0));
    CHECK(std::abs(free_functional(field, 1.0).F - f_closed_maxwellian(ext.spec, 1.0)) < 1e-6);
    // F(M) - F(M2) is the extremal distance.
    const MaxwellianSpec M{2, 1.0, {}, 1.0, 1.0};
    CHECK(f_closed_maxwellian(M, 1.0) - f_closed_maxwellian(ext.spec, 1.0) ==
          doctest::Approx(ext.distance).epsilon(1e-13));
  }
  SUBCASE("special closed values") {
    CHECK(f_closed_maxwellian({3, std::pow(2.0 * kPi * 0.7, 1.5) * 2.0, {}, 0.7, 2.0}, 0.7) ==
          doctest::Approx(0.0).scale(1.0).epsilon(1e-14));
    const auto hat = m_hat(0.4, 1.5, 3);
    CHECK(f_closed_maxwellian(hat, 0.4) == doctest::Approx(hat.rho).epsilon(1e-14));
  }
}

TEST_CASE("distance") {
  const double T = 1.0;
  const MaxwellianSpec M{2, 1.0, {}, T, 1.0};
  SUBCASE("identical field") {
    const auto grid = default_velocity_grid(2, 2.0 * T);
    const auto field = sample_maxwellian(M, grid);
    CHECK(std::abs(distance(M, field, T)) < 1e-9);
  }
  SUBCASE("M1 with T1 = 2T against an independent integral") {
    const MaxwellianSpec M1{2, 1.0, {}, 2.0 * T, 1.0};
    const auto grid = default_velocity_grid(2, 2.0 * T);
    const auto report = distance_report(M, sample_maxwellian(M1, grid), T);
    const double expected = 1.0 - std::log(2.0);
    auto kl = [&](double x, double y) {
      const double r2 = x * x + y * y;
      const double m = std::exp(-r2 / (2.0 * T)) / (2.0 * kPi * T);
      const double f = std::exp(-r2 / (4.0 * T)) / (4.0 * kPi * T);
      return m - f + f * std::log(f / m);
    };
    const double oracle = plane_integral(kl, 20.0);
    CHECK(oracle == doctest::Approx(expected).epsilon(1e-9));
    CHECK(std::abs(report.value - oracle) < 1e-6);
    CHECK(std::abs(report.kl_integral - oracle) < 1e-6);
    CHECK(std::abs(report.kl_equivalent - report.value) < 1e-9);
  }
  SUBCASE("M2 against the extremal closed form") {
    const auto ext = extremal_from_moments(1.0, 2.0, Eigen::Vector2d(1.0, 0.0), T, 1.0, 2);
    const auto grid = default_velocity_grid(2, ext.T1, 1.0);
    const double d = distance(M, sample_maxwellian(ext.spec, grid), T);
    CHECK(std::abs(d - ((0.5 - std::log(1.5)) + 0.5)) < 1e-6);
  }
  SUBCASE("mass mismatch") {
    const auto grid = default_velocity_grid(2, T);
    auto field = sample_maxwellian(M, grid);
    field.values *= 1.001;
    CHECK_THROWS_AS(distance(M, field, T), PreconditionError);
    CHECK_NOTHROW(distance(M, renormalized(field, 1.0), T));
  }
  SUBCASE("quantum reference") {
    const auto grid = default_velocity_grid(2, T);
    const auto eq = quantum_equilibrium(1.0, T, 1.0, 2, -0.5);
    const auto field = sample_quantum(eq, grid);
    CHECK(std::abs(distance(M, renormalized(field, 1.0), T, -0.5)) < 1e-8);
  }
}

TEST_CASE("maximality of F at fixed mass") {
  std::mt19937_64 rng(11);
  const double T = kUnitT;
  const auto grid = make_velocity_grid(2, 40, 6.0 * std::sqrt(T));
  for (double eps : {0.0, -0.5, 0.5}) {
    const MaxwellianSpec M{2, 1.0, {}, T, 1.0};
    const auto ref = eps == 0.0 ? sample_maxwellian(M, grid)
                                : sample_quantum(quantum_equilibrium(1.0, T, 1.0, 2, eps), grid);
    for (double amplitude : {1e-3, 0.05, 0.5}) {
      for (int trial = 0; trial < 5; ++trial) {
        auto f = renormalized(perturbed(ref, rng, amplitude), total_mass(ref));
        if (eps < 0.0 && ((1.0 + eps * f.values) <= 0.0).any()) continue;
        CAPTURE(eps);
        CAPTURE(amplitude);
        CHECK(distance(M, f, T, eps) > 0.0);
      }
    }
  }
}

TEST_CASE("lyapunov") {
  const double T = 0.5, V = 1.0;
  const auto grid = default_velocity_grid(2, T);
  const auto hat = m_hat(T, V, 2);
  const auto at_hat = sample_maxwellian(hat, grid);
  CHECK(std::abs(lyapunov(at_hat, T, V, 2)) < 1e-8);

  const MaxwellianSpec other{2, 2.0 * hat.rho, {}, T, V};
  const double G = lyapunov(sample_maxwellian(other, grid), T, V, 2);
  CHECK(G > 0.0);
  CHECK(G == doctest::Approx(hat.rho - f_closed_maxwellian(other, T)).epsilon(1e-7));

  std::mt19937_64 rng(3);
  for (double amplitude : {0.01, 0.3}) {
    for (int trial = 0; trial < 5; ++trial) {
      CHECK(lyapunov(perturbed(at_hat, rng, amplitude), T, V, 2) > 0.0);
    }
  }

  const auto eq = quantum_equilibrium(0.7, T, V, 2, 0.3);
  const auto q = sample_quantum(eq, grid);
  CHECK(std::abs(lyapunov(q, T, V, 2, 0.3)) < 1e-8);
  CHECK(lyapunov(perturbed(q, rng, 0.2), T, V, 2, 0.3) > 0.0);
}

TEST_CASE("concavity of the F integrand") {
  for (double eps : {0.0, -0.8, 0.8}) {
    for (double f : {1e-3, 0.1, 0.7, 1.1}) {
      if (eps < 0.0 && 1.0 + eps * (f + 1e-3) <= 0.0) continue;
      const double d = 1e-4 * f;
      const double second = (free_integrand(f + d, 0.3, 1.0, eps) - 2.0 * free_integrand(f, 0.3, 1.0, eps) +
                             free_integrand(f - d, 0.3, 1.0, eps)) /
                            (d * d);
      CAPTURE(eps);
      CAPTURE(f);
      CHECK(second < 0.0);
      CHECK(second == doctest::Approx(-1.0 / (f * (1.0 + eps * f))).epsilon(1e-4));
    }
  }
  CHECK_THROWS_AS(free_integrand(-1.0, 0.0, 1.0), DomainError);
}
