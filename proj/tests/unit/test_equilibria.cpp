#include <doctest.h>

#include <cmath>
#include <numbers>

#include "kinmax/equilibria.hpp"
#include "kinmax/errors.hpp"
#include "kinmax/quadrature.hpp"
#include "kinmax/roots.hpp"
#include "kinmax/specfun.hpp"

using namespace kinmax;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kUnitT = 1.0 / (2.0 * kPi);

// Integral over R^2 of phi(zeta) * M(zeta) by nested adaptive quadrature.
template <class Phi>
double plane_integral(const MaxwellianSpec& spec, Phi&& phi) {
  const Eigen::VectorXd u = spec.velocity();
  const double half_width = 12.0 * std::sqrt(spec.T);
  auto inner = [&](double y) {
    auto f = [&](double x) {
      Eigen::Vector2d zeta(x, y);
      return phi(zeta) * eval_classical(spec, zeta);
    };
    return integrate(f, u(0) - half_width, u(0) + half_width, 1e-14, 1e-13).value;
  };
  return integrate(inner, u(1) - half_width, u(1) + half_width, 1e-13, 1e-12).value;
}

// Radial quadrature of h(r, M_eps(r)) r^{n-1} over (0, inf), times V omega_{n-1}.
template <class H>
double radial_quantum(const QuantumEquilibrium& eq, H&& h) {
  auto f = [&](double r) {
    Eigen::VectorXd zeta = Eigen::VectorXd::Zero(eq.n);
    zeta(0) = r;
    return std::pow(r, eq.n - 1) * h(r, eval_quantum(eq, zeta));
  };
  const double r_max = std::sqrt(2.0 * eq.T * 80.0);
  return eq.V_omega * sphere_area(eq.n) * integrate(f, 0.0, r_max, 1e-15, 1e-13).value;
}

double quantum_entropy_density(double f, double eps) {
  return f * std::log(f) - (1.0 / eps) * (1.0 + eps * f) * std::log1p(eps * f) + f;
}

}  // namespace

TEST_CASE("eval_classical and its moments") {
  MaxwellianSpec spec{2, 1.0, Eigen::Vector2d::Zero(), kUnitT, 1.0};
  CHECK(eval_classical(spec, Eigen::Vector2d::Zero()) == doctest::Approx(1.0).epsilon(1e-14));

  MaxwellianSpec shifted{2, 1.7, Eigen::Vector2d(0.3, -0.2), 0.8, 2.5};
  const double mass = shifted.V_omega * plane_integral(shifted, [](const auto&) { return 1.0; });
  CHECK(std::abs(mass - shifted.rho) < 1e-8);

  const double energy =
      shifted.V_omega * plane_integral(shifted, [&](const Eigen::Vector2d& z) {
        return 0.5 * (z - shifted.u).squaredNorm();
      });
  CHECK(energy == doctest::Approx(shifted.n * shifted.rho * shifted.T / 2.0).epsilon(1e-9));

  CHECK_THROWS_AS(eval_classical(spec, Eigen::Vector3d::Zero()), DomainError);
  MaxwellianSpec bad = spec;
  bad.T = -1.0;
  CHECK_THROWS_AS(bad.validate(), DomainError);
}

TEST_CASE("m_hat") {
  const auto hat = m_hat(kUnitT, 1.0, 2);
  CHECK(hat.rho == doctest::Approx(1.0 / std::numbers::e).epsilon(1e-14));
  CHECK(hat.velocity().isZero());
  CHECK(std::log(hat.prefactor()) == doctest::Approx(-1.0).epsilon(1e-14));
}

TEST_CASE("extremal_from_moments") {
  SUBCASE("zero momentum recovers the base temperature") {
    const double T_ref = 0.9;
    const auto ext = extremal_from_moments(1.0, 3.0 * T_ref / 2.0, Eigen::Vector3d::Zero(), T_ref, 1.0, 3);
    CHECK(ext.T1 == doctest::Approx(T_ref).epsilon(1e-15));
    CHECK(ext.distance == doctest::Approx(0.0).epsilon(1e-15));
  }
  SUBCASE("n = 2, E1 = 2, U = (1, 0)") {
    const Eigen::Vector2d U(1.0, 0.0);
    const auto ext = extremal_from_moments(1.0, 2.0, U, 1.0, 1.0, 2);
    CHECK(ext.T1 == doctest::Approx(1.5).epsilon(1e-15));
    // The returned Maxwellian reproduces (rho, E1, U).
    const double rho = plane_integral(ext.spec, [](const auto&) { return 1.0; });
    const double ux = plane_integral(ext.spec, [](const Eigen::Vector2d& z) { return z(0); });
    const double uy = plane_integral(ext.spec, [](const Eigen::Vector2d& z) { return z(1); });
    const double E = plane_integral(ext.spec, [](const Eigen::Vector2d& z) { return 0.5 * z.squaredNorm(); });
    CHECK(std::abs(rho - 1.0) < 1e-9);
    CHECK(std::abs(ux - 1.0) < 1e-9);
    CHECK(std::abs(uy) < 1e-9);
    CHECK(std::abs(E - 2.0) < 1e-9);
    CHECK(ext.distance == doctest::Approx((0.5 - std::log(1.5)) + 0.5).epsilon(1e-14));
  }
  SUBCASE("infeasible moments") {
    CHECK_THROWS_AS(extremal_from_moments(1.0, 0.4, Eigen::Vector2d(1.0, 0.0), 1.0, 1.0, 2),
                    InfeasibleMomentsError);
    CHECK_THROWS_AS(extremal_from_moments(1.0, 0.5, Eigen::Vector2d(1.0, 0.0), 1.0, 1.0, 2),
                    InfeasibleMomentsError);
  }
}

TEST_CASE("solve_normalization classical case is exact") {
  const auto r = solve_normalization(1.0, kUnitT, 1.0, 2, 0.0);
  CHECK(r.regime == Regime::classical);
  CHECK(r.C == 1.0 / (2.0 * kPi * kUnitT));
  CHECK(r.C == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(r.iterations == 0);
}

TEST_CASE("solve_normalization fermion n = 2 matches the closed-form root e - 1") {
  // C L_1(-C) = log(1 + C) = 1.
  auto g = [](double C) { return std::log1p(C) - 1.0; };
  const double oracle = bisect(g, 1.0, 4.0, 1e-15).root;
  CHECK(oracle == doctest::Approx(std::numbers::e - 1.0).epsilon(1e-14));
  const auto r = solve_normalization(1.0, kUnitT, 1.0, 2, -1.0);
  CHECK(r.regime == Regime::fermion);
  CHECK(r.C == doctest::Approx(oracle).epsilon(1e-13));
  CHECK(r.C > 1.0);
  CHECK(r.residual < 1e-12);
}

TEST_CASE("solve_normalization boson n <= 2 always has a root below 1/eps") {
  for (int n : {1, 2}) {
    for (double eps : {0.1, 0.9, 1.5, 10.0}) {
      const auto r = solve_normalization(1.0, kUnitT, 1.0, n, eps);
      CAPTURE(n);
      CAPTURE(eps);
      CHECK(r.regime == Regime::boson);
      CHECK(r.C * eps < 1.0);
      CHECK(r.residual < 1e-12);
    }
  }
}

TEST_CASE("solve_normalization boson threshold for n = 3") {
  const double T = kUnitT;
  const double threshold = zeta(1.5);  // (2 pi T)^{3/2} V = 1
  CHECK_THROWS_AS(solve_normalization(1.0, T, 1.0, 3, 1.05 * threshold), NoSolutionError);
  const auto at = solve_normalization(1.0, T, 1.0, 3, threshold);
  CHECK(at.regime == Regime::boson_threshold);
  CHECK(at.C == doctest::Approx(1.0 / threshold));
  const auto below = solve_normalization(1.0, T, 1.0, 3, 0.99 * threshold);
  CHECK(below.regime == Regime::boson);
  CHECK(below.C * 0.99 * threshold < 1.0);
  // Just under the threshold the root sits where dC/drho is unbounded.
  for (double gap : {1e-4, 1e-6}) {
    const double eps = (1.0 - gap) * threshold;
    const auto near = solve_normalization(1.0, T, 1.0, 3, eps);
    CAPTURE(gap);
    CHECK(near.regime == Regime::boson);
    CHECK(near.C * eps < 1.0);
    CHECK(near.residual < 1e-9);
  }
}

TEST_CASE("solve_normalization rejects bad input") {
  CHECK_THROWS_AS(solve_normalization(0.0, 1.0, 1.0, 2, 0.0), DomainError);
  CHECK_THROWS_AS(solve_normalization(1.0, -1.0, 1.0, 2, 0.0), DomainError);
  CHECK_THROWS_AS(solve_normalization(1.0, 1.0, 1.0, 0, 0.0), DomainError);
  CHECK_THROWS_AS(solve_normalization(1.0, 1.0, 1.0, 2, NAN), DomainError);
}

TEST_CASE("iterate_z against closed-form fixed points for n = 2") {
  CHECK(*iterate_z(0.0, 2) == 0.0);
  // z = c / L_1(z) with L_1(z) = -log(1 - z)/z gives z = 1 - exp(-c).
  const auto plus = iterate_z(0.01, 2, 1e-15);
  REQUIRE(plus.has_value());
  CHECK(std::abs(*plus - (-std::expm1(-0.01))) < 1e-10);
  CHECK(*plus < 0.01);
  const auto minus = iterate_z(-0.01, 2, 1e-15);
  REQUIRE(minus.has_value());
  CHECK(std::abs(*minus - (-std::expm1(0.01))) < 1e-10);
  CHECK(*minus < 0.0);
  CHECK(std::abs(*minus) > 0.01);  // L_1(z) < 1 for z < 0
}

TEST_CASE("iterate_z agrees with solve_normalization and flags non-contraction") {
  for (int n : {1, 2, 3}) {
    for (double c0eps : {-0.2, -0.05, 0.05, 0.2}) {
      const double tol = 1e-14;
      const auto z = iterate_z(c0eps, n, tol);
      REQUIRE(z.has_value());
      // C0 = 1 by construction with T = 1/(2 pi), V = 1, rho = 1.
      const auto r = solve_normalization(1.0, kUnitT, 1.0, n, c0eps);
      CHECK(std::abs(*z - r.C * c0eps) < 10 * 1e-12);
    }
  }
  // Deep fermion: |d/dz (c / L(z))| > 1 near the fixed point.
  CHECK_FALSE(iterate_z(-40.0, 1).has_value());
}

TEST_CASE("quantum energy closed form") {
  for (int n : {1, 2, 3}) {
    const double T = 0.8, V = 1.3, rho = 1.1;
    const double E_c = 0.5 * n * rho * T;
    CHECK(quantum_energy(quantum_equilibrium(rho, T, V, n, 0.0)) == doctest::Approx(E_c));
    for (double eps : {-2.0, -0.3, 0.2, 0.9}) {
      const auto eq = quantum_equilibrium(rho, T, V, n, eps);
      if (eq.z() < -1.0) continue;
      const double closed = quantum_energy(eq);
      const double quad = 0.5 * radial_quantum(eq, [](double r, double f) { return r * r * f; });
      CAPTURE(n);
      CAPTURE(eps);
      CHECK(closed == doctest::Approx(quad).epsilon(1e-6));
      if (eps > 0) CHECK(closed < E_c);
      if (eps < 0) CHECK(closed > E_c);
    }
  }
}

TEST_CASE("quantum entropy closed form matches quadrature of the modified entropy") {
  for (int n : {1, 2, 3}) {
    for (double eps : {-1.0, -0.1, 1e-6, 0.3}) {
      const auto eq = quantum_equilibrium(1.0, 0.7, 1.0, n, eps);
      const double quad = -radial_quantum(eq, [&](double, double f) { return quantum_entropy_density(f, eps); });
      CAPTURE(n);
      CAPTURE(eps);
      CHECK(quantum_entropy_closed(eq) == doctest::Approx(quad).epsilon(1e-6));
    }
  }
}

TEST_CASE("quantum entropy closed form reduces to the classical entropy at eps = 0") {
  const double rho = 1.3, T = 0.6, V = 2.0;
  for (int n : {1, 2, 3}) {
    const auto eq = quantum_equilibrium(rho, T, V, n, 0.0);
    const double E_c = 0.5 * n * rho * T;
    const double C0 = rho / (std::pow(2.0 * kPi * T, 0.5 * n) * V);
    // The extra 2E/(nT) summand equals rho and cancels the -rho.
    CHECK(2.0 * E_c / (n * T) == doctest::Approx(rho));
    CHECK(quantum_entropy_closed(eq) - (E_c / T - rho * std::log(C0)) ==
          doctest::Approx(0.0).epsilon(1e-13));
  }
}

TEST_CASE("quantum_deltas leading terms") {
  SUBCASE("n = 3 entropy shift matches the leading coefficient") {
    const double eps = 1e-3;
    const auto d = quantum_deltas(1.0, kUnitT, 1.0, 3, eps);
    CHECK(d.dS == doctest::Approx(d.predicted_dS).epsilon(2e-3));
  }
  SUBCASE("n = 2 entropy shift is second order") {
    const auto a = quantum_deltas(1.0, kUnitT, 1.0, 2, 2e-2);
    const auto b = quantum_deltas(1.0, kUnitT, 1.0, 2, 1e-2);
    CHECK(a.predicted_dS == 0.0);
    CHECK(a.dS / b.dS == doctest::Approx(4.0).epsilon(0.05));
  }
  SUBCASE("halving eps quarters the residual") {
    for (int n : {1, 2, 3}) {
      const auto a = quantum_deltas(1.0, kUnitT, 1.0, n, 0.02);
      const auto b = quantum_deltas(1.0, kUnitT, 1.0, n, 0.01);
      CHECK((a.dE - a.predicted_dE) / (b.dE - b.predicted_dE) == doctest::Approx(4.0).epsilon(0.1));
      CHECK((a.dF - a.predicted_dF) / (b.dF - b.predicted_dF) == doctest::Approx(4.0).epsilon(0.1));
    }
  }
  SUBCASE("signs of dF and dS") {
    for (int n : {1, 2, 3}) {
      CHECK(quantum_deltas(1.0, kUnitT, 1.0, n, -0.05).dF < 0.0);
      CHECK(quantum_deltas(1.0, kUnitT, 1.0, n, 0.05).dF > 0.0);
    }
    CHECK(quantum_deltas(1.0, kUnitT, 1.0, 3, 0.05).dS < 0.0);
    CHECK(quantum_deltas(1.0, kUnitT, 1.0, 3, -0.05).dS > 0.0);
  }
}

TEST_CASE("C ordering and boundedness over an eps sweep") {
  for (int n : {1, 2, 3}) {
    const double rho = 1.0, T = 0.5, V = 1.5;
    const double C0 = rho / (std::pow(2.0 * kPi * T, 0.5 * n) * V);
    for (double k : {0.01, 0.05, 0.1, 0.2, 0.3, 0.4, 0.5}) {
      const double eps = k / C0;
      const double C_fermion = solve_normalization(rho, T, V, n, -eps).C;
      const double C_boson = solve_normalization(rho, T, V, n, eps).C;
      CAPTURE(n);
      CAPTURE(k);
      CHECK(C_fermion > C0);
      CHECK(C_boson < C0);
      if (k < 0.5) CHECK(C_fermion < 2.0 * C0);  // -(2 C0)^{-1} < eps < 0
    }
  }
}

TEST_CASE("M_eps is pointwise admissible") {
  for (int n : {1, 2, 3}) {
    for (double eps : {-3.0, -0.5, 0.5, 2.0}) {
      QuantumEquilibrium eq;
      try {
        eq = quantum_equilibrium(1.0, 0.4, 1.0, n, eps);
      } catch (const NoSolutionError&) {
        continue;
      }
      for (double r = 0.0; r < 6.0; r += 0.25) {
        Eigen::VectorXd zeta = Eigen::VectorXd::Constant(n, r / std::sqrt(n));
        const double f = eval_quantum(eq, zeta);
        CHECK(f > 0.0);
        CHECK(1.0 + eps * f > 0.0);
      }
    }
  }
}
