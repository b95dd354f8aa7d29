#include "kinmax/specfun.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "kinmax/errors.hpp"
#include "kinmax/quadrature.hpp"

namespace kinmax {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kClampAboveOne = 1e-12;
constexpr double kSeriesUpper = 0.95;
constexpr double kSeriesLower = -0.5;

// Neumaier compensated accumulator.
struct Accumulator {
  double sum = 0.0;
  double carry = 0.0;
  void add(double x) {
    const double t = sum + x;
    if (std::abs(sum) >= std::abs(x)) {
      carry += (sum - t) + x;
    } else {
      carry += (x - t) + sum;
    }
    sum = t;
  }
  double value() const { return sum + carry; }
};

LEvalResult direct_series(double s, double z, double tol) {
  const double az = std::abs(z);
  Accumulator acc;
  double power = 1.0;  // z^{m-1}
  for (long m = 1;; ++m) {
    acc.add(power / std::pow(static_cast<double>(m), s));
    power *= z;
    const double bound =
        std::abs(power) / ((1.0 - az) * std::max(1.0, std::pow(static_cast<double>(m), s)));
    if (bound < tol) return {acc.value(), bound, false};
  }
}

// Cohen-Villegas-Zagier acceleration of sum_k (-1)^k a_k with
// a_k = |z|^k / (k+1)^s, a totally monotone sequence for 0 < |z| <= 1.
LEvalResult alternating_series(double s, double z, double tol) {
  const double az = std::abs(z);
  const double rate = 3.0 + std::sqrt(8.0);
  int terms = static_cast<int>(std::ceil(std::log(2.0 / tol) / std::log(rate))) + 2;
  terms = std::clamp(terms, 8, 80);
  double d = std::pow(rate, terms);
  d = 0.5 * (d + 1.0 / d);
  double b = -1.0;
  double c = -d;
  double sum = 0.0;
  double power = 1.0;
  for (int k = 0; k < terms; ++k) {
    c = b - c;
    sum += c * power / std::pow(static_cast<double>(k + 1), s);
    power *= az;
    b = (static_cast<double>(k) + terms) * (static_cast<double>(k) - terms) * b /
        ((k + 0.5) * (k + 1.0));
  }
  return {sum / d, 2.0 / std::pow(rate, terms), false};
}

// L_s(z) = (1 / Gamma(s+1)) int_0^inf du / (exp(u^{1/s}) - z); the change of
// variables t = u^{1/s} removes the t^{s-1} endpoint singularity.
LEvalResult integral_route(double s, double z, double tol) {
  const double gamma_s = std::tgamma(s);
  const double scale = std::tgamma(s + 1.0);
  // The integrand is about 1/(1-z) up to t = log(1-z) and decays as e^{-t}
  // beyond, which gives a lower bound on the value for relative tolerances.
  const double log_one_minus_z = std::log1p(-z);
  const double floor = z < 0.0 ? std::pow(log_one_minus_z, s) / (2.0 * (1.0 - z) * scale) : 1.0;
  double t_max = std::max(10.0, log_one_minus_z + 10.0);
  while (2.0 * std::pow(t_max, s - 1.0) * std::exp(-t_max) / gamma_s > 1e-3 * tol * floor) t_max += 2.0;
  const double u_max = std::pow(t_max, s);
  const double inv_s = 1.0 / s;
  auto integrand = [&](double u) {
    const double t = std::pow(u, inv_s);
    // expm1 keeps 1 - z + (e^t - 1) accurate when z is close to 1.
    return 1.0 / ((1.0 - z) + std::expm1(t));
  };
  // Resolve the shoulder at t = log(1 - z) (z < 0) or the peak of height
  // 1/(1-z) near t = 0 (z close to 1) with a dedicated panel.
  const double split_t = z < 0.0 ? log_one_minus_z : std::max(1.0 - z, 1e-300);
  double split = std::min(u_max, std::pow(split_t, s));
  QuadratureResult head{0.0, 0.0, 0};
  if (split > 0.0 && split < u_max) {
    const double head_tol = z < 0.0 ? 0.25 * tol * scale * floor : 0.25 * tol * scale * split / u_max;
    head = integrate(integrand, 0.0, split, head_tol, z < 0.0 ? 0.25 * tol : 0.0);
  } else {
    split = 0.0;
  }
  const auto tail =
      integrate(integrand, split, u_max, 0.25 * tol * scale * floor, z < 0.0 ? 0.25 * tol : 0.0, 8000);
  const double value = (head.value + tail.value) / scale;
  return {value, (head.error + tail.error) / scale, false};
}

double zeta_with_error(double s, double* error) {
  constexpr long kExplicit = 10000;
  Accumulator acc;
  for (long k = kExplicit - 1; k >= 1; --k) acc.add(std::pow(static_cast<double>(k), -s));
  const double N = static_cast<double>(kExplicit);
  // Euler-Maclaurin tail from N: int_N^inf + f(N)/2 - sum B_{2j}/(2j)! f^{(2j-1)}(N).
  acc.add(std::pow(N, 1.0 - s) / (s - 1.0));
  acc.add(0.5 * std::pow(N, -s));
  constexpr double kBernoulliOverFactorial[] = {1.0 / 12.0, -1.0 / 720.0, 1.0 / 30240.0,
                                                -1.0 / 1209600.0};
  double rising = s;  // s (s+1) ... (s + 2j - 2)
  double last = 0.0;
  for (int j = 0; j < 4; ++j) {
    last = kBernoulliOverFactorial[j] * rising * std::pow(N, -s - 2.0 * j - 1.0);
    acc.add(last);
    rising *= (s + 2.0 * j + 1.0) * (s + 2.0 * j + 2.0);
  }
  if (error) *error = std::abs(last) + 1e-16 * acc.value();
  return acc.value();
}

}  // namespace

double sphere_area(int n) {
  if (n < 1) throw DomainError("sphere_area: dimension must be >= 1");
  const double half = 0.5 * n;
  return 2.0 * std::pow(std::numbers::pi, half) / std::tgamma(half);
}

double gaussian_moment(double a, GaussianMomentKind kind, int n) {
  if (!(a > 0.0)) throw DomainError("gaussian_moment: a must be > 0");
  switch (kind) {
    case GaussianMomentKind::zeroth:
      return std::sqrt(std::numbers::pi / a);
    case GaussianMomentKind::second:
      return std::sqrt(std::numbers::pi / a) / (2.0 * a);
    case GaussianMomentKind::radial:
      if (n < 1) throw DomainError("gaussian_moment: radial moment needs n >= 1");
      return 0.5 * std::pow(a, -0.5 * n) * std::tgamma(0.5 * n);
  }
  throw DomainError("gaussian_moment: unknown kind");
}

LEvalResult polylog_L(double s, double z, double tol) {
  if (!(s > 0.0)) throw DomainError("polylog_L: s must be > 0");
  if (!(tol > 0.0)) throw DomainError("polylog_L: tol must be > 0");
  if (std::isnan(z)) throw DomainError("polylog_L: z is NaN");
  if (z > 1.0) {
    if (z - 1.0 > kClampAboveOne) return {kInf, 0.0, true};
    z = 1.0;
  }
  if (z == 1.0) {
    if (s <= 1.0) return {kInf, 0.0, true};
    double err = 0.0;
    const double value = zeta_with_error(s, &err);
    return {value, err, false};
  }
  if (z == 0.0) return {1.0, 0.0, false};
  if (z >= kSeriesLower && z <= kSeriesUpper) return direct_series(s, z, tol);
  if (z >= -1.0 && z < kSeriesLower) return alternating_series(s, z, tol);
  return integral_route(s, z, tol);
}

double zeta(double s) {
  if (!(s > 1.0)) throw DomainError("zeta: s must be > 1");
  return zeta_with_error(s, nullptr);
}

double eta_identity_residual(double s) {
  if (!(s > 1.0)) throw DomainError("eta_identity_residual: s must be > 1");
  const double lhs = polylog_L(s, -1.0).value;
  const double rhs = zeta(s) * (1.0 - std::pow(2.0, 1.0 - s));
  return std::abs(lhs - rhs);
}

}  // namespace kinmax
