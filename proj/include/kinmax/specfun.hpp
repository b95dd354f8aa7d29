#pragma once

namespace kinmax {

/// Result of evaluating L_s(z) = sum_{m>=1} z^{m-1} / m^s.
struct LEvalResult {
  double value = 0.0;
  double truncation_error = 0.0;
  bool diverged = false;
};

enum class GaussianMomentKind { zeroth, second, radial };

/// Surface area of the unit (n-1)-sphere, 2 pi^{n/2} / Gamma(n/2).
double sphere_area(int n);

/// Closed forms of the Gaussian integrals used throughout:
///   zeroth: int e^{-a x^2} dx          = sqrt(pi/a)
///   second: int x^2 e^{-a x^2} dx      = sqrt(pi/a) / (2a)
///   radial: int_0^inf r^{n-1} e^{-a r^2} dr = a^{-n/2} Gamma(n/2) / 2
double gaussian_moment(double a, GaussianMomentKind kind, int n = 1);

/// L_s(z), the polylogarithm Li_s(z) divided by z, for real s > 0.
///
/// Divergence is reported, not thrown: z > 1 always diverges and z = 1
/// diverges for s <= 1. Arguments within 1e-12 above 1 are clamped to 1.
/// For z < -1 the series itself diverges, and the value returned is that
/// of the Fermi-Dirac integral representation, which continues it.
LEvalResult polylog_L(double s, double z, double tol = 1e-15);

/// Riemann zeta for s > 1 (Euler-Maclaurin after 10^4 explicit terms).
double zeta(double s);

/// |L_s(-1) - zeta(s) (1 - 2^{1-s})|, the Dirichlet-eta identity residual.
double eta_identity_residual(double s);

}  // namespace kinmax
