#pragma once

#include <cmath>
#include <limits>

#include "kinmax/errors.hpp"

namespace kinmax {

struct RootResult {
  double root = 0.0;
  int iterations = 0;
};

/// Safeguarded Newton iteration on a bracket [lo, hi] with g(lo) and g(hi)
/// of opposite sign. Newton steps that leave the bracket or are longer than
/// half the previous step fall back to bisection. The derivative is taken by
/// one-sided differences.
template <class G>
RootResult bracketed_newton(G&& g, double lo, double hi, double x_tol, int max_iter = 200) {
  double g_lo = g(lo);
  double g_hi = g(hi);
  if (g_lo == 0.0) return {lo, 0};
  if (g_hi == 0.0) return {hi, 0};
  if ((g_lo > 0.0) == (g_hi > 0.0)) {
    throw DomainError("bracketed_newton: bracket does not straddle a root");
  }
  const bool increasing = g_lo < 0.0;
  double best = std::isfinite(g_lo) && std::abs(g_lo) <= std::abs(g_hi) ? lo : hi;
  double best_g = std::min(std::abs(g_lo), std::abs(g_hi));
  double x = 0.5 * (lo + hi);
  double last_step = hi - lo;
  for (int it = 1; it <= max_iter; ++it) {
    const double gx = g(x);
    if (gx == 0.0) return {x, it};
    if (std::abs(gx) < best_g) {
      best = x;
      best_g = std::abs(gx);
    }
    if ((gx < 0.0) == increasing) {
      lo = x;
    } else {
      hi = x;
    }
    const double width = hi - lo;
    if (width <= x_tol * std::abs(x)) return {best, it};

    // x is now a bracket end; difference towards the interior so that poles
    // beyond the bracket are never sampled.
    const double h = std::min(std::abs(x) * 1e-7, 0.5 * width) * (x == lo ? 1.0 : -1.0);
    double next = std::numeric_limits<double>::quiet_NaN();
    if (h != 0.0) {
      const double slope = (g(x + h) - gx) / h;
      if (std::isfinite(slope) && slope != 0.0) next = x - gx / slope;
    }
    if (!(next > lo && next < hi) || std::abs(next - x) > 0.5 * last_step) {
      next = 0.5 * (lo + hi);
      if (next <= lo || next >= hi) return {best, it};
    }
    last_step = std::abs(next - x);
    if (last_step <= x_tol * std::abs(x)) {
      const double g_next = g(next);
      return {std::abs(g_next) < best_g ? next : best, it};
    }
    x = next;
  }
  throw ConvergenceError("bracketed_newton: iteration limit reached", hi - lo);
}

/// Plain bisection; used where an independent check of bracketed_newton is
/// wanted.
template <class G>
RootResult bisect(G&& g, double lo, double hi, double x_tol, int max_iter = 400) {
  double g_lo = g(lo);
  const double g_hi = g(hi);
  if ((g_lo > 0.0) == (g_hi > 0.0) && g_lo != 0.0 && g_hi != 0.0) {
    throw DomainError("bisect: bracket does not straddle a root");
  }
  int it = 0;
  while (hi - lo > x_tol && it < max_iter) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double g_mid = g(mid);
    if ((g_mid > 0.0) == (g_lo > 0.0)) {
      lo = mid;
      g_lo = g_mid;
    } else {
      hi = mid;
    }
    ++it;
  }
  return {0.5 * (lo + hi), it};
}

}  // namespace kinmax
