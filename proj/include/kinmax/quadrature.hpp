#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <queue>
#include <vector>

namespace kinmax {

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;
  int intervals = 0;
};

namespace detail {

// Gauss-Kronrod 7/15 nodes and weights on [-1, 1] (positive half).
inline constexpr std::array<double, 8> kKronrodNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
  double a, b, value, error;
  bool operator<(const Panel& other) const { return error < other.error; }
};

// Error estimate follows QUADPACK's qk15: |K - G| rescaled by the
// (200 |K - G| / resasc)^{3/2} rule.
template <class F>
Panel gauss_kronrod_15(F&& f, double a, double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  std::array<double, 7> left{}, right{};
  const double fc = f(center);
  double kronrod = fc * kKronrodWeights[7];
  double gauss = fc * kGaussWeights[3];
  for (int i = 0; i < 7; ++i) {
    const double dx = half * kKronrodNodes[i];
    left[i] = f(center - dx);
    right[i] = f(center + dx);
    const double sum = left[i] + right[i];
    kronrod += kKronrodWeights[i] * sum;
    if (i % 2 == 1) gauss += kGaussWeights[i / 2] * sum;
  }
  const double mean = 0.5 * kronrod;
  double resasc = kKronrodWeights[7] * std::abs(fc - mean);
  for (int i = 0; i < 7; ++i) {
    resasc += kKronrodWeights[i] * (std::abs(left[i] - mean) + std::abs(right[i] - mean));
  }
  kronrod *= half;
  resasc *= std::abs(half);
  double err = std::abs((kronrod - gauss * half));
  if (resasc != 0.0 && err != 0.0) {
    err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
  }
  return {a, b, kronrod, err};
}

}  // namespace detail

/// Globally adaptive Gauss-Kronrod (7/15) quadrature of f over [a, b].
/// Splits the panel with the largest error estimate until the summed
/// estimate drops below max(abs_tol, rel_tol * |value|).
template <class F>
QuadratureResult integrate(F&& f, double a, double b, double abs_tol,
                           double rel_tol = 0.0, int max_panels = 4000) {
  std::priority_queue<detail::Panel> panels;
  auto first = detail::gauss_kronrod_15(f, a, b);
  double value = first.value;
  double error = first.error;
  panels.push(first);
  int count = 1;
  while (error > std::max(abs_tol, rel_tol * std::abs(value)) && count < max_panels) {
    const auto worst = panels.top();
    // Panels narrower than round-off cannot be refined further.
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) break;
    panels.pop();
    const auto left = detail::gauss_kronrod_15(f, worst.a, mid);
    const auto right = detail::gauss_kronrod_15(f, mid, worst.b);
    value += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    panels.push(left);
    panels.push(right);
    ++count;
  }
  // Re-sum from the panels to shed accumulated cancellation.
  double total = 0.0, total_error = 0.0;
  std::vector<detail::Panel> all;
  all.reserve(panels.size());
  while (!panels.empty()) {
    all.push_back(panels.top());
    panels.pop();
  }
  std::sort(all.begin(), all.end(),
            [](const auto& l, const auto& r) { return std::abs(l.value) < std::abs(r.value); });
  for (const auto& p : all) {
    total += p.value;
    total_error += p.error;
  }
  return {total, total_error, count};
}

}  // namespace kinmax
