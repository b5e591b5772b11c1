#pragma once

#include <cmath>
#include <limits>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "seqaudit/core.hpp"

namespace seqaudit {

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;
};

struct QuadratureNonConvergence : Error {
  using Error::Error;
};

/// Adaptive 15-point Gauss-Kronrod on [a, b].
template <class F>
QuadratureResult integrate(F&& f, double a, double b, double rel_tol = 1e-13,
                           unsigned max_depth = 20) {
  double err = 0.0;
  const double v = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
      f, a, b, max_depth, rel_tol, &err);
  if (!std::isfinite(v)) throw QuadratureNonConvergence("quadrature produced a non-finite value");
  return {v, err};
}

/// Integral over (0, inf) of an integrand with an exponentially decaying
/// tail. Panels [0, s/64], then doubling widths, until a panel past
/// `scale` contributes less than `tail_tol` of the running total (absolute
/// when the total is zero).
template <class F>
QuadratureResult integrate_half_line(F&& f, double scale, double rel_tol = 1e-13,
                                     double tail_tol = 1e-17) {
  if (!(scale > 0.0) || !std::isfinite(scale))
    throw QuadratureNonConvergence("invalid integration scale");
  QuadratureResult total;
  double lo = 0.0;
  double hi = scale / 64.0;
  for (int panel = 0; panel < 200; ++panel) {
    const auto part = integrate(f, lo, hi, rel_tol);
    total.value += part.value;
    total.error += part.error;
    if (hi > 2.0 * scale && std::abs(part.value) <= tail_tol * std::max(1.0, std::abs(total.value)))
      return total;
    lo = hi;
    hi *= 2.0;
  }
  throw QuadratureNonConvergence("half-line quadrature did not reach a negligible tail");
}

}  // namespace seqaudit
