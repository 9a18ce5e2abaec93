#pragma once

#include <functional>
#include <span>

namespace chainqfi {

struct QuadratureResult {
  double value = 0.0;
  double error_estimate = 0.0;
};

/// Adaptive Gauss-Kronrod (7/15) on [a, b] to the given relative tolerance.
QuadratureResult integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                                    double rel_tol = 1e-10);

/// Trapezoid rule on tabulated samples.
double trapezoid(std::span<const double> x, std::span<const double> y);

}  // namespace chainqfi
