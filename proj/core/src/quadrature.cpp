#include "chainqfi/quadrature.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "chainqfi/error.hpp"

namespace chainqfi {

QuadratureResult integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                                    double rel_tol) {
  if (a == b) return {};
  QuadratureResult out;
  double l1 = 0.0;
  constexpr unsigned kMaxDepth = 20;
  out.value = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
      f, a, b, kMaxDepth, rel_tol, &out.error_estimate, &l1);
  return out;
}

double trapezoid(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) raise(ErrorCode::ShapeMismatch, "trapezoid: length mismatch");
  double sum = 0.0;
  for (std::size_t i = 1; i < x.size(); ++i) sum += 0.5 * (x[i] - x[i - 1]) * (y[i] + y[i - 1]);
  return sum;
}

}  // namespace chainqfi
