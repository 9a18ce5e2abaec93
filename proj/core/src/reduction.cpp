#include "chainqfi/reduction.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "chainqfi/dynamics.hpp"
#include "chainqfi/error.hpp"

namespace chainqfi {

EnergyCut integrate_q_window(const SpectrumGrid& grid, double q_min, double q_max) {
  if (!(q_min < q_max)) raise(ErrorCode::InvalidArgument, "q window needs q_min < q_max");
  const auto& q = grid.q_axis();
  const double lo = std::max(q_min, q.front());
  const double hi = std::min(q_max, q.back());
  if (!(lo < hi))
    raise(ErrorCode::WindowOutsideGrid, "q window [" + std::to_string(q_min) + ", " +
                                            std::to_string(q_max) + "] misses the grid range [" +
                                            std::to_string(q.front()) + ", " +
                                            std::to_string(q.back()) + "]");

  // Each sub-interval [a, b] of a grid cell contributes (b - a)/2 * (f(a) + f(b))
  // with f linear in the two cell nodes, so the integral is sum_k w_k f(q_k).
  std::vector<double> w(q.size(), 0.0);
  for (std::size_t k = 0; k + 1 < q.size(); ++k) {
    const double a = std::max(lo, q[k]);
    const double b = std::min(hi, q[k + 1]);
    if (!(a < b)) continue;
    const double h = q[k + 1] - q[k];
    const double half = 0.5 * (b - a);
    const double ta = (a - q[k]) / h, tb = (b - q[k]) / h;
    w[k] += half * ((1.0 - ta) + (1.0 - tb));
    w[k + 1] += half * (ta + tb);
  }

  const auto& inten = grid.intensity();
  const auto& err = grid.errors();
  std::vector<double> v(grid.ne(), 0.0), e(grid.ne(), 0.0);
  for (std::size_t r = 0; r < grid.ne(); ++r) {
    double s = 0.0, s2 = 0.0;
    for (std::size_t c = 0; c < q.size(); ++c) {
      if (w[c] == 0.0) continue;
      s += w[c] * inten(r, c);
      s2 += w[c] * w[c] * err(r, c) * err(r, c);
    }
    v[r] = s;
    e[r] = std::sqrt(s2);
  }
  return make_cut(grid.e_axis(), std::move(v), std::move(e), grid.temperature());
}

double elastic_gaussian(double e, double fwhm) {
  const double sigma = fwhm / (2.0 * std::sqrt(2.0 * std::log(2.0)));
  return std::exp(-0.5 * (e / sigma) * (e / sigma));
}

ElasticSubtraction subtract_elastic_line(const EnergyCut& cut, double resolution_fwhm) {
  if (!(resolution_fwhm > 0.0)) raise(ErrorCode::InvalidArgument, "resolution FWHM must be > 0");
  const auto& e = cut.e_axis();
  if (!(e.front() <= 0.0 && e.back() >= 0.0))
    raise(ErrorCode::ElasticWindowMissing, "energy axis [" + std::to_string(e.front()) + ", " +
                                               std::to_string(e.back()) + "] meV does not contain 0");

  const std::size_t n = e.size();
  std::vector<bool> use(n, false);
  ElasticFit fit;
  fit.fwhm = resolution_fwhm;
  for (std::size_t i = 0; i < n; ++i)
    if (std::abs(e[i]) <= 2.0 * resolution_fwhm) {
      use[i] = true;
      ++fit.window_points;
    }
  if (fit.window_points < 2)
    raise(ErrorCode::ElasticWindowMissing,
          std::to_string(fit.window_points) + " bins within |E| <= 2 FWHM; need at least 2");
  const auto tail = std::max<std::size_t>(1, n / 10);
  for (std::size_t i = n - tail; i < n; ++i)
    if (!use[i]) {
      use[i] = true;
      ++fit.background_points;
    }

  // Unit weights where the error is zero (noiseless input).
  const auto& v = cut.values();
  const auto& s = cut.errors();
  bool all_weighted = true;
  for (std::size_t i = 0; i < n; ++i)
    if (use[i] && !(s[i] > 0.0)) all_weighted = false;
  Eigen::Matrix2d a = Eigen::Matrix2d::Zero();
  Eigen::Vector2d b = Eigen::Vector2d::Zero();
  for (std::size_t i = 0; i < n; ++i) {
    if (!use[i]) continue;
    const double wt = all_weighted ? 1.0 / (s[i] * s[i]) : 1.0;
    const Eigen::Vector2d row(elastic_gaussian(e[i], resolution_fwhm), 1.0);
    a += wt * row * row.transpose();
    b += wt * v[i] * row;
  }
  const Eigen::Vector2d x = a.colPivHouseholderQr().solve(b);
  fit.amplitude = x(0);
  fit.constant = x(1);

  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i)
    out[i] = v[i] - fit.amplitude * elastic_gaussian(e[i], resolution_fwhm) - fit.constant;
  return {make_cut(e, std::move(out), s, cut.temperature()), fit};
}

EnergyCut cut_to_chi_imag(const EnergyCut& sqw_cut, double calibration) {
  if (!(calibration > 0.0)) raise(ErrorCode::InvalidArgument, "calibration must be > 0");
  const auto& e = sqw_cut.e_axis();
  std::vector<double> v(e.size()), s(e.size());
  for (std::size_t i = 0; i < e.size(); ++i) {
    const double f = e[i] == 0.0 ? 0.0 : chi_imag_from_sqw(1.0, e[i], sqw_cut.temperature());
    v[i] = f * sqw_cut.values()[i] / calibration;
    s[i] = std::abs(f) * sqw_cut.errors()[i] / calibration;
  }
  return make_cut(e, std::move(v), std::move(s), sqw_cut.temperature());
}

}  // namespace chainqfi
