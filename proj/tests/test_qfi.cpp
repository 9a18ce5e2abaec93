#include "doctest.h"

#include <cmath>

#include "chainqfi/error.hpp"
#include "chainqfi/qfi.hpp"
#include "chainqfi/units.hpp"
#include "oracles.hpp"

using namespace chainqfi;

namespace {

const double kOmegaMax = default_omega_max(3.1);

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error thrown");
  return ErrorCode::InvalidArgument;
}

double log_cosh(double x) {
  x = std::abs(x);
  return x + std::log1p(std::exp(-2.0 * x)) - std::log(2.0);
}

// (4/pi) int_a^b tanh(w / 2kT) dw
double box_qfi(double a, double b, double t) {
  const double k2 = 2.0 * kelvin_to_mev(t);
  return 4.0 / kPi * k2 * (log_cosh(b / k2) - log_cosh(a / k2));
}

EnergyCut tabulate(const std::function<double(double)>& f, double t, double hi, int n) {
  std::vector<double> e(n + 1), v(n + 1), s(n + 1, 0.0);
  for (int i = 0; i <= n; ++i) {
    e[i] = hi * i / n;
    v[i] = f(e[i]);
  }
  return make_cut(e, v, s, t);
}

}  // namespace

TEST_CASE("default integration limit is the continuum top") {
  CHECK(kOmegaMax == doctest::Approx(kPi * 3.1 * 0.08617333).epsilon(1e-15));
}

TEST_CASE("box spectrum against the closed form") {
  for (double t : {0.04, 0.5, 3.0, 6.7}) {
    const auto one = [](double) { return 1.0; };
    const auto tab = compute_qfi(tabulate(one, t, kOmegaMax, 4000), kOmegaMax);
    CHECK(tab.point.f_q == doctest::Approx(box_qfi(0.0, kOmegaMax, t)).epsilon(1e-3));
    const double a = 0.2, b = 0.6;
    const auto box = [&](double w) { return w >= a && w <= b ? 1.0 : 0.0; };
    const auto ad = compute_qfi(box, t, kOmegaMax);
    CHECK(ad.point.f_q == doctest::Approx(box_qfi(a, b, t)).epsilon(1e-3));
  }
}

TEST_CASE("narrow peak limit") {
  const double w0 = 0.3, sigma = 0.01, weight = 2.5, t = 1.0;
  const auto peak = [&](double w) {
    return weight / (sigma * std::sqrt(2.0 * kPi)) * std::exp(-0.5 * (w - w0) * (w - w0) / (sigma * sigma));
  };
  const double limit = 4.0 / kPi * weight * std::tanh(w0 / (2.0 * kelvin_to_mev(t)));
  CHECK(compute_qfi(peak, t, kOmegaMax).point.f_q == doctest::Approx(limit).epsilon(1e-3));
  CHECK(compute_qfi(tabulate(peak, t, kOmegaMax, 2000), kOmegaMax).point.f_q == doctest::Approx(limit).epsilon(1e-3));
}

TEST_CASE("linearity in chi''") {
  oracle::rng(31);
  for (int k = 0; k < 25; ++k) {
    const double t = oracle::uniform(0.02, 8.0);
    const double c1 = oracle::uniform(0.1, 1.0), c2 = oracle::uniform(0.05, 0.5);
    const double al = oracle::uniform(0.0, 3.0), be = oracle::uniform(0.0, 3.0);
    const auto f1 = [&](double w) { return w * std::exp(-w / c1); };
    const auto f2 = [&](double w) { return std::sin(kPi * w / kOmegaMax) * c2; };
    const auto mix = [&](double w) { return al * f1(w) + be * f2(w); };
    const double lhs = compute_qfi(mix, t, kOmegaMax).point.f_q;
    const double rhs = al * compute_qfi(f1, t, kOmegaMax).point.f_q + be * compute_qfi(f2, t, kOmegaMax).point.f_q;
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-7));
    const auto tab = [&](const std::function<double(double)>& f) {
      return compute_qfi(tabulate(f, t, kOmegaMax, 300), kOmegaMax).point.f_q;
    };
    CHECK(tab(mix) == doctest::Approx(al * tab(f1) + be * tab(f2)).epsilon(1e-12));
  }
}

TEST_CASE("fixed non-negative chi'' gives F_Q decreasing in T") {
  oracle::rng(37);
  for (int k = 0; k < 25; ++k) {
    const double c = oracle::uniform(0.05, 0.8);
    const auto f = [&](double w) { return w * std::exp(-w / c); };
    double prev = std::numeric_limits<double>::infinity();
    for (double t = 0.05; t < 20.0; t *= 1.7) {
      const double fq = compute_qfi(f, t, kOmegaMax).point.f_q;
      CHECK(fq <= prev);
      prev = fq;
    }
  }
}

TEST_CASE("tabulated and adaptive agree on the line shape") {
  const auto p = StarykhParams::standard(3.1);
  const double t = 0.5;
  const auto model = compute_qfi(p, t, kOmegaMax);
  const auto tab = compute_qfi(tabulate([&](double w) { return chi_imag_starykh(w, t, p); }, t, kOmegaMax, 4000), kOmegaMax);
  CHECK(tab.point.f_q == doctest::Approx(model.point.f_q).epsilon(1e-5));
  CHECK(tab.point.quadrature_error_estimate < 1e-4 * tab.point.f_q);
  CHECK(model.point.quadrature_error_estimate <= 1e-8 * model.point.f_q + 1e-15);
}

TEST_CASE("tabulated diagnostics") {
  const double t = 0.5;
  const auto neg = tabulate([](double w) { return w < 0.1 ? -1.0 : 1.0; }, t, kOmegaMax, 100);
  const auto r = compute_qfi(neg, kOmegaMax);
  CHECK(r.diagnostics.clipped_bins > 0);
  CHECK(r.point.f_q > 0.0);

  const auto low = compute_qfi(tabulate([](double w) { return std::exp(-w / 0.05); }, t, kOmegaMax, 400), kOmegaMax);
  CHECK_FALSE(low.diagnostics.truncation_warning);
  const auto high = compute_qfi(tabulate([](double w) { return w * w; }, t, kOmegaMax, 400), kOmegaMax);
  CHECK(high.diagnostics.truncation_warning);

  CHECK(code_of([&] { compute_qfi(tabulate([](double) { return 1.0; }, t, kOmegaMax, 5), kOmegaMax); }) ==
        ErrorCode::GridTooCoarse);
  CHECK(code_of([&] { compute_qfi(tabulate([](double) { return 1.0; }, t, 0.5, 50), kOmegaMax); }) ==
        ErrorCode::InvalidArgument);
}

TEST_CASE("zero signal") {
  const auto zero = tabulate([](double) { return 0.0; }, 0.5, 1.0, 200);
  const auto r = compute_qfi(zero, kOmegaMax);
  CHECK(r.point.f_q == 0.0);
  std::vector<QfiPoint> pts{{0.04, 0.0, 0.0}, {0.5, 0.0, 0.0}, {3.0, 0.0, 0.0}};
  CHECK(code_of([&] { fit_scaling(pts, 1.0); }) == ErrorCode::NonPositiveValue);
}

TEST_CASE("scaling fit on an exact power law") {
  std::vector<QfiPoint> pts;
  for (double t : {0.04, 0.5, 3.0, 6.7}) pts.push_back({t, 1.7 * std::pow(t, -0.55), 0.0});
  const auto s = fit_scaling(pts, 1.0);
  CHECK(s.delta_q_over_z == doctest::Approx(0.55).epsilon(1e-12));
  CHECK(s.amplitude == doctest::Approx(1.7).epsilon(1e-12));
  CHECK(s.r_squared == doctest::Approx(1.0));
  CHECK(std::abs(s.covariance(1, 1)) < 1e-20);
  const auto s2 = fit_scaling(pts, 2.0);
  CHECK(s2.delta_q == doctest::Approx(1.1).epsilon(1e-12));
  pts.pop_back();
  pts.pop_back();
  CHECK(code_of([&] { fit_scaling(pts, 1.0); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("model QFI reproduces the reported scaling band") {
  const auto p = StarykhParams::standard(3.1, NegativeLogPolicy::AbsoluteValue);
  std::vector<QfiPoint> pts;
  for (double t : {0.04, 0.5, 3.0, 6.7}) pts.push_back(compute_qfi(p, t, kOmegaMax).point);
  const auto s = fit_scaling(pts, 1.0);
  CHECK(s.delta_q_over_z >= 0.40);
  CHECK(s.delta_q_over_z <= 0.70);
}
