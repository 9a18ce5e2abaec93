#include "chainqfi/spinon.hpp"

#include <array>
#include <cmath>
#include <string>

#include "chainqfi/error.hpp"
#include "chainqfi/parallel.hpp"
#include "chainqfi/quadrature.hpp"
#include "chainqfi/units.hpp"

namespace chainqfi {

SpinonBounds two_spinon_bounds(double q_1d, double j_mev, double c) {
  if (!(c > 0.0)) raise(ErrorCode::InvalidArgument, "lattice constant must be > 0");
  if (!(j_mev > 0.0)) raise(ErrorCode::InvalidArgument, "J must be > 0");
  return {0.5 * kPi * j_mev * std::abs(std::sin(q_1d * c)),
          kPi * j_mev * std::abs(std::sin(0.5 * q_1d * c))};
}

ContinuumBounds continuum_bounds(std::span<const double> q_axis, double j_mev, double c) {
  ContinuumBounds out;
  out.q_axis.assign(q_axis.begin(), q_axis.end());
  for (double q : q_axis) {
    const auto b = two_spinon_bounds(q, j_mev, c);
    out.lower.push_back(b.lower);
    out.upper.push_back(b.upper);
  }
  return out;
}

namespace {

// Weights of the three-point first-derivative stencil at node i.
struct Stencil {
  std::array<std::size_t, 3> index;
  std::array<double, 3> weight;
};

Stencil derivative_stencil(std::span<const double> x, std::size_t i) {
  const std::size_t n = x.size();
  if (i == 0) {
    const double h1 = x[1] - x[0], h2 = x[2] - x[1];
    return {{0, 1, 2},
            {-(2.0 * h1 + h2) / (h1 * (h1 + h2)), (h1 + h2) / (h1 * h2), -h1 / (h2 * (h1 + h2))}};
  }
  if (i == n - 1) {
    const double h1 = x[n - 2] - x[n - 3], h2 = x[n - 1] - x[n - 2];
    return {{n - 3, n - 2, n - 1},
            {h2 / (h1 * (h1 + h2)), -(h1 + h2) / (h1 * h2), (2.0 * h2 + h1) / (h2 * (h1 + h2))}};
  }
  const double h1 = x[i] - x[i - 1], h2 = x[i + 1] - x[i];
  return {{i - 1, i, i + 1},
          {-h2 / (h1 * (h1 + h2)), (h2 - h1) / (h1 * h2), h1 / (h2 * (h1 + h2))}};
}

}  // namespace

SpectrumGrid powder_to_1d(const SpectrumGrid& powder) {
  const auto& q = powder.q_axis();
  if (q.size() < 3)
    raise(ErrorCode::GridTooCoarse,
          "powder_to_1d needs at least 3 Q points per energy row, got " + std::to_string(q.size()));
  const auto ne = static_cast<Eigen::Index>(powder.ne());
  const auto nq = static_cast<Eigen::Index>(powder.nq());
  Eigen::MatrixXd out(ne, nq), err(ne, nq);

  std::vector<Stencil> stencils;
  for (std::size_t i = 0; i < q.size(); ++i) stencils.push_back(derivative_stencil(q, i));

  parallel_for(powder.ne(), [&](std::size_t row) {
    const auto r = static_cast<Eigen::Index>(row);
    for (Eigen::Index col = 0; col < nq; ++col) {
      const auto& st = stencils[static_cast<std::size_t>(col)];
      double value = 0.0, var = 0.0;
      for (std::size_t k = 0; k < 3; ++k) {
        const auto j = static_cast<Eigen::Index>(st.index[k]);
        const double w = st.weight[k] * q[st.index[k]];
        value += w * powder.intensity()(r, j);
        var += w * w * powder.errors()(r, j) * powder.errors()(r, j);
      }
      out(r, col) = value;
      err(r, col) = std::sqrt(var);
    }
  });
  return make_grid(q, powder.e_axis(), std::move(out), std::move(err), powder.temperature());
}

SpectrumGrid forward_powder_average(const ChainSpectrumFn& s_1d, std::vector<double> q_axis,
                                    std::vector<double> e_axis, double temperature,
                                    double rel_tol) {
  if (q_axis.empty() || q_axis.front() < 0.0)
    raise(ErrorCode::InvalidArgument, "forward_powder_average needs Q >= 0");
  if (!strictly_increasing(q_axis))
    raise(ErrorCode::AxisNotMonotone, "Q axis is not strictly increasing");
  const auto ne = static_cast<Eigen::Index>(e_axis.size());
  const auto nq = static_cast<Eigen::Index>(q_axis.size());
  Eigen::MatrixXd intensity(ne, nq);

  parallel_for(e_axis.size(), [&](std::size_t row) {
    const double e = e_axis[row];
    const auto f = [&](double q) { return s_1d(q, e); };
    double cumulative = 0.0;
    double previous = 0.0;
    for (Eigen::Index col = 0; col < nq; ++col) {
      const double qq = q_axis[static_cast<std::size_t>(col)];
      cumulative += integrate_adaptive(f, previous, qq, rel_tol).value;
      previous = qq;
      intensity(static_cast<Eigen::Index>(row), col) = qq > 0.0 ? cumulative / qq : s_1d(0.0, e);
    }
  });
  return make_grid(std::move(q_axis), std::move(e_axis), std::move(intensity),
                   Eigen::MatrixXd::Zero(ne, nq), temperature);
}

}  // namespace chainqfi
