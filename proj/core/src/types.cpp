#include "chainqfi/types.hpp"

#include <cmath>
#include <string>

#include "chainqfi/error.hpp"

namespace chainqfi {

void ChainParameters::validate() const {
  if (!(j_over_kb > 0.0) || !std::isfinite(j_over_kb))
    raise(ErrorCode::InvalidArgument, "J/k_B must be positive and finite");
  if (!(g_factor > 0.0) || !std::isfinite(g_factor))
    raise(ErrorCode::InvalidArgument, "g factor must be positive and finite");
  if (!std::isfinite(c0)) raise(ErrorCode::InvalidArgument, "c0 not finite");
  if (!(c1 <= 0.0)) raise(ErrorCode::InvalidArgument, "c1 must be <= 0 (diamagnetic)");
  if (lattice_c && !(*lattice_c > 0.0))
    raise(ErrorCode::InvalidArgument, "lattice constant must be positive");
}

bool strictly_increasing(std::span<const double> axis) noexcept {
  for (std::size_t i = 0; i < axis.size(); ++i) {
    if (!std::isfinite(axis[i])) return false;
    if (i > 0 && !(axis[i] > axis[i - 1])) return false;
  }
  return true;
}

SpectrumGrid make_grid(std::vector<double> q_axis, std::vector<double> e_axis,
                       Eigen::MatrixXd intensity, Eigen::MatrixXd errors,
                       double temperature) {
  if (q_axis.empty() || e_axis.empty())
    raise(ErrorCode::ShapeMismatch, "empty axis");
  if (!strictly_increasing(q_axis))
    raise(ErrorCode::AxisNotMonotone, "Q axis is not strictly increasing");
  if (!strictly_increasing(e_axis))
    raise(ErrorCode::AxisNotMonotone, "E axis is not strictly increasing");
  const auto ne = static_cast<Eigen::Index>(e_axis.size());
  const auto nq = static_cast<Eigen::Index>(q_axis.size());
  if (intensity.rows() != ne || intensity.cols() != nq)
    raise(ErrorCode::ShapeMismatch,
          "intensity is " + std::to_string(intensity.rows()) + "x" +
              std::to_string(intensity.cols()) + ", axes imply " +
              std::to_string(ne) + "x" + std::to_string(nq));
  if (errors.rows() != ne || errors.cols() != nq)
    raise(ErrorCode::ShapeMismatch, "error array shape does not match axes");
  if (!(temperature > 0.0) || !std::isfinite(temperature))
    raise(ErrorCode::NonPositiveTemperature, "grid temperature must be > 0");
  if (!intensity.allFinite())
    raise(ErrorCode::InvalidArgument, "intensity contains NaN or infinity");
  if (!errors.allFinite() || (errors.array() < 0.0).any())
    raise(ErrorCode::InvalidArgument, "errors must be finite and nonnegative");

  SpectrumGrid g;
  g.q_ = std::move(q_axis);
  g.e_ = std::move(e_axis);
  g.intensity_ = std::move(intensity);
  g.errors_ = std::move(errors);
  g.temperature_ = temperature;
  return g;
}

EnergyCut make_cut(std::vector<double> e_axis, std::vector<double> values,
                   std::vector<double> errors, double temperature) {
  if (e_axis.empty()) raise(ErrorCode::ShapeMismatch, "empty energy axis");
  if (!strictly_increasing(e_axis))
    raise(ErrorCode::AxisNotMonotone, "energy axis is not strictly increasing");
  if (values.size() != e_axis.size() || errors.size() != e_axis.size())
    raise(ErrorCode::ShapeMismatch, "cut arrays differ in length");
  if (!(temperature > 0.0) || !std::isfinite(temperature))
    raise(ErrorCode::NonPositiveTemperature, "cut temperature must be > 0");
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i]))
      raise(ErrorCode::InvalidArgument, "cut value not finite at index " + std::to_string(i));
    if (!std::isfinite(errors[i]) || errors[i] < 0.0)
      raise(ErrorCode::InvalidArgument, "cut error invalid at index " + std::to_string(i));
  }
  EnergyCut c;
  c.e_ = std::move(e_axis);
  c.values_ = std::move(values);
  c.errors_ = std::move(errors);
  c.temperature_ = temperature;
  return c;
}

}  // namespace chainqfi
