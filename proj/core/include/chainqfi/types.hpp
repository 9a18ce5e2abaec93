#pragma once

#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace chainqfi {

/// How the impurity constant c0 enters the susceptibility.
enum class ImpurityForm {
  Constant,  ///< c0 added as-is (emu/mol)
  Curie,     ///< c0 / T with c0 in emu K/mol
};

/// Uniform spin-1/2 chain parameters shared by every model and fit.
struct ChainParameters {
  static constexpr double spin = 0.5;

  double j_over_kb = 3.1;  ///< K, positive = antiferromagnetic
  double g_factor = 2.1;
  double c0 = 0.0;         ///< impurity term, see ImpurityForm
  double c1 = 0.0;         ///< diamagnetic constant, emu/mol, <= 0
  std::optional<double> lattice_c;  ///< chain-axis lattice constant, Angstrom
  ImpurityForm impurity = ImpurityForm::Constant;

  /// Throws InvalidArgument if any invariant is violated.
  void validate() const;
};

/// S(Q, E) on a rectangular grid. Rows index energy, columns index Q.
class SpectrumGrid {
 public:
  const std::vector<double>& q_axis() const noexcept { return q_; }
  const std::vector<double>& e_axis() const noexcept { return e_; }
  const Eigen::MatrixXd& intensity() const noexcept { return intensity_; }
  const Eigen::MatrixXd& errors() const noexcept { return errors_; }
  double temperature() const noexcept { return temperature_; }

  std::size_t nq() const noexcept { return q_.size(); }
  std::size_t ne() const noexcept { return e_.size(); }

 private:
  friend SpectrumGrid make_grid(std::vector<double>, std::vector<double>,
                                Eigen::MatrixXd, Eigen::MatrixXd, double);
  SpectrumGrid() = default;

  std::vector<double> q_;
  std::vector<double> e_;
  Eigen::MatrixXd intensity_;
  Eigen::MatrixXd errors_;
  double temperature_ = 0.0;
};

/// Validating constructor. intensity and errors are (ne x nq).
/// Errors: AxisNotMonotone, ShapeMismatch, NonPositiveTemperature,
/// InvalidArgument (non-finite intensity, negative error).
SpectrumGrid make_grid(std::vector<double> q_axis, std::vector<double> e_axis,
                       Eigen::MatrixXd intensity, Eigen::MatrixXd errors,
                       double temperature);

/// Intensity against energy transfer at one temperature.
class EnergyCut {
 public:
  const std::vector<double>& e_axis() const noexcept { return e_; }
  const std::vector<double>& values() const noexcept { return values_; }
  const std::vector<double>& errors() const noexcept { return errors_; }
  double temperature() const noexcept { return temperature_; }
  std::size_t size() const noexcept { return e_.size(); }

 private:
  friend EnergyCut make_cut(std::vector<double>, std::vector<double>,
                            std::vector<double>, double);
  EnergyCut() = default;

  std::vector<double> e_;
  std::vector<double> values_;
  std::vector<double> errors_;
  double temperature_ = 0.0;
};

EnergyCut make_cut(std::vector<double> e_axis, std::vector<double> values,
                   std::vector<double> errors, double temperature);

/// True when every element is strictly greater than its predecessor.
bool strictly_increasing(std::span<const double> axis) noexcept;

}  // namespace chainqfi
