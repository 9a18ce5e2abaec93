#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace chainqfi {

/// One named fit parameter. Bounded parameters are optimised through a
/// smooth transform: logistic when both bounds are set, exponential when
/// only one is.
struct ParameterSpec {
  std::string name;
  double value = 0.0;
  bool frozen = false;
  std::optional<double> lower;
  std::optional<double> upper;
};

struct FitOptions {
  int max_iterations = 500;
  double cost_tolerance = 1e-12;   ///< relative decrease of the cost
  double step_tolerance = 1e-12;   ///< relative step norm
  double initial_damping = 1e-6;   ///< lambda_0 = tau * max diag(J^T J)
  bool nelder_mead_fallback = true;
  double nelder_mead_tolerance = 1e-10;
};

struct FitResult {
  std::vector<std::string> names;
  std::vector<double> values;
  std::vector<bool> frozen;
  /// Full-size covariance; rows and columns of frozen parameters are zero.
  Eigen::MatrixXd covariance;
  double residual_norm = 0.0;  ///< sqrt(sum r_i^2) with weighted residuals
  double reduced_chi2 = 0.0;
  int iterations = 0;
  bool converged = false;
  std::string method;
  std::size_t n_residuals = 0;
  /// Cost 0.5*|r|^2 after every accepted step, starting with the initial one.
  std::vector<double> cost_history;

  std::size_t index_of(std::string_view name) const;
  double value(std::string_view name) const { return values[index_of(name)]; }
  double standard_error(std::string_view name) const;
  std::size_t free_count() const;
};

/// Fills `residuals` (already sized) for the full parameter vector, in the
/// order of the ParameterSpec list. Weighted residuals, i.e. (y - f)/sigma.
using ResidualFn =
    std::function<void(std::span<const double> params, std::span<double> residuals)>;

/// Weighted nonlinear least squares by Levenberg-Marquardt with a forward
/// difference Jacobian. Falls back to Nelder-Mead when J^T J is singular at
/// the start. Throws InvalidArgument (no free parameters, too few residuals),
/// FitDiverged, SingularJacobian (covariance not defined at the optimum).
/// Running out of iterations is reported through `converged = false`.
///
/// Residual evaluations that throw chainqfi::Error or return non-finite
/// values are treated as rejected trial steps, except at the initial point.
FitResult least_squares(const ResidualFn& residual_fn, std::size_t n_residuals,
                        const std::vector<ParameterSpec>& params,
                        const FitOptions& options = {});

}  // namespace chainqfi
