#pragma once

#include <cstddef>

#include "chainqfi/types.hpp"

namespace chainqfi {

/// Trapezoid integral over Q in [q_min, q_max] for every energy row. Window
/// edges falling between grid nodes are linearly interpolated; errors are
/// combined in quadrature with the same weights. Throws WindowOutsideGrid.
EnergyCut integrate_q_window(const SpectrumGrid& grid, double q_min, double q_max);

struct ElasticFit {
  double amplitude = 0.0;  ///< Gaussian peak height
  double constant = 0.0;   ///< flat background
  double fwhm = 0.0;
  std::size_t window_points = 0;      ///< bins with |E| <= 2 FWHM
  std::size_t background_points = 0;  ///< top 10% highest-energy bins
};

struct ElasticSubtraction {
  EnergyCut cut;
  ElasticFit fit;
};

/// Peak-normalised Gaussian at E = 0 with the given FWHM.
double elastic_gaussian(double e, double fwhm);

/// Weighted linear least squares of amplitude * gaussian + constant on the
/// bins |E| <= 2 FWHM plus the top 10% highest-energy bins, then subtracts
/// the model from the whole cut. Throws ElasticWindowMissing when the axis
/// does not span E = 0 or fewer than two bins fall in the window.
ElasticSubtraction subtract_elastic_line(const EnergyCut& cut, double resolution_fwhm);

/// chi'' = (1 - exp(-E / k_B T)) S / calibration, errors scaled alike.
EnergyCut cut_to_chi_imag(const EnergyCut& sqw_cut, double calibration = 1.0);

}  // namespace chainqfi
