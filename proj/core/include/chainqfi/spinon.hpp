#pragma once

#include <functional>
#include <span>
#include <vector>

#include "chainqfi/types.hpp"

namespace chainqfi {

struct SpinonBounds {
  double lower = 0.0;  ///< (pi J / 2) |sin(q c)|, meV
  double upper = 0.0;  ///< pi J |sin(q c / 2)|, meV
};

/// Two-spinon continuum edges at chain momentum q (1/Angstrom) for exchange
/// j_mev (meV) and lattice constant c (Angstrom).
SpinonBounds two_spinon_bounds(double q_1d, double j_mev, double c);

struct ContinuumBounds {
  std::vector<double> q_axis;
  std::vector<double> lower;
  std::vector<double> upper;
};

ContinuumBounds continuum_bounds(std::span<const double> q_axis, double j_mev, double c);

/// Single-crystal-like 1D spectrum from a powder average, d(Q S_pwd)/dQ per
/// energy row. Second-order central differences inside, second-order
/// one-sided at the edges (valid on non-uniform axes). Errors are
/// propagated through the stencil in quadrature. Throws GridTooCoarse (< 3
/// Q points).
SpectrumGrid powder_to_1d(const SpectrumGrid& powder);

using ChainSpectrumFn = std::function<double(double q, double e)>;

/// Powder average of a chain spectrum even in q:
/// S_pwd(Q, E) = (1/Q) int_0^Q S_1D(q, E) dq, by adaptive quadrature
/// accumulated cell by cell along the Q axis (Q >= 0 required). Errors are
/// zero.
SpectrumGrid forward_powder_average(const ChainSpectrumFn& s_1d, std::vector<double> q_axis,
                                    std::vector<double> e_axis, double temperature,
                                    double rel_tol = 1e-12);

}  // namespace chainqfi
