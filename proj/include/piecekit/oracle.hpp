#pragma once

// Quadrature reference values for whole piecewise functions. Slow; meant for
// cross-checking the closed-form transforms.

#include <complex>

#include "piecekit/core.hpp"
#include "piecekit/quadrature.hpp"

namespace piecekit {

/// int x^n f(x) dx, piece by piece, with sqrt substitution at excluded or anchored endpoints.
QuadResult<double> quad_moment(const PiecewiseFunction& f, int n, double rtol = 1e-12);

/// int f(x)/(z - x) dx for Im z != 0.
QuadResult<std::complex<double>> quad_hilbert(const PiecewiseFunction& f, std::complex<double> z,
                                             double rtol = 1e-12);

}  // namespace piecekit
