#pragma once

#include <complex>

namespace piecekit {

/// Principal branch of the dilogarithm Li2(w) = -int_0^w ln(1 - t)/t dt,
/// cut along [1, inf).
std::complex<double> dilog(std::complex<double> w);

}  // namespace piecekit
