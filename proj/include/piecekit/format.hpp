#pragma once

#include <complex>
#include <string>

namespace piecekit {

/// Shortest decimal text that parses back to the same double; integral
/// values keep a trailing ".0".
std::string format_real(double x);

/// "re,im" with both parts in shortest round-trip form.
std::string format_complex(std::complex<double> z);

}  // namespace piecekit
