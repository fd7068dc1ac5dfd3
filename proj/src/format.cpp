#include "piecekit/format.hpp"

#include <array>
#include <charconv>
#include <cmath>

namespace piecekit {

std::string format_real(double x) {
  if (std::isnan(x)) return "NaN";
  if (std::isinf(x)) return x > 0 ? "Inf" : "-Inf";
  std::array<char, 64> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  std::string s(buf.data(), end);
  if (s.find_first_of(".e") == std::string::npos) s += ".0";
  return s;
}

std::string format_complex(std::complex<double> z) {
  return format_real(z.real()) + "," + format_real(z.imag());
}

}  // namespace piecekit
