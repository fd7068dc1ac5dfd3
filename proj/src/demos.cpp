#include "piecekit/demos.hpp"

#include <cmath>
#include <numbers>

namespace piecekit::demos {

double elliptic_k(double m) {
  double a = 1.0;
  double g = std::sqrt(1.0 - m);
  for (int i = 0; i < 64 && std::fabs(a - g) > 1e-16 * a; ++i) {
    const double an = 0.5 * (a + g);
    g = std::sqrt(a * g);
    a = an;
  }
  return std::numbers::pi / (2.0 * a);
}

double square_lattice_dos(double energy) {
  constexpr double norm = 2.0 * std::numbers::pi * std::numbers::pi;
  const double e = std::fabs(energy);
  if (e < 1e-4) return std::log(16.0 / e) / norm;
  if (e > 4) return 0.0;
  const double r = energy / 4.0;
  return elliptic_k(1.0 - r * r) / norm;
}

double square_lattice_log_amplitude() { return -1.0 / (2.0 * std::numbers::pi * std::numbers::pi); }

}  // namespace piecekit::demos
