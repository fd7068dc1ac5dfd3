#pragma once

namespace piecekit::demos {

/// Complete elliptic integral of the first kind K(m), parameter convention
/// K(m) = int_0^{pi/2} (1 - m sin^2 t)^(-1/2) dt, via the arithmetic-geometric mean.
double elliptic_k(double m);

/// Density of states of the nearest-neighbour square lattice,
/// eps(k) = 2 (cos kx + cos ky); normalized to one, support [-4, 4].
/// Below |E| = 1e-4 the leading logarithmic expansion replaces K.
double square_lattice_dos(double energy);

/// Amplitude of the logarithmic van Hove singularity of square_lattice_dos at E = 0.
double square_lattice_log_amplitude();

}  // namespace piecekit::demos
