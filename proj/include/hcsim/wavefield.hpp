#pragma once

#include "hcsim/grid.hpp"
#include "hcsim/params.hpp"

namespace hcsim {

/// Complex field sampled on a grid at one instant.  Treated as an immutable
/// snapshot: operations take it by const reference and return new values.
struct WaveField {
  Grid grid;
  ComplexArray psi;
  Real time = 0.0;
};

struct DensityField {
  Grid grid;
  RealArray rho;
  Real time = 0.0;
};

/// Log-modulus / phase split psi = exp(R + iS) with a validity mask.  S comes
/// from atan2 and is only defined modulo 2*pi; mask is false where the
/// density falls under eps_node relative to its maximum.
struct PolarFields {
  RealArray R;
  RealArray S;
  BoolArray mask;
  Real threshold = 0.0;  // absolute density cutoff that produced the mask
};

/// L2 norm with the cell-volume measure.
Real l2_norm(const WaveField& field);

WaveField normalized(const WaveField& field);

/// a*f + b*g on a shared grid; times must agree.
WaveField superpose(const Complex& a, const WaveField& f,
                    const Complex& b, const WaveField& g);

DensityField density_of(const WaveField& field);

Real max_density(const WaveField& field);

/// Largest density on the periodic seam faces (index 0 along any axis),
/// relative to the global maximum.  Scenario states must keep this tiny.
Real boundary_density_ratio(const WaveField& field);

PolarFields polar_decompose(const WaveField& field, Real eps_node = 1e-12);

/// Normalized Gaussian packet exp(-(x-c)^2/(4 sigma^2) + i k.x) per axis.
/// Rejects centers outside the grid and packets whose boundary tail exceeds
/// tail_tol relative to the peak density.
WaveField gaussian_packet(const Grid& grid, const Point& center,
                          const Point& sigma, const Point& wavevector,
                          Real time = 0.0, Real tail_tol = 1e-8);

/// Superposition of a few randomly placed Gaussian packets with random
/// wavevectors and complex coefficients.  Deterministic in seed; handy as a
/// generic smooth test field.
WaveField random_smooth_field(const Grid& grid, std::uint64_t seed,
                              int n_packets = 4);

}  // namespace hcsim
