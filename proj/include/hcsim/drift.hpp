#pragma once

#include "hcsim/spectral.hpp"
#include "hcsim/wavefield.hpp"

#include <array>

namespace hcsim {

/// Forward drift b, backward drift b*, probability current j at one
/// configuration point.  On the nodal set (density below eps_node relative to
/// the field maximum) all three are taken to vanish and `regularized` is set.
struct DriftSample {
  Point b;
  Point b_star;
  Point j;
  bool regularized = false;
};

/// Snapshot plus the spectral gradient fields and cached peak density needed
/// to evaluate drifts anywhere by multilinear interpolation.
struct DriftField {
  WaveField field;
  std::array<ComplexArray, 3> grad;
  Real peak_density = 0.0;
};

DriftField make_drift_field(const WaveField& field, SpectralTransform& transform);
DriftField make_drift_field(const WaveField& field);

/// psi and grad psi interpolated at x (periodic multilinear).
struct FieldValues {
  Complex psi;
  std::array<Complex, 3> grad;
};
FieldValues interpolate(const DriftField& df, const Point& x);

/// Drift family evaluated from local field values:
///   b   = (hbar/m) (alpha Re w + Im w),   w = grad(psi)/psi
///   b*  = b - alpha hbar (grad rho / rho) / m
///   j   = (b + b*)/2 * rho
DriftSample drift_from_values(const FieldValues& v, const PhysicalParams& params,
                              Real node_threshold);

DriftSample drift_at(const DriftField& df, const Point& x,
                     const PhysicalParams& params, Real eps_node = 1e-12);
DriftSample drift_at(const WaveField& field, const Point& x,
                     const PhysicalParams& params, Real eps_node = 1e-12);

/// Residual between two routes to the probability current evaluated on every
/// unmasked grid point: once as b rho - (alpha hbar / 2m) grad rho and once
/// as (hbar/m) Im(conj(psi) grad psi).  Algebraically identical, so the
/// reported gap measures rounding only.
struct CurrentResidual {
  Real max_abs = 0.0;
  Real l2 = 0.0;
  Index points = 0;
};
CurrentResidual current_consistency(const WaveField& field,
                                    const PhysicalParams& params,
                                    Real eps_node = 1e-12);

}  // namespace hcsim
