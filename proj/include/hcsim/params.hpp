#pragma once

#include "hcsim/types.hpp"

#include <stdexcept>

namespace hcsim {

/// Physical constants of a scenario.  alpha selects the member of the
/// guidance family: 0 gives deterministic (Bohm-type) trajectories, 1 the
/// stochastic-mechanics diffusion, other non-negative values interpolate or
/// extrapolate.  The dynamics treat alpha generically; no value is special.
struct PhysicalParams {
  Real hbar = 1.0;
  Point masses;  // one entry per axis
  Real alpha = 0.0;

  /// Diffusion coefficient per axis, alpha * hbar / m.  Derived on demand so
  /// it can never go stale; per-axis alpha would slot in here if ever needed.
  Real nu(int axis) const { return alpha * hbar / masses(axis); }

  void validate(int dims) const {
    if (!(hbar > 0)) throw std::invalid_argument("params: hbar must be positive");
    if (masses.size() != dims)
      throw std::invalid_argument("params: need one mass per axis");
    for (Index a = 0; a < masses.size(); ++a)
      if (!(masses(a) > 0))
        throw std::invalid_argument("params: masses must be positive");
    if (!(alpha >= 0)) throw std::invalid_argument("params: alpha must be >= 0");
  }
};

inline PhysicalParams unit_params(int dims, Real alpha = 0.0) {
  PhysicalParams p;
  p.masses = Point::Ones(dims);
  p.alpha = alpha;
  return p;
}

}  // namespace hcsim
