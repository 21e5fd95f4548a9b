#pragma once

#include "hcsim/grid.hpp"
#include "hcsim/params.hpp"

#include <string>
#include <vector>

namespace hcsim {

/// Real scalar potential sampled on the grid.
struct Potential {
  Grid grid;
  RealArray v;
  std::string label;
};

Potential free_potential(const Grid& grid);

/// 0.5 * sum_a m_a omega_a^2 (x_a - c_a)^2.
Potential harmonic_potential(const Grid& grid, const PhysicalParams& params,
                             const Point& omega, const Point& center);

/// Measurement interaction g(t) f(x) p_z: the profile f lives on the measured
/// coordinate (axis 0), the momentum factor on a pointer axis.  g is constant
/// inside [t_on, t_off) and zero outside.  With f = +1 over one detector
/// region and -1 over the other, the pointer coordinate is displaced by
/// +-g*(t_off - t_on) depending on which region carries the system packet.
struct CouplingTerm {
  RealArray profile;      // f sampled along axis 0
  int pointer_axis = 1;
  Real strength = 0.0;    // g inside the window
  Real t_on = 0.0;
  Real t_off = 0.0;
  Real profile_width = 1.0;

  Real g_at(Real t) const {
    return (t >= t_on && t < t_off) ? strength : 0.0;
  }

  /// Profile linearly interpolated at position x along axis 0 (periodic).
  Real profile_at(const Grid& grid, Real x) const;

  void validate(const Grid& grid) const;
};

/// Smooth monotone profile tanh((split - x)/width): +1 well below the split
/// (detector 1), -1 well above it (detector 2).
RealArray detector_profile(const Grid& grid, Real split, Real width);

}  // namespace hcsim
