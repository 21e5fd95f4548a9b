#include "hcsim/potential.hpp"

#include <cmath>
#include <stdexcept>

namespace hcsim {

Potential free_potential(const Grid& grid) {
  return {grid, RealArray::Zero(grid.size()), "free"};
}

Potential harmonic_potential(const Grid& grid, const PhysicalParams& params,
                             const Point& omega, const Point& center) {
  const int d = grid.dims();
  if (omega.size() != d || center.size() != d)
    throw std::invalid_argument("harmonic_potential: parameter dimension mismatch");
  RealArray v(grid.size());
  AxisSizes idx = AxisSizes::Zero(d);
  for (Index f = 0; f < grid.size(); ++f) {
    Real acc = 0.0;
    for (int a = 0; a < d; ++a) {
      const Real dxa = grid.coord(a, idx(a)) - center(a);
      acc += 0.5 * params.masses(a) * omega(a) * omega(a) * dxa * dxa;
    }
    v(f) = acc;
    for (int a = d - 1; a >= 0; --a) {
      if (++idx(a) < grid.axis_points(a)) break;
      idx(a) = 0;
    }
  }
  return {grid, v, "harmonic"};
}

Real CouplingTerm::profile_at(const Grid& grid, Real x) const {
  const Index n = grid.axis_points(0);
  const Real u = (x - grid.lo(0)) / grid.dx(0);
  const Real base = std::floor(u);
  const Real frac = u - base;
  Index i0 = static_cast<Index>(base) % n;
  if (i0 < 0) i0 += n;
  const Index i1 = (i0 + 1) % n;
  return profile(i0) * (1.0 - frac) + profile(i1) * frac;
}

void CouplingTerm::validate(const Grid& grid) const {
  if (pointer_axis < 1 || pointer_axis >= grid.dims())
    throw std::invalid_argument("coupling: pointer axis must be a non-measured axis");
  if (profile.size() != grid.axis_points(0))
    throw std::invalid_argument("coupling: profile must be sampled along axis 0");
  if (!(t_off > t_on))
    throw std::invalid_argument("coupling: window must have t_off > t_on");
  if (!(strength >= 0))
    throw std::invalid_argument("coupling: strength must be >= 0");
  if (!(profile_width > 0))
    throw std::invalid_argument("coupling: profile width must be positive");
  Real prev = profile(0);
  for (Index i = 0; i < profile.size(); ++i) {
    if (std::abs(profile(i)) > 1.0 + 1e-12)
      throw std::invalid_argument("coupling: profile must stay within [-1, 1]");
    if (profile(i) > prev + 1e-12)
      throw std::invalid_argument("coupling: profile must be monotone");
    prev = profile(i);
  }
}

RealArray detector_profile(const Grid& grid, Real split, Real width) {
  if (!(width > 0)) throw std::invalid_argument("detector_profile: width must be positive");
  const Index n = grid.axis_points(0);
  RealArray f(n);
  for (Index i = 0; i < n; ++i)
    f(i) = std::tanh((split - grid.coord(0, i)) / width);
  return f;
}

}  // namespace hcsim
