#pragma once

#include "hcsim/types.hpp"

#include <utility>
#include <vector>

namespace hcsim {

/// Uniform rectangular grid with periodic topology.  Axis a samples
/// x = lo(a) + i*dx(a) for i in [0, n(a)); the point at hi(a) is identified
/// with the one at lo(a).  Storage order of flattened fields is row-major
/// (last axis fastest).
class Grid {
 public:
  Grid() = default;

  int dims() const { return static_cast<int>(n_.size()); }
  Index axis_points(int axis) const { return n_(axis); }
  const AxisSizes& points() const { return n_; }
  Real lo(int axis) const { return lo_(axis); }
  Real hi(int axis) const { return hi_(axis); }
  Real dx(int axis) const { return dx_(axis); }
  Real length(int axis) const { return hi_(axis) - lo_(axis); }
  Index size() const { return total_; }
  Real cell_volume() const { return cell_volume_; }

  Real coord(int axis, Index i) const { return lo_(axis) + dx_(axis) * Real(i); }

  /// Coordinates of every sample along one axis.
  RealArray axis_coords(int axis) const;

  /// Angular wavenumber of spectral mode j along an axis (FFT ordering,
  /// negative branch for j >= n/2).
  Real wavenumber(int axis, Index j) const;

  /// Wavenumber used for first derivatives: the Nyquist mode is zeroed so
  /// gradients of real fields stay real.
  Real gradient_wavenumber(int axis, Index j) const;

  Index flat_index(const AxisSizes& multi) const;
  AxisSizes unravel(Index flat) const;
  Point point_at(Index flat) const;

  /// Nearest sample (periodic rounding) for an arbitrary position.
  AxisSizes nearest_cell(const Point& x) const;
  Index nearest_flat(const Point& x) const;

  bool contains(const Point& x) const;

  /// Maps x into [lo, hi) per axis.  Returns the wrapped point and whether
  /// any axis actually wrapped.
  std::pair<Point, bool> wrap(const Point& x) const;

  bool same_layout(const Grid& other) const;

 private:
  friend Grid build_grid(const std::vector<std::pair<Real, Real>>&,
                         const std::vector<Index>&, Index);

  AxisSizes n_;
  Point lo_, hi_, dx_;
  Index total_ = 0;
  Real cell_volume_ = 0;
};

/// Validates extents/point counts and assembles a Grid.  Point counts must be
/// powers of two >= 8; the total may not exceed max_points.
Grid build_grid(const std::vector<std::pair<Real, Real>>& extents,
                const std::vector<Index>& points,
                Index max_points = Index(1) << 22);

}  // namespace hcsim
