#include "hcsim/grid.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace hcsim {

namespace {

bool is_pow2(Index n) { return n > 0 && (n & (n - 1)) == 0; }

}  // namespace

RealArray Grid::axis_coords(int axis) const {
  RealArray xs(n_(axis));
  for (Index i = 0; i < n_(axis); ++i) xs(i) = coord(axis, i);
  return xs;
}

Real Grid::wavenumber(int axis, Index j) const {
  const Index n = n_(axis);
  const Index m = (j < n / 2) ? j : j - n;
  return 2.0 * kPi * Real(m) / length(axis);
}

Real Grid::gradient_wavenumber(int axis, Index j) const {
  if (j == n_(axis) / 2) return 0.0;
  return wavenumber(axis, j);
}

Index Grid::flat_index(const AxisSizes& multi) const {
  Index flat = 0;
  for (int a = 0; a < dims(); ++a) flat = flat * n_(a) + multi(a);
  return flat;
}

AxisSizes Grid::unravel(Index flat) const {
  AxisSizes multi(dims());
  for (int a = dims() - 1; a >= 0; --a) {
    multi(a) = flat % n_(a);
    flat /= n_(a);
  }
  return multi;
}

Point Grid::point_at(Index flat) const {
  const AxisSizes multi = unravel(flat);
  Point x(dims());
  for (int a = 0; a < dims(); ++a) x(a) = coord(a, multi(a));
  return x;
}

AxisSizes Grid::nearest_cell(const Point& x) const {
  AxisSizes multi(dims());
  for (int a = 0; a < dims(); ++a) {
    const Index n = n_(a);
    Index i = static_cast<Index>(std::llround((x(a) - lo_(a)) / dx_(a)));
    i %= n;
    if (i < 0) i += n;
    multi(a) = i;
  }
  return multi;
}

Index Grid::nearest_flat(const Point& x) const { return flat_index(nearest_cell(x)); }

bool Grid::contains(const Point& x) const {
  if (x.size() != dims()) return false;
  for (int a = 0; a < dims(); ++a) {
    if (!(x(a) >= lo_(a) && x(a) < hi_(a))) return false;
  }
  return true;
}

std::pair<Point, bool> Grid::wrap(const Point& x) const {
  Point y = x;
  bool wrapped = false;
  for (int a = 0; a < dims(); ++a) {
    const Real L = length(a);
    Real u = x(a) - lo_(a);
    if (u < 0.0 || u >= L) {
      u -= L * std::floor(u / L);
      if (u >= L) u -= L;  // guard against rounding at the seam
      y(a) = lo_(a) + u;
      wrapped = true;
    }
  }
  return {y, wrapped};
}

bool Grid::same_layout(const Grid& other) const {
  if (dims() != other.dims()) return false;
  for (int a = 0; a < dims(); ++a) {
    if (n_(a) != other.n_(a) || lo_(a) != other.lo_(a) || hi_(a) != other.hi_(a))
      return false;
  }
  return true;
}

Grid build_grid(const std::vector<std::pair<Real, Real>>& extents,
                const std::vector<Index>& points, Index max_points) {
  if (extents.empty() || extents.size() > 3)
    throw std::invalid_argument("grid: dimension must be 1, 2 or 3");
  if (points.size() != extents.size())
    throw std::invalid_argument("grid: extents/points size mismatch");

  Grid g;
  const int d = static_cast<int>(extents.size());
  g.n_.resize(d);
  g.lo_.resize(d);
  g.hi_.resize(d);
  g.dx_.resize(d);
  g.total_ = 1;
  g.cell_volume_ = 1.0;
  for (int a = 0; a < d; ++a) {
    const auto [lo, hi] = extents[a];
    if (!(hi > lo))
      throw std::invalid_argument("grid: axis " + std::to_string(a) +
                                  " needs hi > lo");
    if (!is_pow2(points[a]) || points[a] < 8)
      throw std::invalid_argument("grid: axis " + std::to_string(a) +
                                  " point count must be a power of two >= 8");
    g.n_(a) = points[a];
    g.lo_(a) = lo;
    g.hi_(a) = hi;
    g.dx_(a) = (hi - lo) / Real(points[a]);
    g.total_ *= points[a];
    g.cell_volume_ *= g.dx_(a);
  }
  if (g.total_ > max_points)
    throw std::invalid_argument("grid: total points " + std::to_string(g.total_) +
                                " exceed cap " + std::to_string(max_points));
  return g;
}

}  // namespace hcsim
