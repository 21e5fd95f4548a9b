#include "hcsim/branch.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace hcsim {

BranchDecomposition branch_decompose(const WaveField& field, Real eps_branch,
                                     std::optional<int> expected_components) {
  const Grid& g = field.grid;
  const int d = g.dims();
  const Index total = g.size();
  const RealArray rho = field.psi.abs2();
  const Real threshold = eps_branch * rho.maxCoeff();

  BranchDecomposition dec;
  dec.labels = IntArray::Zero(total);

  // flood fill with an explicit stack; neighbors wrap periodically
  std::vector<Index> stack;
  int next_label = 0;
  for (Index seed = 0; seed < total; ++seed) {
    if (rho(seed) < threshold || dec.labels(seed) != 0) continue;
    ++next_label;
    dec.labels(seed) = next_label;
    stack.push_back(seed);
    while (!stack.empty()) {
      const Index cur = stack.back();
      stack.pop_back();
      const AxisSizes multi = g.unravel(cur);
      for (int a = 0; a < d; ++a) {
        for (int dir = -1; dir <= 1; dir += 2) {
          AxisSizes nb = multi;
          nb(a) += dir;
          if (nb(a) < 0) nb(a) += g.axis_points(a);
          if (nb(a) >= g.axis_points(a)) nb(a) -= g.axis_points(a);
          const Index flat = g.flat_index(nb);
          if (rho(flat) >= threshold && dec.labels(flat) == 0) {
            dec.labels(flat) = next_label;
            stack.push_back(flat);
          }
        }
      }
    }
  }

  // order components by centroid along axis 0
  const Real dv = g.cell_volume();
  std::vector<Real> weights(next_label, 0.0);
  std::vector<Point> centroids(next_label, Point::Zero(d));
  for (Index f = 0; f < total; ++f) {
    const int lab = dec.labels(f);
    if (lab == 0) {
      dec.unassigned_mass += rho(f) * dv;
      continue;
    }
    weights[lab - 1] += rho(f) * dv;
    centroids[lab - 1] += rho(f) * dv * g.point_at(f);
  }
  for (int c = 0; c < next_label; ++c)
    if (weights[c] > 0) centroids[c] /= weights[c];

  std::vector<int> order(next_label);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int i, int j) {
    return centroids[i](0) < centroids[j](0);
  });
  std::vector<int> relabel(next_label);
  for (int rank = 0; rank < next_label; ++rank) relabel[order[rank]] = rank + 1;
  for (Index f = 0; f < total; ++f)
    if (dec.labels(f) != 0) dec.labels(f) = relabel[dec.labels(f) - 1];
  dec.weights.resize(next_label);
  dec.centroids.resize(next_label);
  for (int c = 0; c < next_label; ++c) {
    dec.weights[relabel[c] - 1] = weights[c];
    dec.centroids[relabel[c] - 1] = centroids[c];
  }

  // components are disjoint by construction, so this stays zero unless the
  // labeling itself is broken; kept as a cheap invariant to report
  dec.overlap = 0.0;

  if (expected_components && dec.count() != *expected_components)
    throw std::runtime_error("branch: found " + std::to_string(dec.count()) +
                             " components, expected " +
                             std::to_string(*expected_components));
  return dec;
}

WaveField masked_field(const WaveField& field, const BranchDecomposition& dec,
                       int label) {
  if (label < 1 || label > dec.count())
    throw std::invalid_argument("branch: label out of range");
  WaveField out{field.grid, ComplexArray::Zero(field.grid.size()), field.time};
  for (Index f = 0; f < field.grid.size(); ++f)
    if (dec.labels(f) == label) out.psi(f) = field.psi(f);
  return out;
}

int branch_label_at(const BranchDecomposition& dec, const Grid& grid,
                    const Point& x) {
  return dec.labels(grid.nearest_flat(x));
}

}  // namespace hcsim
