#pragma once

#include "hcsim/wavefield.hpp"

#include <optional>
#include <vector>

namespace hcsim {

/// Support decomposition of a field into connected components above a
/// relative density threshold.  Labels are 1-based per component, ordered by
/// increasing centroid along axis 0; label 0 marks sub-threshold points.
struct BranchDecomposition {
  IntArray labels;                    // per grid point
  std::vector<Real> weights;          // integral of rho over each component
  std::vector<Point> centroids;       // density-weighted, per component
  Real unassigned_mass = 0.0;         // density below threshold
  Real overlap = 0.0;                 // integral of min over component pairs;
                                      // nonzero only if masks ever intersect
  int count() const { return static_cast<int>(weights.size()); }
};

/// Face-adjacent flood fill over super-threshold points (periodic topology).
/// If expected_components is given, a mismatch throws.
BranchDecomposition branch_decompose(const WaveField& field,
                                     Real eps_branch = 1e-8,
                                     std::optional<int> expected_components = {});

/// The field restricted to one component (zero elsewhere), not renormalized.
WaveField masked_field(const WaveField& field, const BranchDecomposition& dec,
                       int label);

/// Component label at a configuration point (nearest cell), 0 if
/// sub-threshold.
int branch_label_at(const BranchDecomposition& dec, const Grid& grid,
                    const Point& x);

}  // namespace hcsim
