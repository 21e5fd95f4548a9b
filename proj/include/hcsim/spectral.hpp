#pragma once

#include "hcsim/grid.hpp"

#include <unsupported/Eigen/FFT>

#include <array>
#include <vector>

namespace hcsim {

/// Multidimensional FFT built from 1D complex transforms along each axis.
/// forward applies the unscaled DFT; inverse applies the 1/N-scaled inverse,
/// so inverse(forward(f)) == f up to rounding.  One instance caches plans and
/// line buffers for a fixed grid; not safe for concurrent use.
class SpectralTransform {
 public:
  explicit SpectralTransform(const Grid& grid);

  const Grid& grid() const { return grid_; }

  void forward(ComplexArray& data) { transform_all(data, true); }
  void inverse(ComplexArray& data) { transform_all(data, false); }

  void forward_axis(ComplexArray& data, int axis) { transform_axis(data, axis, true); }
  void inverse_axis(ComplexArray& data, int axis) { transform_axis(data, axis, false); }

  /// Spectral partial derivative along one axis (Nyquist mode dropped).
  ComplexArray gradient(const ComplexArray& data, int axis);

 private:
  void transform_all(ComplexArray& data, bool fwd);
  void transform_axis(ComplexArray& data, int axis, bool fwd);

  Grid grid_;
  Eigen::FFT<Real> fft_;
  std::vector<Complex> line_in_, line_out_;
};

}  // namespace hcsim
