#include "hcsim/spectral.hpp"

#include <stdexcept>

namespace hcsim {

SpectralTransform::SpectralTransform(const Grid& grid) : grid_(grid) {
  Index nmax = 0;
  for (int a = 0; a < grid_.dims(); ++a) nmax = std::max(nmax, grid_.axis_points(a));
  line_in_.resize(nmax);
  line_out_.resize(nmax);
}

void SpectralTransform::transform_all(ComplexArray& data, bool fwd) {
  for (int a = 0; a < grid_.dims(); ++a) transform_axis(data, a, fwd);
}

void SpectralTransform::transform_axis(ComplexArray& data, int axis, bool fwd) {
  if (data.size() != grid_.size())
    throw std::invalid_argument("spectral: data size does not match grid");
  const int d = grid_.dims();
  const Index n = grid_.axis_points(axis);

  // Row-major layout: stride of `axis` is the product of the sizes behind it.
  Index inner = 1;
  for (int a = axis + 1; a < d; ++a) inner *= grid_.axis_points(a);
  Index outer = 1;
  for (int a = 0; a < axis; ++a) outer *= grid_.axis_points(a);

  Complex* base = data.data();
  for (Index o = 0; o < outer; ++o) {
    for (Index i = 0; i < inner; ++i) {
      Complex* line = base + o * n * inner + i;
      for (Index j = 0; j < n; ++j) line_in_[j] = line[j * inner];
      if (fwd)
        fft_.fwd(line_out_.data(), line_in_.data(), n);
      else
        fft_.inv(line_out_.data(), line_in_.data(), n);
      for (Index j = 0; j < n; ++j) line[j * inner] = line_out_[j];
    }
  }
}

ComplexArray SpectralTransform::gradient(const ComplexArray& data, int axis) {
  ComplexArray hat = data;
  forward(hat);

  const int d = grid_.dims();
  const Index total = grid_.size();
  // Walk the flat index with per-axis counters to pick up k along `axis`.
  AxisSizes idx = AxisSizes::Zero(d);
  for (Index f = 0; f < total; ++f) {
    const Real k = grid_.gradient_wavenumber(axis, idx(axis));
    hat(f) *= Complex(0.0, k);
    for (int a = d - 1; a >= 0; --a) {
      if (++idx(a) < grid_.axis_points(a)) break;
      idx(a) = 0;
    }
  }
  inverse(hat);
  return hat;
}

}  // namespace hcsim
