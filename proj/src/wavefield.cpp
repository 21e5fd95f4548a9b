#include "hcsim/wavefield.hpp"

#include "hcsim/rng.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <string>

namespace hcsim {

Real l2_norm(const WaveField& field) {
  return std::sqrt(field.psi.abs2().sum() * field.grid.cell_volume());
}

WaveField normalized(const WaveField& field) {
  const Real n = l2_norm(field);
  if (!(n > 0.0)) throw std::invalid_argument("normalize: field has zero norm");
  return {field.grid, field.psi / n, field.time};
}

WaveField superpose(const Complex& a, const WaveField& f,
                    const Complex& b, const WaveField& g) {
  if (!f.grid.same_layout(g.grid))
    throw std::invalid_argument("superpose: grids differ");
  if (f.time != g.time)
    throw std::invalid_argument("superpose: snapshot times differ");
  return {f.grid, a * f.psi + b * g.psi, f.time};
}

DensityField density_of(const WaveField& field) {
  return {field.grid, field.psi.abs2(), field.time};
}

Real max_density(const WaveField& field) { return field.psi.abs2().maxCoeff(); }

Real boundary_density_ratio(const WaveField& field) {
  const Grid& g = field.grid;
  const Real peak = max_density(field);
  if (!(peak > 0.0)) return 0.0;
  Real worst = 0.0;
  // Periodic seam: lo and hi meet between index n-1 and index 0, so both
  // adjacent planes are monitored.
  for (int a = 0; a < g.dims(); ++a) {
    Index inner = 1;
    for (int b = a + 1; b < g.dims(); ++b) inner *= g.axis_points(b);
    Index outer = 1;
    for (int b = 0; b < a; ++b) outer *= g.axis_points(b);
    const Index n = g.axis_points(a);
    for (Index o = 0; o < outer; ++o)
      for (Index i = 0; i < inner; ++i) {
        const Index base = o * n * inner + i;
        worst = std::max(worst, std::norm(field.psi(base)));
        worst = std::max(worst, std::norm(field.psi(base + (n - 1) * inner)));
      }
  }
  return worst / peak;
}

PolarFields polar_decompose(const WaveField& field, Real eps_node) {
  const Index total = field.grid.size();
  PolarFields out;
  out.R.resize(total);
  out.S.resize(total);
  out.mask.resize(total);
  out.threshold = eps_node * max_density(field);
  for (Index i = 0; i < total; ++i) {
    const Complex v = field.psi(i);
    const Real rho = std::norm(v);
    const bool ok = rho >= out.threshold && rho > 0.0;
    out.mask(i) = ok;
    out.R(i) = ok ? 0.5 * std::log(rho) : 0.0;
    out.S(i) = ok ? std::atan2(v.imag(), v.real()) : 0.0;
  }
  return out;
}

WaveField gaussian_packet(const Grid& grid, const Point& center,
                          const Point& sigma, const Point& wavevector,
                          Real time, Real tail_tol) {
  const int d = grid.dims();
  if (center.size() != d || sigma.size() != d || wavevector.size() != d)
    throw std::invalid_argument("gaussian_packet: parameter dimension mismatch");
  for (int a = 0; a < d; ++a) {
    if (!(sigma(a) > 0))
      throw std::invalid_argument("gaussian_packet: sigma must be positive");
    if (!(center(a) >= grid.lo(a) && center(a) < grid.hi(a)))
      throw std::invalid_argument("gaussian_packet: center outside grid on axis " +
                                  std::to_string(a));
  }

  WaveField field{grid, ComplexArray(grid.size()), time};
  AxisSizes idx = AxisSizes::Zero(d);
  for (Index f = 0; f < grid.size(); ++f) {
    Real expo = 0.0, phase = 0.0;
    for (int a = 0; a < d; ++a) {
      const Real dxa = grid.coord(a, idx(a)) - center(a);
      expo -= dxa * dxa / (4.0 * sigma(a) * sigma(a));
      phase += wavevector(a) * grid.coord(a, idx(a));
    }
    field.psi(f) = std::exp(Complex(expo, phase));
    for (int a = d - 1; a >= 0; --a) {
      if (++idx(a) < grid.axis_points(a)) break;
      idx(a) = 0;
    }
  }
  field = normalized(field);

  const Real tail = boundary_density_ratio(field);
  if (tail >= tail_tol) {
    char msg[128];
    std::snprintf(msg, sizeof msg,
                  "gaussian_packet: boundary tail %.3g exceeds tolerance %.3g; "
                  "widen the box or shrink sigma",
                  tail, tail_tol);
    throw std::invalid_argument(msg);
  }
  return field;
}

WaveField random_smooth_field(const Grid& grid, std::uint64_t seed, int n_packets) {
  const int d = grid.dims();
  CounterStream rng(seed, StreamPurpose::kScratch, 0);
  ComplexArray acc = ComplexArray::Zero(grid.size());
  for (int p = 0; p < n_packets; ++p) {
    Point c(d), s(d), k(d);
    for (int a = 0; a < d; ++a) {
      const Real L = grid.length(a);
      // keep packets well inside the box so seam tails stay negligible
      c(a) = grid.lo(a) + L * (0.3 + 0.4 * rng.next_uniform());
      s(a) = L * (0.03 + 0.04 * rng.next_uniform());
      k(a) = (rng.next_uniform() - 0.5) * 4.0 * kPi / L * 4.0;
    }
    const Complex coeff = std::polar(0.3 + rng.next_uniform(),
                                     2.0 * kPi * rng.next_uniform());
    // constituents may brush the seam; the sum is periodic and smooth anyway
    acc += coeff * gaussian_packet(grid, c, s, k, 0.0, 1e-3).psi;
  }
  return normalized(WaveField{grid, acc, 0.0});
}

}  // namespace hcsim
