#include "hcsim/drift.hpp"

#include <cmath>
#include <stdexcept>

namespace hcsim {

DriftField make_drift_field(const WaveField& field, SpectralTransform& transform) {
  if (!transform.grid().same_layout(field.grid))
    throw std::invalid_argument("drift field: transform grid mismatch");
  DriftField df;
  df.field = field;
  for (int a = 0; a < field.grid.dims(); ++a)
    df.grad[a] = transform.gradient(field.psi, a);
  df.peak_density = max_density(field);
  return df;
}

DriftField make_drift_field(const WaveField& field) {
  SpectralTransform transform(field.grid);
  return make_drift_field(field, transform);
}

FieldValues interpolate(const DriftField& df, const Point& x) {
  const Grid& g = df.field.grid;
  const int d = g.dims();
  if (x.size() != d)
    throw std::invalid_argument("interpolate: point dimension mismatch");

  Index base[3];
  Real frac[3];
  for (int a = 0; a < d; ++a) {
    const Real u = (x(a) - g.lo(a)) / g.dx(a);
    Real fl = std::floor(u);
    Index i = static_cast<Index>(fl);
    const Index n = g.axis_points(a);
    i %= n;
    if (i < 0) i += n;
    base[a] = i;
    frac[a] = u - fl;
  }

  FieldValues out{Complex(0, 0), {Complex(0, 0), Complex(0, 0), Complex(0, 0)}};
  const int corners = 1 << d;
  for (int c = 0; c < corners; ++c) {
    Real w = 1.0;
    AxisSizes multi(d);
    for (int a = 0; a < d; ++a) {
      const bool upper = (c >> a) & 1;
      const Index n = g.axis_points(a);
      multi(a) = upper ? (base[a] + 1 == n ? 0 : base[a] + 1) : base[a];
      w *= upper ? frac[a] : 1.0 - frac[a];
    }
    if (w == 0.0) continue;
    const Index flat = g.flat_index(multi);
    out.psi += w * df.field.psi(flat);
    for (int a = 0; a < d; ++a) out.grad[a] += w * df.grad[a](flat);
  }
  return out;
}

DriftSample drift_from_values(const FieldValues& v, const PhysicalParams& params,
                              Real node_threshold) {
  const int d = static_cast<int>(params.masses.size());
  DriftSample s;
  s.b = Point::Zero(d);
  s.b_star = Point::Zero(d);
  s.j = Point::Zero(d);

  const Real rho = std::norm(v.psi);
  if (!(rho >= node_threshold) || rho == 0.0) {
    s.regularized = true;
    return s;
  }
  for (int a = 0; a < d; ++a) {
    const Complex w = v.grad[a] / v.psi;
    const Real scale = params.hbar / params.masses(a);
    s.b(a) = scale * (params.alpha * w.real() + w.imag());
    s.b_star(a) = scale * (w.imag() - params.alpha * w.real());
    s.j(a) = scale * w.imag() * rho;
  }
  return s;
}

DriftSample drift_at(const DriftField& df, const Point& x,
                     const PhysicalParams& params, Real eps_node) {
  params.validate(df.field.grid.dims());
  return drift_from_values(interpolate(df, x), params,
                           eps_node * df.peak_density);
}

DriftSample drift_at(const WaveField& field, const Point& x,
                     const PhysicalParams& params, Real eps_node) {
  return drift_at(make_drift_field(field), x, params, eps_node);
}

CurrentResidual current_consistency(const WaveField& field,
                                    const PhysicalParams& params,
                                    Real eps_node) {
  params.validate(field.grid.dims());
  const DriftField df = make_drift_field(field);
  const Real threshold = eps_node * df.peak_density;
  const int d = field.grid.dims();

  CurrentResidual res;
  Real sq_sum = 0.0;
  for (Index f = 0; f < field.grid.size(); ++f) {
    const Complex psi = field.psi(f);
    const Real rho = std::norm(psi);
    if (!(rho >= threshold) || rho == 0.0) continue;
    ++res.points;
    for (int a = 0; a < d; ++a) {
      const Complex grad = df.grad[a](f);
      const Complex w = grad / psi;
      const Real scale = params.hbar / params.masses(a);
      const Real b = scale * (params.alpha * w.real() + w.imag());
      const Real grad_rho = 2.0 * (std::conj(psi) * grad).real();
      const Real j_drift = b * rho -
          0.5 * params.alpha * params.hbar * grad_rho / params.masses(a);
      const Real j_current = scale * (std::conj(psi) * grad).imag();
      const Real gap = std::abs(j_drift - j_current);
      res.max_abs = std::max(res.max_abs, gap);
      sq_sum += gap * gap;
    }
  }
  res.l2 = res.points > 0 ? std::sqrt(sq_sum / Real(res.points)) : 0.0;
  return res;
}

}  // namespace hcsim
