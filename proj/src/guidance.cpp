#include "hcsim/guidance.hpp"

#include <cmath>
#include <stdexcept>

namespace hcsim {

void guidance_update(Configuration& cfg, const DriftField& before,
                     const DriftField& after, Real time_blend,
                     const PhysicalParams& params, Real dt, NormalStream& rng,
                     Real eps_node) {
  static const std::vector<CouplingTerm> kNoCouplings;
  guidance_update(cfg, before, after, time_blend, params, dt, rng,
                  kNoCouplings, eps_node);
}

void guidance_update(Configuration& cfg, const DriftField& before,
                     const DriftField& after, Real time_blend,
                     const PhysicalParams& params, Real dt, NormalStream& rng,
                     const std::vector<CouplingTerm>& couplings, Real eps_node) {
  const Grid& g = before.field.grid;
  if (!g.same_layout(after.field.grid))
    throw std::invalid_argument("guidance: snapshot grids differ");
  if (!(dt > 0)) throw std::invalid_argument("guidance: dt must be positive");
  if (!(time_blend >= 0.0 && time_blend <= 1.0))
    throw std::invalid_argument("guidance: time blend outside [0, 1]");
  const int d = g.dims();

  // Blend psi and grad psi between the snapshots (both linear in psi), then
  // form the drift from the blended values.
  const FieldValues v0 = interpolate(before, cfg.x);
  const FieldValues v1 = interpolate(after, cfg.x);
  FieldValues v;
  const Real w1 = time_blend, w0 = 1.0 - time_blend;
  v.psi = w0 * v0.psi + w1 * v1.psi;
  for (int a = 0; a < d; ++a) v.grad[a] = w0 * v0.grad[a] + w1 * v1.grad[a];
  const Real peak = w0 * before.peak_density + w1 * after.peak_density;

  const DriftSample s = drift_from_values(v, params, eps_node * peak);
  if (s.regularized) ++cfg.regularized_hits;

  // Convective drift of the interaction: well defined even on the nodal set,
  // so it applies whether or not the field drift was regularized.
  Point b = s.b;
  const Real t_eval =
      before.field.time + time_blend * (after.field.time - before.field.time);
  for (const auto& c : couplings) {
    const Real gain = c.g_at(t_eval);
    if (gain != 0.0) b(c.pointer_axis) += gain * c.profile_at(g, cfg.x(0));
  }

  Point x = cfg.x + b * dt;
  if (params.alpha > 0.0) {
    const Real root_alpha = std::sqrt(params.alpha);
    for (int a = 0; a < d; ++a) {
      const Real step_sd = std::sqrt(params.hbar * dt / params.masses(a));
      x(a) += root_alpha * step_sd * rng.next();
    }
  }

  auto [wrapped, did_wrap] = g.wrap(x);
  if (did_wrap) ++cfg.wrap_events;
  cfg.x = wrapped;
}

void guidance_step(Configuration& cfg, const DriftField& before,
                   const DriftField& after, const PhysicalParams& params,
                   Real dt, NormalStream& rng, Real eps_node) {
  guidance_update(cfg, before, after, 0.5, params, dt, rng, eps_node);
}

Real FreePacketSpec::width_at(Real t) const {
  const Real spread = hbar * t / (2.0 * mass * sigma0 * sigma0);
  return sigma0 * std::sqrt(1.0 + spread * spread);
}

Real FreePacketSpec::centroid_at(Real t) const {
  return center + hbar * wavevector * t / mass;
}

Real bohm_trajectory_oracle(const FreePacketSpec& spec, Real x0, Real t) {
  if (!(spec.sigma0 > 0) || !(spec.mass > 0) || !(spec.hbar > 0))
    throw std::invalid_argument("trajectory oracle: invalid packet parameters");
  return spec.centroid_at(t) + (x0 - spec.center) * spec.width_at(t) / spec.sigma0;
}

}  // namespace hcsim
