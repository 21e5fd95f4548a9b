#pragma once

#include "hcsim/drift.hpp"
#include "hcsim/potential.hpp"
#include "hcsim/rng.hpp"

#include <cstdint>
#include <vector>

namespace hcsim {

/// One guided configuration with its diagnostics.
struct Configuration {
  Point x;
  bool alive = true;               // diagnostic exclusion only, never set by dynamics
  int branch = 0;                  // last branch label, 0 = undecided
  std::uint32_t regularized_hits = 0;
  std::uint32_t wrap_events = 0;
};

/// Euler-Maruyama update over [t, t + dt]:
///   x' = x + b(x, t_eval) dt + sqrt(alpha) xi,   xi_a ~ N(0, (hbar/m_a) dt)
/// The drift is read from the two bracketing snapshots blended at fraction
/// time_blend (0 = earlier, 1 = later; 0.5 is the midpoint rule).  At
/// alpha = 0 the stream is not touched, so trajectories are seed independent.
void guidance_update(Configuration& cfg, const DriftField& before,
                     const DriftField& after, Real time_blend,
                     const PhysicalParams& params, Real dt, NormalStream& rng,
                     Real eps_node = 1e-12);

/// Same update under measurement couplings.  A term g f(x) p_z in the
/// Hamiltonian carries a convective piece of the probability current,
/// j_z += g f(x) rho, independent of the phase of psi; the matching drift
/// contribution b_z += g f(x) is what drags the pointer coordinate along
/// with its branch.  g is evaluated at the blended time.
void guidance_update(Configuration& cfg, const DriftField& before,
                     const DriftField& after, Real time_blend,
                     const PhysicalParams& params, Real dt, NormalStream& rng,
                     const std::vector<CouplingTerm>& couplings,
                     Real eps_node = 1e-12);

/// Midpoint-blend convenience wrapper (time_blend = 0.5).
void guidance_step(Configuration& cfg, const DriftField& before,
                   const DriftField& after, const PhysicalParams& params,
                   Real dt, NormalStream& rng, Real eps_node = 1e-12);

/// Parameters of a freely spreading 1D Gaussian packet.
struct FreePacketSpec {
  Real sigma0 = 1.0;
  Real wavevector = 0.0;
  Real center = 0.0;
  Real hbar = 1.0;
  Real mass = 1.0;

  Real width_at(Real t) const;
  Real centroid_at(Real t) const;
};

/// Closed-form deterministic (alpha = 0) trajectory for the free Gaussian:
/// displacement from the centroid scales with the packet width,
///   x(t) = centroid(t) + (x0 - center) * sigma(t)/sigma0.
Real bohm_trajectory_oracle(const FreePacketSpec& spec, Real x0, Real t);

}  // namespace hcsim
