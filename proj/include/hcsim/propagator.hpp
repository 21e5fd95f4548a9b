#pragma once

#include "hcsim/potential.hpp"
#include "hcsim/spectral.hpp"
#include "hcsim/wavefield.hpp"

#include <optional>
#include <vector>

namespace hcsim {

/// Second-order split-operator stepper.  Each step applies
///   exp(-i V dt/2)  [position space]
///   exp(-i (K_ptr + C) dt/2)  [pointer axes in momentum space]
///   exp(-i K_rest dt)  [remaining axes in momentum space]
///   exp(-i (K_ptr + C) dt/2)
///   exp(-i V dt/2)
/// where C collects the active measurement couplings g f(x) p_z, diagonal in
/// the mixed x-position / z-momentum basis.  With no active coupling the
/// pointer group is empty and the step is the plain Strang split.  Every
/// factor is a pure phase, so the step is unitary to rounding.
///
/// dt may be negative (used by reversal checks); magnitude must be nonzero.
class SplitOperatorPropagator {
 public:
  SplitOperatorPropagator(const Grid& grid, const Potential& potential,
                          std::vector<CouplingTerm> couplings,
                          const PhysicalParams& params, Real dt);

  WaveField step(const WaveField& field);

  Real dt() const { return dt_; }
  const Grid& grid() const { return grid_; }

 private:
  void rebuild_mixed_tables(const std::vector<Real>& gains);

  Grid grid_;
  PhysicalParams params_;
  std::vector<CouplingTerm> couplings_;
  Real dt_;

  SpectralTransform transform_;
  ComplexArray half_v_phase_;
  ComplexArray kinetic_full_phase_;

  // mixed-path caches, rebuilt when the active gain signature changes
  std::vector<Real> cached_gains_;
  std::vector<int> active_axes_;
  ComplexArray mixed_phase_;
  ComplexArray rest_kinetic_phase_;
};

/// One step with a throwaway propagator (test convenience).
WaveField step(const WaveField& field, const Potential& potential,
               const PhysicalParams& params, Real dt);
WaveField step(const WaveField& field, const Potential& potential,
               const CouplingTerm& coupling, const PhysicalParams& params,
               Real dt);

/// Repeated stepping from field.time to t_final.  Snapshot times are snapped
/// to the step lattice; with none requested only the final state is returned.
/// The span must be an integral number of steps.
std::vector<WaveField> evolve(const WaveField& field, const Potential& potential,
                              const std::vector<CouplingTerm>& couplings,
                              const PhysicalParams& params, Real t_final, Real dt,
                              const std::vector<Real>& sample_times = {});

/// <psi|H|psi> for H = sum_a p_a^2/(2 m_a) + V, via one spectral transform.
Real energy_expectation(const WaveField& field, const Potential& potential,
                        const PhysicalParams& params);

}  // namespace hcsim
