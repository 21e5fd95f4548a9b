#pragma once

#include "hcsim/guidance.hpp"
#include "hcsim/propagator.hpp"

#include <functional>
#include <string>
#include <vector>

namespace hcsim {

/// A set of guided configurations sharing one field.  seeds[i] is the random
/// stream id member i draws from; the pairing survives reordering, so
/// evolution is equivariant under member permutations.
struct Ensemble {
  std::vector<Configuration> members;
  std::vector<std::uint64_t> seeds;
  std::uint64_t master_seed = 0;
  std::string provenance;

  std::size_t size() const { return members.size(); }
};

/// Draws `count` members from |psi|^2 by rejection against the piecewise
/// constant cell density (cells centered on grid points).  Throws if the
/// acceptance rate collapses below min_acceptance after a warmup.
Ensemble sample_from_density(const WaveField& field, std::size_t count,
                             std::uint64_t seed, Real min_acceptance = 1e-4);

/// Histogram comparison between an ensemble and |psi|^2.  Bins are uniform
/// per axis and must divide the grid; the reference weights come from grid
/// quadrature of the density, never from sampling.
struct EquivarianceReport {
  Real time = 0.0;
  Real alpha = 0.0;
  std::size_t member_count = 0;
  std::vector<Index> bins;
  Real l1 = 0.0;
  std::vector<Real> ks;  // per axis
  Real floor_mean = 0.0; // filled when calibrated
  Real floor_sd = 0.0;
};

EquivarianceReport equivariance_check(const Ensemble& ens, const WaveField& field,
                                      const std::vector<Index>& bins);

/// Expected L1 discrepancy of an honest N-sample draw from this exact
/// density, estimated by resampling `trials` fresh sets.
struct SamplingFloor {
  Real mean = 0.0;
  Real sd = 0.0;
};
SamplingFloor calibrate_sampling_floor(const WaveField& field, std::size_t count,
                                       const std::vector<Index>& bins,
                                       int trials, std::uint64_t seed);

/// Empirical distribution function distance along one axis against the exact
/// marginal CDF (grid quadrature, piecewise linear across cells).
Real ks_statistic_axis(const Ensemble& ens, const WaveField& field, int axis);

/// Discrete continuity residual d(rho)/dt + div j over three equally spaced
/// snapshots: centered time difference against the spectral divergence of the
/// drift-form current at the middle snapshot.  Points under the node
/// threshold contribute zero current.
struct ContinuityResidual {
  Real max_abs = 0.0;
  Real l2 = 0.0;
};
ContinuityResidual continuity_residual(const WaveField& before,
                                       const WaveField& middle,
                                       const WaveField& after,
                                       const PhysicalParams& params,
                                       Real eps_node = 1e-12);

/// Lockstep evolution of field and ensemble.  The field advances by dt per
/// step; each member then takes `substeps` guidance updates against the two
/// bracketing snapshots with midpoint time blending.  on_sample fires at
/// every requested sample time (snapped to the step lattice) and observes
/// both the field and the ensemble.  Boundary density is monitored at sample
/// times; a violation aborts the run.
struct CoEvolveOptions {
  Real t_final = 0.0;
  Real dt = 1e-3;
  int substeps = 1;
  std::vector<Real> sample_times;
  Real eps_node = 1e-12;
  Real boundary_tol = 1e-8;
};

using SampleObserver = std::function<void(const WaveField&, const Ensemble&)>;

WaveField evolve_ensemble(const WaveField& field, Ensemble& ens,
                          const Potential& potential,
                          const std::vector<CouplingTerm>& couplings,
                          const PhysicalParams& params,
                          const CoEvolveOptions& opts,
                          const SampleObserver& on_sample = {});

}  // namespace hcsim
