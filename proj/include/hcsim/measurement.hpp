#pragma once

#include "hcsim/branch.hpp"
#include "hcsim/ensemble.hpp"

#include <string>
#include <utility>
#include <vector>

namespace hcsim {

/// Two-packet pointer measurement.  Axis 0 carries the measured system: a
/// superposition c1 psi1 + c2 psi2 of packets parked at -packet_offset and
/// +packet_offset.  Each window couples g f(x) p_z to the next pointer axis
/// (window 0 to axis 1, window 1 to axis 2), displacing that pointer by
/// +-pointer_shift according to which detector region holds the packet.
/// Outcomes are read from pointer coordinates against +-readout_fraction *
/// pointer_shift, with the band in between left undecided.
struct MeasurementScenario {
  std::vector<std::pair<Real, Real>> extents;
  std::vector<Index> points;
  PhysicalParams params;

  Real c1 = 0.6;
  Real c2 = 0.8;
  Real packet_offset = 4.5;
  Real packet_sigma = 0.6;
  Real pointer_sigma = 0.4;

  Real pointer_shift = 2.0;
  Real profile_width = 1.0;
  std::vector<std::pair<Real, Real>> windows;

  Real dt = 1e-3;
  int substeps = 1;
  Real t_final = 1.6;
  Real readout_time = 0.8;
  std::vector<Real> post_sample_times;
  Real readout_fraction = 0.5;
  Real eps_branch = 1e-8;
  Real support_threshold = 1e-10;  // initial packet disjointness check
  std::vector<Index> bins;

  int dims() const { return static_cast<int>(extents.size()); }
  std::string canonical_string() const;
};

MeasurementScenario default_measurement_scenario(Real alpha);
MeasurementScenario default_repeated_scenario(Real alpha);

/// (c1 psi1 + c2 psi2) x pointer packets, normalized; throws if the packet
/// supports are not disjoint at the scenario's support threshold.
WaveField build_initial_state(const MeasurementScenario& sc);
std::vector<CouplingTerm> build_couplings(const MeasurementScenario& sc);

struct MemberOutcome {
  std::uint64_t id = 0;
  Point x_initial;
  Point x_final;
  Real pointer_final = 0.0;
  Real pointer2_final = 0.0;  // zero when there is no second pointer
  int outcome1 = 0;           // 1, 2, or 0 = undecided
  int outcome2 = 0;
  int initial_support = 0;    // component label at t = 0
  std::vector<int> labels;    // branch label at each sample time
};

struct MeasurementRecord {
  std::string scenario_id;
  Real alpha = 0.0;
  std::size_t n_members = 0;
  std::uint64_t seed = 0;
  Real readout_threshold = 0.0;
  std::vector<Real> sample_times;
  std::vector<MemberOutcome> members;

  Real born_weight1 = 0.0;  // grid quadrature, initial state
  Real freq1 = 0.0, freq2 = 0.0, undecided_fraction = 0.0;
  Real correspondence_rate = 0.0;
  Real agreement_rate = 0.0;  // repeated readings, both decided
  std::size_t decided_both = 0;
  bool separation_ok = true;

  std::vector<WaveField> snapshots;
  std::vector<std::vector<Point>> positions;  // [sample][member]
};

/// Full pipeline: build state, sample members, co-evolve with the coupling
/// schedule, label branches at every sample time, classify outcomes at the
/// readout snapshot.
MeasurementRecord run_measurement(const MeasurementScenario& sc,
                                  std::size_t n_members, std::uint64_t seed);

/// Same engine with two coupling windows and a second pointer readout.
MeasurementRecord repeated_measurement(const MeasurementScenario& sc,
                                       std::size_t n_members, std::uint64_t seed);

struct CrossingReport {
  bool separation_ok = true;
  std::size_t members_crossed = 0;
  std::size_t transitions = 0;
  Real fraction = 0.0;
};

/// Counts decided-label changes along each member's timeline.  Undecided
/// stretches are skipped; a failed separation yields a failure report with no
/// counts.
CrossingReport crossing_monitor(const MeasurementRecord& rec);

struct SubEnsembleReport {
  int outcome = 1;
  std::size_t members = 0;
  Real margin = 0.0;  // expected L1 gap against the full density, 2|c_other|^2
  std::vector<Real> times;
  std::vector<Real> l1_vs_branch;
  std::vector<Real> l1_vs_full;
  std::vector<Real> floor_mean;
  std::vector<Real> floor_sd;
};

/// Equivariance of the outcome-conditioned sub-ensemble against the matching
/// normalized branch density and against the full density, at every sample
/// time from the readout onward.
SubEnsembleReport subensemble_analysis(const MeasurementRecord& rec,
                                       const MeasurementScenario& sc,
                                       int outcome = 1);

}  // namespace hcsim
