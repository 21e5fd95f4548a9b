#include "hcsim/measurement.hpp"

#include "hcsim/util.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace hcsim {

namespace {

constexpr Real kDetectorSplit = 0.0;  // packets sit symmetrically about x = 0

void require_on_lattice(Real t, Real dt, const char* what) {
  if (std::abs(t / dt - Real(std::llround(t / dt))) > 1e-6)
    throw std::invalid_argument(std::string("scenario: ") + what +
                                " must be a whole number of dt steps");
}

int classify(Real z, Real thr) {
  if (z > thr) return 1;
  if (z < -thr) return 2;
  return 0;
}

int expected_branches(const MeasurementScenario& sc) {
  return (sc.c1 != 0.0 ? 1 : 0) + (sc.c2 != 0.0 ? 1 : 0);
}

// Component labels are ordered by x-centroid; branch identity is fixed by
// which side of the detector split the component lives on.
int branch_id_of_component(const BranchDecomposition& dec, int label) {
  return dec.centroids[label - 1](0) < kDetectorSplit ? 1 : 2;
}

int component_for_branch(const BranchDecomposition& dec, int branch_id) {
  for (int label = 1; label <= dec.count(); ++label)
    if (branch_id_of_component(dec, label) == branch_id) return label;
  return 0;
}

}  // namespace

std::string MeasurementScenario::canonical_string() const {
  std::ostringstream os;
  os << std::setprecision(17);
  os << "d=" << dims();
  for (int a = 0; a < dims(); ++a)
    os << ";ax" << a << "=" << extents[a].first << "," << extents[a].second
       << "," << points[a] << "," << params.masses(a);
  os << ";hbar=" << params.hbar << ";alpha=" << params.alpha;
  os << ";c=" << c1 << "," << c2 << ";off=" << packet_offset
     << ";sx=" << packet_sigma << ";sz=" << pointer_sigma;
  os << ";shift=" << pointer_shift << ";w=" << profile_width;
  for (const auto& [a, b] : windows) os << ";win=" << a << "," << b;
  os << ";dt=" << dt << ";sub=" << substeps << ";tf=" << t_final
     << ";ro=" << readout_time << ";frac=" << readout_fraction
     << ";eps=" << eps_branch;
  return os.str();
}

MeasurementScenario default_measurement_scenario(Real alpha) {
  MeasurementScenario sc;
  sc.extents = {{-12.0, 12.0}, {-5.0, 5.0}};
  sc.points = {256, 64};
  sc.params.hbar = 1.0;
  sc.params.masses = Point(2);
  sc.params.masses << 10.0, 25.0;
  sc.params.alpha = alpha;
  sc.windows = {{0.2, 0.6}};
  sc.dt = 1e-3;
  sc.t_final = 1.6;
  sc.readout_time = 0.8;
  sc.post_sample_times = {1.2, 1.6};
  sc.bins = {32, 16};
  return sc;
}

MeasurementScenario default_repeated_scenario(Real alpha) {
  MeasurementScenario sc;
  sc.extents = {{-12.0, 12.0}, {-5.0, 5.0}, {-5.0, 5.0}};
  sc.points = {128, 32, 32};
  sc.params.hbar = 1.0;
  sc.params.masses = Point(3);
  sc.params.masses << 10.0, 25.0, 25.0;
  sc.params.alpha = alpha;
  sc.windows = {{0.2, 0.5}, {0.7, 1.0}};
  sc.dt = 1e-3;
  sc.t_final = 1.2;
  sc.readout_time = 1.2;
  sc.post_sample_times = {};
  sc.bins = {16, 8, 8};
  return sc;
}

WaveField build_initial_state(const MeasurementScenario& sc) {
  const Grid grid = build_grid(sc.extents, sc.points);
  const int d = grid.dims();
  if (d < 2)
    throw std::invalid_argument("scenario: need at least one pointer axis");
  sc.params.validate(d);
  if (sc.c1 == 0.0 && sc.c2 == 0.0)
    throw std::invalid_argument("scenario: both coefficients vanish");

  Point sig(d), zero = Point::Zero(d);
  sig(0) = sc.packet_sigma;
  for (int a = 1; a < d; ++a) sig(a) = sc.pointer_sigma;

  ComplexArray acc = ComplexArray::Zero(grid.size());
  if (sc.c1 != 0.0) {
    Point c = Point::Zero(d);
    c(0) = -sc.packet_offset;
    acc += Complex(sc.c1) * gaussian_packet(grid, c, sig, zero).psi;
  }
  if (sc.c2 != 0.0) {
    Point c = Point::Zero(d);
    c(0) = sc.packet_offset;
    acc += Complex(sc.c2) * gaussian_packet(grid, c, sig, zero).psi;
  }
  WaveField state = normalized(WaveField{grid, acc, 0.0});
  // packet supports must be cleanly disjoint or branch bookkeeping is moot
  branch_decompose(state, sc.support_threshold, expected_branches(sc));
  return state;
}

std::vector<CouplingTerm> build_couplings(const MeasurementScenario& sc) {
  const Grid grid = build_grid(sc.extents, sc.points);
  std::vector<CouplingTerm> out;
  if (sc.windows.size() > std::size_t(grid.dims() - 1))
    throw std::invalid_argument("scenario: more windows than pointer axes");
  for (std::size_t w = 0; w < sc.windows.size(); ++w) {
    const auto [t_on, t_off] = sc.windows[w];
    CouplingTerm c;
    c.profile = detector_profile(grid, kDetectorSplit, sc.profile_width);
    c.pointer_axis = static_cast<int>(w) + 1;
    c.t_on = t_on;
    c.t_off = t_off;
    c.strength = sc.pointer_shift / (t_off - t_on);
    c.profile_width = sc.profile_width;
    c.validate(grid);
    out.push_back(std::move(c));
  }
  return out;
}

MeasurementRecord run_measurement(const MeasurementScenario& sc,
                                  std::size_t n_members, std::uint64_t seed) {
  if (n_members == 0)
    throw std::invalid_argument("measurement: need at least one member");
  require_on_lattice(sc.t_final, sc.dt, "t_final");
  require_on_lattice(sc.readout_time, sc.dt, "readout_time");
  for (const auto& [a, b] : sc.windows) {
    require_on_lattice(a, sc.dt, "window edge");
    require_on_lattice(b, sc.dt, "window edge");
    if (!(a >= 0.0) || !(b <= sc.readout_time))
      throw std::invalid_argument("scenario: windows must close before readout");
  }
  for (Real t : sc.post_sample_times) {
    require_on_lattice(t, sc.dt, "sample time");
    if (t < sc.readout_time - 1e-9 || t > sc.t_final + 1e-9)
      throw std::invalid_argument(
          "scenario: post-measurement samples must lie in [readout, t_final]");
  }
  if (sc.readout_time > sc.t_final)
    throw std::invalid_argument("scenario: readout after t_final");

  const WaveField initial = build_initial_state(sc);
  const Grid& grid = initial.grid;
  const int n_branch = expected_branches(sc);
  const BranchDecomposition dec0 = branch_decompose(initial, sc.eps_branch, n_branch);

  MeasurementRecord rec;
  {
    std::ostringstream id;
    id << std::hex << std::setw(16) << std::setfill('0')
       << fnv1a64(sc.canonical_string());
    rec.scenario_id = id.str();
  }
  rec.alpha = sc.params.alpha;
  rec.n_members = n_members;
  rec.seed = seed;
  rec.readout_threshold = sc.readout_fraction * sc.pointer_shift;
  {
    const int comp1 = component_for_branch(dec0, 1);
    rec.born_weight1 = comp1 > 0 ? dec0.weights[comp1 - 1] : 0.0;
  }

  Ensemble ens = sample_from_density(initial, n_members, seed);
  rec.members.resize(n_members);
  for (std::size_t i = 0; i < n_members; ++i) {
    rec.members[i].id = i;
    rec.members[i].x_initial = ens.members[i].x;
    const int lab = branch_label_at(dec0, grid, ens.members[i].x);
    rec.members[i].initial_support =
        lab > 0 ? branch_id_of_component(dec0, lab) : 0;
  }

  std::vector<Real> times{0.0, sc.readout_time, sc.t_final};
  times.insert(times.end(), sc.post_sample_times.begin(),
               sc.post_sample_times.end());
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end()), times.end());

  CoEvolveOptions opts;
  opts.t_final = sc.t_final;
  opts.dt = sc.dt;
  opts.substeps = sc.substeps;
  opts.sample_times = times;

  const auto on_sample = [&](const WaveField& snap, const Ensemble& e) {
    rec.sample_times.push_back(snap.time);
    rec.snapshots.push_back(snap);
    std::vector<Point> pos;
    pos.reserve(e.size());
    for (const auto& m : e.members) pos.push_back(m.x);
    rec.positions.push_back(std::move(pos));

    if (!rec.separation_ok) {
      for (auto& m : rec.members) m.labels.push_back(0);
      return;
    }
    try {
      const BranchDecomposition dec = branch_decompose(snap, sc.eps_branch, n_branch);
      for (std::size_t i = 0; i < e.size(); ++i) {
        const int lab = branch_label_at(dec, grid, e.members[i].x);
        rec.members[i].labels.push_back(
            lab > 0 ? branch_id_of_component(dec, lab) : 0);
      }
    } catch (const std::runtime_error&) {
      rec.separation_ok = false;
      for (auto& m : rec.members) m.labels.push_back(0);
    }
  };

  evolve_ensemble(initial, ens, free_potential(grid), build_couplings(sc),
                  sc.params, opts, on_sample);

  // locate the readout and final snapshots
  const auto snap_index = [&](Real t) {
    for (std::size_t k = 0; k < rec.sample_times.size(); ++k)
      if (std::abs(rec.sample_times[k] - t) < 0.5 * sc.dt) return k;
    throw std::logic_error("measurement: sample bookkeeping failed");
  };
  const std::size_t at_readout = snap_index(sc.readout_time);
  const std::size_t at_final = rec.sample_times.size() - 1;

  const bool second = sc.windows.size() >= 2 && grid.dims() >= 3;
  std::size_t n1 = 0, n2 = 0, undecided = 0, decided = 0, matched = 0;
  std::size_t both = 0, agree = 0;
  for (std::size_t i = 0; i < n_members; ++i) {
    MemberOutcome& m = rec.members[i];
    m.x_final = rec.positions[at_final][i];
    m.pointer_final = rec.positions[at_final][i](1);
    m.outcome1 = classify(rec.positions[at_readout][i](1), rec.readout_threshold);
    if (second) {
      m.pointer2_final = rec.positions[at_final][i](2);
      m.outcome2 = classify(rec.positions[at_readout][i](2), rec.readout_threshold);
      if (m.outcome1 != 0 && m.outcome2 != 0) {
        ++both;
        if (m.outcome1 == m.outcome2) ++agree;
      }
    }
    if (m.outcome1 == 1) ++n1;
    else if (m.outcome1 == 2) ++n2;
    else ++undecided;
    if (m.outcome1 != 0 && m.initial_support != 0) {
      ++decided;
      if (m.outcome1 == m.initial_support) ++matched;
    }
  }
  rec.freq1 = Real(n1) / Real(n_members);
  rec.freq2 = Real(n2) / Real(n_members);
  rec.undecided_fraction = Real(undecided) / Real(n_members);
  rec.correspondence_rate = decided > 0 ? Real(matched) / Real(decided) : 0.0;
  rec.decided_both = both;
  rec.agreement_rate = both > 0 ? Real(agree) / Real(both) : 0.0;

  if (rec.undecided_fraction > 0.01)
    throw std::runtime_error(
        "measurement: undecided fraction " +
        std::to_string(rec.undecided_fraction) +
        " exceeds 1%; pointer shift too small for its width");
  return rec;
}

MeasurementRecord repeated_measurement(const MeasurementScenario& sc,
                                       std::size_t n_members,
                                       std::uint64_t seed) {
  if (sc.windows.size() != 2 || sc.dims() < 3)
    throw std::invalid_argument(
        "repeated measurement: need two windows and two pointer axes");
  return run_measurement(sc, n_members, seed);
}

CrossingReport crossing_monitor(const MeasurementRecord& rec) {
  CrossingReport rep;
  rep.separation_ok = rec.separation_ok;
  if (!rep.separation_ok) return rep;
  for (const auto& m : rec.members) {
    int prev = 0;
    std::size_t hops = 0;
    for (int lab : m.labels) {
      if (lab == 0) continue;
      if (prev != 0 && lab != prev) ++hops;
      prev = lab;
    }
    rep.transitions += hops;
    if (hops > 0) ++rep.members_crossed;
  }
  rep.fraction = rec.members.empty()
                     ? 0.0
                     : Real(rep.members_crossed) / Real(rec.members.size());
  return rep;
}

SubEnsembleReport subensemble_analysis(const MeasurementRecord& rec,
                                       const MeasurementScenario& sc,
                                       int outcome) {
  if (outcome != 1 && outcome != 2)
    throw std::invalid_argument("sub-ensemble: outcome must be 1 or 2");
  if (!rec.separation_ok)
    throw std::runtime_error("sub-ensemble: branches never separated");

  SubEnsembleReport rep;
  rep.outcome = outcome;

  std::vector<std::size_t> picked;
  for (std::size_t i = 0; i < rec.members.size(); ++i)
    if (rec.members[i].outcome1 == outcome) picked.push_back(i);
  rep.members = picked.size();
  if (picked.empty())
    throw std::runtime_error("sub-ensemble: no members with requested outcome");

  const int n_branch = expected_branches(sc);
  for (std::size_t k = 0; k < rec.sample_times.size(); ++k) {
    if (rec.sample_times[k] < sc.readout_time - 0.5 * sc.dt) continue;
    const WaveField& snap = rec.snapshots[k];
    const BranchDecomposition dec = branch_decompose(snap, sc.eps_branch, n_branch);
    const int comp = component_for_branch(dec, outcome);
    if (comp == 0)
      throw std::runtime_error("sub-ensemble: requested branch carries no weight");
    const WaveField branch = normalized(masked_field(snap, dec, comp));
    rep.margin = 2.0 * (1.0 - dec.weights[comp - 1]);

    Ensemble sub;
    sub.master_seed = rec.seed;
    sub.provenance = "outcome-" + std::to_string(outcome) + " sub-ensemble";
    for (std::size_t i : picked) {
      Configuration cfg;
      cfg.x = rec.positions[k][i];
      sub.members.push_back(cfg);
      sub.seeds.push_back(i);
    }

    rep.times.push_back(rec.sample_times[k]);
    rep.l1_vs_branch.push_back(equivariance_check(sub, branch, sc.bins).l1);
    rep.l1_vs_full.push_back(equivariance_check(sub, snap, sc.bins).l1);
    const SamplingFloor fl = calibrate_sampling_floor(
        branch, picked.size(), sc.bins, 12, rec.seed + 1000003ull * (k + 1));
    rep.floor_mean.push_back(fl.mean);
    rep.floor_sd.push_back(fl.sd);
  }
  if (rep.times.empty())
    throw std::runtime_error("sub-ensemble: no post-readout samples recorded");
  return rep;
}

}  // namespace hcsim
