#include "hcsim/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace hcsim {

namespace {

std::vector<Point> sample_points(const WaveField& field, std::size_t count,
                                 CounterStream& rng, Real min_acceptance) {
  const Grid& g = field.grid;
  const int d = g.dims();
  const RealArray rho = field.psi.abs2();
  const Real peak = rho.maxCoeff();
  if (!(peak > 0)) throw std::invalid_argument("sample: field has no density");

  std::vector<Point> pts;
  pts.reserve(count);
  std::uint64_t proposals = 0;
  Point x(d);
  while (pts.size() < count) {
    for (int a = 0; a < d; ++a)
      x(a) = g.lo(a) + g.length(a) * rng.next_uniform();
    const Real accept = rng.next_uniform();
    ++proposals;
    if (accept * peak < rho(g.nearest_flat(x))) pts.push_back(x);
    if (proposals >= 100000 &&
        Real(pts.size()) < min_acceptance * Real(proposals))
      throw std::runtime_error(
          "sample: acceptance rate collapsed; density too concentrated for "
          "rejection sampling");
  }
  return pts;
}

void check_bins(const Grid& g, const std::vector<Index>& bins) {
  if (static_cast<int>(bins.size()) != g.dims())
    throw std::invalid_argument("equivariance: need one bin count per axis");
  for (int a = 0; a < g.dims(); ++a) {
    if (bins[a] < 1 || g.axis_points(a) % bins[a] != 0)
      throw std::invalid_argument(
          "equivariance: bins must divide the grid on axis " + std::to_string(a));
  }
}

Index bin_of_point(const Grid& g, const std::vector<Index>& bins, const Point& x) {
  const AxisSizes cell = g.nearest_cell(x);
  Index flat = 0;
  for (int a = 0; a < g.dims(); ++a) {
    const Index per_bin = g.axis_points(a) / bins[a];
    flat = flat * bins[a] + cell(a) / per_bin;
  }
  return flat;
}

RealArray reference_bin_weights(const WaveField& field,
                                const std::vector<Index>& bins) {
  const Grid& g = field.grid;
  const int d = g.dims();
  Index n_bins = 1;
  for (Index b : bins) n_bins *= b;
  RealArray w = RealArray::Zero(n_bins);
  const RealArray rho = field.psi.abs2();
  AxisSizes idx = AxisSizes::Zero(d);
  for (Index f = 0; f < g.size(); ++f) {
    Index flat = 0;
    for (int a = 0; a < d; ++a)
      flat = flat * bins[a] + idx(a) / (g.axis_points(a) / bins[a]);
    w(flat) += rho(f);
    for (int a = d - 1; a >= 0; --a) {
      if (++idx(a) < g.axis_points(a)) break;
      idx(a) = 0;
    }
  }
  w /= w.sum();
  return w;
}

Real l1_against_reference(const std::vector<Point>& pts, const WaveField& field,
                          const std::vector<Index>& bins, const RealArray& ref) {
  const Grid& g = field.grid;
  RealArray counts = RealArray::Zero(ref.size());
  for (const Point& p : pts) counts(bin_of_point(g, bins, p)) += 1.0;
  counts /= Real(pts.size());
  return (counts - ref).abs().sum();
}

}  // namespace

Ensemble sample_from_density(const WaveField& field, std::size_t count,
                             std::uint64_t seed, Real min_acceptance) {
  if (count == 0) throw std::invalid_argument("sample: count must be positive");
  CounterStream rng(seed, StreamPurpose::kSampling, 0);
  const std::vector<Point> pts = sample_points(field, count, rng, min_acceptance);

  Ensemble ens;
  ens.master_seed = seed;
  ens.provenance = "sampled from |psi|^2 at t = " + std::to_string(field.time);
  ens.members.reserve(count);
  ens.seeds.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    Configuration cfg;
    cfg.x = pts[i];
    ens.members.push_back(cfg);
    ens.seeds.push_back(i);
  }
  return ens;
}

EquivarianceReport equivariance_check(const Ensemble& ens, const WaveField& field,
                                      const std::vector<Index>& bins) {
  if (ens.members.empty())
    throw std::invalid_argument("equivariance: empty ensemble");
  check_bins(field.grid, bins);

  EquivarianceReport rep;
  rep.time = field.time;
  rep.member_count = ens.size();
  rep.bins = bins;

  const RealArray ref = reference_bin_weights(field, bins);
  std::vector<Point> pts;
  pts.reserve(ens.size());
  for (const auto& m : ens.members) pts.push_back(m.x);
  rep.l1 = l1_against_reference(pts, field, bins, ref);
  for (int a = 0; a < field.grid.dims(); ++a)
    rep.ks.push_back(ks_statistic_axis(ens, field, a));
  return rep;
}

SamplingFloor calibrate_sampling_floor(const WaveField& field, std::size_t count,
                                       const std::vector<Index>& bins,
                                       int trials, std::uint64_t seed) {
  if (trials < 2) throw std::invalid_argument("floor: need at least two trials");
  check_bins(field.grid, bins);
  const RealArray ref = reference_bin_weights(field, bins);

  std::vector<Real> l1s;
  l1s.reserve(trials);
  for (int t = 0; t < trials; ++t) {
    CounterStream rng(seed, StreamPurpose::kCalibration, std::uint64_t(t));
    const auto pts = sample_points(field, count, rng, 1e-4);
    l1s.push_back(l1_against_reference(pts, field, bins, ref));
  }
  SamplingFloor fl;
  fl.mean = std::accumulate(l1s.begin(), l1s.end(), 0.0) / Real(trials);
  Real var = 0.0;
  for (Real v : l1s) var += (v - fl.mean) * (v - fl.mean);
  fl.sd = std::sqrt(var / Real(trials - 1));
  return fl;
}

Real ks_statistic_axis(const Ensemble& ens, const WaveField& field, int axis) {
  const Grid& g = field.grid;
  const Index n = g.axis_points(axis);
  const Real dx = g.dx(axis);
  const Real lo_edge = g.lo(axis) - 0.5 * dx;  // cells centered on samples

  // marginal cell masses along the axis
  RealArray mass = RealArray::Zero(n);
  const RealArray rho = field.psi.abs2();
  AxisSizes idx = AxisSizes::Zero(g.dims());
  for (Index f = 0; f < g.size(); ++f) {
    mass(idx(axis)) += rho(f);
    for (int a = g.dims() - 1; a >= 0; --a) {
      if (++idx(a) < g.axis_points(a)) break;
      idx(a) = 0;
    }
  }
  mass /= mass.sum();

  RealArray cum = RealArray::Zero(n + 1);
  for (Index i = 0; i < n; ++i) cum(i + 1) = cum(i) + mass(i);

  // reference CDF at a coordinate, linear within a cell
  const auto cdf = [&](Real x) {
    Real u = x;
    const Real L = g.length(axis);
    if (u >= lo_edge + L) u -= L;  // seam cell belongs to the front
    const Real s = (u - lo_edge) / dx;
    const Index cell = std::clamp<Index>(static_cast<Index>(std::floor(s)), 0, n - 1);
    const Real frac = std::clamp<Real>(s - Real(cell), 0.0, 1.0);
    return cum(cell) + frac * mass(cell);
  };

  std::vector<Real> xs;
  xs.reserve(ens.size());
  for (const auto& m : ens.members) xs.push_back(m.x(axis));
  std::sort(xs.begin(), xs.end());

  const Real n_inv = 1.0 / Real(xs.size());
  Real d_max = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const Real f = cdf(xs[i]);
    d_max = std::max(d_max, std::max(Real(i + 1) * n_inv - f, f - Real(i) * n_inv));
  }
  return d_max;
}

ContinuityResidual continuity_residual(const WaveField& before,
                                       const WaveField& middle,
                                       const WaveField& after,
                                       const PhysicalParams& params,
                                       Real eps_node) {
  const Grid& g = middle.grid;
  params.validate(g.dims());
  if (!before.grid.same_layout(g) || !after.grid.same_layout(g))
    throw std::invalid_argument("continuity: snapshot grids differ");
  const Real h1 = middle.time - before.time;
  const Real h2 = after.time - middle.time;
  if (!(h1 > 0) || std::abs(h1 - h2) > 1e-9 * std::max(h1, h2))
    throw std::invalid_argument("continuity: snapshots must be equally spaced in time");

  const RealArray drho_dt =
      (after.psi.abs2() - before.psi.abs2()) / (2.0 * h1);

  // current at the middle snapshot, drift form, zero on the nodal set
  const DriftField df = make_drift_field(middle);
  const Real threshold = eps_node * df.peak_density;
  const int d = g.dims();
  SpectralTransform transform(g);
  RealArray div_j = RealArray::Zero(g.size());
  ComplexArray j_axis(g.size());
  for (int a = 0; a < d; ++a) {
    for (Index f = 0; f < g.size(); ++f) {
      const Complex psi = middle.psi(f);
      const Real rho = std::norm(psi);
      if (!(rho >= threshold) || rho == 0.0) {
        j_axis(f) = 0.0;
        continue;
      }
      const Complex w = df.grad[a](f) / psi;
      const Real scale = params.hbar / params.masses(a);
      const Real b = scale * (params.alpha * w.real() + w.imag());
      const Real grad_rho = 2.0 * (std::conj(psi) * df.grad[a](f)).real();
      j_axis(f) = b * rho -
          0.5 * params.alpha * params.hbar * grad_rho / params.masses(a);
    }
    const ComplexArray dj = transform.gradient(j_axis, a);
    div_j += dj.real();
  }

  ContinuityResidual res;
  Real sq = 0.0;
  for (Index f = 0; f < g.size(); ++f) {
    const Real r = drho_dt(f) + div_j(f);
    res.max_abs = std::max(res.max_abs, std::abs(r));
    sq += r * r;
  }
  res.l2 = std::sqrt(sq * g.cell_volume());
  return res;
}

WaveField evolve_ensemble(const WaveField& field, Ensemble& ens,
                          const Potential& potential,
                          const std::vector<CouplingTerm>& couplings,
                          const PhysicalParams& params,
                          const CoEvolveOptions& opts,
                          const SampleObserver& on_sample) {
  const Grid& g = field.grid;
  params.validate(g.dims());
  if (!(opts.dt > 0)) throw std::invalid_argument("co-evolve: dt must be positive");
  if (opts.substeps < 1)
    throw std::invalid_argument("co-evolve: substeps must be >= 1");
  const Real span = opts.t_final - field.time;
  if (!(span > 0))
    throw std::invalid_argument("co-evolve: t_final must exceed field time");
  const auto n_steps = static_cast<Index>(std::llround(span / opts.dt));
  if (n_steps < 1 ||
      std::abs(Real(n_steps) * opts.dt - span) > 1e-9 * std::max(1.0, span))
    throw std::invalid_argument("co-evolve: span must be an integral number of steps");
  if (ens.seeds.size() != ens.members.size())
    throw std::invalid_argument("co-evolve: member/seed pairing broken");

  std::vector<Index> sample_steps;
  for (Real t : opts.sample_times) {
    if (t < field.time - 1e-9 || t > opts.t_final + 1e-9)
      throw std::invalid_argument("co-evolve: sample time outside run interval");
    sample_steps.push_back(std::clamp<Index>(
        static_cast<Index>(std::llround((t - field.time) / opts.dt)), 0, n_steps));
  }
  std::sort(sample_steps.begin(), sample_steps.end());
  sample_steps.erase(std::unique(sample_steps.begin(), sample_steps.end()),
                     sample_steps.end());

  std::vector<NormalStream> streams;
  streams.reserve(ens.size());
  for (std::size_t i = 0; i < ens.size(); ++i)
    streams.emplace_back(ens.master_seed, StreamPurpose::kTrajectory, ens.seeds[i]);

  const auto emit = [&](const WaveField& snap) {
    const Real ratio = boundary_density_ratio(snap);
    if (ratio >= opts.boundary_tol)
      throw std::runtime_error(
          "co-evolve: boundary density " + std::to_string(ratio) +
          " at t = " + std::to_string(snap.time) + " exceeds tolerance");
    if (on_sample) on_sample(snap, ens);
  };

  SplitOperatorPropagator prop(g, potential, couplings, params, opts.dt);
  SpectralTransform transform(g);
  WaveField state = field;
  DriftField df_curr = make_drift_field(state, transform);

  std::size_t cursor = 0;
  if (cursor < sample_steps.size() && sample_steps[cursor] == 0) {
    emit(state);
    ++cursor;
  }
  const Real dt_sub = opts.dt / Real(opts.substeps);
  for (Index s = 1; s <= n_steps; ++s) {
    WaveField next = prop.step(state);
    DriftField df_next = make_drift_field(next, transform);
    for (std::size_t i = 0; i < ens.size(); ++i) {
      Configuration& cfg = ens.members[i];
      for (int sub = 0; sub < opts.substeps; ++sub) {
        const Real blend = (Real(sub) + 0.5) / Real(opts.substeps);
        guidance_update(cfg, df_curr, df_next, blend, params, dt_sub,
                        streams[i], couplings, opts.eps_node);
      }
    }
    state = std::move(next);
    df_curr = std::move(df_next);
    if (cursor < sample_steps.size() && sample_steps[cursor] == s) {
      emit(state);
      ++cursor;
    }
  }
  return state;
}

}  // namespace hcsim
