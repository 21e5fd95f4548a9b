#include "hcsim/propagator.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace hcsim {

namespace {

// exp(-i theta) for a full-volume phase angle accumulated per axis
ComplexArray phase_from_angle(const RealArray& theta) {
  ComplexArray out(theta.size());
  for (Index i = 0; i < theta.size(); ++i)
    out(i) = std::polar(1.0, -theta(i));
  return out;
}

}  // namespace

SplitOperatorPropagator::SplitOperatorPropagator(const Grid& grid,
                                                 const Potential& potential,
                                                 std::vector<CouplingTerm> couplings,
                                                 const PhysicalParams& params,
                                                 Real dt)
    : grid_(grid),
      params_(params),
      couplings_(std::move(couplings)),
      dt_(dt),
      transform_(grid) {
  params_.validate(grid_.dims());
  if (!(dt_ != 0.0) || !std::isfinite(dt_))
    throw std::invalid_argument("propagator: dt must be nonzero and finite");
  if (!potential.grid.same_layout(grid_))
    throw std::invalid_argument("propagator: potential grid mismatch");
  for (const auto& c : couplings_) c.validate(grid_);

  half_v_phase_ = phase_from_angle(RealArray(potential.v * (0.5 * dt_ / params_.hbar)));

  const int d = grid_.dims();
  RealArray theta = RealArray::Zero(grid_.size());
  AxisSizes idx = AxisSizes::Zero(d);
  for (Index f = 0; f < grid_.size(); ++f) {
    Real acc = 0.0;
    for (int a = 0; a < d; ++a) {
      const Real k = grid_.wavenumber(a, idx(a));
      acc += params_.hbar * k * k / (2.0 * params_.masses(a));
    }
    theta(f) = acc * dt_;
    for (int a = d - 1; a >= 0; --a) {
      if (++idx(a) < grid_.axis_points(a)) break;
      idx(a) = 0;
    }
  }
  kinetic_full_phase_ = phase_from_angle(theta);
  cached_gains_.assign(couplings_.size(), 0.0);
}

void SplitOperatorPropagator::rebuild_mixed_tables(const std::vector<Real>& gains) {
  cached_gains_ = gains;
  active_axes_.clear();
  for (std::size_t c = 0; c < couplings_.size(); ++c)
    if (gains[c] != 0.0) active_axes_.push_back(couplings_[c].pointer_axis);
  std::sort(active_axes_.begin(), active_axes_.end());
  active_axes_.erase(std::unique(active_axes_.begin(), active_axes_.end()),
                     active_axes_.end());
  if (active_axes_.empty()) return;

  const int d = grid_.dims();
  const auto is_active = [&](int a) {
    return std::find(active_axes_.begin(), active_axes_.end(), a) !=
           active_axes_.end();
  };

  RealArray theta_mixed = RealArray::Zero(grid_.size());
  RealArray theta_rest = RealArray::Zero(grid_.size());
  AxisSizes idx = AxisSizes::Zero(d);
  for (Index f = 0; f < grid_.size(); ++f) {
    Real mixed = 0.0, rest = 0.0;
    for (int a = 0; a < d; ++a) {
      const Real k = grid_.wavenumber(a, idx(a));
      const Real kin = params_.hbar * k * k / (2.0 * params_.masses(a));
      if (is_active(a))
        mixed += kin;
      else
        rest += kin;
    }
    for (std::size_t c = 0; c < couplings_.size(); ++c) {
      if (gains[c] == 0.0) continue;
      const Real kz = grid_.wavenumber(couplings_[c].pointer_axis,
                                       idx(couplings_[c].pointer_axis));
      mixed += gains[c] * couplings_[c].profile(idx(0)) * kz;
    }
    theta_mixed(f) = mixed * (0.5 * dt_);
    theta_rest(f) = rest * dt_;
    for (int a = d - 1; a >= 0; --a) {
      if (++idx(a) < grid_.axis_points(a)) break;
      idx(a) = 0;
    }
  }
  mixed_phase_ = phase_from_angle(theta_mixed);
  rest_kinetic_phase_ = phase_from_angle(theta_rest);
}

WaveField SplitOperatorPropagator::step(const WaveField& field) {
  if (!field.grid.same_layout(grid_))
    throw std::invalid_argument("propagator: field grid mismatch");

  std::vector<Real> gains(couplings_.size());
  const Real t_mid = field.time + 0.5 * dt_;
  bool any_active = false;
  for (std::size_t c = 0; c < couplings_.size(); ++c) {
    gains[c] = couplings_[c].g_at(t_mid);
    any_active |= gains[c] != 0.0;
  }
  if (gains != cached_gains_) rebuild_mixed_tables(gains);

  WaveField out{grid_, field.psi, field.time + dt_};
  out.psi *= half_v_phase_;
  if (any_active) {
    for (int a : active_axes_) transform_.forward_axis(out.psi, a);
    out.psi *= mixed_phase_;
    for (int a = 0; a < grid_.dims(); ++a)
      if (std::find(active_axes_.begin(), active_axes_.end(), a) ==
          active_axes_.end())
        transform_.forward_axis(out.psi, a);
    out.psi *= rest_kinetic_phase_;
    for (int a = 0; a < grid_.dims(); ++a)
      if (std::find(active_axes_.begin(), active_axes_.end(), a) ==
          active_axes_.end())
        transform_.inverse_axis(out.psi, a);
    out.psi *= mixed_phase_;
    for (int a : active_axes_) transform_.inverse_axis(out.psi, a);
  } else {
    transform_.forward(out.psi);
    out.psi *= kinetic_full_phase_;
    transform_.inverse(out.psi);
  }
  out.psi *= half_v_phase_;

  if (!out.psi.allFinite())
    throw std::runtime_error("propagator: field became non-finite at t = " +
                             std::to_string(out.time));
  return out;
}

WaveField step(const WaveField& field, const Potential& potential,
               const PhysicalParams& params, Real dt) {
  SplitOperatorPropagator prop(field.grid, potential, {}, params, dt);
  return prop.step(field);
}

WaveField step(const WaveField& field, const Potential& potential,
               const CouplingTerm& coupling, const PhysicalParams& params,
               Real dt) {
  SplitOperatorPropagator prop(field.grid, potential, {coupling}, params, dt);
  return prop.step(field);
}

std::vector<WaveField> evolve(const WaveField& field, const Potential& potential,
                              const std::vector<CouplingTerm>& couplings,
                              const PhysicalParams& params, Real t_final, Real dt,
                              const std::vector<Real>& sample_times) {
  if (!(dt > 0)) throw std::invalid_argument("evolve: dt must be positive");
  const Real span = t_final - field.time;
  if (!(span > 0)) throw std::invalid_argument("evolve: t_final must exceed field time");
  const auto n_steps = static_cast<Index>(std::llround(span / dt));
  if (n_steps < 1 || std::abs(Real(n_steps) * dt - span) > 1e-9 * std::max(1.0, span))
    throw std::invalid_argument("evolve: span must be an integral number of steps");

  std::vector<Index> wanted;
  wanted.reserve(sample_times.size());
  for (Real t : sample_times) {
    if (t < field.time - 1e-9 || t > t_final + 1e-9)
      throw std::invalid_argument("evolve: sample time outside run interval");
    wanted.push_back(std::clamp<Index>(
        static_cast<Index>(std::llround((t - field.time) / dt)), 0, n_steps));
  }
  std::sort(wanted.begin(), wanted.end());

  std::vector<WaveField> out;
  SplitOperatorPropagator prop(field.grid, potential, couplings, params, dt);
  WaveField state = field;
  std::size_t cursor = 0;
  for (; cursor < wanted.size() && wanted[cursor] == 0; ++cursor) out.push_back(state);
  for (Index s = 1; s <= n_steps; ++s) {
    state = prop.step(state);
    for (; cursor < wanted.size() && wanted[cursor] == s; ++cursor)
      out.push_back(state);
  }
  if (sample_times.empty()) out.push_back(state);
  return out;
}

Real energy_expectation(const WaveField& field, const Potential& potential,
                        const PhysicalParams& params) {
  params.validate(field.grid.dims());
  if (!potential.grid.same_layout(field.grid))
    throw std::invalid_argument("energy: potential grid mismatch");
  const Grid& g = field.grid;

  SpectralTransform transform(g);
  ComplexArray hat = field.psi;
  transform.forward(hat);

  const int d = g.dims();
  Real kinetic = 0.0;
  AxisSizes idx = AxisSizes::Zero(d);
  for (Index f = 0; f < g.size(); ++f) {
    Real acc = 0.0;
    for (int a = 0; a < d; ++a) {
      const Real k = g.wavenumber(a, idx(a));
      acc += params.hbar * params.hbar * k * k / (2.0 * params.masses(a));
    }
    kinetic += acc * std::norm(hat(f));
    for (int a = d - 1; a >= 0; --a) {
      if (++idx(a) < g.axis_points(a)) break;
      idx(a) = 0;
    }
  }
  // Parseval with the unscaled forward transform
  kinetic *= g.cell_volume() / Real(g.size());

  const Real potential_part =
      (potential.v * field.psi.abs2()).sum() * g.cell_volume();
  const Real norm2 = field.psi.abs2().sum() * g.cell_volume();
  return (kinetic + potential_part) / norm2;
}

}  // namespace hcsim
