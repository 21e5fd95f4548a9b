#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "hcsim/guidance.hpp"
#include "hcsim/propagator.hpp"

#include <cmath>

using namespace hcsim;

namespace {

Point pt(std::initializer_list<Real> xs) {
  Point p(static_cast<Index>(xs.size()));
  Index i = 0;
  for (Real x : xs) p(i++) = x;
  return p;
}

WaveField plane_wave(const Grid& g, int mode) {
  WaveField f{g, ComplexArray(g.size()), 0.0};
  const Real k = 2.0 * kPi * mode / g.length(0);
  for (Index i = 0; i < g.size(); ++i)
    f.psi(i) = std::exp(Complex(0.0, k * g.coord(0, i)));
  return normalized(f);
}

}  // namespace

TEST_CASE("philox known answers") {
  // reference vectors for the 10-round 4x32 variant
  {
    philox::Block out = philox::encrypt({0, 0, 0, 0}, {0, 0});
    CHECK(out[0] == 0x6627e8d5u);
    CHECK(out[1] == 0xe169c58du);
    CHECK(out[2] == 0xbc57ac4cu);
    CHECK(out[3] == 0x9b00dbd8u);
  }
  {
    philox::Block out = philox::encrypt(
        {0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
        {0xffffffffu, 0xffffffffu});
    CHECK(out[0] == 0x408f276du);
    CHECK(out[1] == 0x41c83b0eu);
    CHECK(out[2] == 0xa20bc7c6u);
    CHECK(out[3] == 0x6d5451fdu);
  }
  {
    philox::Block out = philox::encrypt(
        {0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
        {0xa4093822u, 0x299f31d0u});
    CHECK(out[0] == 0xd16cfe09u);
    CHECK(out[1] == 0x94fdccebu);
    CHECK(out[2] == 0x5001e420u);
    CHECK(out[3] == 0x24126ea1u);
  }
}

TEST_CASE("counter streams are addressable and reproducible") {
  CounterStream a(42, StreamPurpose::kTrajectory, 7);
  CounterStream b(42, StreamPurpose::kTrajectory, 7);
  CounterStream c(42, StreamPurpose::kTrajectory, 8);
  CounterStream d(42, StreamPurpose::kSampling, 7);
  CounterStream e(43, StreamPurpose::kTrajectory, 7);

  bool same = true, diff_id = false, diff_purpose = false, diff_seed = false;
  for (int i = 0; i < 64; ++i) {
    double va = a.next_uniform();
    same &= va == b.next_uniform();
    diff_id |= va != c.next_uniform();
    diff_purpose |= va != d.next_uniform();
    diff_seed |= va != e.next_uniform();
  }
  CHECK(same);
  CHECK(diff_id);
  CHECK(diff_purpose);
  CHECK(diff_seed);
  CHECK(a.draws() == 64);
}

TEST_CASE("uniform and normal draw statistics") {
  CounterStream u(123, StreamPurpose::kScratch, 0);
  const int n = 200000;
  double sum = 0.0, min_v = 1.0, max_v = 0.0;
  for (int i = 0; i < n; ++i) {
    double v = u.next_uniform();
    sum += v;
    min_v = std::min(min_v, v);
    max_v = std::max(max_v, v);
  }
  CHECK(min_v >= 0.0);
  CHECK(max_v < 1.0);
  // 3 sigma of the mean of U(0,1): 3 / sqrt(12 n)
  CHECK(std::abs(sum / n - 0.5) < 3.0 / std::sqrt(12.0 * n));

  NormalStream g(123, StreamPurpose::kScratch, 1);
  double s1 = 0.0, s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    double v = g.next();
    s1 += v;
    s2 += v * v;
  }
  double mean = s1 / n;
  double var = s2 / n - mean * mean;
  CHECK(std::abs(mean) < 3.0 / std::sqrt(double(n)));
  CHECK(std::abs(var - 1.0) < 3.0 * std::sqrt(2.0 / double(n)));
  // fixed consumption: one block yields two normals
  CHECK(g.blocks_consumed() == n / 2);
}

TEST_CASE("drift closed forms") {
  SUBCASE("plane wave moves at hbar k / m for every alpha") {
    Grid g = build_grid({{0.0, 2.0 * kPi}}, {64});
    WaveField psi = plane_wave(g, 3);
    DriftField df = make_drift_field(psi);
    for (Real alpha : {0.0, 0.5, 1.0, 2.0}) {
      PhysicalParams params = unit_params(1, alpha);
      params.masses(0) = 2.0;
      for (Real x : {0.1, 1.7, 4.4}) {  // off-grid on purpose
        DriftSample s = drift_at(df, pt({x}), params);
        CHECK(!s.regularized);
        CHECK(s.b(0) == doctest::Approx(3.0 / 2.0).epsilon(1e-12));
        CHECK(s.b_star(0) == doctest::Approx(3.0 / 2.0).epsilon(1e-12));
      }
    }
  }

  SUBCASE("harmonic ground state pulls inward as -alpha x") {
    Grid g = build_grid({{-8.0, 8.0}}, {512});
    WaveField psi = gaussian_packet(g, pt({0.0}), pt({std::sqrt(0.5)}), pt({0.0}));
    DriftField df = make_drift_field(psi);
    for (Real alpha : {0.0, 1.0, 2.0}) {
      PhysicalParams params = unit_params(1, alpha);
      for (Real x : {-1.5, 0.25, 1.0}) {
        DriftSample s = drift_at(df, pt({x}), params);
        CHECK(s.b(0) == doctest::Approx(-alpha * x).epsilon(1e-4).scale(1.0));
        // stationary state carries no current
        CHECK(std::abs(s.j(0)) < 1e-12);
      }
    }
  }

  SUBCASE("forward and backward drift differ by the osmotic term") {
    Grid g = build_grid({{-16.0, 16.0}}, {512});
    const Real sig = 1.5, c = 0.3, k = 0.7;
    WaveField psi = gaussian_packet(g, pt({c}), pt({sig}), pt({k}));
    DriftField df = make_drift_field(psi);
    PhysicalParams params = unit_params(1, 1.5);
    for (Real x : {-1.0, 0.3, 2.2}) {
      DriftSample s = drift_at(df, pt({x}), params);
      // grad rho / rho = -(x - c)/sig^2 for the gaussian
      Real want = params.alpha * (-(x - c) / (sig * sig));
      CHECK(s.b(0) - s.b_star(0) == doctest::Approx(want).epsilon(1e-4).scale(1.0));
    }
  }

  SUBCASE("node regularization") {
    Grid g = build_grid({{-8.0, 8.0}}, {128});
    WaveField psi{g, ComplexArray(g.size()), 0.0};
    for (Index i = 0; i < g.size(); ++i) {
      Real x = g.coord(0, i);
      psi.psi(i) = Complex(x * std::exp(-0.5 * x * x), 0.0);
    }
    psi = normalized(psi);
    DriftSample s = drift_at(psi, pt({0.0}), unit_params(1, 1.0));
    CHECK(s.regularized);
    CHECK(s.b(0) == 0.0);
    CHECK(s.j(0) == 0.0);
  }
}

TEST_CASE("two routes to the current agree") {
  Grid g1 = build_grid({{-16.0, 16.0}}, {512});
  WaveField moving = gaussian_packet(g1, pt({0.3}), pt({1.5}), pt({0.7}));
  CHECK(current_consistency(moving, unit_params(1, 1.0)).max_abs < 1e-12);

  Grid g2 = build_grid({{-8.0, 8.0}, {-8.0, 8.0}}, {64, 64});
  WaveField rough = random_smooth_field(g2, 99);
  PhysicalParams params = unit_params(2, 0.7);
  params.masses << 1.0, 3.0;
  CHECK(current_consistency(rough, params).max_abs < 1e-12);

  // real field: no phase gradient, so no current anywhere
  WaveField real_field = gaussian_packet(g1, pt({0.0}), pt({1.0}), pt({0.0}));
  SpectralTransform tr(g1);
  DriftField df = make_drift_field(real_field, tr);
  for (Real x : {-2.0, 0.1, 1.3})
    CHECK(std::abs(drift_at(df, pt({x}), unit_params(1, 1.0)).j(0)) < 1e-14);
}

TEST_CASE("guidance step behavior") {
  SUBCASE("deterministic member at a symmetric packet center stays put") {
    Grid g = build_grid({{-16.0, 16.0}}, {256});
    WaveField psi = gaussian_packet(g, pt({0.0}), pt({1.0}), pt({0.0}));
    DriftField df = make_drift_field(psi);
    NormalStream rng(1, StreamPurpose::kTrajectory, 0);
    Configuration cfg;
    cfg.x = pt({0.0});
    for (int s = 0; s < 100; ++s)
      guidance_step(cfg, df, df, unit_params(1, 0.0), 1e-3, rng);
    CHECK(std::abs(cfg.x(0)) < 1e-10);
    CHECK(rng.blocks_consumed() == 0);  // alpha = 0 must not touch the stream
  }

  SUBCASE("noise variance scales as alpha hbar dt / m") {
    Grid g = build_grid({{0.0, 2.0 * kPi}}, {64});
    WaveField psi = plane_wave(g, 2);
    DriftField df = make_drift_field(psi);
    const Real dt = 1e-2;
    const int n = 100000;
    for (Real alpha : {1.0, 4.0}) {
      PhysicalParams params = unit_params(1, alpha);
      NormalStream rng(5, StreamPurpose::kTrajectory, 11);
      const Real k = 2.0;
      double s1 = 0.0, s2 = 0.0;
      for (int i = 0; i < n; ++i) {
        Configuration cfg;
        cfg.x = pt({3.0});
        guidance_step(cfg, df, df, params, dt, rng);
        double inc = cfg.x(0) - 3.0 - k * dt;  // subtract the deterministic part
        s1 += inc;
        s2 += inc * inc;
      }
      double mean = s1 / n;
      double var = s2 / n - mean * mean;
      double want = alpha * dt;  // hbar = m = 1
      CHECK(std::abs(var - want) < 3.0 * want * std::sqrt(2.0 / double(n)));
      CHECK(std::abs(mean) < 3.0 * std::sqrt(want / double(n)));
    }
  }

  SUBCASE("alpha = 0 trajectories are seed independent") {
    Grid g = build_grid({{-16.0, 16.0}}, {256});
    WaveField psi = gaussian_packet(g, pt({-1.0}), pt({1.0}), pt({0.5}));
    DriftField df = make_drift_field(psi);
    PhysicalParams params = unit_params(1, 0.0);
    Configuration a, b;
    a.x = pt({0.2});
    b.x = pt({0.2});
    NormalStream ra(1, StreamPurpose::kTrajectory, 0);
    NormalStream rb(999, StreamPurpose::kTrajectory, 123);
    for (int s = 0; s < 50; ++s) {
      guidance_step(a, df, df, params, 1e-3, ra);
      guidance_step(b, df, df, params, 1e-3, rb);
    }
    CHECK(a.x(0) == b.x(0));
  }

  SUBCASE("wrapping is counted and keeps the member in the box") {
    Grid g = build_grid({{0.0, 2.0 * kPi}}, {64});
    WaveField psi = plane_wave(g, 4);  // steady positive drift
    DriftField df = make_drift_field(psi);
    PhysicalParams params = unit_params(1, 0.0);
    NormalStream rng(1, StreamPurpose::kTrajectory, 0);
    Configuration cfg;
    cfg.x = pt({2.0 * kPi - 0.01});
    for (int s = 0; s < 10; ++s) guidance_step(cfg, df, df, params, 1e-2, rng);
    CHECK(cfg.wrap_events >= 1);
    CHECK(cfg.x(0) >= 0.0);
    CHECK(cfg.x(0) < 2.0 * kPi);
  }
}

TEST_CASE("deterministic trajectory of the spreading packet") {
  FreePacketSpec spec;
  spec.sigma0 = 1.0;
  spec.center = 0.0;
  spec.wavevector = 0.0;

  SUBCASE("closed form values") {
    CHECK(spec.width_at(0.0) == 1.0);
    CHECK(spec.width_at(2.0) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
    CHECK(bohm_trajectory_oracle(spec, 1.0, 2.0) ==
          doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
    CHECK(bohm_trajectory_oracle(spec, 0.0, 5.0) == 0.0);
    FreePacketSpec bad = spec;
    bad.sigma0 = -1.0;
    CHECK_THROWS_AS(bohm_trajectory_oracle(bad, 1.0, 1.0), std::invalid_argument);
  }

  SUBCASE("oracle matches direct integration of the analytic drift") {
    // dx/dt = (x - c(t)) sigma'(t)/sigma(t) + hbar k / m, RK4 at tiny step
    FreePacketSpec s2 = spec;
    s2.center = -1.0;
    s2.wavevector = 0.5;
    auto drift = [&](Real x, Real t) {
      Real sig = s2.width_at(t);
      Real dsig = (t / 4.0) / std::sqrt(1.0 + t * t / 4.0);  // sigma0 = 1, hbar = m = 1
      return (x - s2.centroid_at(t)) * dsig / sig + 0.5;
    };
    Real x = 0.8, t = 0.0;
    const Real h = 1e-3;
    for (int i = 0; i < 2000; ++i) {
      Real k1 = drift(x, t);
      Real k2 = drift(x + 0.5 * h * k1, t + 0.5 * h);
      Real k3 = drift(x + 0.5 * h * k2, t + 0.5 * h);
      Real k4 = drift(x + h * k3, t + h);
      x += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      t += h;
    }
    CHECK(x == doctest::Approx(bohm_trajectory_oracle(s2, 0.8, 2.0)).epsilon(1e-9));
  }

  SUBCASE("numerical trajectory lands on the oracle") {
    Grid g = build_grid({{-16.0, 16.0}}, {1024});
    FreePacketSpec s3 = spec;
    s3.center = -1.0;
    s3.wavevector = 0.5;
    WaveField psi0 = gaussian_packet(g, pt({-1.0}), pt({1.0}), pt({0.5}));
    PhysicalParams params = unit_params(1, 0.0);
    SplitOperatorPropagator prop(g, free_potential(g), {}, params, 1e-3);
    SpectralTransform tr(g);
    Configuration cfg;
    cfg.x = pt({0.8});
    NormalStream rng(1, StreamPurpose::kTrajectory, 0);
    WaveField cur = psi0;
    DriftField df_cur = make_drift_field(cur, tr);
    for (int s = 0; s < 1000; ++s) {
      WaveField nxt = prop.step(cur);
      DriftField df_nxt = make_drift_field(nxt, tr);
      guidance_step(cfg, df_cur, df_nxt, params, 1e-3, rng);
      cur = std::move(nxt);
      df_cur = std::move(df_nxt);
    }
    CHECK(std::abs(cfg.x(0) - bohm_trajectory_oracle(s3, 0.8, 1.0)) < 1e-3);
  }
}

TEST_CASE("guidance update argument checks") {
  Grid g = build_grid({{-8.0, 8.0}}, {64});
  WaveField psi = gaussian_packet(g, pt({0.0}), pt({1.0}), pt({0.0}));
  DriftField df = make_drift_field(psi);
  NormalStream rng(1, StreamPurpose::kTrajectory, 0);
  Configuration cfg;
  cfg.x = pt({0.0});
  CHECK_THROWS_AS(
      guidance_update(cfg, df, df, 0.5, unit_params(1), -1e-3, rng),
      std::invalid_argument);
  CHECK_THROWS_AS(guidance_update(cfg, df, df, 1.5, unit_params(1), 1e-3, rng),
                  std::invalid_argument);
}
