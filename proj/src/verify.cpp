#include "hcsim/verify.hpp"

#include "hcsim/branch.hpp"
#include "hcsim/guidance.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace hcsim {

namespace {

constexpr std::uint64_t kMeasurementSeed = 20260815;
constexpr std::size_t kMeasurementMembers = 10000;
constexpr std::size_t kRepeatedMembers = 2000;

struct StopWatch {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
        .count();
  }
};

std::string num(Real x) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.4g", x);
  return buf;
}

Point point1(Real x) {
  Point p(1);
  p << x;
  return p;
}

}  // namespace

VerifyEngine::VerifyEngine(std::ostream& log) : log_(log) {}

const std::vector<std::string>& VerifyEngine::criterion_names() {
  static const std::vector<std::string> names = {
      "equivariance",    "born_statistics", "outcome_correspondence",
      "no_crossing",     "subensemble",     "repeated_measurement",
      "oracles",         "hygiene"};
  return names;
}

const std::vector<std::string>& VerifyEngine::suite_criteria(const std::string& suite) {
  static const std::map<std::string, std::vector<std::string>> suites = [] {
    std::map<std::string, std::vector<std::string>> m;
    m["all"] = criterion_names();
    m["equivariance"] = {"equivariance"};
    m["measurement"] = {"born_statistics", "outcome_correspondence",
                        "no_crossing", "subensemble"};
    m["repeated"] = {"repeated_measurement"};
    m["oracles"] = {"oracles"};
    m["hygiene"] = {"hygiene"};
    for (const auto& name : criterion_names()) m.emplace(name, std::vector<std::string>{name});
    return m;
  }();
  auto it = suites.find(suite);
  if (it == suites.end()) {
    std::string known;
    for (const auto& [k, v] : suites) known += (known.empty() ? "" : ", ") + k;
    throw std::invalid_argument("unknown suite '" + suite + "' (known: " + known + ")");
  }
  return it->second;
}

std::vector<std::string> VerifyEngine::suite_names() {
  return {"all", "equivariance", "measurement", "repeated", "oracles", "hygiene"};
}

CheckResult VerifyEngine::run_criterion(const std::string& name) {
  try {
    if (name == "equivariance") return equivariance();
    if (name == "born_statistics") return born_statistics();
    if (name == "outcome_correspondence") return outcome_correspondence();
    if (name == "no_crossing") return no_crossing();
    if (name == "subensemble") return subensemble();
    if (name == "repeated_measurement") return repeated_measurement_check();
    if (name == "oracles") return oracles();
    if (name == "hygiene") return hygiene();
  } catch (const std::exception& e) {
    return {name, false, std::string("exception: ") + e.what()};
  }
  throw std::invalid_argument("unknown criterion '" + name + "'");
}

std::vector<CheckResult> VerifyEngine::run_suite(const std::string& suite) {
  std::vector<CheckResult> results;
  for (const auto& name : suite_criteria(suite)) {
    log_ << "== " << name << std::endl;
    results.push_back(run_criterion(name));
    const auto& r = results.back();
    log_ << (r.pass ? "[PASS] " : "[FAIL] ") << r.name << ": " << r.detail
         << std::endl;
  }
  return results;
}

const MeasurementRecord& VerifyEngine::measurement(Real alpha) {
  int key = static_cast<int>(std::lround(alpha * 1000));
  auto it = measurement_cache_.find(key);
  if (it != measurement_cache_.end()) return it->second;
  log_ << "  measurement pipeline alpha=" << num(alpha) << " members="
       << kMeasurementMembers << std::endl;
  StopWatch sw;
  MeasurementRecord rec = run_measurement(default_measurement_scenario(alpha),
                                          kMeasurementMembers, kMeasurementSeed);
  log_ << "    finished in " << num(sw.seconds()) << " s" << std::endl;
  return measurement_cache_.emplace(key, std::move(rec)).first->second;
}

// Guided ensembles must stay |psi|^2 distributed for every alpha, in free
// flight and in a trap, to within the resampling noise floor.
CheckResult VerifyEngine::equivariance() {
  const std::vector<Real> alphas = {0.0, 0.25, 0.5, 1.0, 2.0};
  const std::vector<Real> times = {0.5, 1.0, 1.5, 2.0};
  const std::vector<Index> bins = {64};
  const std::size_t members = 10000;
  const Real dt = 2e-3;
  const double budget_s = 120.0;

  struct Case {
    std::string name;
    WaveField psi0;
    Potential pot;
  };
  std::vector<Case> cases;
  {
    Grid g = build_grid({{-16.0, 16.0}}, {256});
    cases.push_back({"free",
                     gaussian_packet(g, point1(-1.0), point1(1.0), point1(0.5)),
                     free_potential(g)});
  }
  {
    Grid g = build_grid({{-8.0, 8.0}}, {128});
    cases.push_back({"harmonic",
                     gaussian_packet(g, point1(1.0), point1(std::sqrt(0.5)),
                                     point1(0.0)),
                     harmonic_potential(g, unit_params(1), point1(1.0),
                                        point1(0.0))});
  }

  bool pass = true;
  Real worst_ratio = 0.0;
  std::string worst_tag = "none";
  double slowest = 0.0;
  int combo = 0;
  for (const auto& cs : cases) {
    for (Real alpha : alphas) {
      StopWatch sw;
      PhysicalParams params = unit_params(1, alpha);
      Ensemble ens = sample_from_density(cs.psi0, members, 1000 + 17 * combo);
      std::vector<WaveField> snaps;
      std::vector<std::vector<Point>> positions;
      CoEvolveOptions opts;
      opts.t_final = 2.0;
      opts.dt = dt;
      opts.sample_times = times;
      evolve_ensemble(cs.psi0, ens, cs.pot, {}, params, opts,
                      [&](const WaveField& f, const Ensemble& e) {
                        snaps.push_back(f);
                        std::vector<Point> xs;
                        xs.reserve(e.size());
                        for (const auto& m : e.members) xs.push_back(m.x);
                        positions.push_back(std::move(xs));
                      });
      double elapsed = sw.seconds();
      slowest = std::max(slowest, elapsed);
      if (elapsed > budget_s) {
        pass = false;
        worst_tag = cs.name + " alpha=" + num(alpha) + " overran " + num(elapsed) + " s";
      }

      for (std::size_t k = 0; k < snaps.size(); ++k) {
        Ensemble view;
        view.members.reserve(positions[k].size());
        for (const auto& x : positions[k]) {
          Configuration c;
          c.x = x;
          view.members.push_back(c);
        }
        view.seeds.assign(view.members.size(), 0);
        EquivarianceReport rep = equivariance_check(view, snaps[k], bins);
        SamplingFloor floor = calibrate_sampling_floor(
            snaps[k], members, bins, 8, 515 + 31 * combo + static_cast<int>(k));
        Real limit = 2.0 * floor.mean;
        Real ratio = rep.l1 / limit;
        if (ratio > worst_ratio) {
          worst_ratio = ratio;
          worst_tag = cs.name + " alpha=" + num(alpha) + " t=" + num(snaps[k].time);
        }
        if (!(rep.l1 <= limit)) pass = false;
      }
      log_ << "  " << cs.name << " alpha=" << num(alpha) << " done in "
           << num(elapsed) << " s" << std::endl;
      ++combo;
    }
  }
  std::ostringstream d;
  d << cases.size() * alphas.size() << " runs x " << times.size()
    << " snapshots, worst l1/limit " << num(worst_ratio) << " (" << worst_tag
    << "), slowest run " << num(slowest) << " s";
  return {"equivariance", pass, d.str()};
}

// Outcome frequencies must match the initial-state weights to binomial
// accuracy, for the deterministic and the diffusive guidance alike.
CheckResult VerifyEngine::born_statistics() {
  const MeasurementRecord& r0 = measurement(0.0);
  const MeasurementRecord& r1 = measurement(1.0);
  const Real expected = 0.36;
  const Real band = 3.0 * std::sqrt(expected * (1.0 - expected) /
                                    static_cast<Real>(kMeasurementMembers));
  bool pass = true;
  if (std::abs(r0.born_weight1 - expected) > 1e-6) pass = false;
  if (std::abs(r1.born_weight1 - expected) > 1e-6) pass = false;
  if (std::abs(r0.freq1 - r0.born_weight1) > band) pass = false;
  if (std::abs(r1.freq1 - r1.born_weight1) > band) pass = false;
  std::ostringstream d;
  d << "weight " << num(r0.born_weight1) << ", freq1 " << num(r0.freq1)
    << " (alpha 0) / " << num(r1.freq1) << " (alpha 1), band +-" << num(band)
    << ", undecided " << num(r0.undecided_fraction) << " / "
    << num(r1.undecided_fraction);
  return {"born_statistics", pass, d.str()};
}

// The pointer reading and the branch holding the configuration must name the
// same detector.
CheckResult VerifyEngine::outcome_correspondence() {
  const MeasurementRecord& r0 = measurement(0.0);
  const MeasurementRecord& r1 = measurement(1.0);
  bool pass = (r0.correspondence_rate == 1.0) && (r1.correspondence_rate >= 0.99);
  std::ostringstream d;
  d << "alpha 0: " << num(r0.correspondence_rate) << " (must be exactly 1), alpha 1: "
    << num(r1.correspondence_rate) << " (floor 0.99)";
  return {"outcome_correspondence", pass, d.str()};
}

// Once branches separate, deterministic members never change branch and
// diffusive members cross at most at the stated rate.  The scenario keeps the
// branch gap at several pointer widths so crossings are genuinely rare.
CheckResult VerifyEngine::no_crossing() {
  const MeasurementRecord& r0 = measurement(0.0);
  const MeasurementRecord& r1 = measurement(1.0);
  CrossingReport c0 = crossing_monitor(r0);
  CrossingReport c1 = crossing_monitor(r1);
  MeasurementScenario sc = default_measurement_scenario(0.0);
  Real gap = 2.0 * sc.pointer_shift;
  Real widths = gap / sc.pointer_sigma;
  bool pass = c0.separation_ok && c1.separation_ok &&
              c0.members_crossed == 0 && c1.fraction <= 1e-3 && widths >= 8.0;
  std::ostringstream d;
  d << "alpha 0: " << c0.members_crossed << " crossings, alpha 1 fraction "
    << num(c1.fraction) << " (cap 1e-3), branch gap " << num(widths)
    << " pointer widths (need >= 8)";
  return {"no_crossing", pass, d.str()};
}

// Conditioning on outcome 1 must reproduce the normalized branch density and
// visibly disagree with the full two-branch density.
CheckResult VerifyEngine::subensemble() {
  bool pass = true;
  Real worst_branch = 0.0, worst_slack = 1e30;
  std::size_t times_checked = 0;
  for (Real alpha : {0.0, 1.0}) {
    const MeasurementRecord& rec = measurement(alpha);
    SubEnsembleReport rep =
        subensemble_analysis(rec, default_measurement_scenario(alpha), 1);
    if (rep.times.size() < 3) pass = false;
    for (std::size_t k = 0; k < rep.times.size(); ++k) {
      ++times_checked;
      Real limit = 2.0 * rep.floor_mean[k];
      worst_branch = std::max(worst_branch, rep.l1_vs_branch[k] / limit);
      if (!(rep.l1_vs_branch[k] <= limit)) pass = false;
      Real slack = rep.l1_vs_full[k] - (rep.margin - limit);
      worst_slack = std::min(worst_slack, slack);
      if (!(rep.l1_vs_full[k] >= rep.margin - limit)) pass = false;
    }
  }
  std::ostringstream d;
  d << times_checked << " post-readout comparisons, worst branch l1/limit "
    << num(worst_branch) << ", min full-density excess above margin "
    << num(worst_slack);
  return {"subensemble", pass, d.str()};
}

// Measuring twice must give the same answer: always for deterministic
// guidance, near-always for the diffusive family.
CheckResult VerifyEngine::repeated_measurement_check() {
  const double budget_s = 600.0;
  bool pass = true;
  std::ostringstream d;
  bool first = true;
  for (Real alpha : {0.0, 1.0}) {
    MeasurementScenario sc = default_repeated_scenario(alpha);
    log_ << "  repeated pipeline alpha=" << num(alpha) << " members="
         << kRepeatedMembers << std::endl;
    StopWatch sw;
    MeasurementRecord rec =
        repeated_measurement(sc, kRepeatedMembers, kMeasurementSeed + 11);
    double elapsed = sw.seconds();
    log_ << "    finished in " << num(elapsed) << " s" << std::endl;
    if (elapsed > budget_s) pass = false;
    if (alpha == 0.0 && rec.agreement_rate != 1.0) pass = false;
    if (alpha == 1.0 && !(rec.agreement_rate >= 0.999)) pass = false;
    if (rec.decided_both < kRepeatedMembers * 9 / 10) pass = false;
    if (!first) d << "; ";
    d << "alpha " << num(alpha) << ": agreement " << num(rec.agreement_rate)
      << " over " << rec.decided_both << " decided pairs, " << num(elapsed)
      << " s";
    first = false;
  }
  return {"repeated_measurement", pass, d.str()};
}

// Drift evaluation against closed forms, internal identities between the
// drift family members, two routes to the current, and the closed-form
// deterministic trajectory of a spreading packet.
CheckResult VerifyEngine::oracles() {
  const std::vector<Real> alphas = {0.0, 0.5, 1.0, 2.0};
  Real worst_closed = 0.0;

  {
    Grid g = build_grid({{-8.0, 8.0}}, {1024});
    WaveField psi =
        gaussian_packet(g, point1(0.0), point1(std::sqrt(0.5)), point1(0.0));
    DriftField df = make_drift_field(psi);
    for (Real alpha : alphas) {
      PhysicalParams params = unit_params(1, alpha);
      for (Real x : {0.317, -1.234, 0.555, 2.0}) {
        DriftSample s = drift_at(df, point1(x), params);
        worst_closed = std::max(worst_closed, std::abs(s.b(0) - (-alpha * x)));
      }
    }
  }

  Real worst_identity = 0.0;
  {
    Grid g = build_grid({{-16.0, 16.0}}, {1024});
    const Real sig = 1.5, k = 0.7, c = 0.3;
    WaveField psi = gaussian_packet(g, point1(c), point1(sig), point1(k));
    DriftField df = make_drift_field(psi);
    for (Real alpha : alphas) {
      PhysicalParams params = unit_params(1, alpha);
      for (Real x : {-0.9, 0.3, 1.7, 3.1}) {
        DriftSample s = drift_at(df, point1(x), params);
        Real b_want = -alpha * (x - c) / (2 * sig * sig) + k;
        Real bs_want = b_want + alpha * (x - c) / (sig * sig);
        worst_closed = std::max(worst_closed, std::abs(s.b(0) - b_want));
        worst_closed = std::max(worst_closed, std::abs(s.b_star(0) - bs_want));

        FieldValues v = interpolate(df, point1(x));
        Real grho = 2.0 * (v.grad[0] / v.psi).real();
        Real gap = std::abs((s.b(0) - s.b_star(0)) - alpha * grho);
        worst_identity = std::max(worst_identity, gap);
      }
    }
  }

  Real worst_current = 0.0;
  {
    Grid g = build_grid({{-16.0, 16.0}}, {1024});
    WaveField psi = gaussian_packet(g, point1(0.3), point1(1.5), point1(0.7));
    worst_current = std::max(
        worst_current, current_consistency(psi, unit_params(1, 1.0)).max_abs);
  }
  {
    Grid g = build_grid({{-8.0, 8.0}, {-8.0, 8.0}}, {64, 64});
    WaveField psi = random_smooth_field(g, 42);
    PhysicalParams params = unit_params(2, 0.5);
    params.masses << 1.0, 2.5;
    worst_current =
        std::max(worst_current, current_consistency(psi, params).max_abs);
  }

  Real worst_traj = 0.0;
  {
    Grid g = build_grid({{-16.0, 16.0}}, {1024});
    WaveField psi0 = gaussian_packet(g, point1(-1.0), point1(1.0), point1(0.5));
    FreePacketSpec spec;
    spec.sigma0 = 1.0;
    spec.wavevector = 0.5;
    spec.center = -1.0;
    Potential pot = free_potential(g);
    for (Real x0 : {-1.0, -0.4, 0.8}) {
      Ensemble ens;
      Configuration c0;
      c0.x = point1(x0);
      ens.members = {c0};
      ens.seeds = {7};
      ens.master_seed = 3;
      CoEvolveOptions opts;
      opts.t_final = 2.0;
      opts.dt = 1e-3;
      opts.substeps = 2;
      evolve_ensemble(psi0, ens, pot, {}, unit_params(1, 0.0), opts);
      Real want = bohm_trajectory_oracle(spec, x0, 2.0);
      worst_traj = std::max(worst_traj, std::abs(ens.members[0].x(0) - want));
    }
  }

  bool pass = worst_closed <= 1e-3 && worst_identity <= 1e-8 &&
              worst_current <= 1e-10 && worst_traj <= 1e-3;
  std::ostringstream d;
  d << "closed-form drift " << num(worst_closed) << " (cap 1e-3), drift identity "
    << num(worst_identity) << " (1e-8), current routes " << num(worst_current)
    << " (1e-10), deterministic trajectory " << num(worst_traj) << " (1e-3)";
  return {"oracles", pass, d.str()};
}

// Numerical housekeeping: unitarity per step, second-order continuity
// residual decay, bitwise reproducibility of a full stochastic run.
CheckResult VerifyEngine::hygiene() {
  Real worst_norm_drift = 0.0;
  {
    Grid g = build_grid({{-8.0, 8.0}}, {128});
    WaveField psi =
        gaussian_packet(g, point1(1.0), point1(std::sqrt(0.5)), point1(0.0));
    Potential pot = harmonic_potential(g, unit_params(1), point1(1.0), point1(0.0));
    SplitOperatorPropagator prop(g, pot, {}, unit_params(1), 1e-3);
    WaveField f = psi;
    Real prev = l2_norm(f);
    for (int s = 0; s < 2000; ++s) {
      f = prop.step(f);
      Real n = l2_norm(f);
      worst_norm_drift = std::max(worst_norm_drift, std::abs(n - prev));
      prev = n;
    }
  }
  {
    MeasurementScenario sc = default_measurement_scenario(0.0);
    WaveField psi = build_initial_state(sc);
    Grid g = psi.grid;
    SplitOperatorPropagator prop(g, free_potential(g), build_couplings(sc),
                                 sc.params, sc.dt);
    WaveField f = psi;
    Real prev = l2_norm(f);
    for (int s = 0; s < 500; ++s) {
      f = prop.step(f);
      Real n = l2_norm(f);
      worst_norm_drift = std::max(worst_norm_drift, std::abs(n - prev));
      prev = n;
    }
  }
  bool pass_norm = worst_norm_drift <= 1e-12;

  Real ratio = 0.0, res_fine = 0.0;
  {
    Grid g = build_grid({{-16.0, 16.0}}, {256});
    WaveField psi0 = gaussian_packet(g, point1(-1.0), point1(1.0), point1(0.5));
    PhysicalParams params = unit_params(1, 1.0);
    auto snaps = evolve(psi0, free_potential(g), {}, params, 0.52, 1e-3,
                        {0.48, 0.49, 0.50, 0.51, 0.52});
    auto at = [&](Real t) -> const WaveField& {
      for (const auto& s : snaps)
        if (std::abs(s.time - t) < 5e-4) return s;
      throw std::logic_error("snapshot lookup failed");
    };
    ContinuityResidual coarse =
        continuity_residual(at(0.48), at(0.50), at(0.52), params);
    ContinuityResidual fine =
        continuity_residual(at(0.49), at(0.50), at(0.51), params);
    res_fine = fine.l2;
    ratio = coarse.l2 / fine.l2;
  }
  bool pass_cont = ratio >= 3.5 && ratio <= 4.5;

  bool identical = true;
  {
    Grid g = build_grid({{-16.0, 16.0}}, {256});
    WaveField psi0 = gaussian_packet(g, point1(0.0), point1(1.0), point1(0.3));
    PhysicalParams params = unit_params(1, 1.0);
    Potential pot = free_potential(g);
    auto run = [&](std::vector<double>& xs, WaveField& final_field) {
      Ensemble ens = sample_from_density(psi0, 400, 99);
      CoEvolveOptions opts;
      opts.t_final = 1.0;
      opts.dt = 2e-3;
      final_field = evolve_ensemble(psi0, ens, pot, {}, params, opts);
      for (const auto& m : ens.members) xs.push_back(m.x(0));
    };
    std::vector<double> xa, xb;
    WaveField fa, fb;
    run(xa, fa);
    run(xb, fb);
    identical = xa.size() == xb.size() &&
                std::memcmp(xa.data(), xb.data(), xa.size() * sizeof(double)) == 0 &&
                std::memcmp(fa.psi.data(), fb.psi.data(),
                            static_cast<std::size_t>(fa.psi.size()) * sizeof(Complex)) == 0;
  }

  bool pass = pass_norm && pass_cont && identical;
  std::ostringstream d;
  d << "norm drift " << num(worst_norm_drift) << "/step (cap 1e-12), continuity ratio "
    << num(ratio) << " (want [3.5, 4.5], fine residual " << num(res_fine)
    << "), double run " << (identical ? "bitwise identical" : "DIVERGED");
  return {"hygiene", pass, d.str()};
}

}  // namespace hcsim
