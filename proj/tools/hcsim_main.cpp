#include "hcsim/config.hpp"
#include "hcsim/io.hpp"
#include "hcsim/verify.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>

namespace fs = std::filesystem;
using namespace hcsim;

namespace {

bool wants(const ScenarioConfig& cfg, const char* format) {
  return std::find(cfg.formats.begin(), cfg.formats.end(), format) !=
         cfg.formats.end();
}

std::string snapshot_name(int k) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "field_%02d.hcf", k);
  return buf;
}

void run_packet_scenario(const ScenarioConfig& cfg, const fs::path& dir) {
  Grid grid = build_grid(cfg.extents, cfg.points);
  WaveField psi0 = gaussian_packet(grid, cfg.center, cfg.sigma, cfg.wavevector);
  Potential pot = cfg.potential_preset == "harmonic"
                      ? harmonic_potential(grid, cfg.params, cfg.omega,
                                           cfg.potential_center)
                      : free_potential(grid);
  Ensemble ens = sample_from_density(psi0, cfg.ensemble_size, cfg.seed);

  std::vector<Real> samples = cfg.snapshot_times;
  samples.push_back(cfg.t_final);

  std::vector<std::string> artifacts;
  std::optional<TrajectoryWriter> traj;
  if (wants(cfg, "csv")) {
    traj.emplace(dir / "trajectories.csv", grid.dims());
    artifacts.push_back("trajectories.csv");
  }

  nlohmann::json eq_reports = nlohmann::json::array();
  int snap = 0;
  WaveField last = psi0;

  CoEvolveOptions opts;
  opts.t_final = cfg.t_final;
  opts.dt = cfg.dt;
  opts.substeps = cfg.substeps;
  opts.sample_times = samples;
  evolve_ensemble(psi0, ens, pot, {}, cfg.params, opts,
                  [&](const WaveField& f, const Ensemble& e) {
                    if (traj) traj->add_sample(f.time, e);
                    if (wants(cfg, "hcf")) {
                      std::string name = snapshot_name(snap);
                      write_field(dir / name, f, cfg.params.alpha);
                      artifacts.push_back(name);
                    }
                    EquivarianceReport rep = equivariance_check(e, f, cfg.bins);
                    rep.alpha = cfg.params.alpha;
                    SamplingFloor floor = calibrate_sampling_floor(
                        f, e.size(), cfg.bins, 8, cfg.seed + 101 * snap + 1);
                    rep.floor_mean = floor.mean;
                    rep.floor_sd = floor.sd;
                    eq_reports.push_back(equivariance_report_json(rep));
                    last = f;
                    ++snap;
                  });

  if (wants(cfg, "json")) {
    write_json(dir / "equivariance.json", nlohmann::json{{"reports", eq_reports}});
    artifacts.push_back("equivariance.json");
  }
  if (wants(cfg, "csv")) {
    write_field_csv(dir / "field_final.csv", last);
    artifacts.push_back("field_final.csv");
  }
  write_manifest(dir, cfg.echo, artifacts);

  if (!eq_reports.empty()) {
    const auto& final_rep = eq_reports.back();
    std::cout << "final t=" << last.time
              << " equivariance l1=" << final_rep["l1"].get<double>()
              << " (floor " << final_rep["floor_mean"].get<double>() << ")\n";
  }
}

void run_measurement_scenario(const ScenarioConfig& cfg, const fs::path& dir) {
  MeasurementRecord rec =
      cfg.kind == "repeated_measurement"
          ? repeated_measurement(cfg.measurement, cfg.ensemble_size, cfg.seed)
          : run_measurement(cfg.measurement, cfg.ensemble_size, cfg.seed);

  std::vector<std::string> artifacts;
  if (wants(cfg, "csv")) {
    TrajectoryWriter traj(dir / "trajectories.csv", cfg.measurement.dims());
    traj.add_record(rec);
    artifacts.push_back("trajectories.csv");
    write_field_csv(dir / "field_final.csv", rec.snapshots.back());
    artifacts.push_back("field_final.csv");
  }
  if (wants(cfg, "json")) {
    write_json(dir / "measurement.json", measurement_record_json(rec));
    artifacts.push_back("measurement.json");
    write_json(dir / "crossing.json", crossing_report_json(crossing_monitor(rec)));
    artifacts.push_back("crossing.json");
    if (cfg.kind == "two_packet_measurement") {
      write_json(dir / "subensemble.json",
                 subensemble_report_json(
                     subensemble_analysis(rec, cfg.measurement, 1)));
      artifacts.push_back("subensemble.json");
    }
  }
  if (wants(cfg, "hcf")) {
    for (std::size_t k = 0; k < rec.snapshots.size(); ++k) {
      std::string name = snapshot_name(static_cast<int>(k));
      write_field(dir / name, rec.snapshots[k], cfg.params.alpha);
      artifacts.push_back(name);
    }
  }
  write_manifest(dir, cfg.echo, artifacts);

  std::cout << "outcome 1 frequency " << rec.freq1 << " (weight "
            << rec.born_weight1 << "), undecided " << rec.undecided_fraction
            << ", correspondence " << rec.correspondence_rate << "\n";
  if (cfg.kind == "repeated_measurement")
    std::cout << "repeat agreement " << rec.agreement_rate << " over "
              << rec.decided_both << " decided pairs\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"guided-configuration quantum dynamics toolkit"};
  app.require_subcommand(1);

  std::string config_path, out_override, suite = "all";
  auto* run_cmd = app.add_subcommand("run", "execute a scenario config");
  run_cmd->add_option("config", config_path, "scenario config file")->required();
  run_cmd->add_option("--out", out_override, "output directory (overrides config)");

  auto* verify_cmd = app.add_subcommand("verify", "run acceptance checks");
  verify_cmd->add_option(
      "suite", suite,
      "all, equivariance, measurement, repeated, oracles, hygiene, or one criterion");

  auto* schema_cmd = app.add_subcommand("dump-schema", "print the config schema");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (schema_cmd->parsed()) {
      std::cout << config_schema_text();
      return 0;
    }
    if (verify_cmd->parsed()) {
      try {
        VerifyEngine::suite_criteria(suite);
      } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
      }
      VerifyEngine engine(std::cout);
      auto results = engine.run_suite(suite);
      bool all_pass = std::all_of(results.begin(), results.end(),
                                  [](const CheckResult& r) { return r.pass; });
      return all_pass ? 0 : 1;
    }

    ScenarioConfig cfg = load_scenario_config(config_path);
    fs::path dir = out_override.empty() ? fs::path(cfg.directory)
                                        : fs::path(out_override);
    fs::create_directories(dir);
    if (cfg.kind == "two_packet_measurement" || cfg.kind == "repeated_measurement")
      run_measurement_scenario(cfg, dir);
    else
      run_packet_scenario(cfg, dir);
    std::cout << "artifacts written to " << dir.string() << "\n";
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
