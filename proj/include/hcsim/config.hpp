#pragma once

#include "hcsim/measurement.hpp"

#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace hcsim {

/// Raised for malformed or out-of-schema configuration input; the CLI maps it
/// to its own exit code.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Value of the TOML subset the scenario files use: strings, numbers,
/// booleans, and (possibly nested) arrays.
struct ConfigValue {
  enum class Kind { kString, kNumber, kBoolean, kArray };
  Kind kind = Kind::kNumber;
  std::string str;
  Real num = 0.0;
  bool boolean = false;
  std::vector<ConfigValue> array;
};

/// Flat key -> value map with section names folded in ("run.dt").
using ConfigTree = std::map<std::string, ConfigValue>;

ConfigTree parse_config_text(const std::string& text);
ConfigTree parse_config_file(const std::filesystem::path& path);

/// Fully validated scenario description.  kind selects the pipeline:
/// free_packet / harmonic / custom run a packet ensemble, the measurement
/// kinds run the pointer pipeline.
struct ScenarioConfig {
  std::string kind;

  std::vector<std::pair<Real, Real>> extents;
  std::vector<Index> points;
  PhysicalParams params;

  Point center, sigma, wavevector;       // packet kinds
  std::string potential_preset = "free"; // custom kind
  Point omega, potential_center;

  Real dt = 1e-3;
  Real t_final = 1.0;
  std::vector<Real> snapshot_times;
  std::size_t ensemble_size = 1000;
  std::uint64_t seed = 1;
  int substeps = 1;
  std::vector<Index> bins;

  std::string directory = "out";
  std::vector<std::string> formats = {"csv", "hcf", "json"};

  MeasurementScenario measurement;  // filled for measurement kinds

  std::string echo;  // canonical serialization of everything parsed
};

/// Strict schema load: every key must be known, spelled exactly, and of the
/// right shape; unknown keys fail with the offending name.
ScenarioConfig load_scenario_config(const std::filesystem::path& path);
ScenarioConfig scenario_from_tree(const ConfigTree& tree);

/// Human-readable schema description for the CLI.
std::string config_schema_text();

}  // namespace hcsim
