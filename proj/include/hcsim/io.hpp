#pragma once

#include "hcsim/ensemble.hpp"
#include "hcsim/measurement.hpp"

#include "json.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace hcsim {

/// Binary snapshot container, all little-endian:
///   bytes 0..3   magic "HCF1"
///   u32          dimension d
///   per axis     u64 points, f64 lo, f64 hi
///   f64          time
///   f64          alpha
///   payload      row-major (re, im) f64 pairs, one per grid point
void write_field(const std::filesystem::path& path, const WaveField& field,
                 Real alpha);

struct LoadedField {
  WaveField field;
  Real alpha = 0.0;
};
LoadedField read_field(const std::filesystem::path& path);

/// Plot-friendly CSV: one row per grid point with coordinates, Re, Im, rho.
void write_field_csv(const std::filesystem::path& path, const WaveField& field);

/// Tidy trajectory table: member_id, t, x_1..x_d, branch_label,
/// regularized_hits, one row per member per sample.
class TrajectoryWriter {
 public:
  TrajectoryWriter(const std::filesystem::path& path, int dims);
  void add_sample(Real time, const Ensemble& ens);
  void add_record(const MeasurementRecord& rec);

 private:
  std::filesystem::path path_;
  int dims_;
  std::string buffer_;
  void flush();
};

nlohmann::json equivariance_report_json(const EquivarianceReport& rep);
nlohmann::json measurement_record_json(const MeasurementRecord& rec);
nlohmann::json subensemble_report_json(const SubEnsembleReport& rep);
nlohmann::json crossing_report_json(const CrossingReport& rep);

void write_json(const std::filesystem::path& path, const nlohmann::json& j);

/// Content hash (FNV-1a 64) of a file on disk, hex encoded.
std::string file_hash_hex(const std::filesystem::path& path);

/// Writes manifest.json: tool name/version, the configuration echo, and a
/// sorted (name, bytes, fnv1a64) listing of every artifact.  Two runs with
/// the same inputs produce byte-identical manifests.
void write_manifest(const std::filesystem::path& dir,
                    const std::string& config_echo,
                    const std::vector<std::string>& artifact_names);

inline constexpr const char* kToolName = "hcsim";
inline constexpr const char* kToolVersion = "0.1.0";

}  // namespace hcsim
