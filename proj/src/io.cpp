#include "hcsim/io.hpp"

#include "hcsim/util.hpp"

#include "json.hpp"

#include <bit>
#include <cinttypes>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <stdexcept>

static_assert(std::endian::native == std::endian::little,
              "field container assumes a little-endian host");

namespace hcsim {

namespace {

constexpr char kMagic[4] = {'H', 'C', 'F', '1'};

template <typename T>
void put(std::ofstream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

template <typename T>
T take(std::ifstream& is) {
  T v;
  is.read(reinterpret_cast<char*>(&v), sizeof(v));
  if (!is) throw std::runtime_error("field read: truncated file");
  return v;
}

// shortest round-trip decimal, locale independent
std::string fmt(Real v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void write_field(const std::filesystem::path& path, const WaveField& field,
                 Real alpha) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("field write: cannot open " + path.string());
  os.write(kMagic, 4);
  put<std::uint32_t>(os, static_cast<std::uint32_t>(field.grid.dims()));
  for (int a = 0; a < field.grid.dims(); ++a) {
    put<std::uint64_t>(os, static_cast<std::uint64_t>(field.grid.axis_points(a)));
    put<double>(os, field.grid.lo(a));
    put<double>(os, field.grid.hi(a));
  }
  put<double>(os, field.time);
  put<double>(os, alpha);
  for (Index f = 0; f < field.grid.size(); ++f) {
    put<double>(os, field.psi(f).real());
    put<double>(os, field.psi(f).imag());
  }
  if (!os) throw std::runtime_error("field write: failed on " + path.string());
}

LoadedField read_field(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("field read: cannot open " + path.string());
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, kMagic, 4) != 0)
    throw std::runtime_error("field read: bad magic in " + path.string());
  const auto d = take<std::uint32_t>(is);
  if (d < 1 || d > 3) throw std::runtime_error("field read: bad dimension");
  std::vector<std::pair<Real, Real>> extents;
  std::vector<Index> points;
  for (std::uint32_t a = 0; a < d; ++a) {
    const auto n = take<std::uint64_t>(is);
    const auto lo = take<double>(is);
    const auto hi = take<double>(is);
    points.push_back(static_cast<Index>(n));
    extents.emplace_back(lo, hi);
  }
  LoadedField out;
  out.field.grid = build_grid(extents, points);
  out.field.time = take<double>(is);
  out.alpha = take<double>(is);
  out.field.psi.resize(out.field.grid.size());
  for (Index f = 0; f < out.field.grid.size(); ++f) {
    const double re = take<double>(is);
    const double im = take<double>(is);
    out.field.psi(f) = Complex(re, im);
  }
  return out;
}

void write_field_csv(const std::filesystem::path& path, const WaveField& field) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw std::runtime_error("csv write: cannot open " + path.string());
  const int d = field.grid.dims();
  for (int a = 0; a < d; ++a) os << "x_" << (a + 1) << ",";
  os << "re,im,rho\n";
  for (Index f = 0; f < field.grid.size(); ++f) {
    const Point x = field.grid.point_at(f);
    for (int a = 0; a < d; ++a) os << fmt(x(a)) << ",";
    const Complex v = field.psi(f);
    os << fmt(v.real()) << "," << fmt(v.imag()) << "," << fmt(std::norm(v))
       << "\n";
  }
}

TrajectoryWriter::TrajectoryWriter(const std::filesystem::path& path, int dims)
    : path_(path), dims_(dims) {
  buffer_ = "member_id,t";
  for (int a = 0; a < dims_; ++a) buffer_ += ",x_" + std::to_string(a + 1);
  buffer_ += ",branch_label,regularized_hits\n";
  flush();
}

void TrajectoryWriter::flush() {
  std::ofstream os(path_, std::ios::trunc);
  if (!os) throw std::runtime_error("trajectory write: cannot open " + path_.string());
  os << buffer_;
}

void TrajectoryWriter::add_sample(Real time, const Ensemble& ens) {
  for (std::size_t i = 0; i < ens.size(); ++i) {
    const Configuration& m = ens.members[i];
    buffer_ += std::to_string(ens.seeds[i]) + "," + fmt(time);
    for (int a = 0; a < dims_; ++a) buffer_ += "," + fmt(m.x(a));
    buffer_ += "," + std::to_string(m.branch) + "," +
               std::to_string(m.regularized_hits) + "\n";
  }
  flush();
}

void TrajectoryWriter::add_record(const MeasurementRecord& rec) {
  for (std::size_t k = 0; k < rec.sample_times.size(); ++k) {
    for (std::size_t i = 0; i < rec.members.size(); ++i) {
      const MemberOutcome& m = rec.members[i];
      buffer_ += std::to_string(m.id) + "," + fmt(rec.sample_times[k]);
      for (Index a = 0; a < rec.positions[k][i].size(); ++a)
        buffer_ += "," + fmt(rec.positions[k][i](a));
      buffer_ += "," + std::to_string(k < m.labels.size() ? m.labels[k] : 0) +
                 ",0\n";
    }
  }
  flush();
}

nlohmann::json equivariance_report_json(const EquivarianceReport& rep) {
  nlohmann::json j;
  j["time"] = rep.time;
  j["alpha"] = rep.alpha;
  j["member_count"] = rep.member_count;
  j["bins"] = rep.bins;
  j["l1"] = rep.l1;
  j["ks_per_axis"] = rep.ks;
  j["floor_mean"] = rep.floor_mean;
  j["floor_sd"] = rep.floor_sd;
  return j;
}

nlohmann::json measurement_record_json(const MeasurementRecord& rec) {
  nlohmann::json j;
  j["scenario_id"] = rec.scenario_id;
  j["alpha"] = rec.alpha;
  j["n_members"] = rec.n_members;
  j["seed"] = rec.seed;
  j["readout_threshold"] = rec.readout_threshold;
  j["sample_times"] = rec.sample_times;
  j["summary"] = {
      {"born_weight1", rec.born_weight1},
      {"freq1", rec.freq1},
      {"freq2", rec.freq2},
      {"undecided_fraction", rec.undecided_fraction},
      {"correspondence_rate", rec.correspondence_rate},
      {"agreement_rate", rec.agreement_rate},
      {"decided_both", rec.decided_both},
      {"separation_ok", rec.separation_ok},
  };
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& m : rec.members) {
    nlohmann::json row;
    row["id"] = m.id;
    row["x_initial"] = std::vector<Real>(m.x_initial.data(),
                                         m.x_initial.data() + m.x_initial.size());
    row["x_final"] = std::vector<Real>(m.x_final.data(),
                                       m.x_final.data() + m.x_final.size());
    row["pointer_final"] = m.pointer_final;
    row["pointer2_final"] = m.pointer2_final;
    row["outcome1"] = m.outcome1;
    row["outcome2"] = m.outcome2;
    row["initial_support"] = m.initial_support;
    rows.push_back(std::move(row));
  }
  j["members"] = std::move(rows);
  return j;
}

nlohmann::json subensemble_report_json(const SubEnsembleReport& rep) {
  nlohmann::json j;
  j["outcome"] = rep.outcome;
  j["members"] = rep.members;
  j["margin"] = rep.margin;
  j["times"] = rep.times;
  j["l1_vs_branch"] = rep.l1_vs_branch;
  j["l1_vs_full"] = rep.l1_vs_full;
  j["floor_mean"] = rep.floor_mean;
  j["floor_sd"] = rep.floor_sd;
  return j;
}

nlohmann::json crossing_report_json(const CrossingReport& rep) {
  nlohmann::json j;
  j["separation_ok"] = rep.separation_ok;
  j["members_crossed"] = rep.members_crossed;
  j["transitions"] = rep.transitions;
  j["fraction"] = rep.fraction;
  return j;
}

void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw std::runtime_error("json write: cannot open " + path.string());
  os << j.dump(2) << "\n";
}

std::string file_hash_hex(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("hash: cannot open " + path.string());
  std::string data((std::istreambuf_iterator<char>(is)),
                   std::istreambuf_iterator<char>());
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016" PRIx64, fnv1a64(data));
  return buf;
}

void write_manifest(const std::filesystem::path& dir,
                    const std::string& config_echo,
                    const std::vector<std::string>& artifact_names) {
  std::vector<std::string> names = artifact_names;
  std::sort(names.begin(), names.end());
  nlohmann::json j;
  j["tool"] = kToolName;
  j["version"] = kToolVersion;
  j["config"] = config_echo;
  nlohmann::json files = nlohmann::json::array();
  for (const std::string& name : names) {
    const auto p = dir / name;
    files.push_back({{"name", name},
                     {"bytes", std::filesystem::file_size(p)},
                     {"fnv1a64", file_hash_hex(p)}});
  }
  j["files"] = std::move(files);
  write_json(dir / "manifest.json", j);
}

}  // namespace hcsim
