#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "hcsim/config.hpp"
#include "hcsim/io.hpp"

#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>

using namespace hcsim;

namespace {

std::filesystem::path work_dir() {
  auto p = std::filesystem::temp_directory_path() / "hcsim_io_tests";
  std::filesystem::create_directories(p);
  return p;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream is(p, std::ios::binary);
  REQUIRE(bool(is));
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

void spit(const std::filesystem::path& p, const std::string& bytes) {
  std::ofstream os(p, std::ios::binary | std::ios::trunc);
  os.write(bytes.data(), std::streamsize(bytes.size()));
}

std::uint64_t fnv64(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

int count_lines(const std::string& s) {
  int n = 0;
  for (char c : s) n += c == '\n' ? 1 : 0;
  return n;
}

Point pt(std::initializer_list<Real> xs) {
  Point p(static_cast<Index>(xs.size()));
  Index i = 0;
  for (Real x : xs) p(i++) = x;
  return p;
}

const char* kFreePacketConfig = R"(
kind = "free_packet"  # packet drifting in a box

[grid]
extents = [[-16.0, 16.0]]
points = [256]

[physics]
masses = [1.0]
alpha = 1.0

[run]
dt = 2e-3
t_final = 2.0
snapshot_times = [0.5, 1.0]
ensemble_size = 500
seed = 7

[packet]
center = [-1.0]
sigma = [1.0]
wavevector = [0.5]
)";

}  // namespace

TEST_CASE("field snapshots round trip bitwise") {
  Grid g = build_grid({{-8.0, 8.0}, {-4.0, 4.0}}, {32, 16});
  WaveField f = random_smooth_field(g, 5);
  f.time = 0.35;
  const auto path = work_dir() / "roundtrip.hcf";
  write_field(path, f, 0.7);

  CHECK(slurp(path).substr(0, 4) == "HCF1");

  LoadedField back = read_field(path);
  CHECK(back.alpha == 0.7);
  CHECK(back.field.time == 0.35);
  REQUIRE(back.field.grid.dims() == 2);
  for (int a = 0; a < 2; ++a) {
    CHECK(back.field.grid.axis_points(a) == g.axis_points(a));
    CHECK(back.field.grid.lo(a) == g.lo(a));
    CHECK(back.field.grid.hi(a) == g.hi(a));
  }
  bool bitwise = true;
  for (Index i = 0; i < g.size(); ++i) bitwise &= back.field.psi(i) == f.psi(i);
  CHECK(bitwise);
}

TEST_CASE("field reader rejects damage") {
  const auto dir = work_dir();
  CHECK_THROWS_AS(read_field(dir / "no_such_file.hcf"), std::runtime_error);

  const auto bad_magic = dir / "bad_magic.hcf";
  spit(bad_magic, "NOPE" + std::string(64, '\0'));
  CHECK_THROWS_AS(read_field(bad_magic), std::runtime_error);

  Grid g = build_grid({{-8.0, 8.0}}, {16});
  WaveField f = gaussian_packet(g, pt({0.0}), pt({1.0}), pt({0.0}));
  const auto whole = dir / "whole.hcf";
  write_field(whole, f, 0.0);
  const std::string bytes = slurp(whole);
  const auto cut = dir / "cut.hcf";
  spit(cut, bytes.substr(0, bytes.size() / 2));
  CHECK_THROWS_AS(read_field(cut), std::runtime_error);
}

TEST_CASE("csv field table") {
  Grid g = build_grid({{-8.0, 8.0}}, {8});
  WaveField f = gaussian_packet(g, pt({0.0}), pt({0.8}), pt({0.0}));
  const auto path = work_dir() / "field.csv";
  write_field_csv(path, f);
  const std::string text = slurp(path);
  CHECK(text.rfind("x_1,re,im,rho\n", 0) == 0);
  CHECK(count_lines(text) == 1 + 8);

  std::istringstream rows(text);
  std::string header, first;
  std::getline(rows, header);
  std::getline(rows, first);
  double x, re, im, rho;
  char c;
  std::istringstream(first) >> x >> c >> re >> c >> im >> c >> rho;
  CHECK(x == -8.0);
  CHECK(rho == doctest::Approx(re * re + im * im).epsilon(1e-12));
}

TEST_CASE("trajectory table") {
  const auto path = work_dir() / "traj.csv";
  TrajectoryWriter w(path, 1);

  Ensemble ens;
  ens.seeds = {0, 1};
  ens.members.resize(2);
  ens.members[0].x = pt({-0.5});
  ens.members[1].x = pt({0.25});
  ens.members[1].branch = 2;
  w.add_sample(0.0, ens);
  ens.members[0].x = pt({-0.4});
  w.add_sample(0.5, ens);

  const std::string text = slurp(path);
  CHECK(text.rfind("member_id,t,x_1,branch_label,regularized_hits\n", 0) == 0);
  CHECK(count_lines(text) == 1 + 4);

  std::istringstream rows(text);
  std::string line;
  std::getline(rows, line);  // header
  std::getline(rows, line);
  CHECK(line.rfind("0,", 0) == 0);
  std::getline(rows, line);
  CHECK(line.rfind("1,", 0) == 0);
  CHECK(line.back() == '0');  // regularized_hits
}

TEST_CASE("json report shapes") {
  EquivarianceReport rep;
  rep.time = 0.5;
  rep.alpha = 1.0;
  rep.member_count = 10;
  rep.bins = {8};
  rep.l1 = 0.1;
  rep.ks = {0.02};
  nlohmann::json e = equivariance_report_json(rep);
  for (const char* key : {"time", "alpha", "member_count", "bins", "l1",
                          "ks_per_axis", "floor_mean", "floor_sd"})
    CHECK(e.contains(key));
  CHECK(e["ks_per_axis"].size() == 1);

  MeasurementRecord rec;
  rec.scenario_id = "abc";
  rec.n_members = 1;
  rec.members.resize(1);
  rec.members[0].x_initial = pt({-4.0, 0.1});
  rec.members[0].x_final = pt({-4.0, 2.1});
  rec.members[0].outcome1 = 1;
  nlohmann::json m = measurement_record_json(rec);
  for (const char* key :
       {"scenario_id", "alpha", "n_members", "seed", "readout_threshold",
        "sample_times", "summary", "members"})
    CHECK(m.contains(key));
  for (const char* key :
       {"born_weight1", "freq1", "freq2", "undecided_fraction",
        "correspondence_rate", "agreement_rate", "decided_both", "separation_ok"})
    CHECK(m["summary"].contains(key));
  CHECK(m["members"][0]["x_initial"].size() == 2);
  CHECK(m["members"][0]["outcome1"] == 1);

  SubEnsembleReport sub;
  sub.times = {0.8};
  sub.l1_vs_branch = {0.1};
  nlohmann::json s = subensemble_report_json(sub);
  for (const char* key : {"outcome", "members", "margin", "times",
                          "l1_vs_branch", "l1_vs_full", "floor_mean", "floor_sd"})
    CHECK(s.contains(key));

  CrossingReport cr;
  nlohmann::json c = crossing_report_json(cr);
  for (const char* key :
       {"separation_ok", "members_crossed", "transitions", "fraction"})
    CHECK(c.contains(key));
}

TEST_CASE("file hashes and the manifest") {
  const auto dir = work_dir() / "manifest_case";
  std::filesystem::create_directories(dir);

  const auto empty = dir / "empty.bin";
  spit(empty, "");
  CHECK(file_hash_hex(empty) == "cbf29ce484222325");

  const auto a = dir / "a.txt";
  spit(a, "hello");
  char want[17];
  std::snprintf(want, sizeof want, "%016llx",
                static_cast<unsigned long long>(fnv64("hello")));
  CHECK(file_hash_hex(a) == want);

  const auto b = dir / "b.txt";
  spit(b, "world");
  write_manifest(dir, "kind = \"demo\"\n", {"b.txt", "a.txt", "empty.bin"});
  const std::string once = slurp(dir / "manifest.json");
  write_manifest(dir, "kind = \"demo\"\n", {"a.txt", "empty.bin", "b.txt"});
  CHECK(slurp(dir / "manifest.json") == once);  // order independent, repeatable

  nlohmann::json j = nlohmann::json::parse(once);
  CHECK(j["tool"] == kToolName);
  CHECK(j["version"] == kToolVersion);
  CHECK(j["config"] == "kind = \"demo\"\n");
  REQUIRE(j["files"].size() == 3);
  CHECK(j["files"][0]["name"] == "a.txt");  // sorted
  CHECK(j["files"][0]["bytes"] == 5);
  CHECK(j["files"][0]["fnv1a64"] == want);
}

TEST_CASE("config text parsing") {
  ConfigTree tree = parse_config_text(
      "top = 3\n"
      "[alpha_sec]\n"
      "name = \"pack \\\"a\\\"\"  # trailing comment\n"
      "flag = false\n"
      "pairs = [[1, 2], [3, 4]]\n"
      "empty = []\n"
      "note = \"a#b\"\n");
  CHECK(tree.at("top").num == 3.0);
  CHECK(tree.at("alpha_sec.name").str == "pack \"a\"");
  CHECK(tree.at("alpha_sec.flag").kind == ConfigValue::Kind::kBoolean);
  CHECK(tree.at("alpha_sec.flag").boolean == false);
  CHECK(tree.at("alpha_sec.note").str == "a#b");
  const ConfigValue& pairs = tree.at("alpha_sec.pairs");
  REQUIRE(pairs.kind == ConfigValue::Kind::kArray);
  REQUIRE(pairs.array.size() == 2);
  CHECK(pairs.array[1].array[0].num == 3.0);
  CHECK(tree.at("alpha_sec.empty").array.empty());

  SUBCASE("malformed input names the line") {
    auto message_of = [](const std::string& text) {
      try {
        parse_config_text(text);
      } catch (const ConfigError& err) {
        return std::string(err.what());
      }
      return std::string();
    };
    CHECK(message_of("a = 1\na = 2\n").find("config line 2") == 0);
    CHECK(message_of("a = 1\na = 2\n").find("duplicate key 'a'") != std::string::npos);
    CHECK(message_of("\njust text\n").find("config line 2") == 0);
    CHECK(message_of("[sec\n").find("unterminated section") != std::string::npos);
    CHECK(message_of("a = \"x\n").find("unterminated string") != std::string::npos);
    CHECK(message_of("a = [1, 2\n").find("unterminated array") != std::string::npos);
    CHECK(message_of("a = 1 2\n").find("trailing characters") != std::string::npos);
    CHECK(message_of("a = banana\n").find("cannot parse value") != std::string::npos);
    CHECK(message_of("bad-key = 1\n").find("bad key name") != std::string::npos);
  }
}

TEST_CASE("scenario schema") {
  ScenarioConfig cfg = scenario_from_tree(parse_config_text(kFreePacketConfig));
  CHECK(cfg.kind == "free_packet");
  REQUIRE(cfg.extents.size() == 1);
  CHECK(cfg.extents[0].first == -16.0);
  CHECK(cfg.points[0] == 256);
  CHECK(cfg.params.alpha == 1.0);
  CHECK(cfg.params.hbar == 1.0);  // default
  CHECK(cfg.center(0) == -1.0);
  CHECK(cfg.wavevector(0) == 0.5);
  CHECK(cfg.dt == 2e-3);
  CHECK(cfg.snapshot_times == std::vector<Real>{0.5, 1.0});
  CHECK(cfg.ensemble_size == 500);
  CHECK(cfg.seed == 7);
  CHECK(cfg.substeps == 1);               // default
  CHECK(cfg.bins == std::vector<Index>{64});  // default points / 4
  CHECK(cfg.directory == "out");
  CHECK(cfg.formats == std::vector<std::string>{"csv", "hcf", "json"});
  CHECK(!cfg.echo.empty());

  SUBCASE("echo is canonical over input ordering") {
    std::string reordered =
        "kind = \"free_packet\"\n"
        "[packet]\nwavevector = [0.5]\nsigma = [1.0]\ncenter = [-1.0]\n"
        "[run]\nseed = 7\nensemble_size = 500\nsnapshot_times = [0.5, 1.0]\n"
        "t_final = 2.0\ndt = 2e-3\n"
        "[physics]\nalpha = 1.0\nmasses = [1.0]\n"
        "[grid]\npoints = [256]\nextents = [[-16.0, 16.0]]\n";
    ScenarioConfig other = scenario_from_tree(parse_config_text(reordered));
    CHECK(other.echo == cfg.echo);
  }
}

TEST_CASE("scenario schema rejects bad trees") {
  auto expect_error = [](const std::string& text, const std::string& needle) {
    try {
      scenario_from_tree(parse_config_text(text));
      FAIL_CHECK("expected rejection containing '" << needle << "'");
    } catch (const ConfigError& err) {
      CHECK(std::string(err.what()).find(needle) != std::string::npos);
    }
  };

  std::string base(kFreePacketConfig);
  // the appended key lands in the trailing [packet] section
  expect_error(base + "extra = 9\n", "unknown key 'packet.extra'");
  expect_error(base + "[sampling]\nrate = 2\n", "unknown key 'sampling.rate'");
  expect_error(base + "[run]\nbogus = 1\n", "unknown key 'run.bogus'");

  std::string no_alpha = base;
  no_alpha.replace(no_alpha.find("alpha = 1.0"), 11, "# alpha gone");
  expect_error(no_alpha, "missing required key 'physics.alpha'");

  std::string stringy_alpha = base;
  stringy_alpha.replace(stringy_alpha.find("alpha = 1.0"), 11, "alpha = \"one\"");
  expect_error(stringy_alpha, "must be a number");

  std::string ragged = base;
  ragged.replace(ragged.find("points = [256]"), 14, "points = [256, 64]");
  expect_error(ragged, "matching length");

  std::string fractional = base;
  fractional.replace(fractional.find("points = [256]"), 14, "points = [256.5]");
  expect_error(fractional, "non-negative integer");

  std::string bad_kind = base;
  bad_kind.replace(bad_kind.find("\"free_packet\""), 13, "\"wild_packet\"");
  expect_error(bad_kind, "unknown kind 'wild_packet'");

  expect_error(base + "\n[output]\nformats = [\"yaml\"]\n", "csv, hcf, or json");
  expect_error(base + "\n[run2]\nx = 1\n", "unknown key");
}

TEST_CASE("measurement scenario configs") {
  const std::string text = R"(
kind = "two_packet_measurement"

[grid]
extents = [[-12.0, 12.0], [-5.0, 5.0]]
points = [256, 64]

[physics]
masses = [10.0, 25.0]
alpha = 1.0

[run]
dt = 1e-3
t_final = 1.6
ensemble_size = 100
seed = 3

[measurement]
c1 = 0.6
c2 = 0.8
packet_offset = 4.5
packet_sigma = 0.6
pointer_sigma = 0.4
pointer_shift = 2.0
windows = [[0.2, 0.6]]
readout_time = 0.8
post_sample_times = [1.2, 1.6]
)";
  ScenarioConfig cfg = scenario_from_tree(parse_config_text(text));
  CHECK(cfg.kind == "two_packet_measurement");
  CHECK(cfg.measurement.dims() == 2);
  CHECK(cfg.measurement.c2 == 0.8);
  CHECK(cfg.measurement.dt == 1e-3);       // propagated from [run]
  CHECK(cfg.measurement.t_final == 1.6);
  CHECK(cfg.measurement.windows.size() == 1);
  CHECK(cfg.measurement.readout_fraction == 0.5);  // default
  CHECK(cfg.measurement.params.masses(1) == 25.0);

  SUBCASE("window counts are tied to the kind") {
    std::string two = text;
    two.replace(two.find("windows = [[0.2, 0.6]]"), 22,
                "windows = [[0.2, 0.3], [0.4, 0.5]]");
    CHECK_THROWS_AS(scenario_from_tree(parse_config_text(two)), ConfigError);

    std::string repeated = two;
    repeated.replace(repeated.find("\"two_packet_measurement\""), 24,
                     "\"repeated_measurement\"");
    // still 2D: the second pointer has no axis
    CHECK_THROWS_AS(scenario_from_tree(parse_config_text(repeated)), ConfigError);
  }
}

TEST_CASE("config files load from disk") {
  const auto dir = work_dir();
  const auto good = dir / "good.toml";
  spit(good, kFreePacketConfig);
  ScenarioConfig cfg = load_scenario_config(good);
  CHECK(cfg.kind == "free_packet");
  CHECK_THROWS_AS(load_scenario_config(dir / "absent.toml"), ConfigError);

  CHECK(config_schema_text().find("free_packet") != std::string::npos);
  CHECK(config_schema_text().find("[measurement]") != std::string::npos);
}
