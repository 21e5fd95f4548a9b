#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "hcsim/config.hpp"
#include "hcsim/io.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

using namespace hcsim;
namespace fs = std::filesystem;

namespace {

fs::path work_dir() {
  auto p = fs::temp_directory_path() / "hcsim_cli_tests";
  fs::create_directories(p);
  return p;
}

int run_cli(const std::string& args, const fs::path& log) {
  std::string cmd = std::string("\"") + HCSIM_CLI_PATH + "\" " + args + " > \"" +
                    log.string() + "\" 2>&1";
  int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

void spit(const fs::path& p, const std::string& text) {
  std::ofstream os(p, std::ios::trunc);
  os << text;
}

const char* kSmallScenario = R"(
kind = "free_packet"

[grid]
extents = [[-16.0, 16.0]]
points = [256]

[physics]
masses = [1.0]
alpha = 1.0

[run]
dt = 2e-3
t_final = 0.5
snapshot_times = [0.25]
ensemble_size = 300
seed = 5

[packet]
center = [-1.0]
sigma = [1.0]
wavevector = [0.5]
)";

}  // namespace

TEST_CASE("schema dump") {
  const auto log = work_dir() / "schema.txt";
  CHECK(run_cli("dump-schema", log) == 0);
  const std::string text = slurp(log);
  CHECK(text.find("kind = ") != std::string::npos);
  CHECK(text.find("[grid]") != std::string::npos);
  CHECK(text.find("[measurement]") != std::string::npos);
}

TEST_CASE("run writes the advertised artifacts") {
  const auto dir = work_dir();
  const auto cfg = dir / "small.toml";
  spit(cfg, kSmallScenario);
  const auto out = dir / "small_out";
  const auto log = dir / "small.log";
  REQUIRE(run_cli("run \"" + cfg.string() + "\" --out \"" + out.string() + "\"",
                  log) == 0);
  CHECK(slurp(log).find("artifacts written to") != std::string::npos);

  for (const char* name : {"manifest.json", "equivariance.json",
                           "trajectories.csv", "field_final.csv",
                           "field_00.hcf", "field_01.hcf"})
    CHECK(fs::exists(out / name));

  // the manifest inventory matches what is actually on disk
  nlohmann::json manifest = nlohmann::json::parse(slurp(out / "manifest.json"));
  CHECK(manifest["tool"] == "hcsim");
  CHECK(!manifest["config"].get<std::string>().empty());
  REQUIRE(manifest["files"].size() >= 5);
  for (const auto& entry : manifest["files"]) {
    const fs::path p = out / entry["name"].get<std::string>();
    REQUIRE(fs::exists(p));
    CHECK(fs::file_size(p) == entry["bytes"].get<std::uintmax_t>());
    CHECK(file_hash_hex(p) == entry["fnv1a64"].get<std::string>());
  }

  // two snapshots were requested: 0.25 and the final time
  LoadedField snap = read_field(out / "field_01.hcf");
  CHECK(snap.field.time == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(snap.alpha == 1.0);

  nlohmann::json eq = nlohmann::json::parse(slurp(out / "equivariance.json"));
  REQUIRE(eq["reports"].size() == 2);
  for (const auto& rep : eq["reports"])
    CHECK(rep["l1"].get<double>() <= 2.0 * rep["floor_mean"].get<double>());

  SUBCASE("identical inputs reproduce every byte") {
    const auto out2 = dir / "small_out_again";
    REQUIRE(run_cli("run \"" + cfg.string() + "\" --out \"" + out2.string() +
                        "\"",
                    dir / "small2.log") == 0);
    CHECK(slurp(out2 / "manifest.json") == slurp(out / "manifest.json"));
    CHECK(slurp(out2 / "equivariance.json") == slurp(out / "equivariance.json"));
  }
}

TEST_CASE("bundled demo config runs") {
  const auto dir = work_dir();
  const auto out = dir / "demo_out";
  const std::string cfg = std::string(HCSIM_CONFIG_DIR) + "/equivariance_free.toml";
  REQUIRE(run_cli("run \"" + cfg + "\" --out \"" + out.string() + "\"",
                  dir / "demo.log") == 0);
  CHECK(fs::exists(out / "manifest.json"));

  // the other bundled configs must at least satisfy the schema
  for (const char* name : {"equivariance_harmonic.toml",
                           "measurement_default.toml",
                           "repeated_default.toml"}) {
    CAPTURE(name);
    ScenarioConfig parsed =
        load_scenario_config(std::string(HCSIM_CONFIG_DIR) + "/" + name);
    CHECK(!parsed.kind.empty());
  }
}

TEST_CASE("exit codes") {
  const auto dir = work_dir();
  const auto log = dir / "codes.log";

  SUBCASE("config mistakes exit 2") {
    const auto bad = dir / "bad.toml";
    spit(bad, std::string(kSmallScenario) + "typo_key = 1\n");
    CHECK(run_cli("run \"" + bad.string() + "\"", log) == 2);
    CHECK(slurp(log).find("config error:") != std::string::npos);
    CHECK(slurp(log).find("unknown key") != std::string::npos);

    const auto broken = dir / "broken.toml";
    spit(broken, "kind \"no equals sign\"\n");
    CHECK(run_cli("run \"" + broken.string() + "\"", log) == 2);

    CHECK(run_cli("run \"" + (dir / "absent.toml").string() + "\"", log) == 2);
    CHECK(run_cli("verify not_a_suite", log) == 2);
    CHECK(run_cli("run", log) == 2);           // missing argument
    CHECK(run_cli("frobnicate", log) == 2);    // unknown subcommand
  }

  SUBCASE("runtime failures exit 1") {
    const auto off_grid = dir / "off_grid.toml";
    std::string text(kSmallScenario);
    text.replace(text.find("center = [-1.0]"), 15, "center = [30.0]");
    spit(off_grid, text);
    CHECK(run_cli("run \"" + off_grid.string() + "\"", log) == 1);
    CHECK(slurp(log).find("error:") != std::string::npos);
  }

  SUBCASE("verify plumbing passes a real suite") {
    CHECK(run_cli("verify hygiene", log) == 0);
    const std::string text = slurp(log);
    CHECK(text.find("[PASS] hygiene") != std::string::npos);
  }
}
