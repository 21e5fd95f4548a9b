#include "hcsim/config.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

namespace hcsim {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

[[noreturn]] void fail(int line, const std::string& what) {
  throw ConfigError("config line " + std::to_string(line) + ": " + what);
}

bool key_ok(const std::string& k) {
  if (k.empty()) return false;
  for (char c : k)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') return false;
  return true;
}

// Cuts a # comment, but not inside a quoted string.
std::string strip_comment(const std::string& s) {
  bool quoted = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    char c = s[i];
    if (c == '"' && (i == 0 || s[i - 1] != '\\')) quoted = !quoted;
    if (c == '#' && !quoted) return s.substr(0, i);
  }
  return s;
}

ConfigValue parse_value(const std::string& text, std::size_t& pos, int line);

void skip_ws(const std::string& text, std::size_t& pos) {
  while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
}

ConfigValue parse_string(const std::string& text, std::size_t& pos, int line) {
  ConfigValue v;
  v.kind = ConfigValue::Kind::kString;
  ++pos;  // opening quote
  while (pos < text.size() && text[pos] != '"') {
    if (text[pos] == '\\') {
      ++pos;
      if (pos >= text.size()) fail(line, "dangling escape in string");
      switch (text[pos]) {
        case '"': v.str += '"'; break;
        case '\\': v.str += '\\'; break;
        case 'n': v.str += '\n'; break;
        case 't': v.str += '\t'; break;
        default: fail(line, std::string("unsupported escape \\") + text[pos]);
      }
    } else {
      v.str += text[pos];
    }
    ++pos;
  }
  if (pos >= text.size()) fail(line, "unterminated string");
  ++pos;  // closing quote
  return v;
}

ConfigValue parse_array(const std::string& text, std::size_t& pos, int line) {
  ConfigValue v;
  v.kind = ConfigValue::Kind::kArray;
  ++pos;  // [
  skip_ws(text, pos);
  if (pos < text.size() && text[pos] == ']') {
    ++pos;
    return v;
  }
  while (true) {
    v.array.push_back(parse_value(text, pos, line));
    skip_ws(text, pos);
    if (pos >= text.size()) fail(line, "unterminated array");
    if (text[pos] == ',') {
      ++pos;
      skip_ws(text, pos);
      if (pos < text.size() && text[pos] == ']') { ++pos; return v; }
      continue;
    }
    if (text[pos] == ']') { ++pos; return v; }
    fail(line, "expected ',' or ']' in array");
  }
}

ConfigValue parse_value(const std::string& text, std::size_t& pos, int line) {
  skip_ws(text, pos);
  if (pos >= text.size()) fail(line, "missing value");
  char c = text[pos];
  if (c == '"') return parse_string(text, pos, line);
  if (c == '[') return parse_array(text, pos, line);
  std::size_t start = pos;
  while (pos < text.size() && text[pos] != ',' && text[pos] != ']' &&
         !std::isspace(static_cast<unsigned char>(text[pos])))
    ++pos;
  std::string token = text.substr(start, pos - start);
  ConfigValue v;
  if (token == "true" || token == "false") {
    v.kind = ConfigValue::Kind::kBoolean;
    v.boolean = (token == "true");
    return v;
  }
  char* end = nullptr;
  v.num = std::strtod(token.c_str(), &end);
  if (end == token.c_str() || *end != '\0')
    fail(line, "cannot parse value '" + token + "'");
  v.kind = ConfigValue::Kind::kNumber;
  return v;
}

std::string kind_name(ConfigValue::Kind k) {
  switch (k) {
    case ConfigValue::Kind::kString: return "string";
    case ConfigValue::Kind::kNumber: return "number";
    case ConfigValue::Kind::kBoolean: return "boolean";
    case ConfigValue::Kind::kArray: return "array";
  }
  return "?";
}

// Tracks which keys the schema consumed so leftovers can be reported.
class KeyReader {
 public:
  explicit KeyReader(const ConfigTree& tree) : tree_(tree) {}

  bool has(const std::string& key) const { return tree_.count(key) != 0; }

  const ConfigValue& require(const std::string& key) {
    auto it = tree_.find(key);
    if (it == tree_.end()) throw ConfigError("missing required key '" + key + "'");
    consumed_.insert(key);
    return it->second;
  }

  const ConfigValue* optional(const std::string& key) {
    auto it = tree_.find(key);
    if (it == tree_.end()) return nullptr;
    consumed_.insert(key);
    return &it->second;
  }

  void finish() const {
    for (const auto& [key, value] : tree_)
      if (!consumed_.count(key))
        throw ConfigError("unknown key '" + key + "'");
  }

 private:
  const ConfigTree& tree_;
  std::set<std::string> consumed_;
};

Real as_number(const ConfigValue& v, const std::string& key) {
  if (v.kind != ConfigValue::Kind::kNumber)
    throw ConfigError("key '" + key + "' must be a number, got " + kind_name(v.kind));
  return v.num;
}

Index as_count(const ConfigValue& v, const std::string& key) {
  Real x = as_number(v, key);
  auto n = static_cast<Index>(std::llround(x));
  if (std::abs(x - static_cast<Real>(n)) > 1e-9 || n < 0)
    throw ConfigError("key '" + key + "' must be a non-negative integer");
  return n;
}

std::string as_string(const ConfigValue& v, const std::string& key) {
  if (v.kind != ConfigValue::Kind::kString)
    throw ConfigError("key '" + key + "' must be a string, got " + kind_name(v.kind));
  return v.str;
}

std::vector<Real> as_number_list(const ConfigValue& v, const std::string& key) {
  if (v.kind != ConfigValue::Kind::kArray)
    throw ConfigError("key '" + key + "' must be an array, got " + kind_name(v.kind));
  std::vector<Real> out;
  for (const auto& e : v.array) out.push_back(as_number(e, key));
  return out;
}

std::vector<Index> as_count_list(const ConfigValue& v, const std::string& key) {
  if (v.kind != ConfigValue::Kind::kArray)
    throw ConfigError("key '" + key + "' must be an array, got " + kind_name(v.kind));
  std::vector<Index> out;
  for (const auto& e : v.array) out.push_back(as_count(e, key));
  return out;
}

std::vector<std::pair<Real, Real>> as_pair_list(const ConfigValue& v,
                                                const std::string& key) {
  if (v.kind != ConfigValue::Kind::kArray)
    throw ConfigError("key '" + key + "' must be an array of [a, b] pairs");
  std::vector<std::pair<Real, Real>> out;
  for (const auto& e : v.array) {
    if (e.kind != ConfigValue::Kind::kArray || e.array.size() != 2)
      throw ConfigError("key '" + key + "' entries must be [a, b] pairs");
    out.emplace_back(as_number(e.array[0], key), as_number(e.array[1], key));
  }
  return out;
}

Point as_point(const ConfigValue& v, const std::string& key, int dims) {
  auto list = as_number_list(v, key);
  if (static_cast<int>(list.size()) != dims)
    throw ConfigError("key '" + key + "' needs " + std::to_string(dims) +
                      " entries, got " + std::to_string(list.size()));
  Point p(dims);
  for (int a = 0; a < dims; ++a) p(a) = list[a];
  return p;
}

void format_value(std::ostream& os, const ConfigValue& v) {
  switch (v.kind) {
    case ConfigValue::Kind::kString: os << '"' << v.str << '"'; break;
    case ConfigValue::Kind::kBoolean: os << (v.boolean ? "true" : "false"); break;
    case ConfigValue::Kind::kNumber: {
      char buf[40];
      std::snprintf(buf, sizeof buf, "%.17g", v.num);
      os << buf;
      break;
    }
    case ConfigValue::Kind::kArray: {
      os << '[';
      for (std::size_t i = 0; i < v.array.size(); ++i) {
        if (i) os << ", ";
        format_value(os, v.array[i]);
      }
      os << ']';
      break;
    }
  }
}

std::string canonical_echo(const ConfigTree& tree) {
  std::ostringstream os;
  for (const auto& [key, value] : tree) {  // std::map iterates sorted
    os << key << " = ";
    format_value(os, value);
    os << '\n';
  }
  return os.str();
}

}  // namespace

ConfigTree parse_config_text(const std::string& text) {
  ConfigTree tree;
  std::istringstream in(text);
  std::string raw, section;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = trim(strip_comment(raw));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail(line_no, "unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      if (!key_ok(section)) fail(line_no, "bad section name '" + section + "'");
      continue;
    }
    auto eq = line.find('=');
    if (eq == std::string::npos) fail(line_no, "expected 'key = value'");
    std::string key = trim(line.substr(0, eq));
    if (!key_ok(key)) fail(line_no, "bad key name '" + key + "'");
    std::string full = section.empty() ? key : section + "." + key;
    if (tree.count(full)) fail(line_no, "duplicate key '" + full + "'");
    std::string rest = trim(line.substr(eq + 1));
    std::size_t pos = 0;
    ConfigValue v = parse_value(rest, pos, line_no);
    skip_ws(rest, pos);
    if (pos != rest.size()) fail(line_no, "trailing characters after value");
    tree[full] = v;
  }
  return tree;
}

ConfigTree parse_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

namespace {

void read_grid_physics(KeyReader& r, ScenarioConfig& cfg) {
  cfg.extents = as_pair_list(r.require("grid.extents"), "grid.extents");
  cfg.points = as_count_list(r.require("grid.points"), "grid.points");
  if (cfg.extents.size() != cfg.points.size())
    throw ConfigError("grid.extents and grid.points must have matching length");
  int dims = static_cast<int>(cfg.extents.size());

  cfg.params.hbar = 1.0;
  if (const auto* v = r.optional("physics.hbar"))
    cfg.params.hbar = as_number(*v, "physics.hbar");
  cfg.params.masses = as_point(r.require("physics.masses"), "physics.masses", dims);
  cfg.params.alpha = as_number(r.require("physics.alpha"), "physics.alpha");
  cfg.params.validate(dims);
}

void read_run(KeyReader& r, ScenarioConfig& cfg) {
  cfg.dt = as_number(r.require("run.dt"), "run.dt");
  cfg.t_final = as_number(r.require("run.t_final"), "run.t_final");
  if (const auto* v = r.optional("run.snapshot_times"))
    cfg.snapshot_times = as_number_list(*v, "run.snapshot_times");
  cfg.ensemble_size = 1000;
  if (const auto* v = r.optional("run.ensemble_size"))
    cfg.ensemble_size = static_cast<std::size_t>(as_count(*v, "run.ensemble_size"));
  cfg.seed = 1;
  if (const auto* v = r.optional("run.seed"))
    cfg.seed = static_cast<std::uint64_t>(as_count(*v, "run.seed"));
  cfg.substeps = 1;
  if (const auto* v = r.optional("run.substeps"))
    cfg.substeps = static_cast<int>(as_count(*v, "run.substeps"));
  if (cfg.substeps < 1) throw ConfigError("run.substeps must be at least 1");
  if (const auto* v = r.optional("run.bins")) {
    cfg.bins = as_count_list(*v, "run.bins");
  } else {
    for (Index n : cfg.points) cfg.bins.push_back(std::max<Index>(n / 4, 1));
  }
  if (cfg.bins.size() != cfg.points.size())
    throw ConfigError("run.bins must have one entry per axis");
}

void read_output(KeyReader& r, ScenarioConfig& cfg) {
  if (const auto* v = r.optional("output.directory"))
    cfg.directory = as_string(*v, "output.directory");
  if (const auto* v = r.optional("output.formats")) {
    cfg.formats.clear();
    if (v->kind != ConfigValue::Kind::kArray)
      throw ConfigError("output.formats must be an array of strings");
    for (const auto& e : v->array) {
      std::string f = as_string(e, "output.formats");
      if (f != "csv" && f != "hcf" && f != "json")
        throw ConfigError("output.formats entries must be csv, hcf, or json; got '" + f + "'");
      cfg.formats.push_back(f);
    }
  }
}

void read_packet(KeyReader& r, ScenarioConfig& cfg) {
  int dims = static_cast<int>(cfg.extents.size());
  cfg.center = as_point(r.require("packet.center"), "packet.center", dims);
  cfg.sigma = as_point(r.require("packet.sigma"), "packet.sigma", dims);
  cfg.wavevector = Point::Zero(dims);
  if (const auto* v = r.optional("packet.wavevector"))
    cfg.wavevector = as_point(*v, "packet.wavevector", dims);
}

void read_harmonic(KeyReader& r, ScenarioConfig& cfg) {
  int dims = static_cast<int>(cfg.extents.size());
  cfg.omega = as_point(r.require("potential.omega"), "potential.omega", dims);
  cfg.potential_center = Point::Zero(dims);
  if (const auto* v = r.optional("potential.center"))
    cfg.potential_center = as_point(*v, "potential.center", dims);
}

void read_measurement(KeyReader& r, ScenarioConfig& cfg) {
  MeasurementScenario& m = cfg.measurement;
  m.extents = cfg.extents;
  m.points = cfg.points;
  m.params = cfg.params;
  m.dt = cfg.dt;
  m.substeps = cfg.substeps;
  m.t_final = cfg.t_final;
  m.bins = cfg.bins;

  m.c1 = as_number(r.require("measurement.c1"), "measurement.c1");
  m.c2 = as_number(r.require("measurement.c2"), "measurement.c2");
  m.packet_offset = as_number(r.require("measurement.packet_offset"),
                              "measurement.packet_offset");
  m.packet_sigma = as_number(r.require("measurement.packet_sigma"),
                             "measurement.packet_sigma");
  m.pointer_sigma = as_number(r.require("measurement.pointer_sigma"),
                              "measurement.pointer_sigma");
  m.pointer_shift = as_number(r.require("measurement.pointer_shift"),
                              "measurement.pointer_shift");
  if (const auto* v = r.optional("measurement.profile_width"))
    m.profile_width = as_number(*v, "measurement.profile_width");
  m.windows = as_pair_list(r.require("measurement.windows"), "measurement.windows");
  m.readout_time = as_number(r.require("measurement.readout_time"),
                             "measurement.readout_time");
  if (const auto* v = r.optional("measurement.post_sample_times"))
    m.post_sample_times = as_number_list(*v, "measurement.post_sample_times");
  if (const auto* v = r.optional("measurement.readout_fraction"))
    m.readout_fraction = as_number(*v, "measurement.readout_fraction");
  if (const auto* v = r.optional("measurement.eps_branch"))
    m.eps_branch = as_number(*v, "measurement.eps_branch");
  if (const auto* v = r.optional("measurement.support_threshold"))
    m.support_threshold = as_number(*v, "measurement.support_threshold");
}

}  // namespace

ScenarioConfig scenario_from_tree(const ConfigTree& tree) {
  ScenarioConfig cfg;
  KeyReader r(tree);

  cfg.kind = as_string(r.require("kind"), "kind");
  static const std::set<std::string> kinds = {
      "free_packet", "harmonic", "custom", "two_packet_measurement",
      "repeated_measurement"};
  if (!kinds.count(cfg.kind))
    throw ConfigError("unknown kind '" + cfg.kind + "'");

  read_grid_physics(r, cfg);
  read_run(r, cfg);
  read_output(r, cfg);

  if (cfg.kind == "free_packet") {
    read_packet(r, cfg);
    cfg.potential_preset = "free";
  } else if (cfg.kind == "harmonic") {
    read_packet(r, cfg);
    read_harmonic(r, cfg);
    cfg.potential_preset = "harmonic";
  } else if (cfg.kind == "custom") {
    read_packet(r, cfg);
    cfg.potential_preset = as_string(r.require("potential.preset"), "potential.preset");
    if (cfg.potential_preset == "harmonic") {
      read_harmonic(r, cfg);
    } else if (cfg.potential_preset != "free") {
      throw ConfigError("potential.preset must be free or harmonic, got '" +
                        cfg.potential_preset + "'");
    }
  } else {
    read_measurement(r, cfg);
    if (cfg.kind == "two_packet_measurement" && cfg.measurement.windows.size() != 1)
      throw ConfigError("two_packet_measurement needs exactly one coupling window");
    if (cfg.kind == "repeated_measurement") {
      if (cfg.measurement.windows.size() != 2)
        throw ConfigError("repeated_measurement needs exactly two coupling windows");
      if (cfg.extents.size() < 3)
        throw ConfigError("repeated_measurement needs a third axis for the second pointer");
    }
  }

  r.finish();
  cfg.echo = canonical_echo(tree);
  return cfg;
}

ScenarioConfig load_scenario_config(const std::filesystem::path& path) {
  return scenario_from_tree(parse_config_file(path));
}

std::string config_schema_text() {
  return R"(Scenario config (TOML subset: [section], key = value, # comments,
strings, numbers, booleans, arrays).  Unknown keys are rejected.

kind = "free_packet" | "harmonic" | "custom" | "two_packet_measurement" | "repeated_measurement"

[grid]
extents = [[lo, hi], ...]        one pair per axis (1 to 3 axes)
points  = [n, ...]               power-of-two points per axis, n >= 8

[physics]
hbar   = 1.0                     optional, default 1
masses = [m, ...]                one per axis
alpha  = 0.0                     guidance family parameter, >= 0

[run]
dt             = 1e-3            field time step
t_final        = 1.0
snapshot_times = [t, ...]        optional extra sample times
ensemble_size  = 1000            optional
seed           = 1               optional
substeps       = 1               optional guidance substeps per field step
bins           = [b, ...]        optional histogram bins per axis (default points/4)

[output]
directory = "out"                optional
formats   = ["csv", "hcf", "json"]   optional subset

[packet]                         free_packet / harmonic / custom kinds
center     = [x, ...]
sigma      = [s, ...]
wavevector = [k, ...]            optional, default 0

[potential]                      harmonic kind, or custom with preset
preset = "free" | "harmonic"     custom kind only
omega  = [w, ...]                harmonic only
center = [x, ...]                optional, default 0

[measurement]                    measurement kinds; grid axis 0 is the system,
                                 axes 1.. are pointers
c1 = 0.6                         component amplitudes (normalized internally)
c2 = 0.8
packet_offset  = 4.5             system packets sit at -offset and +offset
packet_sigma   = 0.6
pointer_sigma  = 0.4
pointer_shift  = 2.0             pointer displacement magnitude at readout
profile_width  = 1.0             detector profile transition width
windows        = [[on, off], ...]  coupling windows; one per measurement
readout_time   = 0.8
post_sample_times = [t, ...]     optional
readout_fraction  = 0.5          optional decision threshold fraction
eps_branch        = 1e-8         optional branch support threshold
support_threshold = 1e-10        optional initial disjointness threshold
)";
}

}  // namespace hcsim
