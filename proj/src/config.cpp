#include "fdmimo/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>

#include "fdmimo/error.hpp"

namespace fdmimo {
namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double parse_double(std::string_view key, std::string_view v) {
  double out = 0.0;
  const auto* end = v.data() + v.size();
  const auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || ptr != end || !std::isfinite(out)) {
    throw Error(ErrorCode::ParseError, std::string(key) + ": not a number: '" + std::string(v) + "'");
  }
  return out;
}

template <typename Int>
Int parse_int(std::string_view key, std::string_view v) {
  Int out = 0;
  const auto* end = v.data() + v.size();
  const auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || ptr != end) {
    throw Error(ErrorCode::ParseError,
                std::string(key) + ": not an integer: '" + std::string(v) + "'");
  }
  return out;
}

bool parse_bool(std::string_view key, std::string_view v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw Error(ErrorCode::ParseError, std::string(key) + ": expected true/false, got '" +
                                         std::string(v) + "'");
}

struct KeyDef {
  const char* name;
  std::function<void(ScenarioConfig&, std::string_view key, std::string_view value)> set;
  std::function<std::string(const ScenarioConfig&)> get;
};

// Shortest decimal degree value that parses back to exactly `rad`.
std::string format_degrees(double rad) {
  double d = rad / kDeg;
  for (int step = 0; step < 8; ++step) {
    for (double cand : {d, std::nextafter(d, HUGE_VAL), std::nextafter(d, -HUGE_VAL)}) {
      const std::string s = format_double(cand);
      if (std::strtod(s.c_str(), nullptr) * kDeg == rad) return s;
    }
    d = std::nextafter(d, rad > d * kDeg ? HUGE_VAL : -HUGE_VAL);
  }
  return format_double(rad / kDeg);
}

#define FD_INT(key, field)                                                              \
  KeyDef {                                                                              \
    key, [](ScenarioConfig& c, std::string_view k, std::string_view v) {                \
      c.field = parse_int<int>(k, v);                                                   \
    },                                                                                  \
        [](const ScenarioConfig& c) { return std::to_string(c.field); }                 \
  }
#define FD_REAL(key, field)                                                             \
  KeyDef {                                                                              \
    key, [](ScenarioConfig& c, std::string_view k, std::string_view v) {                \
      c.field = parse_double(k, v);                                                     \
    },                                                                                  \
        [](const ScenarioConfig& c) { return format_double(c.field); }                  \
  }
#define FD_DEG(key, field)                                                              \
  KeyDef {                                                                              \
    key, [](ScenarioConfig& c, std::string_view k, std::string_view v) {                \
      c.field = parse_double(k, v) * kDeg;                                              \
    },                                                                                  \
        [](const ScenarioConfig& c) { return format_degrees(c.field); }           \
  }

const std::vector<KeyDef>& key_table() {
  static const std::vector<KeyDef> table{
      FD_INT("array.n_v", n_v),
      FD_INT("array.n_h", n_h),
      FD_REAL("array.spacing_wl", spacing_wl),
      FD_INT("layout.cells", cells),
      FD_REAL("layout.r_cell", r_cell),
      FD_REAL("layout.h_bs", h_bs),
      FD_REAL("layout.d_min", d_min),
      FD_REAL("layout.d_ref", d_ref),
      KeyDef{"layout.restrict_dmax",
             [](ScenarioConfig& c, std::string_view k, std::string_view v) {
               c.restrict_dmax = parse_bool(k, v);
             },
             [](const ScenarioConfig& c) { return std::string(c.restrict_dmax ? "true" : "false"); }},
      KeyDef{"channel.model",
             [](ScenarioConfig& c, std::string_view k, std::string_view v) {
               if (v == "one_ring") {
                 c.model = ChannelModel::OneRing;
               } else if (v == "single_path") {
                 c.model = ChannelModel::SinglePath;
               } else {
                 throw Error(ErrorCode::RangeError, std::string(k) + ": unknown model '" +
                                                        std::string(v) + "'");
               }
             },
             [](const ScenarioConfig& c) {
               return std::string(c.model == ChannelModel::OneRing ? "one_ring" : "single_path");
             }},
      FD_DEG("channel.delta_a", delta_a),
      FD_DEG("channel.delta_e", delta_e),
      FD_REAL("channel.pl_exponent", pl_exponent),
      FD_REAL("channel.carrier_hz", carrier_hz),
      FD_REAL("budget.tx_power_dbm", tx_power_dbm),
      FD_REAL("budget.bandwidth_hz", bandwidth_hz),
      FD_REAL("budget.noise_figure_db", noise_figure_db),
      FD_INT("run.K", k),
      FD_INT("run.pool", pool),
      FD_INT("run.trials", trials),
      FD_INT("run.cov_realizations", cov_realizations),
      FD_REAL("run.eps_rel", eps_rel),
      KeyDef{"run.delta_ext",
             [](ScenarioConfig& c, std::string_view k, std::string_view v) {
               if (v == "auto") {
                 c.delta_ext.reset();
               } else {
                 c.delta_ext = parse_double(k, v) * kDeg;
               }
             },
             [](const ScenarioConfig& c) {
               return c.delta_ext ? format_degrees(*c.delta_ext) : std::string("auto");
             }},
      KeyDef{"run.scheduler",
             [](ScenarioConfig& c, std::string_view k, std::string_view v) {
               if (v == "random") {
                 c.scheduler = Scheduler::Random;
               } else if (v == "separated") {
                 c.scheduler = Scheduler::Separated;
               } else {
                 throw Error(ErrorCode::RangeError, std::string(k) + ": unknown scheduler '" +
                                                        std::string(v) + "'");
               }
             },
             [](const ScenarioConfig& c) {
               return std::string(c.scheduler == Scheduler::Random ? "random" : "separated");
             }},
      KeyDef{"run.seed",
             [](ScenarioConfig& c, std::string_view k, std::string_view v) {
               c.seed = parse_int<std::uint64_t>(k, v);
             },
             [](const ScenarioConfig& c) { return std::to_string(c.seed); }},
      KeyDef{"run.schemes",
             [](ScenarioConfig& c, std::string_view k, std::string_view v) {
               std::vector<std::string> out;
               std::size_t pos = 0;
               while (pos <= v.size()) {
                 const auto comma = std::min(v.find(',', pos), v.size());
                 const auto name = std::string(trim(v.substr(pos, comma - pos)));
                 const auto& known = all_schemes();
                 if (std::find(known.begin(), known.end(), name) == known.end()) {
                   throw Error(ErrorCode::RangeError,
                               std::string(k) + ": unknown scheme '" + name + "'");
                 }
                 if (std::find(out.begin(), out.end(), name) == out.end()) out.push_back(name);
                 pos = comma + 1;
               }
               std::sort(out.begin(), out.end());
               c.schemes = std::move(out);
             },
             [](const ScenarioConfig& c) {
               std::string s;
               for (const auto& n : c.schemes) s += (s.empty() ? "" : ",") + n;
               return s;
             }},
  };
  return table;
}

#undef FD_INT
#undef FD_REAL
#undef FD_DEG

void range_error(const char* key, const std::string& why) {
  throw Error(ErrorCode::RangeError, std::string(key) + ": " + why);
}

}  // namespace

bool ScenarioConfig::has_scheme(std::string_view name) const {
  return std::find(schemes.begin(), schemes.end(), name) != schemes.end();
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return {buf, res.ptr};
}

std::string format_sig(double v, int digits) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, digits);
  return {buf, res.ptr};
}

std::vector<std::string> config_keys() {
  std::vector<std::string> out;
  for (const auto& k : key_table()) out.emplace_back(k.name);
  return out;
}

void set_key(ScenarioConfig& cfg, std::string_view dotted_key, std::string_view value) {
  for (const auto& k : key_table()) {
    if (dotted_key == k.name) {
      k.set(cfg, dotted_key, trim(value));
      return;
    }
  }
  throw Error(ErrorCode::UnknownKey, "'" + std::string(dotted_key) + "'");
}

void validate_config(const ScenarioConfig& c) {
  const auto v = [](double x) { return format_double(x); };
  if (c.n_v < 1) range_error("array.n_v", "must be >= 1, got " + std::to_string(c.n_v));
  if (c.n_h < 1) range_error("array.n_h", "must be >= 1, got " + std::to_string(c.n_h));
  if (!(c.spacing_wl > 0.0)) range_error("array.spacing_wl", "must be > 0, got " + v(c.spacing_wl));
  if (c.cells != 1 && c.cells != 7) range_error("layout.cells", "must be 1 or 7");
  if (!(c.r_cell > 0.0)) range_error("layout.r_cell", "must be > 0, got " + v(c.r_cell));
  if (!(c.h_bs > 0.0)) range_error("layout.h_bs", "must be > 0, got " + v(c.h_bs));
  if (!(c.d_min >= 0.0 && c.d_min < c.r_cell)) {
    range_error("layout.d_min", "must lie in [0, r_cell), got " + v(c.d_min));
  }
  if (!(c.d_ref > 0.0)) range_error("layout.d_ref", "must be > 0, got " + v(c.d_ref));
  if (!(c.delta_a > 0.0)) range_error("channel.delta_a", "must be > 0, got " + v(c.delta_a / kDeg));
  if (!(c.delta_e > 0.0)) range_error("channel.delta_e", "must be > 0, got " + v(c.delta_e / kDeg));
  if (!(c.pl_exponent > 0.0)) range_error("channel.pl_exponent", "must be > 0");
  if (!(c.carrier_hz > 0.0)) range_error("channel.carrier_hz", "must be > 0");
  if (!(c.bandwidth_hz > 0.0)) range_error("budget.bandwidth_hz", "must be > 0");
  if (c.k < 1) range_error("run.K", "must be >= 1, got " + std::to_string(c.k));
  if (c.pool < c.k) range_error("run.pool", "must be >= run.K, got " + std::to_string(c.pool));
  if (c.trials < 1) range_error("run.trials", "must be >= 1");
  if (c.cov_realizations < 1) range_error("run.cov_realizations", "must be >= 1");
  if (!(c.eps_rel > 0.0 && c.eps_rel < 1.0)) range_error("run.eps_rel", "must lie in (0, 1)");
  if (c.delta_ext && !(*c.delta_ext >= 0.0)) range_error("run.delta_ext", "must be >= 0");
  if (c.schemes.empty()) range_error("run.schemes", "must name at least one scheme");
  if (c.restrict_dmax && !(2.0 * c.delta_e < std::atan(c.r_cell / c.h_bs))) {
    range_error("layout.restrict_dmax", "d_max undefined for this delta_e");
  }
}

void apply_override(ScenarioConfig& cfg, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos) {
    throw Error(ErrorCode::ParseError, "override '" + std::string(assignment) + "' lacks '='");
  }
  set_key(cfg, trim(assignment.substr(0, eq)), assignment.substr(eq + 1));
}

ScenarioConfig parse_config_text(std::string_view text, const std::vector<std::string>& overrides) {
  ScenarioConfig cfg;
  std::string section;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const auto nl = std::min(text.find('\n', pos), text.size());
    std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    const auto comment = line.find_first_of("#;");
    if (comment != std::string_view::npos) line = line.substr(0, comment);
    line = trim(line);
    if (line.empty()) continue;
    const auto where = "line " + std::to_string(line_no) + ": ";
    if (line.front() == '[') {
      if (line.back() != ']') throw Error(ErrorCode::ParseError, where + "unterminated section");
      section = std::string(trim(line.substr(1, line.size() - 2)));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw Error(ErrorCode::ParseError, where + "expected key = value");
    }
    if (section.empty()) throw Error(ErrorCode::ParseError, where + "key outside any section");
    const std::string key = section + "." + std::string(trim(line.substr(0, eq)));
    try {
      set_key(cfg, key, line.substr(eq + 1));
    } catch (const Error& e) {
      const std::string msg = e.what();
      throw Error(e.code(), where + msg.substr(msg.find(": ") + 2));
    }
  }
  for (const auto& o : overrides) apply_override(cfg, o);
  validate_config(cfg);
  return cfg;
}

ScenarioConfig parse_config_file(const std::string& path, const std::vector<std::string>& overrides) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot read config '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), overrides);
}

std::string serialize_config(const ScenarioConfig& cfg) {
  std::string out;
  std::string section;
  for (const auto& k : key_table()) {
    const std::string_view name = k.name;
    const auto dot = name.find('.');
    const auto sec = std::string(name.substr(0, dot));
    if (sec != section) {
      out += (section.empty() ? "[" : "\n[") + sec + "]\n";
      section = sec;
    }
    out += std::string(name.substr(dot + 1)) + " = " + k.get(cfg) + "\n";
  }
  return out;
}

}  // namespace fdmimo
