#pragma once

#include <cstdint>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace fdmimo {

enum class ChannelModel { OneRing, SinglePath };
enum class Scheduler { Random, Separated };

/// Scheme names double as CSV labels; their lexicographic order is the row order.
inline const std::vector<std::string>& all_schemes() {
  static const std::vector<std::string> names{"cb", "mlp", "mlp_augmented", "single_user", "zf"};
  return names;
}

/// Experiment parameters. Angles are radians here; the config file uses degrees.
struct ScenarioConfig {
  // [array]
  int n_v = 100;
  int n_h = 40;
  double spacing_wl = 0.5;
  // [layout]
  int cells = 7;
  double r_cell = 100.0;
  double h_bs = 35.0;
  double d_min = 10.0;
  double d_ref = 1.0;
  bool restrict_dmax = false;  // only drop users with d <= d_max
  // [channel]
  ChannelModel model = ChannelModel::OneRing;
  // Same rounding as a parsed "5" / "3", so defaults survive a round trip.
  double delta_a = 5.0 * (std::numbers::pi / 180.0);
  double delta_e = 3.0 * (std::numbers::pi / 180.0);
  double pl_exponent = 3.5;
  double carrier_hz = 4e9;
  // [budget]
  double tx_power_dbm = 35.0;
  double bandwidth_hz = 10e6;
  double noise_figure_db = 7.0;
  // [run]
  int k = 20;
  int pool = 20;
  int trials = 10;
  int cov_realizations = 40;
  double eps_rel = 1e-3;
  std::optional<double> delta_ext;  // unset means 2 * delta_e
  Scheduler scheduler = Scheduler::Random;
  std::uint64_t seed = 1;
  std::vector<std::string> schemes = all_schemes();

  double effective_delta_ext() const { return delta_ext.value_or(2.0 * delta_e); }
  bool has_scheme(std::string_view name) const;

  friend bool operator==(const ScenarioConfig&, const ScenarioConfig&) = default;
};

/// Throws RangeError naming the first offending key.
void validate_config(const ScenarioConfig& cfg);

/// Applies "section.key=value". UnknownKey / ParseError / RangeError.
void apply_override(ScenarioConfig& cfg, std::string_view assignment);

/// Sets one key from text without validating cross-field constraints.
void set_key(ScenarioConfig& cfg, std::string_view dotted_key, std::string_view value);

/// Parses a flat sectioned document:
///   [section]
///   key = value     ; '#' or ';' start comments
/// Missing keys keep their defaults. ParseError carries the line number.
ScenarioConfig parse_config_text(std::string_view text, const std::vector<std::string>& overrides = {});

/// Reads `path` (IoError if unreadable) and parses it.
ScenarioConfig parse_config_file(const std::string& path,
                                 const std::vector<std::string>& overrides = {});

/// Canonical text form; parse_config_text(serialize_config(c)) == c.
std::string serialize_config(const ScenarioConfig& cfg);

/// Every accepted dotted key, in serialization order.
std::vector<std::string> config_keys();

/// Shortest round-trip decimal form, locale independent.
std::string format_double(double v);
/// Fixed significant digits, locale independent.
std::string format_sig(double v, int digits);

}  // namespace fdmimo
