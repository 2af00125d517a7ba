#pragma once

#include <span>
#include <string>
#include <vector>

#include "fdmimo/harness.hpp"

namespace fdmimo {

/// trial,cell,user,d_m,phi_rad,theta_rad,scheme,rate_bps_hz with 9
/// significant digits, rows ordered by (trial, user, scheme).
std::string report_csv(const RateReport& report);

/// Same records plus per-scheme aggregates, feasibility drops and the config.
std::string report_json(const RateReport& report);

/// Parses the "records" array of report_json output.
std::vector<RateRow> rows_from_json(const std::string& text);

/// Per-scheme CDF series (scheme,rate_bps_hz,cdf), then a blank line and a
/// percentile block (scheme,percentile,rate_bps_hz) for 5/50/95.
std::string coverage_csv(const RateReport& report, int grid = 101);

std::string sweep_csv(const std::string& axis, std::span<const SweepRow> rows);
std::string sweep_json(const std::string& axis, std::span<const SweepRow> rows);

std::string validate_text(std::span<const InvariantResult> results);
std::string validate_json(std::span<const InvariantResult> results);

/// Writes `content` to `path`; IoError on failure.
void write_text_file(const std::string& path, const std::string& content);

}  // namespace fdmimo
