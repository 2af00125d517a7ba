#include "fdmimo/report.hpp"

#include <algorithm>
#include <fstream>

#include <json.hpp>

#include "fdmimo/error.hpp"

namespace fdmimo {
namespace {

using nlohmann::ordered_json;

std::string num(double v) { return format_sig(v, 9); }

std::vector<RateRow> ordered_rows(const RateReport& report) {
  std::vector<RateRow> rows = report.rows;
  std::stable_sort(rows.begin(), rows.end(), [](const RateRow& a, const RateRow& b) {
    return std::tie(a.trial, a.user, a.scheme) < std::tie(b.trial, b.user, b.scheme);
  });
  return rows;
}

// JSON numbers go through the same 9-digit formatting as the CSV.
ordered_json jnum(double v) { return ordered_json::parse(num(v)); }

ordered_json aggregates_json(const std::map<std::string, Aggregate>& aggs) {
  ordered_json out = ordered_json::object();
  for (const auto& [name, a] : aggs) {
    out[name] = {{"count", a.count}, {"mean", jnum(a.mean)}, {"p5", jnum(a.p5)},
                 {"p50", jnum(a.p50)}, {"p95", jnum(a.p95)}};
  }
  return out;
}

}  // namespace

std::string report_csv(const RateReport& report) {
  std::string out = "trial,cell,user,d_m,phi_rad,theta_rad,scheme,rate_bps_hz\n";
  for (const auto& r : ordered_rows(report)) {
    out += std::to_string(r.trial) + "," + std::to_string(r.cell) + "," + std::to_string(r.user) +
           "," + num(r.d) + "," + num(r.phi) + "," + num(r.theta) + "," + r.scheme + "," +
           num(r.rate) + "\n";
  }
  return out;
}

std::string report_json(const RateReport& report) {
  ordered_json doc;
  doc["config"] = serialize_config(report.cfg);
  ordered_json records = ordered_json::array();
  for (const auto& r : ordered_rows(report)) {
    records.push_back({{"trial", r.trial},
                       {"cell", r.cell},
                       {"user", r.user},
                       {"d_m", jnum(r.d)},
                       {"phi_rad", jnum(r.phi)},
                       {"theta_rad", jnum(r.theta)},
                       {"scheme", r.scheme},
                       {"rate_bps_hz", jnum(r.rate)}});
  }
  doc["records"] = std::move(records);
  doc["aggregates"] = aggregates_json(report.aggregates);
  int drops = 0;
  int drops_aug = 0;
  int violations = 0;
  for (const auto& t : report.trials) {
    drops += t.drops_mlp;
    drops_aug += t.drops_mlp_augmented;
    violations += t.schedule_violations;
  }
  doc["feasibility_drops"] = {{"mlp", drops}, {"mlp_augmented", drops_aug}};
  doc["schedule_violations"] = violations;
  return doc.dump(2) + "\n";
}

std::vector<RateRow> rows_from_json(const std::string& text) {
  ordered_json doc;
  try {
    doc = ordered_json::parse(text);
  } catch (const std::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("report JSON: ") + e.what());
  }
  std::vector<RateRow> rows;
  for (const auto& r : doc.at("records")) {
    rows.push_back({r.at("trial").get<int>(), r.at("cell").get<int>(), r.at("user").get<int>(),
                    r.at("d_m").get<double>(), r.at("phi_rad").get<double>(),
                    r.at("theta_rad").get<double>(), r.at("scheme").get<std::string>(),
                    r.at("rate_bps_hz").get<double>()});
  }
  return rows;
}

std::string coverage_csv(const RateReport& report, int grid) {
  std::map<std::string, std::vector<double>> by;
  for (const auto& r : report.rows) by[r.scheme].push_back(r.rate);
  std::string out = "scheme,rate_bps_hz,cdf\n";
  for (const auto& [name, v] : by) {
    const auto series = cdf_series(v, grid);
    for (std::size_t i = 0; i < series.rate.size(); ++i) {
      out += name + "," + num(series.rate[i]) + "," + num(series.cdf[i]) + "\n";
    }
  }
  out += "\nscheme,percentile,rate_bps_hz\n";
  for (const auto& [name, v] : by) {
    for (double p : {5.0, 50.0, 95.0}) {
      out += name + "," + num(p) + "," + num(percentile(v, p)) + "\n";
    }
  }
  return out;
}

std::string sweep_csv(const std::string& axis, std::span<const SweepRow> rows) {
  std::string out = axis + ",scheme,mean,p5,p50,p95,mean_inter_cell_leakage\n";
  for (const auto& row : rows) {
    for (const auto& [name, a] : row.aggregates) {
      const auto it = row.mean_leakage.find(name);
      out += num(row.value) + "," + name + "," + num(a.mean) + "," + num(a.p5) + "," +
             num(a.p50) + "," + num(a.p95) + "," +
             (it == row.mean_leakage.end() ? std::string() : num(it->second)) + "\n";
    }
  }
  return out;
}

std::string sweep_json(const std::string& axis, std::span<const SweepRow> rows) {
  ordered_json doc;
  doc["axis"] = axis;
  ordered_json arr = ordered_json::array();
  for (const auto& row : rows) {
    ordered_json leak = ordered_json::object();
    for (const auto& [name, v] : row.mean_leakage) leak[name] = jnum(v);
    arr.push_back({{"value", jnum(row.value)},
                   {"aggregates", aggregates_json(row.aggregates)},
                   {"mean_inter_cell_leakage", leak},
                   {"mean_ratio_mlp_to_single_user", jnum(row.mean_ratio_mlp)}});
  }
  doc["rows"] = std::move(arr);
  return doc.dump(2) + "\n";
}

std::string validate_text(std::span<const InvariantResult> results) {
  std::string out;
  for (const auto& r : results) {
    out += std::string(r.passed ? "PASS " : "FAIL ") + r.name + ": " + r.detail + "\n";
  }
  return out;
}

std::string validate_json(std::span<const InvariantResult> results) {
  ordered_json arr = ordered_json::array();
  for (const auto& r : results) {
    arr.push_back({{"name", r.name}, {"passed", r.passed}, {"detail", r.detail}});
  }
  return arr.dump(2) + "\n";
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot open '" + path + "' for writing");
  out << content;
  out.close();
  if (!out) throw Error(ErrorCode::IoError, "write to '" + path + "' failed");
}

}  // namespace fdmimo
