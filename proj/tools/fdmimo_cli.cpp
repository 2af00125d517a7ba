#include <CLI11.hpp>

#include <charconv>
#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "fdmimo/config.hpp"
#include "fdmimo/error.hpp"
#include "fdmimo/harness.hpp"
#include "fdmimo/report.hpp"

namespace {

using namespace fdmimo;

struct Common {
  std::string config;
  std::vector<std::string> sets;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string format = "csv";
  int workers = 1;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config, "Config file (flat [section] key = value)");
  cmd->add_option("--set", c.sets, "Override, e.g. --set run.K=5 (repeatable)");
  cmd->add_option("--seed", c.seed, "Master seed (overrides run.seed)");
  cmd->add_option("--out", c.out, "Output file (default: stdout)");
  cmd->add_option("--format", c.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  cmd->add_option("--workers", c.workers, "Worker threads")->check(CLI::PositiveNumber);
}

ScenarioConfig load(const Common& c) {
  std::vector<std::string> overrides = c.sets;
  if (c.seed) overrides.push_back("run.seed=" + std::to_string(*c.seed));
  if (c.config.empty()) return parse_config_text("", overrides);
  return parse_config_file(c.config, overrides);
}

void emit(const Common& c, const std::string& text) {
  if (c.out.empty()) {
    std::cout << text;
  } else {
    write_text_file(c.out, text);
  }
}

std::vector<double> parse_values(const std::string& list) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos <= list.size()) {
    const auto comma = std::min(list.find(',', pos), list.size());
    const std::string item = list.substr(pos, comma - pos);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (item.empty() || ec != std::errc() || ptr != item.data() + item.size()) {
      throw Error(ErrorCode::ParseError, "--values: not a number: '" + item + "'");
    }
    out.push_back(v);
    pos = comma + 1;
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-layer precoding simulator for 2D-array massive MIMO downlinks"};
  app.require_subcommand(1);

  Common run_opts, sweep_opts, cov_opts, val_opts;
  auto* run = app.add_subcommand("run", "Run all trials and emit per-user rates");
  add_common(run, run_opts);

  auto* sw = app.add_subcommand("sweep", "Repeat the scenario over one parameter");
  add_common(sw, sweep_opts);
  std::string axis;
  std::string values;
  sw->add_option("--axis", axis, "n_v, n_h, h_bs, r_cell or tx_power")->required();
  sw->add_option("--values", values, "Comma-separated values")->required();

  auto* cov = app.add_subcommand("coverage", "Emit per-scheme rate CDFs and percentiles");
  add_common(cov, cov_opts);
  int grid = 101;
  cov->add_option("--grid", grid, "CDF grid points")->check(CLI::Range(2, 100000));

  auto* val = app.add_subcommand("validate", "Check the analytical invariants on a small scenario");
  add_common(val, val_opts);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << "ParseError: " << e.what() << "\n";
    return 2;
  }

  try {
    if (*run) {
      const auto report = run_scenario(load(run_opts), run_opts.workers);
      emit(run_opts, run_opts.format == "json" ? report_json(report) : report_csv(report));
    } else if (*sw) {
      const auto cfg = load(sweep_opts);
      const auto vals = parse_values(values);
      const auto rows = sweep(cfg, axis, vals, sweep_opts.workers);
      emit(sweep_opts, sweep_opts.format == "json" ? sweep_json(axis, rows) : sweep_csv(axis, rows));
    } else if (*cov) {
      const auto report = run_scenario(load(cov_opts), cov_opts.workers);
      emit(cov_opts, coverage_csv(report, grid));
    } else if (*val) {
      const auto results = validate(load(val_opts));
      emit(val_opts, val_opts.format == "json" ? validate_json(results) : validate_text(results));
      for (const auto& r : results) {
        if (!r.passed) return 1;
      }
    }
  } catch (const Error& e) {
    std::cerr << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "InternalError: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
