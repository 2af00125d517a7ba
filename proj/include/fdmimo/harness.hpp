#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "fdmimo/config.hpp"
#include "fdmimo/geometry.hpp"
#include "fdmimo/precoding.hpp"
#include "fdmimo/rates.hpp"

namespace fdmimo {

struct ScheduleResult {
  std::vector<std::size_t> indices;  // into the pool, in selection order
  int violations = 0;                // users added without the separation guarantee
};

/// `pool` holds the link geometry of each candidate as seen from the serving
/// BS. The separated policy compares folded azimuths, since a planar array
/// cannot tell a user from its mirror image behind the array plane.
ScheduleResult schedule_users(std::span<const LinkGeometry> pool, int k, Scheduler policy,
                              double delta_a, double delta_e, Rng& rng);

/// Users of one cell: rejection sampling inside the hexagon, and within
/// d_max of the BS when cfg.restrict_dmax is set.
std::vector<UserPlacement> drop_cell_users(const CellLayout& layout, std::size_t cell,
                                           std::size_t count, const ScenarioConfig& cfg, Rng& rng);

/// Elevation covariance of the link, with the path gain folded in. One-ring
/// uses the configured elevation spread, single-path the rank-one a_E a_E^H.
CMatrix elevation_covariance(const LinkGeometry& g, const ScenarioConfig& cfg);
/// First row of elevation_covariance.
CVector elevation_lags(const LinkGeometry& g, const ScenarioConfig& cfg);

/// R_b^I for every BS b: mean over realizations and scheduled users of
/// rho R_E of links from b to users of the other cells. Each realization
/// drops k_per_cell users in every cell from `rng`.
std::vector<InterferenceCov> interference_covariances(const CellLayout& layout,
                                                      const ScenarioConfig& cfg,
                                                      int n_realizations, int k_per_cell, Rng& rng);

InterferenceCov avg_interference_cov(const CellLayout& layout, const ScenarioConfig& cfg,
                                     std::size_t center_cell, int n_realizations, int k_per_cell,
                                     Rng& rng);

CellLayout make_layout(const ScenarioConfig& cfg);

/// Data shared read-only by every trial of a scenario.
struct Scenario {
  ScenarioConfig cfg;
  CellLayout layout;
  double snr = 0.0;
  std::vector<InterferenceCov> r_i;
  std::vector<LayerOne> plain;
  std::vector<LayerOne> augmented;
};

/// Computes R^I from a seed stream disjoint from the trial streams and the
/// plain and augmented first layers of every BS.
Scenario prepare_scenario(const ScenarioConfig& cfg);

struct RateRow {
  int trial = 0;
  int cell = 0;
  int user = 0;
  double d = 0.0;
  double phi = 0.0;
  double theta = 0.0;
  std::string scheme;
  double rate = 0.0;

  friend bool operator==(const RateRow&, const RateRow&) = default;
};

/// Per center-cell user diagnostics beyond the rate rows.
struct UserDiag {
  int user = 0;
  double d = 0.0;
  double channel_power = 0.0;              // ||h||^2 = ||w_bar||^2
  double rho = 0.0;                        // path gain to the serving BS
  std::vector<double> interferer_rho;      // gains from every other BS to this user
  double edge_bound = 0.0;                 // sigma_min lower bound for plain MLP
  std::map<std::string, SinrTerms> terms;  // per scheme, absent for single_user
  std::map<std::string, bool> dropped;     // MLP variants only
};

struct TrialResult {
  int trial = 0;
  std::vector<RateRow> rows;  // ordered by (user, scheme)
  std::vector<UserDiag> users;
  int drops_mlp = 0;
  int drops_mlp_augmented = 0;
  int schedule_violations = 0;
};

TrialResult run_trial(const Scenario& sc, int trial);

struct Aggregate {
  double mean = 0.0;
  double p5 = 0.0;
  double p50 = 0.0;
  double p95 = 0.0;
  std::size_t count = 0;
};

struct RateReport {
  ScenarioConfig cfg;
  std::vector<TrialResult> trials;  // sorted by trial id
  std::vector<RateRow> rows;        // (trial, user, scheme) order
  std::map<std::string, Aggregate> aggregates;

  std::vector<double> rates(const std::string& scheme) const;
};

/// Runs cfg.trials trials on up to `workers` threads. Output does not depend
/// on the worker count.
RateReport run_scenario(const ScenarioConfig& cfg, int workers = 1);

/// Aggregates keyed by scheme over a set of rows.
std::map<std::string, Aggregate> aggregate_rows(std::span<const RateRow> rows);

struct SweepRow {
  double value = 0.0;
  std::map<std::string, Aggregate> aggregates;
  std::map<std::string, double> mean_leakage;  // inter-cell term per scheme
  double mean_ratio_mlp = 0.0;                 // mean of mlp / single_user per user
};

/// Axis: n_v, n_h, h_bs, r_cell or tx_power.
void set_axis(ScenarioConfig& cfg, const std::string& axis, double value);
std::vector<SweepRow> sweep(const ScenarioConfig& cfg, const std::string& axis,
                            std::span<const double> values, int workers = 1);
SweepRow summarize(double value, const RateReport& report);

/// Center-cell users precoded from their own (uncontaminated) eigenbases and
/// innovations, with channels synthesized from the same bases. Every
/// identity of the multi-layer construction holds exactly on this setup.
struct ExactScenario {
  CMatrix null_basis;
  std::vector<LinkGeometry> geoms;
  std::vector<ChannelEigen> eigen;
  std::vector<ChannelRealization> channels;
  std::vector<CVector> w_bars;
  PrecoderStack stack;
  double snr = 0.0;
};

/// Draws users until the layer-3 dimension condition holds (bounded retries).
ExactScenario build_exact_scenario(const Scenario& sc, std::uint64_t seed);

struct InvariantResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Runs the invariant suite on a small fixed scenario derived from cfg.
/// Failures, including thrown errors, become report entries.
std::vector<InvariantResult> validate(const ScenarioConfig& cfg);

}  // namespace fdmimo
