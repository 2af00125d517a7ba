#include "fdmimo/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <numeric>
#include <thread>

#include "fdmimo/error.hpp"

namespace fdmimo {
namespace {

struct Link {
  LinkGeometry g;
  ChannelEigen ce;
  ChannelRealization real;
};

// links[b][c][k]: BS b to user k of cell c.
using LinkTable = std::vector<std::vector<std::vector<Link>>>;

Link make_link(const ScenarioConfig& cfg, const LinkGeometry& g, Rng& rng) {
  Link l;
  l.g = g;
  if (cfg.model == ChannelModel::SinglePath) {
    auto sp = single_path_channel(g, complex_normal(rng), cfg.n_v, cfg.n_h, cfg.spacing_wl);
    l.ce = std::move(sp.eigen);
    l.real = std::move(sp.realization);
    return l;
  }
  const auto az = one_ring_az(g, cfg.delta_a, cfg.n_h, cfg.spacing_wl);
  const auto el = one_ring_el(g, cfg.delta_e, cfg.n_v, cfg.spacing_wl);
  l.ce = factor_eigen(az.factor, el.factor, g.rho, cfg.eps_rel);
  l.real = kl_sample(l.ce, rng);
  return l;
}

LinkGeometry geometry_to(const CellLayout& layout, std::size_t bs, const UserPlacement& u,
                         const ScenarioConfig& cfg) {
  return link_geometry(layout.bs_positions[bs], layout.h_bs, u.xy, cfg.pl_exponent, cfg.d_ref);
}

struct MlpBuild {
  PrecoderStack stack;
  std::vector<int> served;  // user index per precoder column
  int dropped = 0;
};

// Layers 2 and 3 at BS b from contaminated statistics and channel sums.
// Users that break feasibility are removed last-in-first-out.
MlpBuild build_mlp_at(const LinkTable& links, std::size_t b, const LayerOne& l1,
                      const std::vector<CVector>& est, const ScenarioConfig& cfg) {
  const std::size_t n_cells = links.size();
  const auto k_users = links[b][b].size();
  std::vector<EffectiveEigen> effs(k_users);
  std::vector<int> active;
  for (std::size_t k = 0; k < k_users; ++k) {
    std::vector<const ChannelEigen*> copilot;
    for (std::size_t c = 0; c < n_cells; ++c) {
      if (c != b) copilot.push_back(&links[b][c][k].ce);
    }
    effs[k] = estimated_effective_eigen(
        contaminated_factors(links[b][b][k].ce, copilot, l1.null_basis), cfg.eps_rel);
    if (effs[k].r_a() > 0 && effs[k].r_e() > 0) active.push_back(static_cast<int>(k));
  }
  MlpBuild out;
  out.dropped = static_cast<int>(k_users - active.size());
  while (!active.empty()) {
    std::vector<EffectiveEigen> sel;
    for (int k : active) sel.push_back(effs[static_cast<std::size_t>(k)]);
    const auto off = layer2_offsets(sel);
    const Eigen::Index avail = sel.front().u_az.rows() * sel.front().r_ni();
    if (avail >= off.back()) {
      CMatrix h_eff(off.back(), static_cast<Eigen::Index>(active.size()));
      for (std::size_t i = 0; i < active.size(); ++i) {
        h_eff.col(static_cast<Eigen::Index>(i)) =
            project_channel(est[static_cast<std::size_t>(active[i])], l1.null_basis, sel);
      }
      try {
        out.stack = build_multilayer(l1.null_basis, std::move(sel), h_eff);
        out.served = active;
        return out;
      } catch (const Error& e) {
        if (e.code() != ErrorCode::RankDeficient) throw;
      }
    }
    active.pop_back();
    ++out.dropped;
  }
  return out;
}

double folded(double phi) { return folded_azimuth(phi); }

}  // namespace

ScheduleResult schedule_users(std::span<const LinkGeometry> pool, int k, Scheduler policy,
                              double delta_a, double delta_e, Rng& rng) {
  if (k < 1 || static_cast<std::size_t>(k) > pool.size()) {
    throw Error(ErrorCode::InvalidParameter, "need 1 <= k <= pool size, got k=" +
                                                 std::to_string(k) + " pool=" +
                                                 std::to_string(pool.size()));
  }
  // Uniform random order (Fisher-Yates on our own uniform draws keeps the
  // result independent of the standard library implementation).
  std::vector<std::size_t> order(pool.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (std::size_t i = order.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(uniform01(rng) * static_cast<double>(i));
    std::swap(order[i - 1], order[std::min(j, i - 1)]);
  }
  ScheduleResult out;
  if (policy == Scheduler::Random) {
    out.indices.assign(order.begin(), order.begin() + k);
    return out;
  }
  std::vector<bool> taken(pool.size(), false);
  for (std::size_t idx : order) {
    if (static_cast<int>(out.indices.size()) == k) break;
    LinkGeometry a = pool[idx];
    a.phi = folded(a.phi);
    bool ok = true;
    for (std::size_t s : out.indices) {
      LinkGeometry b = pool[s];
      b.phi = folded(b.phi);
      if (!angular_separation_ok(a, b, delta_a, delta_e)) {
        ok = false;
        break;
      }
    }
    if (ok) {
      out.indices.push_back(idx);
      taken[idx] = true;
    }
  }
  for (std::size_t idx : order) {
    if (static_cast<int>(out.indices.size()) == k) break;
    if (taken[idx]) continue;
    out.indices.push_back(idx);
    ++out.violations;
  }
  return out;
}

std::vector<UserPlacement> drop_cell_users(const CellLayout& layout, std::size_t cell,
                                           std::size_t count, const ScenarioConfig& cfg, Rng& rng) {
  if (!cfg.restrict_dmax) return drop_users_in_cell(layout, cell, count, cfg.d_min, rng);
  const double limit = d_max(layout.h_bs, layout.r_cell, cfg.delta_e);
  if (!(limit > cfg.d_min)) throw Error(ErrorCode::InvalidParameter, "d_max <= d_min");
  const Vec2 c = layout.bs_positions.at(cell);
  std::vector<UserPlacement> out;
  while (out.size() < count) {
    auto u = drop_users_in_cell(layout, cell, 1, cfg.d_min, rng).front();
    if (std::hypot(u.xy.x - c.x, u.xy.y - c.y) <= limit) out.push_back(u);
  }
  return out;
}

CVector elevation_lags(const LinkGeometry& g, const ScenarioConfig& cfg) {
  if (cfg.model == ChannelModel::SinglePath) {
    // a_E a_E^H has entry (0, l) = exp(-j l psi).
    return g.rho * steering_el(cfg.n_v, cfg.spacing_wl, g.theta).conjugate();
  }
  return g.rho * one_ring_el_lags(g, cfg.delta_e, cfg.n_v, cfg.spacing_wl);
}

CMatrix elevation_covariance(const LinkGeometry& g, const ScenarioConfig& cfg) {
  return hermitian_toeplitz(elevation_lags(g, cfg));
}

std::vector<InterferenceCov> interference_covariances(const CellLayout& layout,
                                                      const ScenarioConfig& cfg,
                                                      int n_realizations, int k_per_cell,
                                                      Rng& rng) {
  if (n_realizations < 1) throw Error(ErrorCode::InvalidParameter, "n_realizations must be >= 1");
  if (k_per_cell < 1) throw Error(ErrorCode::InvalidParameter, "k_per_cell must be >= 1");
  const std::size_t n_cells = layout.num_cells();
  // Every term is Hermitian Toeplitz, so only first rows are accumulated.
  std::vector<CVector> lags(n_cells, CVector::Zero(cfg.n_v));
  const double norm = 1.0 / (static_cast<double>(n_realizations) * k_per_cell);
  for (int real = 0; real < n_realizations; ++real) {
    for (std::size_t c = 0; c < n_cells; ++c) {
      const auto users = drop_cell_users(layout, c, static_cast<std::size_t>(k_per_cell), cfg, rng);
      for (std::size_t b = 0; b < n_cells; ++b) {
        if (b == c) continue;
        for (const auto& u : users) {
          lags[b] += norm * elevation_lags(geometry_to(layout, b, u, cfg), cfg);
        }
      }
    }
  }
  std::vector<InterferenceCov> out;
  for (const auto& l : lags) out.push_back({hermitian_toeplitz(l), n_realizations});
  return out;
}

InterferenceCov avg_interference_cov(const CellLayout& layout, const ScenarioConfig& cfg,
                                     std::size_t center_cell, int n_realizations, int k_per_cell,
                                     Rng& rng) {
  if (center_cell >= layout.num_cells()) throw Error(ErrorCode::InvalidParameter, "no such cell");
  return interference_covariances(layout, cfg, n_realizations, k_per_cell, rng)[center_cell];
}

CellLayout make_layout(const ScenarioConfig& cfg) {
  return cfg.cells == 1 ? build_single_cell_layout(cfg.r_cell, cfg.h_bs)
                        : build_hex_layout(cfg.r_cell, cfg.h_bs);
}

Scenario prepare_scenario(const ScenarioConfig& cfg) {
  validate_config(cfg);
  Scenario sc;
  sc.cfg = cfg;
  sc.layout = make_layout(cfg);
  sc.snr = LinkBudget{cfg.tx_power_dbm, cfg.bandwidth_hz, cfg.noise_figure_db, cfg.k}.snr_per_stream();
  Rng rng = make_rng(cfg.seed, {static_cast<std::uint64_t>(Stream::CovarianceDraw)});
  sc.r_i = interference_covariances(sc.layout, cfg, cfg.cov_realizations, cfg.k, rng);
  const bool need_plain = cfg.has_scheme("mlp");
  const bool need_aug = cfg.has_scheme("mlp_augmented");
  for (const auto& r : sc.r_i) {
    if (need_plain) sc.plain.push_back(layer1(r, cfg.eps_rel));
    if (!need_aug) continue;
    // Without any interference energy there is nothing to extend; the
    // plain null space (the identity) is already the whole array.
    if (r.r_i.squaredNorm() == 0.0) {
      sc.augmented.push_back(layer1(r, cfg.eps_rel));
    } else {
      sc.augmented.push_back(
          augmented_layer1(r, cfg.n_v, cfg.spacing_wl, cfg.effective_delta_ext(), cfg.eps_rel));
    }
  }
  return sc;
}

TrialResult run_trial(const Scenario& sc, int trial) {
  const auto& cfg = sc.cfg;
  const auto& layout = sc.layout;
  const std::size_t n_cells = layout.num_cells();
  const auto k_users = static_cast<std::size_t>(cfg.k);
  const std::uint64_t tseed = derive_seed(cfg.seed, {static_cast<std::uint64_t>(Stream::Trial),
                                                     static_cast<std::uint64_t>(trial)});
  TrialResult out;
  out.trial = trial;

  std::vector<std::vector<UserPlacement>> users(n_cells);
  for (std::size_t c = 0; c < n_cells; ++c) {
    Rng drop_rng = make_rng(tseed, {static_cast<std::uint64_t>(Stream::Drop), c});
    const auto pool = drop_cell_users(layout, c, static_cast<std::size_t>(cfg.pool), cfg, drop_rng);
    std::vector<LinkGeometry> geoms;
    for (const auto& u : pool) geoms.push_back(geometry_to(layout, c, u, cfg));
    Rng sched_rng = make_rng(tseed, {static_cast<std::uint64_t>(Stream::Schedule), c});
    const auto sched =
        schedule_users(geoms, cfg.k, cfg.scheduler, cfg.delta_a, cfg.delta_e, sched_rng);
    if (c == 0) out.schedule_violations = sched.violations;
    for (std::size_t i : sched.indices) users[c].push_back(pool[i]);
  }

  LinkTable links(n_cells, std::vector<std::vector<Link>>(n_cells));
  for (std::size_t b = 0; b < n_cells; ++b) {
    for (std::size_t c = 0; c < n_cells; ++c) {
      for (std::size_t k = 0; k < k_users; ++k) {
        Rng rng = make_rng(tseed, {static_cast<std::uint64_t>(Stream::Link), b, c, k});
        links[b][c].push_back(make_link(cfg, geometry_to(layout, b, users[c][k], cfg), rng));
      }
    }
  }

  // Per-scheme precoders at every BS; stream_of[scheme][k] maps a center
  // user to its column in F_0 (-1 when dropped).
  const auto n_rows = static_cast<Eigen::Index>(cfg.n_v) * cfg.n_h;
  std::map<std::string, std::vector<CMatrix>> precoders;
  std::map<std::string, std::vector<int>> stream_of;
  for (std::size_t b = 0; b < n_cells; ++b) {
    std::vector<CVector> est(k_users, CVector::Zero(n_rows));
    for (std::size_t k = 0; k < k_users; ++k) {
      for (std::size_t c = 0; c < n_cells; ++c) est[k] += links[b][c][k].real.h;
    }
    CMatrix est_mat(n_rows, static_cast<Eigen::Index>(k_users));
    for (std::size_t k = 0; k < k_users; ++k) est_mat.col(static_cast<Eigen::Index>(k)) = est[k];
    std::vector<int> identity(k_users);
    std::iota(identity.begin(), identity.end(), 0);
    if (cfg.has_scheme("cb")) {
      precoders["cb"].push_back(conjugate_beamforming(est_mat));
      if (b == 0) stream_of["cb"] = identity;
    }
    if (cfg.has_scheme("zf")) {
      precoders["zf"].push_back(zf_baseline(est_mat));
      if (b == 0) stream_of["zf"] = identity;
    }
    for (const std::string name : {"mlp", "mlp_augmented"}) {
      if (!cfg.has_scheme(name)) continue;
      const auto& l1 = name == "mlp" ? sc.plain[b] : sc.augmented[b];
      auto built = build_mlp_at(links, b, l1, est, cfg);
      precoders[name].push_back(built.stack.composed);
      if (b == 0) {
        std::vector<int> map(k_users, -1);
        for (std::size_t i = 0; i < built.served.size(); ++i) {
          map[static_cast<std::size_t>(built.served[i])] = static_cast<int>(i);
        }
        stream_of[name] = map;
        (name == "mlp" ? out.drops_mlp : out.drops_mlp_augmented) = built.dropped;
      }
    }
  }

  for (std::size_t k = 0; k < k_users; ++k) {
    const Link& own = links[0][0][k];
    UserDiag diag;
    diag.user = static_cast<int>(k);
    diag.d = own.g.d;
    diag.channel_power = own.real.h.squaredNorm();
    diag.rho = own.g.rho;
    for (std::size_t b = 1; b < n_cells; ++b) diag.interferer_rho.push_back(links[b][0][k].g.rho);
    if (cfg.has_scheme("mlp")) {
      const CMatrix u_el = sc.plain[0].null_basis.adjoint() * own.ce.el.vectors;
      diag.edge_bound =
          u_el.size() == 0 ? 0.0 : edge_lower_bound(own.real.w_bar, u_el, sc.snr);
    }
    std::vector<CVector> h_from(n_cells);
    for (std::size_t b = 0; b < n_cells; ++b) h_from[b] = links[b][0][k].real.h;
    for (const auto& scheme : cfg.schemes) {
      double rate = 0.0;
      if (scheme == "single_user") {
        rate = single_user_rate_gain(diag.channel_power, sc.snr);
      } else {
        const int col = stream_of[scheme][k];
        const bool is_mlp = scheme.rfind("mlp", 0) == 0;
        if (is_mlp) diag.dropped[scheme] = col < 0;
        if (col >= 0) {
          const auto terms = sinr_direct(h_from, precoders[scheme], 0, col, sc.snr);
          diag.terms[scheme] = terms;
          rate = terms.rate();
        }
      }
      out.rows.push_back({trial, 0, static_cast<int>(k), own.g.d, own.g.phi, own.g.theta, scheme,
                          rate});
    }
    out.users.push_back(std::move(diag));
  }
  return out;
}

std::vector<double> RateReport::rates(const std::string& scheme) const {
  std::vector<double> out;
  for (const auto& r : rows) {
    if (r.scheme == scheme) out.push_back(r.rate);
  }
  return out;
}

std::map<std::string, Aggregate> aggregate_rows(std::span<const RateRow> rows) {
  std::map<std::string, std::vector<double>> by;
  for (const auto& r : rows) by[r.scheme].push_back(r.rate);
  std::map<std::string, Aggregate> out;
  for (const auto& [name, v] : by) {
    out[name] = {mean(v), percentile(v, 5.0), percentile(v, 50.0), percentile(v, 95.0), v.size()};
  }
  return out;
}

RateReport run_scenario(const ScenarioConfig& cfg, int workers) {
  if (workers < 1) throw Error(ErrorCode::InvalidParameter, "workers must be >= 1");
  const Scenario sc = prepare_scenario(cfg);
  const int n = cfg.trials;
  std::vector<TrialResult> results(static_cast<std::size_t>(n));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n));
  std::atomic<int> next{0};
  const auto work = [&] {
    for (int t = next++; t < n; t = next++) {
      try {
        results[static_cast<std::size_t>(t)] = run_trial(sc, t);
      } catch (...) {
        errors[static_cast<std::size_t>(t)] = std::current_exception();
      }
    }
  };
  const int threads = std::min(workers, n);
  if (threads <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (int i = 0; i < threads; ++i) pool.emplace_back(work);
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  RateReport report;
  report.cfg = cfg;
  report.trials = std::move(results);
  for (const auto& t : report.trials) {
    report.rows.insert(report.rows.end(), t.rows.begin(), t.rows.end());
  }
  report.aggregates = aggregate_rows(report.rows);
  return report;
}

void set_axis(ScenarioConfig& cfg, const std::string& axis, double value) {
  if (axis == "n_v") {
    cfg.n_v = static_cast<int>(std::lround(value));
  } else if (axis == "n_h") {
    cfg.n_h = static_cast<int>(std::lround(value));
  } else if (axis == "h_bs") {
    cfg.h_bs = value;
  } else if (axis == "r_cell") {
    cfg.r_cell = value;
  } else if (axis == "tx_power") {
    cfg.tx_power_dbm = value;
  } else {
    throw Error(ErrorCode::InvalidParameter, "unknown sweep axis '" + axis + "'");
  }
}

SweepRow summarize(double value, const RateReport& report) {
  SweepRow row;
  row.value = value;
  row.aggregates = report.aggregates;
  std::map<std::string, std::pair<double, int>> leak;
  double ratio_sum = 0.0;
  int ratio_n = 0;
  for (const auto& t : report.trials) {
    for (const auto& u : t.users) {
      for (const auto& [name, terms] : u.terms) {
        leak[name].first += terms.inter;
        leak[name].second += 1;
      }
    }
    // Rows are (user, scheme) ordered inside a trial.
    std::map<int, std::pair<double, double>> per_user;  // mlp, single_user
    bool have = false;
    for (const auto& r : t.rows) {
      if (r.scheme == "mlp") {
        per_user[r.user].first = r.rate;
        have = true;
      }
      if (r.scheme == "single_user") per_user[r.user].second = r.rate;
    }
    if (!have) continue;
    for (const auto& [user, pr] : per_user) {
      if (pr.second > 0.0) {
        ratio_sum += pr.first / pr.second;
        ++ratio_n;
      }
    }
  }
  for (const auto& [name, acc] : leak) row.mean_leakage[name] = acc.first / acc.second;
  row.mean_ratio_mlp = ratio_n > 0 ? ratio_sum / ratio_n : 0.0;
  return row;
}

std::vector<SweepRow> sweep(const ScenarioConfig& cfg, const std::string& axis,
                            std::span<const double> values, int workers) {
  if (values.empty()) throw Error(ErrorCode::EmptyInput, "no sweep values");
  std::vector<SweepRow> out;
  for (double v : values) {
    ScenarioConfig c = cfg;
    set_axis(c, axis, v);
    out.push_back(summarize(v, run_scenario(c, workers)));
  }
  return out;
}

}  // namespace fdmimo
