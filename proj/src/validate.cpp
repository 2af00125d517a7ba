#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <locale>
#include <optional>
#include <numbers>
#include <sstream>

#include "fdmimo/error.hpp"
#include "fdmimo/harness.hpp"

namespace fdmimo {
namespace {

constexpr int kMaxExactAttempts = 64;

std::string sci(double v) {
  std::ostringstream ss;
  ss.imbue(std::locale::classic());
  ss.precision(3);
  ss << std::scientific << v;
  return ss.str();
}

}  // namespace

ExactScenario build_exact_scenario(const Scenario& sc, std::uint64_t seed) {
  const auto& cfg = sc.cfg;
  if (sc.plain.empty()) throw Error(ErrorCode::InvalidParameter, "scenario has no plain first layer");
  const CMatrix& null_basis = sc.plain[0].null_basis;
  for (int attempt = 0; attempt < kMaxExactAttempts; ++attempt) {
    Rng rng = make_rng(seed, {static_cast<std::uint64_t>(Stream::Validate),
                              static_cast<std::uint64_t>(attempt)});
    ExactScenario ex;
    ex.null_basis = null_basis;
    ex.snr = sc.snr;
    const auto users = drop_cell_users(sc.layout, 0, static_cast<std::size_t>(cfg.k), cfg, rng);
    std::vector<EffectiveEigen> effs;
    bool usable = true;
    for (const auto& u : users) {
      const auto g = link_geometry(sc.layout.bs_positions[0], sc.layout.h_bs, u.xy,
                                   cfg.pl_exponent, cfg.d_ref);
      ChannelEigen ce;
      ChannelRealization real;
      if (cfg.model == ChannelModel::SinglePath) {
        auto sp = single_path_channel(g, complex_normal(rng), cfg.n_v, cfg.n_h, cfg.spacing_wl);
        ce = std::move(sp.eigen);
        real = std::move(sp.realization);
      } else {
        const auto az = one_ring_az(g, cfg.delta_a, cfg.n_h, cfg.spacing_wl);
        const auto el = one_ring_el(g, cfg.delta_e, cfg.n_v, cfg.spacing_wl);
        ce = factor_eigen(az.factor, el.factor, g.rho, cfg.eps_rel);
        real = kl_sample(ce, rng);
      }
      effs.push_back(effective_eigen(ce, null_basis));
      if (effs.back().r_e() == 0 || effs.back().u_el_eff.norm() == 0.0) usable = false;
      ex.geoms.push_back(g);
      ex.w_bars.push_back(real.w_bar);
      ex.eigen.push_back(std::move(ce));
      ex.channels.push_back(std::move(real));
    }
    if (!usable) continue;
    try {
      ex.stack = build_multilayer_exact(null_basis, std::move(effs), ex.w_bars);
      return ex;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::InsufficientDimensions && e.code() != ErrorCode::RankDeficient) {
        throw;
      }
    }
  }
  throw Error(ErrorCode::InsufficientDimensions,
              "no feasible user set after " + std::to_string(kMaxExactAttempts) + " draws");
}

std::vector<InvariantResult> validate(const ScenarioConfig& cfg) {
  // Small fixed scenario: the identities do not depend on array size.
  ScenarioConfig small = cfg;
  small.n_v = 32;
  small.n_h = 16;
  small.k = 5;
  small.pool = std::max(small.pool, small.k);
  small.cov_realizations = std::min(small.cov_realizations, 8);
  small.schemes = {"mlp"};

  std::vector<InvariantResult> out;
  const auto record = [&out](const std::string& name, const std::function<std::string(bool&)>& body) {
    InvariantResult r{name, false, ""};
    try {
      r.detail = body(r.passed);
    } catch (const Error& e) {
      r.passed = false;
      r.detail = e.what();
    } catch (const std::exception& e) {
      r.passed = false;
      r.detail = std::string("unexpected: ") + e.what();
    }
    out.push_back(std::move(r));
  };

  std::optional<Scenario> sc;
  std::optional<ExactScenario> ex;
  std::string setup_error;
  try {
    sc = prepare_scenario(small);
    ex = build_exact_scenario(*sc, small.seed);
  } catch (const Error& e) {
    setup_error = e.what();
  }
  const auto need_exact = [&]() -> const ExactScenario& {
    if (!ex) throw Error(ErrorCode::InvalidParameter, "setup failed: " + setup_error);
    return *ex;
  };

  record("power_constraint", [&](bool& ok) {
    const auto& e = need_exact();
    double worst = 0.0;
    for (Eigen::Index k = 0; k < e.stack.composed.cols(); ++k) {
      worst = std::max(worst, std::abs(e.stack.composed.col(k).norm() - 1.0));
    }
    ok = worst <= 1e-9;
    return "max | ||f_k|| - 1 | = " + sci(worst);
  });

  record("intra_cell_nulling", [&](bool& ok) {
    const auto& e = need_exact();
    double worst = 0.0;
    for (std::size_t k = 0; k < e.channels.size(); ++k) {
      const Eigen::RowVectorXcd amp = e.channels[k].h.adjoint() * e.stack.composed;
      const double desired = std::norm(amp(static_cast<Eigen::Index>(k)));
      for (Eigen::Index m = 0; m < amp.size(); ++m) {
        if (m != static_cast<Eigen::Index>(k)) worst = std::max(worst, std::norm(amp(m)) / desired);
      }
    }
    ok = worst <= 1e-18;
    return "max leakage / desired = " + sci(worst);
  });

  record("closed_form_oracle", [&](bool& ok) {
    const auto& e = need_exact();
    const RVector closed = rate_closed_form(e.stack.gram, e.w_bars, e.snr);
    double worst = 0.0;
    for (std::size_t k = 0; k < e.channels.size(); ++k) {
      const std::vector<CVector> h{e.channels[k].h};
      const std::vector<CMatrix> f{e.stack.composed};
      const double direct = sinr_direct(h, f, 0, static_cast<Eigen::Index>(k), e.snr).rate();
      const double lk = closed(static_cast<Eigen::Index>(k));
      worst = std::max(worst, std::abs(direct - lk) / std::max(lk, 1e-300));
    }
    ok = worst <= 1e-8;
    return "max relative gap = " + sci(worst);
  });

  record("edge_bound_dominance", [&](bool& ok) {
    const auto& e = need_exact();
    const RVector closed = rate_closed_form(e.stack.gram, e.w_bars, e.snr);
    double margin = std::numeric_limits<double>::infinity();
    int checked = 0;
    for (std::size_t k = 0; k < e.channels.size(); ++k) {
      bool separated = true;
      for (std::size_t m = 0; m < e.geoms.size(); ++m) {
        if (m == k) continue;
        LinkGeometry a = e.geoms[k];
        LinkGeometry b = e.geoms[m];
        a.phi = folded_azimuth(a.phi);
        b.phi = folded_azimuth(b.phi);
        separated = separated && angular_separation_ok(a, b, small.delta_a, small.delta_e);
      }
      if (!separated) continue;
      ++checked;
      const double bound =
          edge_lower_bound(e.w_bars[k], e.stack.effectives[k].u_el_eff, e.snr);
      margin = std::min(margin, closed(static_cast<Eigen::Index>(k)) - bound);
    }
    ok = checked == 0 || margin >= -1e-9;
    return std::to_string(checked) + " separated users, min(rate - bound) = " +
           (checked ? sci(margin) : std::string("n/a"));
  });

  record("off_spread_decay", [&](bool& ok) {
    const double deg = std::numbers::pi / 180.0;
    // Broadside user in the horizontal plane, the most favourable geometry.
    const LinkGeometry g{1.0, 0.0, 0.5 * std::numbers::pi, 1.0};
    std::vector<double> values;
    for (int n_h : {16, 64, 256}) {
      const CMatrix r = one_ring_az_cov(g, 5.0 * deg, n_h, small.spacing_wl);
      const CVector u = steering_az(n_h, small.spacing_wl, 15.0 * deg, g.theta) /
                        std::sqrt(static_cast<double>(n_h));
      values.push_back((u.adjoint() * r * u)(0).real());
    }
    ok = values[1] <= values[0] && values[2] <= values[1] && values[2] < 0.01;
    return "u^H R u at N_H 16/64/256 = " + sci(values[0]) + ", " + sci(values[1]) + ", " +
           sci(values[2]);
  });

  record("rank_angle_law", [&](bool& ok) {
    const double law = rank_angle_law(256, 0.5, 0.5 * std::numbers::pi, 2.0 * std::numbers::pi / 3.0);
    const double k = 2.0 * std::numbers::pi * 0.5;
    const auto cov = angular_covariance(256, 0.5 * std::numbers::pi, 2.0 * std::numbers::pi / 3.0,
                                        [k](double a) { return k * std::cos(a); });
    const auto count = static_cast<double>(truncate(hermitian_eig(cov.cov), 1e-3).rank());
    ok = std::abs(count - law) <= 0.1 * law;
    return "eigen-count " + std::to_string(static_cast<int>(count)) + " vs law " + sci(law);
  });

  record("error_paths", [&](bool& ok) {
    InterferenceCov full{CMatrix::Identity(4, 4), 1};
    try {
      layer1(full, small.eps_rel);
      ok = false;
      return std::string("full-rank interference did not raise EmptyNullSpace");
    } catch (const Error& e) {
      ok = e.code() == ErrorCode::EmptyNullSpace;
      return std::string("full-rank interference -> ") + e.what();
    }
  });

  return out;
}

}  // namespace fdmimo
