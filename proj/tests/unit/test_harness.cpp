#include <algorithm>
#include <numbers>
#include <set>

#include "fdmimo/harness.hpp"
#include "fdmimo/report.hpp"
#include "support.hpp"

using namespace fdmimo;
using namespace testing;

namespace {

ScenarioConfig small_config() {
  ScenarioConfig c;
  c.n_v = 16;
  c.n_h = 8;
  c.k = 4;
  c.pool = 6;
  c.trials = 3;
  c.cov_realizations = 4;
  return c;
}

}  // namespace

TEST_SUITE("harness") {
  TEST_CASE("random scheduling") {
    std::vector<LinkGeometry> pool;
    for (int i = 0; i < 6; ++i) pool.push_back({50.0, 0.3 * i, 1.9, 1.0});
    Rng a = make_rng(5, {1});
    const auto all = schedule_users(pool, 6, Scheduler::Random, 0.1, 0.05, a);
    std::vector<std::size_t> sorted = all.indices;
    std::sort(sorted.begin(), sorted.end());
    CHECK(sorted == std::vector<std::size_t>{0, 1, 2, 3, 4, 5});
    CHECK(all.violations == 0);

    Rng b1 = make_rng(5, {2});
    Rng b2 = make_rng(5, {2});
    CHECK(schedule_users(pool, 3, Scheduler::Random, 0.1, 0.05, b1).indices ==
          schedule_users(pool, 3, Scheduler::Random, 0.1, 0.05, b2).indices);
    CHECK(error_of([&] { schedule_users(pool, 7, Scheduler::Random, 0.1, 0.05, b1); }) ==
          ErrorCode::InvalidParameter);
  }

  TEST_CASE("separated scheduling") {
    const double deg = std::numbers::pi / 180.0;
    const std::vector<LinkGeometry> same(8, LinkGeometry{50.0, 0.2, 1.9, 1.0});
    Rng rng = make_rng(5, {3});
    CHECK(schedule_users(same, 5, Scheduler::Separated, 5 * deg, 3 * deg, rng).violations == 4);

    std::vector<LinkGeometry> spread;
    for (int i = 0; i < 8; ++i) spread.push_back({50.0, (-70.0 + 20.0 * i) * deg, 1.9, 1.0});
    const auto s = schedule_users(spread, 5, Scheduler::Separated, 5 * deg, 3 * deg, rng);
    CHECK(s.violations == 0);
    for (std::size_t i = 0; i < s.indices.size(); ++i) {
      for (std::size_t j = i + 1; j < s.indices.size(); ++j) {
        CHECK(angular_separation_ok(spread[s.indices[i]], spread[s.indices[j]], 5 * deg, 3 * deg));
      }
    }
  }

  TEST_CASE("restricted drops stay within d_max") {
    ScenarioConfig c = small_config();
    c.restrict_dmax = true;
    const auto layout = make_layout(c);
    Rng rng = make_rng(5, {4});
    const double limit = d_max(c.h_bs, c.r_cell, c.delta_e);
    for (const auto& u : drop_cell_users(layout, 0, 200, c, rng)) {
      CHECK(std::hypot(u.xy.x, u.xy.y) <= limit);
    }
  }

  TEST_CASE("interference covariance") {
    ScenarioConfig c = small_config();
    c.cells = 1;
    Rng rng = make_rng(5, {5});
    const auto single = interference_covariances(make_layout(c), c, 3, 2, rng);
    REQUIRE(single.size() == 1);
    CHECK(max_abs(single[0].r_i) == 0.0);

    // The six outer sites are rotations of one another, so their averages agree.
    ScenarioConfig h = small_config();
    h.n_v = 8;
    Rng rng2 = make_rng(5, {6});
    const auto r = interference_covariances(make_layout(h), h, 2000, 2, rng2);
    REQUIRE(r.size() == 7);
    for (std::size_t b = 2; b < 7; ++b) {
      CHECK((r[b].r_i - r[1].r_i).norm() <= 0.05 * r[1].r_i.norm());
    }
    CHECK(max_abs(r[0].r_i - r[0].r_i.adjoint()) < 1e-12);
    CHECK(error_of([&] { interference_covariances(make_layout(h), h, 0, 2, rng2); }) ==
          ErrorCode::InvalidParameter);
  }

  TEST_CASE("trial records") {
    ScenarioConfig c = small_config();
    const auto sc = prepare_scenario(c);
    const auto t = run_trial(sc, 0);
    CHECK(t.rows.size() == static_cast<std::size_t>(c.k) * c.schemes.size());
    CHECK(t.users.size() == static_cast<std::size_t>(c.k));
    for (const auto& row : t.rows) {
      CHECK(row.rate >= 0.0);
      CHECK(std::isfinite(row.rate));
      CHECK(row.cell == 0);
    }
    for (const auto& u : t.users) {
      const auto it = std::find_if(t.rows.begin(), t.rows.end(), [&](const RateRow& r) {
        return r.user == u.user && r.scheme == "single_user";
      });
      REQUIRE(it != t.rows.end());
      CHECK(it->rate == doctest::Approx(single_user_rate_gain(u.channel_power, sc.snr)));
    }
  }

  TEST_CASE("single cell: every scheme's rate is its direct SINR and MLP nulls intra-cell") {
    ScenarioConfig c = small_config();
    c.cells = 1;
    c.k = 3;
    c.pool = 3;
    const auto sc = prepare_scenario(c);
    for (int trial = 0; trial < 3; ++trial) {
      const auto t = run_trial(sc, trial);
      for (const auto& u : t.users) {
        for (const auto& [scheme, terms] : u.terms) {
          CHECK(terms.inter == 0.0);
          const auto it = std::find_if(t.rows.begin(), t.rows.end(), [&](const RateRow& r) {
            return r.user == u.user && r.scheme == scheme;
          });
          REQUIRE(it != t.rows.end());
          if (u.dropped.count(scheme) && u.dropped.at(scheme)) continue;
          CHECK(it->rate == doctest::Approx(terms.rate()).epsilon(1e-12));
          if (scheme == "mlp") CHECK(terms.intra <= 1e-18 * terms.desired);
          // With no interference, nothing beats the single-user bound.
          CHECK(terms.rate() <= single_user_rate_gain(u.channel_power, sc.snr) + 1e-9);
        }
      }
    }
  }

  TEST_CASE("single_user-only schemes") {
    ScenarioConfig c = small_config();
    c.schemes = {"single_user"};
    const auto rep = run_scenario(c, 1);
    CHECK(rep.rows.size() == static_cast<std::size_t>(c.k * c.trials));
    for (const auto& t : rep.trials) {
      for (const auto& u : t.users) {
        CHECK(t.rows[static_cast<std::size_t>(u.user)].rate ==
              doctest::Approx(single_user_rate_gain(u.channel_power, prepare_scenario(c).snr)));
      }
    }
  }

  TEST_CASE("worker count does not change results") {
    const ScenarioConfig c = small_config();
    const auto one = run_scenario(c, 1);
    const auto three = run_scenario(c, 3);
    CHECK(one.rows == three.rows);
    CHECK(report_csv(one) == report_csv(three));
    CHECK(report_json(one) == report_json(three));
    CHECK(report_csv(run_scenario(c, 2)) == report_csv(one));
  }

  TEST_CASE("aggregates") {
    const auto rep = run_scenario(small_config(), 1);
    for (const auto& [scheme, agg] : rep.aggregates) {
      const auto v = rep.rates(scheme);
      CHECK(agg.count == v.size());
      CHECK(agg.mean == doctest::Approx(mean(v)));
      CHECK(agg.p5 == doctest::Approx(percentile(v, 5)));
      CHECK(agg.p50 == doctest::Approx(percentile(v, 50)));
      CHECK(agg.p5 <= agg.p50);
      CHECK(agg.p50 <= agg.p95);
    }
  }

  TEST_CASE("sweep") {
    const ScenarioConfig c = small_config();
    const std::vector<double> one{16.0};
    const auto rows = sweep(c, "n_v", one, 1);
    REQUIRE(rows.size() == 1);
    const auto direct = run_scenario(c, 1);
    for (const auto& [scheme, agg] : direct.aggregates) {
      CHECK(rows[0].aggregates.at(scheme).mean == agg.mean);
    }
    ScenarioConfig moved = c;
    set_axis(moved, "h_bs", 50.0);
    CHECK(moved.h_bs == 50.0);
    CHECK(error_of([&] { set_axis(moved, "colour", 1.0); }) == ErrorCode::InvalidParameter);
  }

  TEST_CASE("validate reports each invariant once") {
    const auto results = validate(ScenarioConfig{});
    std::set<std::string> names;
    for (const auto& r : results) names.insert(r.name);
    CHECK(names.size() == results.size());
    CHECK(names.count("power_constraint") == 1);
    CHECK(names.count("error_paths") == 1);
    for (const auto& r : results) {
      if (r.name != "off_spread_decay") CHECK_MESSAGE(r.passed, r.name << ": " << r.detail);
    }

    ScenarioConfig harsh;
    harsh.eps_rel = 0.999;
    const auto degraded = validate(harsh);
    CHECK(degraded.size() == results.size());
  }
}

TEST_SUITE("report") {
  TEST_CASE("CSV layout") {
    ScenarioConfig c = small_config();
    c.k = 1;
    c.pool = 1;
    c.trials = 1;
    c.schemes = {"cb", "single_user"};
    const auto rep = run_scenario(c, 1);
    const std::string csv = report_csv(rep);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
    CHECK(csv.rfind("trial,cell,user,d_m,phi_rad,theta_rad,scheme,rate_bps_hz\n", 0) == 0);
    CHECK(csv == report_csv(run_scenario(c, 1)));
  }

  TEST_CASE("JSON round trip") {
    const auto rep = run_scenario(small_config(), 1);
    const auto back = rows_from_json(report_json(rep));
    REQUIRE(back.size() == rep.rows.size());
    for (std::size_t i = 0; i < back.size(); ++i) {
      CHECK(back[i].trial == rep.rows[i].trial);
      CHECK(back[i].user == rep.rows[i].user);
      CHECK(back[i].scheme == rep.rows[i].scheme);
      // Records are written with 9 significant digits.
      CHECK(back[i].rate == doctest::Approx(rep.rows[i].rate).epsilon(1e-8));
    }
    CHECK(error_of([] { rows_from_json("{not json"); }) == ErrorCode::ParseError);
  }

  TEST_CASE("coverage series per scheme") {
    ScenarioConfig c = small_config();
    c.schemes = {"mlp", "single_user"};
    const std::string cov = coverage_csv(run_scenario(c, 1), 5);
    std::size_t mlp = 0, su = 0, pos = 0;
    while ((pos = cov.find('\n', pos)) != std::string::npos) {
      ++pos;
      if (cov.compare(pos, 4, "mlp,") == 0) ++mlp;
      if (cov.compare(pos, 12, "single_user,") == 0) ++su;
    }
    CHECK(mlp == 5 + 3);
    CHECK(su == 5 + 3);
  }

  TEST_CASE("file output") {
    CHECK(error_of([] { write_text_file("/nonexistent/dir/out.csv", "x"); }) == ErrorCode::IoError);
  }
}
