#include "fdmimo/precoding.hpp"
#include "fdmimo/rates.hpp"
#include "support.hpp"

using namespace fdmimo;
using namespace testing;

TEST_SUITE("rates") {
  TEST_CASE("link budget") {
    CHECK(noise_power_dbm(10e6, 7.0) == doctest::Approx(-97.0).epsilon(1e-12));
    CHECK(noise_power_dbm(1.0, 0.0) == doctest::Approx(-174.0).epsilon(1e-12));
    // 35 dBm over K=20 against -97 dBm noise: 10^13.2 / 20.
    const LinkBudget b;
    CHECK(b.snr_per_stream() == doctest::Approx(7.924465962305e11).epsilon(1e-9));
    CHECK(error_of([] { noise_power_dbm(0.0, 7.0); }) == ErrorCode::InvalidParameter);
    CHECK(error_of([] { LinkBudget{35.0, 10e6, 7.0, 0}.snr_per_stream(); }) == ErrorCode::InvalidParameter);
  }

  TEST_CASE("direct SINR trivial cases") {
    Rng rng = make_rng(41, {1});
    const CVector h = random_vector(6, rng);
    const std::vector<CVector> hs{h};
    const std::vector<CMatrix> mf{h / h.norm()};
    const auto t = sinr_direct(hs, mf, 0, 0, 2.5);
    CHECK(t.sinr() == doctest::Approx(2.5 * h.squaredNorm()));

    CMatrix orth = orthogonal_complement(h / h.norm(), 6).leftCols(1);
    const std::vector<CMatrix> off{orth};
    CHECK(sinr_direct(hs, off, 0, 0, 2.5).desired < 1e-28);
    CHECK(error_of([&] { sinr_direct(hs, mf, 0, 1, 2.5); }) == ErrorCode::DimensionMismatch);
  }

  TEST_CASE("direct SINR equals a term-by-term expansion") {
    Rng rng = make_rng(41, {2});
    for (int rep = 0; rep < 10; ++rep) {
      const int n_bs = 3, n = 5, k = 2;
      std::vector<CVector> h;
      std::vector<CMatrix> f;
      for (int b = 0; b < n_bs; ++b) {
        h.push_back(random_vector(n, rng));
        f.push_back(random_matrix(n, k, rng));
      }
      const double snr = 3.0;
      for (std::size_t s = 0; s < static_cast<std::size_t>(n_bs); ++s) {
        for (Eigen::Index u = 0; u < k; ++u) {
          double desired = 0.0, interference = 0.0;
          for (std::size_t b = 0; b < static_cast<std::size_t>(n_bs); ++b) {
            for (Eigen::Index m = 0; m < k; ++m) {
              cd amp = 0.0;
              for (int i = 0; i < n; ++i) amp += std::conj(h[b](i)) * f[b](i, m);
              if (b == s && m == u) {
                desired = std::norm(amp);
              } else {
                interference += std::norm(amp);
              }
            }
          }
          const auto t = sinr_direct(h, f, s, u, snr);
          const double expect = desired / (interference + 1.0 / snr);
          CHECK(std::abs(t.sinr() - expect) <= 1e-12 * expect);
        }
      }
    }
  }

  TEST_CASE("closed-form rate") {
    Rng rng = make_rng(41, {3});
    // Orthonormal F2 columns: the single-user rate.
    const std::vector<CVector> w{random_vector(2, rng), random_vector(3, rng)};
    const RVector r = rate_closed_form(CMatrix::Identity(5, 5), w, 4.0);
    CHECK(r(0) == doctest::Approx(single_user_rate(w[0], 4.0)).epsilon(1e-12));
    CHECK(r(1) == doctest::Approx(single_user_rate(w[1], 4.0)).epsilon(1e-12));

    // K=1 against the closed form: Upsilon^2 = |w^H G^2 w|^2 / (w^H G^3 w).
    const CMatrix a = random_matrix(4, 3, rng);
    const CMatrix g = a.adjoint() * a;
    const std::vector<CVector> w1{random_vector(3, rng)};
    const double num = std::norm(w1[0].dot(g * g * w1[0]));
    const double den = w1[0].dot(g * g * g * w1[0]).real();
    const double direct = std::log2(1.0 + 2.0 * num / den);
    CHECK(rate_closed_form(g, w1, 2.0)(0) == doctest::Approx(direct).epsilon(1e-10));

    const std::vector<CVector> w2{random_vector(2, rng), random_vector(2, rng)};
    CHECK(error_of([&] { rate_closed_form(g, w2, 1.0); }) == ErrorCode::DimensionMismatch);
  }

  TEST_CASE("closed-form rate equals log2(1 + snr Upsilon^2) from layer 3") {
    Rng rng = make_rng(41, {4});
    std::vector<EffectiveEigen> effs;
    std::vector<CVector> w;
    for (int k = 0; k < 3; ++k) {
      effs.push_back({random_isometry(4, 2, rng), random_isometry(5, 2, rng)});
      w.push_back(random_vector(4, rng));
    }
    const CMatrix g = layer2_gram(effs);
    const auto l3 = layer3(effective_channels(effs, w), g);
    const RVector r = rate_closed_form(g, w, 7.0);
    for (Eigen::Index k = 0; k < 3; ++k) {
      CHECK(std::abs(r(k) - std::log2(1.0 + 7.0 * l3.upsilon(k) * l3.upsilon(k))) < 1e-10);
    }
  }

  TEST_CASE("single-user rate and CB ceiling") {
    CHECK(single_user_rate(CVector::Zero(3), 5.0) == 0.0);
    CHECK(single_user_rate_gain(1.0, 1.0) == doctest::Approx(1.0));
    CHECK(single_user_rate_gain(3.0, 10.0) == doctest::Approx(4.954196310386875).epsilon(1e-12));
    const std::vector<double> one{0.5};
    CHECK(cb_ceiling(1.0, one, 10.0) == doctest::Approx(5.357552004618084).epsilon(1e-12));
    CHECK(error_of([] { cb_ceiling(1.0, {}, 10.0); }) == ErrorCode::NoInterferers);
  }

  TEST_CASE("edge lower bound") {
    Rng rng = make_rng(41, {5});
    const CVector w = random_vector(4, rng);
    const CMatrix iso = random_isometry(6, 2, rng);
    CHECK(edge_lower_bound(w, iso, 3.0) == doctest::Approx(single_user_rate(w, 3.0)).epsilon(1e-12));
    CHECK(edge_lower_bound(w, CMatrix::Zero(6, 2), 3.0) == 0.0);
    CHECK(edge_lower_bound(w, 0.5 * iso, 3.0) ==
          doctest::Approx(std::log2(1.0 + 3.0 * 0.25 * w.squaredNorm())).epsilon(1e-12));
    CHECK(error_of([&] { edge_lower_bound(w, CMatrix(0, 0), 3.0); }) == ErrorCode::EmptyInput);
  }

  TEST_CASE("CDF and percentiles") {
    const std::vector<double> flat{2.0, 2.0, 2.0};
    CHECK(empirical_cdf(flat, 1.999) == 0.0);
    CHECK(empirical_cdf(flat, 2.0) == 1.0);
    const std::vector<double> four{1, 2, 3, 4};
    CHECK(empirical_cdf(four, 2.5) == 0.5);

    // Reference values from numpy's default (linear) percentile.
    const std::vector<double> v{3.2, 0.5, 7.1, 2.2, 9.9, 4.4, 1.0};
    CHECK(percentile(v, 5) == doctest::Approx(0.65));
    CHECK(percentile(v, 50) == doctest::Approx(3.2));
    CHECK(percentile(v, 95) == doctest::Approx(9.06));
    CHECK(percentile(v, 33.3) == doctest::Approx(2.1976));
    CHECK(mean(four) == 2.5);

    const auto s = cdf_series(v, 11);
    CHECK(s.rate.size() == 11);
    CHECK(s.rate.back() == 9.9);
    CHECK(s.cdf.back() == 1.0);
    for (std::size_t i = 1; i < s.cdf.size(); ++i) CHECK(s.cdf[i] >= s.cdf[i - 1]);
    CHECK(error_of([] { percentile({}, 50); }) == ErrorCode::EmptyInput);
    CHECK(error_of([&] { percentile(v, 101); }) == ErrorCode::InvalidParameter);
  }
}
