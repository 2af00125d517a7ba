#include <numbers>

#include "fdmimo/precoding.hpp"
#include "support.hpp"

using namespace fdmimo;
using namespace testing;

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

// K users with random orthonormal bases of the given ranks on an n_h x r_ni grid.
std::vector<EffectiveEigen> random_effectives(int k, Eigen::Index n_h, Eigen::Index r_ni,
                                              Eigen::Index r_a, Eigen::Index r_e, Rng& rng) {
  std::vector<EffectiveEigen> out;
  for (int i = 0; i < k; ++i) {
    out.push_back({random_isometry(n_h, r_a, rng), random_isometry(r_ni, r_e, rng)});
  }
  return out;
}

std::vector<CVector> random_wbars(std::span<const EffectiveEigen> effs, Rng& rng) {
  std::vector<CVector> w;
  for (const auto& e : effs) w.push_back(random_vector(e.r_a() * e.r_e(), rng));
  return w;
}

// F = (I kron P) F2 F3 built densely.
CMatrix dense_compose(const CMatrix& p, std::span<const EffectiveEigen> effs, const CMatrix& f3) {
  const Eigen::Index n_h = effs.front().u_az.rows();
  return kron(CMatrix::Identity(n_h, n_h), p) * layer2(effs) * f3;
}

}  // namespace

TEST_SUITE("precoding") {
  TEST_CASE("layer1 null spaces") {
    const auto zero = layer1({CMatrix::Zero(5, 5), 1}, 1e-3);
    CHECK(max_abs(zero.null_basis - CMatrix::Identity(5, 5)) == 0.0);

    CMatrix e1 = CMatrix::Zero(5, 5);
    e1(0, 0) = 1.0;
    const auto one = layer1({e1, 1}, 1e-3);
    CHECK(one.r_ni() == 4);
    CHECK(one.null_basis.row(0).norm() < 1e-14);

    CHECK(error_of([] { layer1({CMatrix::Identity(4, 4), 1}, 1e-3); }) == ErrorCode::EmptyNullSpace);
  }

  TEST_CASE("layer1 filter blocks the interference subspace") {
    Rng rng = make_rng(31, {1});
    const CMatrix b = random_matrix(12, 4, rng);
    const auto l = layer1({b * b.adjoint(), 1}, 1e-6);
    CHECK(l.r_ni() == 8);
    CHECK(max_abs(l.null_basis.adjoint() * b) < 1e-10);
    CHECK(max_abs(l.null_basis.adjoint() * l.null_basis - CMatrix::Identity(8, 8)) < 1e-12);
  }

  TEST_CASE("rank_angle_law") {
    CHECK(rank_angle_law(256, 0.5, 0.5 * std::numbers::pi, 120 * kDeg) == doctest::Approx(64.0));
    CHECK(rank_angle_law(64, 0.5, 1.9, 1.9) == 0.0);
    CHECK(error_of([] { rank_angle_law(64, 0.5, 2.0, 1.9); }) == ErrorCode::InvalidParameter);
  }

  TEST_CASE("augmented layer1 against the plain filter") {
    // Interference spread uniformly over [90, 115] degrees.
    const double k = 2.0 * std::numbers::pi * 0.5;
    const auto r = angular_covariance(64, 0.5 * std::numbers::pi, 115 * kDeg,
                                      [k](double a) { return k * std::cos(a); });
    const InterferenceCov ri{r.cov, 1};
    const auto plain = layer1(ri, 1e-3);
    const auto same = augmented_layer1(ri, 64, 0.5, 0.0, 1e-3);
    CHECK(same.r_ni() <= plain.r_ni());
    CHECK(plain.r_ni() - same.r_ni() <= 7);
    CHECK(same.theta_i > 115 * kDeg);

    const auto wider = augmented_layer1(ri, 64, 0.5, 6 * kDeg, 1e-3);
    CHECK(wider.r_ni() > same.r_ni());
    CHECK(wider.theta_i == same.theta_i);

    // Tiny interference rank leaves theta_I near 90 degrees.
    CMatrix e1 = CMatrix::Zero(64, 64);
    e1(0, 0) = 1.0;
    CHECK(error_of([&] { augmented_layer1({e1, 1}, 64, 0.5, 6 * kDeg, 1e-3); }) ==
          ErrorCode::InvalidParameter);
    CHECK(error_of([&] { augmented_layer1(ri, 64, 0.5, -1.0, 1e-3); }) == ErrorCode::InvalidParameter);
  }

  TEST_CASE("layer2 structure") {
    Rng rng = make_rng(31, {2});
    std::vector<EffectiveEigen> one{{random_isometry(4, 1, rng), 0.5 * random_isometry(6, 1, rng)}};
    const CMatrix f2 = layer2(one);
    CHECK(f2.cols() == 1);
    CHECK(max_abs(f2 - kron(one[0].u_az, one[0].u_el_eff)) == 0.0);
    CHECK(f2.norm() <= 1.0 + 1e-12);

    // Users on disjoint azimuth supports: F2 has orthonormal columns.
    std::vector<EffectiveEigen> disjoint;
    for (int u = 0; u < 3; ++u) {
      CMatrix az = CMatrix::Zero(6, 2);
      az(2 * u, 0) = 1.0;
      az(2 * u + 1, 1) = 1.0;
      disjoint.push_back({az, random_isometry(5, 2, rng)});
    }
    const CMatrix g = layer2_gram(disjoint);
    CHECK(max_abs(g - CMatrix::Identity(12, 12)) < 1e-14);
  }

  TEST_CASE("Kronecker-block Gram and effective channels match the dense route") {
    Rng rng = make_rng(31, {3});
    for (int rep = 0; rep < 10; ++rep) {
      const auto effs = random_effectives(4, 5, 6, 2, 2, rng);
      const auto w = random_wbars(effs, rng);
      const CMatrix f2 = layer2(effs);
      CHECK(max_abs(layer2_gram(effs) - f2.adjoint() * f2) < 1e-10);
      CHECK(max_abs(effective_channels(effs, w) - effective_channels_dense(f2, w)) < 1e-10);
    }
    const auto single = random_effectives(1, 5, 6, 2, 3, rng);
    const auto w1 = random_wbars(single, rng);
    const CMatrix g = layer2_gram(single);
    CHECK(max_abs(effective_channels(single, w1) - g * w1[0]) < 1e-12);
  }

  TEST_CASE("project_channel equals F2^H F1^H h") {
    Rng rng = make_rng(31, {4});
    const CMatrix p = random_isometry(7, 5, rng);
    const auto effs = random_effectives(3, 4, 5, 2, 2, rng);
    const CVector h = random_vector(28, rng);
    const CMatrix f1 = kron(CMatrix::Identity(4, 4), p);
    CHECK(max_abs(project_channel(h, p, effs) - layer2(effs).adjoint() * f1.adjoint() * h) < 1e-12);
  }

  TEST_CASE("layer3 trivial cases") {
    const auto id = layer3(CMatrix::Identity(3, 3), CMatrix::Identity(3, 3));
    CHECK(max_abs(id.f3 - CMatrix::Identity(3, 3)) < 1e-14);
    CHECK((id.upsilon - RVector::Ones(3)).norm() < 1e-14);

    Rng rng = make_rng(31, {5});
    std::vector<EffectiveEigen> disjoint;
    for (int u = 0; u < 3; ++u) {
      CMatrix az = CMatrix::Zero(6, 2);
      az(2 * u, 0) = 1.0;
      az(2 * u + 1, 1) = 1.0;
      disjoint.push_back({az, random_isometry(4, 1, rng)});
    }
    const auto w = random_wbars(disjoint, rng);
    const CMatrix g = layer2_gram(disjoint);
    const auto l3 = layer3(effective_channels(disjoint, w), g);
    for (int k = 0; k < 3; ++k) CHECK(l3.upsilon(k) == doctest::Approx(w[k].norm()).epsilon(1e-12));
    // A projector Gram makes the plain normalization exact.
    CHECK((upsilon_plain(g, w) - l3.upsilon).norm() < 1e-10);

    CHECK(error_of([] { layer3(CMatrix::Identity(2, 3), CMatrix::Identity(2, 2)); }) ==
          ErrorCode::InsufficientDimensions);
  }

  TEST_CASE("composed precoder has unit columns and nulls other users") {
    Rng rng = make_rng(31, {6});
    for (int rep = 0; rep < 10; ++rep) {
      const CMatrix p = random_isometry(9, 6, rng);
      auto effs = random_effectives(3, 5, 6, 2, 2, rng);
      const auto w = random_wbars(effs, rng);
      const auto stack = build_multilayer_exact(p, effs, w);
      const CMatrix dense = dense_compose(p, effs, stack.f3);
      CHECK(max_abs(stack.composed - dense) < 1e-10);
      for (Eigen::Index k = 0; k < 3; ++k) {
        CHECK(stack.composed.col(k).norm() == doctest::Approx(1.0).epsilon(1e-9));
      }
      // Channels synthesized on the filtered bases: h_k = F1 U_eff,k w_k.
      for (std::size_t k = 0; k < 3; ++k) {
        const CVector hk = kron(CMatrix::Identity(5, 5), p) * effs[k].u_eff() * w[k];
        const Eigen::RowVectorXcd amp = hk.adjoint() * stack.composed;
        for (Eigen::Index m = 0; m < 3; ++m) {
          if (m == static_cast<Eigen::Index>(k)) {
            CHECK(std::abs(amp(m)) == doctest::Approx(stack.upsilon(m)).epsilon(1e-9));
          } else {
            CHECK(std::norm(amp(m)) <= 1e-18 * std::norm(amp(static_cast<Eigen::Index>(k))));
          }
        }
      }
    }
  }

  TEST_CASE("plain normalization differs from the exact one off projectors") {
    Rng rng = make_rng(31, {7});
    const auto effs = random_effectives(3, 3, 4, 2, 2, rng);
    const auto w = random_wbars(effs, rng);
    const CMatrix g = layer2_gram(effs);
    const auto exact = layer3(effective_channels(effs, w), g).upsilon;
    CHECK((upsilon_plain(g, w) - exact).norm() > 1e-6 * exact.norm());
  }

  TEST_CASE("multilayer dimension check") {
    Rng rng = make_rng(31, {8});
    const CMatrix p = random_isometry(4, 2, rng);
    const auto effs = random_effectives(3, 2, 2, 2, 2, rng);
    const auto w = random_wbars(effs, rng);
    CHECK(error_of([&] { build_multilayer_exact(p, effs, w); }) == ErrorCode::InsufficientDimensions);
  }

  TEST_CASE("conjugate beamforming and ZF baselines") {
    Rng rng = make_rng(31, {9});
    const CMatrix h = random_matrix(10, 3, rng);
    const CMatrix cb = conjugate_beamforming(h);
    for (Eigen::Index k = 0; k < 3; ++k) {
      CHECK(std::abs(h.col(k).dot(cb.col(k))) == doctest::Approx(h.col(k).norm()));
    }
    CMatrix zero = h;
    zero.col(1).setZero();
    CHECK(error_of([&] { conjugate_beamforming(zero); }) == ErrorCode::ZeroChannel);

    const CMatrix zf = zf_baseline(h);
    const CMatrix cross = h.adjoint() * zf;
    for (Eigen::Index k = 0; k < 3; ++k) {
      CHECK(zf.col(k).norm() == doctest::Approx(1.0));
      for (Eigen::Index m = 0; m < 3; ++m) {
        if (m != k) CHECK(std::abs(cross(m, k)) < 1e-10);
      }
    }
    // Orthogonal channels: ZF reduces to conjugate beamforming.
    const CMatrix orth = random_isometry(10, 3, rng) * RVector::LinSpaced(3, 1.0, 3.0).cast<cd>().asDiagonal();
    CHECK(max_abs(zf_baseline(orth) - conjugate_beamforming(orth)) < 1e-12);
  }
}
