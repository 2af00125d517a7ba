#include "fdmimo/channel.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <string>

#include "fdmimo/error.hpp"

namespace fdmimo {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr int kFirstLevel = 33;
constexpr int kMaxNodes = 1025;
constexpr double kQuadratureTol = 1e-10;

GaussLegendre compute_gauss_legendre(int n) {
  GaussLegendre gl;
  gl.nodes.resize(static_cast<std::size_t>(n));
  gl.weights.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // Recompute the derivative at the converged root.
    double p0 = 1.0;
    double p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    const auto lo = static_cast<std::size_t>(i);
    const auto hi = static_cast<std::size_t>(n - 1 - i);
    gl.nodes[lo] = -x;
    gl.nodes[hi] = x;
    gl.weights[lo] = w;
    gl.weights[hi] = w;
  }
  if (n % 2 == 1) gl.nodes[static_cast<std::size_t>(n / 2)] = 0.0;
  return gl;
}

// Lags r_l, l = 0..n-1, on one quadrature level, plus the node phases.
struct LevelResult {
  CVector lags;
  std::vector<double> phases;
  const GaussLegendre* rule = nullptr;
};

LevelResult evaluate_level(Eigen::Index n, int nodes, double mid, double half,
                           const std::function<double(double)>& phase_per_lag) {
  LevelResult out;
  out.rule = &gauss_legendre(nodes);
  out.phases.resize(static_cast<std::size_t>(nodes));
  for (int q = 0; q < nodes; ++q) {
    out.phases[static_cast<std::size_t>(q)] =
        phase_per_lag(mid + half * out.rule->nodes[static_cast<std::size_t>(q)]);
  }
  out.lags = CVector::Zero(n);
  // exp(-j l psi_q) by running products instead of n * nodes sincos calls.
  for (int q = 0; q < nodes; ++q) {
    const auto qi = static_cast<std::size_t>(q);
    const cd step = std::polar(1.0, -out.phases[qi]);
    const double w = 0.5 * out.rule->weights[qi];
    cd p = step;
    for (Eigen::Index l = 1; l < n; ++l) {
      out.lags(l) += w * p;
      p *= step;
    }
  }
  out.lags(0) = 1.0;
  return out;
}

CMatrix toeplitz_from_lags(const CVector& lags) {
  const Eigen::Index n = lags.size();
  CMatrix m(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i <= j; ++i) {
      m(i, j) = lags(j - i);
      m(j, i) = std::conj(lags(j - i));
    }
  }
  for (Eigen::Index i = 0; i < n; ++i) m(i, i) = cd(lags(0).real(), 0.0);
  return m;
}

void require_same_array(const ChannelEigen& a, const ChannelEigen& b) {
  if (a.n_h() != b.n_h() || a.n_v() != b.n_v()) {
    throw Error(ErrorCode::DimensionMismatch, "links use different array sizes");
  }
}

CMatrix scaled_vectors(const EigenBasis& eig) {
  return eig.vectors * eig.values.cwiseMax(0.0).cwiseSqrt().asDiagonal();
}

}  // namespace

const GaussLegendre& gauss_legendre(int n) {
  if (n < 1) throw Error(ErrorCode::InvalidParameter, "Gauss-Legendre order must be >= 1");
  static std::mutex mutex;
  static std::map<int, std::unique_ptr<GaussLegendre>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[n];
  if (!slot) slot = std::make_unique<GaussLegendre>(compute_gauss_legendre(n));
  return *slot;
}

CMatrix EffectiveEigen::u_eff() const { return kron(u_az, u_el_eff); }

namespace {

struct Converged {
  LevelResult level;
  int nodes = 0;
};

Converged converge(Eigen::Index n, double lo, double hi,
                   const std::function<double(double)>& phase_per_lag) {
  if (n < 1) throw Error(ErrorCode::InvalidParameter, "array dimension must be >= 1");
  if (!(hi > lo)) throw Error(ErrorCode::InvalidParameter, "empty angular range");
  const double mid = 0.5 * (lo + hi);
  const double half = 0.5 * (hi - lo);
  LevelResult coarse = evaluate_level(n, kFirstLevel, mid, half, phase_per_lag);
  for (int nodes = 2 * kFirstLevel - 1; nodes <= kMaxNodes; nodes = 2 * nodes - 1) {
    LevelResult fine = evaluate_level(n, nodes, mid, half, phase_per_lag);
    const double change = (fine.lags - coarse.lags).cwiseAbs().maxCoeff();
    if (change < kQuadratureTol) return {std::move(fine), nodes};
    coarse = std::move(fine);
  }
  throw Error(ErrorCode::QuadratureNotConverged,
              "covariance entries still changing at " + std::to_string(kMaxNodes) + " nodes");
}

}  // namespace

CMatrix hermitian_toeplitz(const CVector& lags) { return toeplitz_from_lags(lags); }

CVector angular_lags(Eigen::Index n, double lo, double hi,
                     const std::function<double(double)>& phase_per_lag) {
  return converge(n, lo, hi, phase_per_lag).level.lags;
}

AngularCovariance angular_covariance(Eigen::Index n, double lo, double hi,
                                     const std::function<double(double)>& phase_per_lag) {
  const Converged c = converge(n, lo, hi, phase_per_lag);
  AngularCovariance out;
  out.cov = toeplitz_from_lags(c.level.lags);
  out.nodes = c.nodes;
  out.factor.resize(n, c.nodes);
  for (int q = 0; q < c.nodes; ++q) {
    const auto qi = static_cast<std::size_t>(q);
    const double scale = std::sqrt(0.5 * c.level.rule->weights[qi]);
    const cd step = std::polar(1.0, c.level.phases[qi]);
    cd p = scale;
    for (Eigen::Index row = 0; row < n; ++row) {
      out.factor(row, q) = p;
      p *= step;
    }
  }
  return out;
}

CVector steering_az(int n_h, double spacing_wl, double phi, double theta) {
  CVector a(n_h);
  const double step = kTwoPi * spacing_wl * std::sin(phi) * std::sin(theta);
  for (int m = 0; m < n_h; ++m) a(m) = std::polar(1.0, step * m);
  return a;
}

CVector steering_el(int n_v, double spacing_wl, double theta) {
  CVector a(n_v);
  const double step = kTwoPi * spacing_wl * std::cos(theta);
  for (int n = 0; n < n_v; ++n) a(n) = std::polar(1.0, step * n);
  return a;
}

AngularCovariance one_ring_az(const LinkGeometry& geom, double delta_a, int n_h, double spacing_wl) {
  if (!(delta_a > 0.0)) throw Error(ErrorCode::InvalidParameter, "delta_a must be positive");
  if (n_h < 1) throw Error(ErrorCode::InvalidParameter, "n_h must be >= 1");
  const double k = kTwoPi * spacing_wl * std::sin(geom.theta);
  const double phi = geom.phi;
  return angular_covariance(n_h, -delta_a, delta_a,
                            [k, phi](double alpha) { return k * std::sin(phi + alpha); });
}

AngularCovariance one_ring_el(const LinkGeometry& geom, double delta_e, int n_v, double spacing_wl) {
  if (!(delta_e > 0.0)) throw Error(ErrorCode::InvalidParameter, "delta_e must be positive");
  if (n_v < 1) throw Error(ErrorCode::InvalidParameter, "n_v must be >= 1");
  const double k = kTwoPi * spacing_wl;
  const double theta = geom.theta;
  return angular_covariance(n_v, -delta_e, delta_e,
                            [k, theta](double alpha) { return k * std::cos(theta + alpha); });
}

CMatrix one_ring_az_cov(const LinkGeometry& geom, double delta_a, int n_h, double spacing_wl) {
  return one_ring_az(geom, delta_a, n_h, spacing_wl).cov;
}

CMatrix one_ring_el_cov(const LinkGeometry& geom, double delta_e, int n_v, double spacing_wl) {
  return toeplitz_from_lags(one_ring_el_lags(geom, delta_e, n_v, spacing_wl));
}

CVector one_ring_el_lags(const LinkGeometry& geom, double delta_e, int n_v, double spacing_wl) {
  if (!(delta_e > 0.0)) throw Error(ErrorCode::InvalidParameter, "delta_e must be positive");
  if (n_v < 1) throw Error(ErrorCode::InvalidParameter, "n_v must be >= 1");
  const double k = kTwoPi * spacing_wl;
  const double theta = geom.theta;
  return angular_lags(n_v, -delta_e, delta_e,
                      [k, theta](double alpha) { return k * std::cos(theta + alpha); });
}

ChannelEigen covariance_eigen(const AzElCovariance& cov, double gain, double eps_rel) {
  ChannelEigen ce;
  ce.az = truncate(hermitian_eig(cov.r_az), eps_rel);
  ce.el = truncate(hermitian_eig(cov.r_el), eps_rel);
  ce.gain = gain;
  return ce;
}

ChannelEigen factor_eigen(const CMatrix& az_factor, const CMatrix& el_factor, double gain,
                          double eps_rel) {
  ChannelEigen ce;
  ce.az = lowrank_eig(az_factor, eps_rel);
  ce.el = lowrank_eig(el_factor, eps_rel);
  ce.gain = gain;
  return ce;
}

ChannelRealization kl_realize(const ChannelEigen& ce, const CVector& w) {
  const Eigen::Index ra = ce.az.rank();
  const Eigen::Index re = ce.el.rank();
  if (w.size() != ra * re) {
    throw Error(ErrorCode::LengthMismatch, "innovation length " + std::to_string(w.size()) +
                                               " != r_A*r_E = " + std::to_string(ra * re));
  }
  ChannelRealization out;
  out.w = w;
  const double g = std::sqrt(ce.gain);
  const RVector sa = ce.az.values.cwiseMax(0.0).cwiseSqrt();
  const RVector se = ce.el.values.cwiseMax(0.0).cwiseSqrt();
  out.w_bar.resize(w.size());
  for (Eigen::Index a = 0; a < ra; ++a) {
    for (Eigen::Index e = 0; e < re; ++e) out.w_bar(a * re + e) = g * sa(a) * se(e) * w(a * re + e);
  }
  const Eigen::Map<const CMatrix> wbar_grid(out.w_bar.data(), re, ra);
  const CMatrix grid = ce.el.vectors * wbar_grid * ce.az.vectors.transpose();
  out.h = Eigen::Map<const CVector>(grid.data(), grid.size());
  return out;
}

ChannelRealization kl_sample(const ChannelEigen& ce, Rng& rng) {
  CVector w(ce.az.rank() * ce.el.rank());
  for (Eigen::Index i = 0; i < w.size(); ++i) w(i) = complex_normal(rng);
  return kl_realize(ce, w);
}

SinglePathChannel single_path_channel(const LinkGeometry& geom, cd beta, int n_v, int n_h,
                                      double spacing_wl) {
  if (n_v < 1 || n_h < 1) throw Error(ErrorCode::InvalidParameter, "array dimensions must be >= 1");
  SinglePathChannel out;
  const CVector a_az = steering_az(n_h, spacing_wl, geom.phi, geom.theta);
  const CVector a_el = steering_el(n_v, spacing_wl, geom.theta);
  out.eigen.az.vectors = a_az / std::sqrt(static_cast<double>(n_h));
  out.eigen.az.values = RVector::Constant(1, n_h);
  out.eigen.el.vectors = a_el / std::sqrt(static_cast<double>(n_v));
  out.eigen.el.values = RVector::Constant(1, n_v);
  out.eigen.gain = geom.rho;
  out.realization = kl_realize(out.eigen, CVector::Constant(1, beta));
  return out;
}

CMatrix full_covariance(const ChannelEigen& ce) {
  const CMatrix ra = ce.az.vectors * ce.az.values.asDiagonal() * ce.az.vectors.adjoint();
  const CMatrix re = ce.el.vectors * ce.el.values.asDiagonal() * ce.el.vectors.adjoint();
  return ce.gain * kron(ra, re);
}

CMatrix contaminated_covariance(const ChannelEigen& serving, std::span<const ChannelEigen> copilot) {
  CMatrix sum = full_covariance(serving);
  for (const auto& ce : copilot) {
    require_same_array(serving, ce);
    if (ce.gain == 0.0) continue;
    sum += full_covariance(ce);
  }
  return sum;
}

ContaminatedFactors contaminated_factors(const ChannelEigen& serving,
                                         std::span<const ChannelEigen* const> copilot,
                                         const CMatrix& null_basis) {
  if (null_basis.rows() != serving.n_v()) {
    throw Error(ErrorCode::DimensionMismatch, "null basis rows must equal n_v");
  }
  std::vector<const ChannelEigen*> all{&serving};
  for (const auto* ce : copilot) {
    require_same_array(serving, *ce);
    all.push_back(ce);
  }
  Eigen::Index cols_a = 0;
  Eigen::Index cols_e = 0;
  for (const auto* ce : all) {
    cols_a += ce->az.rank();
    cols_e += ce->el.rank();
  }
  ContaminatedFactors out;
  out.az_factor.resize(serving.n_h(), cols_a);
  out.el_factor.resize(null_basis.cols(), cols_e);
  Eigen::Index ia = 0;
  Eigen::Index ie = 0;
  for (const auto* ce : all) {
    const CMatrix az = scaled_vectors(ce->az);
    const CMatrix el = null_basis.adjoint() * scaled_vectors(ce->el);
    const double power_el = el.squaredNorm();
    const double power_az = az.squaredNorm();
    out.az_factor.middleCols(ia, az.cols()) = std::sqrt(ce->gain * power_el) * az;
    out.el_factor.middleCols(ie, el.cols()) = std::sqrt(ce->gain * power_az) * el;
    ia += az.cols();
    ie += el.cols();
  }
  return out;
}

EffectiveEigen estimated_effective_eigen(const ContaminatedFactors& factors, double eps_rel) {
  EffectiveEigen out;
  out.u_az = lowrank_eig(factors.az_factor, eps_rel).vectors;
  out.u_el_eff = lowrank_eig(factors.el_factor, eps_rel).vectors;
  return out;
}

EffectiveEigen effective_eigen(const ChannelEigen& ce, const CMatrix& null_basis) {
  if (null_basis.rows() != ce.n_v()) {
    throw Error(ErrorCode::DimensionMismatch, "null basis rows must equal n_v");
  }
  return {ce.az.vectors, null_basis.adjoint() * ce.el.vectors};
}

}  // namespace fdmimo
