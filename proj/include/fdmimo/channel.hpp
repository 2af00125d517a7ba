#pragma once

#include <functional>
#include <span>
#include <vector>

#include "fdmimo/geometry.hpp"
#include "fdmimo/linalg.hpp"
#include "fdmimo/random.hpp"

namespace fdmimo {

/// Uniform planar array: n_v rows along the vertical axis, n_h columns along
/// the horizontal axis, element spacing in wavelengths. Channel vectors are
/// ordered azimuth-major: index = m_h * n_v + n_v_index, i.e. h = a_A kron a_E.
struct ArrayGeometry {
  int n_v = 0;
  int n_h = 0;
  double spacing_wl = 0.5;

  Eigen::Index size() const { return static_cast<Eigen::Index>(n_v) * n_h; }
};

struct AzElCovariance {
  CMatrix r_az;  // n_h x n_h
  CMatrix r_el;  // n_v x n_v
};

/// Truncated Kronecker factors of one link covariance; path gain folded into
/// `gain` so that R = gain * (R_az kron R_el).
struct ChannelEigen {
  EigenBasis az;
  EigenBasis el;
  double gain = 1.0;

  Eigen::Index n_h() const { return az.dim(); }
  Eigen::Index n_v() const { return el.dim(); }
};

/// One channel draw. `w_bar` is the scaled innovation
/// sqrt(gain) (Lambda_A^1/2 kron Lambda_E^1/2) w, so ||h|| = ||w_bar||.
struct ChannelRealization {
  CVector w;
  CVector w_bar;
  CVector h;
};

/// Effective eigenbases after the layer-1 elevation filter.
struct EffectiveEigen {
  CMatrix u_az;      // n_h x r_A
  CMatrix u_el_eff;  // r_NI x r_E

  Eigen::Index r_a() const { return u_az.cols(); }
  Eigen::Index r_e() const { return u_el_eff.cols(); }
  Eigen::Index r_ni() const { return u_el_eff.rows(); }
  CMatrix u_eff() const;  // u_az kron u_el_eff
};

/// Covariance of a uniform angular power profile, entry (n1, n2) =
///   1/(hi-lo) * int_lo^hi exp(-j (n2-n1) psi(alpha)) d alpha,
/// together with a quadrature factor F (n x nodes) such that R = F F^H to
/// quadrature accuracy.
struct AngularCovariance {
  CMatrix cov;
  CMatrix factor;
  int nodes = 0;
};

/// Gauss-Legendre quadrature starting at 33 nodes, doubling (2q-1) until the
/// largest lag changes by < 1e-10. Throws QuadratureNotConverged past 1025.
AngularCovariance angular_covariance(Eigen::Index n, double lo, double hi,
                                     const std::function<double(double)>& phase_per_lag);

/// First row of the same covariance only: r_l = entry (0, l), l = 0..n-1.
CVector angular_lags(Eigen::Index n, double lo, double hi,
                     const std::function<double(double)>& phase_per_lag);

/// Hermitian Toeplitz matrix with entry (i, j) = r_{j-i} for j >= i.
CMatrix hermitian_toeplitz(const CVector& lags);

/// Gauss-Legendre nodes and weights on [-1, 1].
struct GaussLegendre {
  std::vector<double> nodes;
  std::vector<double> weights;
};
const GaussLegendre& gauss_legendre(int n);

/// a_A entry m = exp(j 2 pi D m sin(phi) sin(theta)).
CVector steering_az(int n_h, double spacing_wl, double phi, double theta);
/// a_E entry n = exp(j 2 pi D n cos(theta)).
CVector steering_el(int n_v, double spacing_wl, double theta);

AngularCovariance one_ring_az(const LinkGeometry& geom, double delta_a, int n_h, double spacing_wl);
AngularCovariance one_ring_el(const LinkGeometry& geom, double delta_e, int n_v, double spacing_wl);

/// One-ring azimuth correlation with the sin(theta) factor held at the user's
/// nominal elevation. Unit diagonal, Hermitian Toeplitz.
CMatrix one_ring_az_cov(const LinkGeometry& geom, double delta_a, int n_h, double spacing_wl);
/// One-ring elevation correlation, phase 2 pi D (n2-n1) cos(theta + alpha).
CMatrix one_ring_el_cov(const LinkGeometry& geom, double delta_e, int n_v, double spacing_wl);
CVector one_ring_el_lags(const LinkGeometry& geom, double delta_e, int n_v, double spacing_wl);

/// Truncated eigenbases of the two Kronecker factors (relative threshold).
ChannelEigen covariance_eigen(const AzElCovariance& cov, double gain, double eps_rel);
/// Same as covariance_eigen from quadrature factors (R = F F^H), O(n q^2).
ChannelEigen factor_eigen(const CMatrix& az_factor, const CMatrix& el_factor, double gain,
                          double eps_rel);

/// h = sqrt(gain) (U_A Lambda_A^1/2 kron U_E Lambda_E^1/2) w for the given w.
ChannelRealization kl_realize(const ChannelEigen& ce, const CVector& w);
/// Karhunen-Loeve draw with w ~ CN(0, I).
ChannelRealization kl_sample(const ChannelEigen& ce, Rng& rng);

struct SinglePathChannel {
  ChannelRealization realization;
  ChannelEigen eigen;  // rank-1 equivalent, w = beta
};

/// h = rho^1/2 beta a_A(phi, theta) kron a_E(theta).
SinglePathChannel single_path_channel(const LinkGeometry& geom, cd beta, int n_v, int n_h,
                                      double spacing_wl);

/// Full covariance gain * (R_az kron R_el) rebuilt from the truncated bases.
CMatrix full_covariance(const ChannelEigen& ce);

/// Sum of full covariances of the serving link and all co-pilot links as seen
/// at the serving BS. Throws DimensionMismatch on inconsistent arrays.
CMatrix contaminated_covariance(const ChannelEigen& serving, std::span<const ChannelEigen> copilot);

/// Kronecker-factor form of a (filtered) contaminated covariance: the partial
/// traces of sum_j gain_j R_az,j kron (P^H R_el,j P) over the contributors,
/// held as low-rank factors. P is the layer-1 null basis (identity when no
/// filter is applied).
struct ContaminatedFactors {
  CMatrix az_factor;  // n_h x (sum r_A), A_hat = az_factor az_factor^H
  CMatrix el_factor;  // r_NI x (sum r_E), E_hat = el_factor el_factor^H
};

ContaminatedFactors contaminated_factors(const ChannelEigen& serving,
                                         std::span<const ChannelEigen* const> copilot,
                                         const CMatrix& null_basis);

/// Effective bases estimated from contaminated factors: eigenvectors of the
/// two partial traces above the relative threshold.
EffectiveEigen estimated_effective_eigen(const ContaminatedFactors& factors, double eps_rel);

/// U_el_eff = P^H U_E, u_az unchanged.
EffectiveEigen effective_eigen(const ChannelEigen& ce, const CMatrix& null_basis);

/// View of a channel vector as an n_v x n_h matrix (column m_h = elevation
/// response of horizontal element m_h).
inline Eigen::Map<const CMatrix> as_grid(const CVector& h, int n_v, int n_h) {
  return Eigen::Map<const CMatrix>(h.data(), n_v, n_h);
}

}  // namespace fdmimo
