#pragma once

#include <limits>
#include <span>
#include <vector>

#include "fdmimo/channel.hpp"
#include "fdmimo/linalg.hpp"

namespace fdmimo {

/// Average elevation covariance of other-cell users seen from one BS.
struct InterferenceCov {
  CMatrix r_i;  // n_v x n_v
  int realizations_used = 0;
};

/// First layer F1 = I_{N_H} kron U^NI, kept factored.
struct LayerOne {
  CMatrix null_basis;  // n_v x r_NI, orthonormal columns
  double theta_i = std::numeric_limits<double>::quiet_NaN();  // set by the augmented variant

  Eigen::Index r_ni() const { return null_basis.cols(); }
};

/// Null space of R_c^I below eps_rel * lambda_1. EmptyNullSpace if none is left.
LayerOne layer1(const InterferenceCov& r_i, double eps_rel);

/// n * spacing_wl * (cos theta_min - cos theta_max).
double rank_angle_law(int n, double spacing_wl, double theta_min, double theta_max);

/// Augmented-vertical-dimension variant: estimates the largest interference
/// elevation from the rank of R_c^I, rebuilds a covariance over
/// [pi/2, theta_I - delta_ext] and takes its null space.
/// InvalidParameter if theta_I - delta_ext <= pi/2.
LayerOne augmented_layer1(const InterferenceCov& r_i, int n_v, double spacing_wl, double delta_ext,
                          double eps_rel);

/// Dense F2 = [u_eff_1, ..., u_eff_K], (N_H r_NI) x sum_k r_A,k r_E,k.
CMatrix layer2(std::span<const EffectiveEigen> effectives);

/// Column offsets of each user's block inside F2 (size K + 1).
std::vector<Eigen::Index> layer2_offsets(std::span<const EffectiveEigen> effectives);

/// G = F2^H F2 assembled from Kronecker blocks
///   G_(k,m) = (U_A,k^H U_A,m) kron (U_E,k^H U_E,m).
CMatrix layer2_gram(std::span<const EffectiveEigen> effectives);

/// H_bar = G W with W = blockdiag(w_bar_1, ..., w_bar_K).
CMatrix effective_channels(std::span<const EffectiveEigen> effectives,
                           std::span<const CVector> w_bars);

/// Same quantity through the dense route F2^H F2 W (test oracle).
CMatrix effective_channels_dense(const CMatrix& f2, std::span<const CVector> w_bars);

/// F2^H F1^H h for a full channel vector h (length n_v n_h).
CVector project_channel(const CVector& h, const CMatrix& null_basis,
                        std::span<const EffectiveEigen> effectives);

struct LayerThree {
  CMatrix f3;       // sum r x K
  RVector upsilon;  // diag of the normalization
};

/// F3 = H_bar (H_bar^H H_bar)^{-1} Upsilon, with Upsilon chosen so every
/// composed column F1 F2 F3 has unit norm:
///   Upsilon_kk = [ (D^H G D)_kk ]^{-1/2},  D = H_bar (H_bar^H H_bar)^{-1}.
/// InsufficientDimensions if rows(G) < K; RankDeficient from zf_direction.
LayerThree layer3(const CMatrix& h_eff, const CMatrix& gram);

/// Plain normalization with W: [ ((W^H G^2 W)^{-1})_kk ]^{-1/2}. Equals
/// the exact value only when G is a projector.
RVector upsilon_plain(const CMatrix& gram, std::span<const CVector> w_bars);

/// F = (I kron U^NI) F2 F3, N x K, without forming F2.
CMatrix compose(const CMatrix& null_basis, std::span<const EffectiveEigen> effectives,
                const CMatrix& f3);

struct PrecoderStack {
  CMatrix null_basis;
  std::vector<EffectiveEigen> effectives;
  CMatrix gram;
  CMatrix f3;
  RVector upsilon;
  CMatrix composed;
};

/// Layers 2 and 3 for given effective bases and effective channels H_bar.
/// Composed columns are renormalized if they drift more than 1e-12 from 1.
/// Throws InsufficientDimensions when N_H r_NI < sum_k r_A,k r_E,k.
PrecoderStack build_multilayer(const CMatrix& null_basis, std::vector<EffectiveEigen> effectives,
                               const CMatrix& h_eff);

/// Convenience: H_bar from the users' own innovations (no contamination).
PrecoderStack build_multilayer_exact(const CMatrix& null_basis,
                                     std::vector<EffectiveEigen> effectives,
                                     std::span<const CVector> w_bars);

/// Column k = h_k / ||h_k||. ZeroChannel on a zero column.
CMatrix conjugate_beamforming(const CMatrix& est_channels);

/// Columns of H (H^H H)^{-1}, each scaled to unit norm.
CMatrix zf_baseline(const CMatrix& est_channels);

}  // namespace fdmimo
