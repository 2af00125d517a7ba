#include "fdmimo/precoding.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "fdmimo/error.hpp"

namespace fdmimo {
namespace {

constexpr double kHalfPi = 0.5 * std::numbers::pi;
constexpr double kRenormTol = 1e-12;

Eigen::Index block_size(const EffectiveEigen& e) { return e.r_a() * e.r_e(); }

void check_shared_dims(std::span<const EffectiveEigen> effectives) {
  if (effectives.empty()) throw Error(ErrorCode::EmptyInput, "no users");
  const auto n_h = effectives.front().u_az.rows();
  const auto r_ni = effectives.front().r_ni();
  for (const auto& e : effectives) {
    if (e.u_az.rows() != n_h || e.r_ni() != r_ni) {
      throw Error(ErrorCode::DimensionMismatch, "effective bases disagree on N_H or r_NI");
    }
  }
}

CMatrix block_diag_w(std::span<const EffectiveEigen> effectives, std::span<const CVector> w_bars) {
  if (w_bars.size() != effectives.size()) {
    throw Error(ErrorCode::LengthMismatch, "one innovation per user required");
  }
  const auto off = layer2_offsets(effectives);
  CMatrix w = CMatrix::Zero(off.back(), static_cast<Eigen::Index>(w_bars.size()));
  for (std::size_t k = 0; k < w_bars.size(); ++k) {
    const Eigen::Index len = off[k + 1] - off[k];
    if (w_bars[k].size() != len) {
      throw Error(ErrorCode::DimensionMismatch, "innovation " + std::to_string(k) + " has length " +
                                                    std::to_string(w_bars[k].size()) +
                                                    ", expected " + std::to_string(len));
    }
    w.block(off[k], static_cast<Eigen::Index>(k), len, 1) = w_bars[k];
  }
  return w;
}

LayerOne null_space_of(const CMatrix& cov, double eps_rel) {
  const NullSplit split = split_by_threshold(hermitian_eig(cov), cov.rows(), eps_rel);
  if (split.null_rank() == 0) {
    throw Error(ErrorCode::EmptyNullSpace, "interference covariance is numerically full rank");
  }
  LayerOne out;
  out.null_basis = split.null_basis;
  return out;
}

}  // namespace

LayerOne layer1(const InterferenceCov& r_i, double eps_rel) {
  return null_space_of(r_i.r_i, eps_rel);
}

double rank_angle_law(int n, double spacing_wl, double theta_min, double theta_max) {
  if (theta_min > theta_max) {
    throw Error(ErrorCode::InvalidParameter, "theta_min must not exceed theta_max");
  }
  return n * spacing_wl * (std::cos(theta_min) - std::cos(theta_max));
}

LayerOne augmented_layer1(const InterferenceCov& r_i, int n_v, double spacing_wl, double delta_ext,
                          double eps_rel) {
  if (!(delta_ext >= 0.0)) throw Error(ErrorCode::InvalidParameter, "delta_ext must be >= 0");
  if (r_i.r_i.rows() != n_v) throw Error(ErrorCode::DimensionMismatch, "R_I must be n_v x n_v");
  const NullSplit split = split_by_threshold(hermitian_eig(r_i.r_i), n_v, eps_rel);
  const double rank = static_cast<double>(split.signal_rank());
  const double theta_i = std::acos(std::max(-1.0, -rank / (n_v * spacing_wl)));
  const double upper = theta_i - delta_ext;
  if (!(upper > kHalfPi)) {
    throw Error(ErrorCode::InvalidParameter,
                "empty interference range: theta_I - delta = " + std::to_string(upper));
  }
  const double k = 2.0 * std::numbers::pi * spacing_wl;
  const auto modified =
      angular_covariance(n_v, kHalfPi, upper, [k](double a) { return k * std::cos(a); });
  LayerOne out = null_space_of(modified.cov, eps_rel);
  out.theta_i = theta_i;
  return out;
}

std::vector<Eigen::Index> layer2_offsets(std::span<const EffectiveEigen> effectives) {
  std::vector<Eigen::Index> off{0};
  for (const auto& e : effectives) off.push_back(off.back() + block_size(e));
  return off;
}

CMatrix layer2(std::span<const EffectiveEigen> effectives) {
  check_shared_dims(effectives);
  const auto off = layer2_offsets(effectives);
  const auto& first = effectives.front();
  CMatrix f2(first.u_az.rows() * first.r_ni(), off.back());
  for (std::size_t k = 0; k < effectives.size(); ++k) {
    f2.middleCols(off[k], off[k + 1] - off[k]) = effectives[k].u_eff();
  }
  return f2;
}

CMatrix layer2_gram(std::span<const EffectiveEigen> effectives) {
  check_shared_dims(effectives);
  const auto off = layer2_offsets(effectives);
  CMatrix g(off.back(), off.back());
  for (std::size_t k = 0; k < effectives.size(); ++k) {
    for (std::size_t m = k; m < effectives.size(); ++m) {
      const auto& a = effectives[k];
      const auto& b = effectives[m];
      const CMatrix blk = kron(a.u_az.adjoint() * b.u_az, a.u_el_eff.adjoint() * b.u_el_eff);
      g.block(off[k], off[m], blk.rows(), blk.cols()) = blk;
      if (m != k) g.block(off[m], off[k], blk.cols(), blk.rows()) = blk.adjoint();
    }
  }
  return g;
}

CMatrix effective_channels(std::span<const EffectiveEigen> effectives,
                           std::span<const CVector> w_bars) {
  return layer2_gram(effectives) * block_diag_w(effectives, w_bars);
}

CMatrix effective_channels_dense(const CMatrix& f2, std::span<const CVector> w_bars) {
  const auto k = static_cast<Eigen::Index>(w_bars.size());
  Eigen::Index total = 0;
  for (const auto& w : w_bars) total += w.size();
  if (total != f2.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "innovations do not match F2 column count");
  }
  CMatrix w = CMatrix::Zero(total, k);
  Eigen::Index row = 0;
  for (Eigen::Index i = 0; i < k; ++i) {
    const auto& v = w_bars[static_cast<std::size_t>(i)];
    w.block(row, i, v.size(), 1) = v;
    row += v.size();
  }
  return f2.adjoint() * (f2 * w);
}

CVector project_channel(const CVector& h, const CMatrix& null_basis,
                        std::span<const EffectiveEigen> effectives) {
  check_shared_dims(effectives);
  const Eigen::Index n_v = null_basis.rows();
  const Eigen::Index n_h = effectives.front().u_az.rows();
  if (h.size() != n_v * n_h) throw Error(ErrorCode::DimensionMismatch, "channel length != N");
  if (null_basis.cols() != effectives.front().r_ni()) {
    throw Error(ErrorCode::DimensionMismatch, "null basis width != r_NI");
  }
  // (U_A kron U_E)^H vec(X) = vec(U_E^H X conj(U_A)).
  const CMatrix x = null_basis.adjoint() * as_grid(h, static_cast<int>(n_v), static_cast<int>(n_h));
  const auto off = layer2_offsets(effectives);
  CVector out(off.back());
  for (std::size_t k = 0; k < effectives.size(); ++k) {
    const auto& e = effectives[k];
    const CMatrix y = e.u_el_eff.adjoint() * x * e.u_az.conjugate();
    out.segment(off[k], y.size()) = Eigen::Map<const CVector>(y.data(), y.size());
  }
  return out;
}

LayerThree layer3(const CMatrix& h_eff, const CMatrix& gram) {
  if (gram.rows() != h_eff.rows() || gram.cols() != h_eff.rows()) {
    throw Error(ErrorCode::DimensionMismatch, "G must be square with rows(H_bar) rows");
  }
  if (h_eff.rows() < h_eff.cols()) {
    throw Error(ErrorCode::InsufficientDimensions,
                "effective dimension " + std::to_string(h_eff.rows()) + " < K = " +
                    std::to_string(h_eff.cols()));
  }
  const CMatrix d = zf_direction(h_eff);
  const CMatrix power = d.adjoint() * gram * d;
  LayerThree out;
  out.upsilon.resize(h_eff.cols());
  for (Eigen::Index k = 0; k < h_eff.cols(); ++k) {
    const double p = power(k, k).real();
    if (!(p > 0.0)) throw Error(ErrorCode::RankDeficient, "zero transmit direction for a user");
    out.upsilon(k) = 1.0 / std::sqrt(p);
  }
  out.f3 = d * out.upsilon.asDiagonal();
  return out;
}

RVector upsilon_plain(const CMatrix& gram, std::span<const CVector> w_bars) {
  Eigen::Index total = 0;
  for (const auto& w : w_bars) total += w.size();
  if (total != gram.rows()) throw Error(ErrorCode::DimensionMismatch, "W does not match G");
  const auto k = static_cast<Eigen::Index>(w_bars.size());
  CMatrix w = CMatrix::Zero(total, k);
  Eigen::Index row = 0;
  for (Eigen::Index i = 0; i < k; ++i) {
    const auto& v = w_bars[static_cast<std::size_t>(i)];
    w.block(row, i, v.size(), 1) = v;
    row += v.size();
  }
  const CMatrix gw = gram * w;
  const CMatrix m = gw.adjoint() * gw;
  if (!(hermitian_condition(m) <= kZfConditionLimit)) {
    throw Error(ErrorCode::RankDeficient, "W^H G^2 W is singular");
  }
  const CMatrix inv = m.ldlt().solve(CMatrix::Identity(k, k));
  RVector out(k);
  for (Eigen::Index i = 0; i < k; ++i) out(i) = 1.0 / std::sqrt(inv(i, i).real());
  return out;
}

CMatrix compose(const CMatrix& null_basis, std::span<const EffectiveEigen> effectives,
                const CMatrix& f3) {
  check_shared_dims(effectives);
  const auto off = layer2_offsets(effectives);
  if (f3.rows() != off.back()) throw Error(ErrorCode::DimensionMismatch, "F3 rows != cols(F2)");
  const Eigen::Index n_h = effectives.front().u_az.rows();
  const Eigen::Index n_v = null_basis.rows();
  CMatrix out(n_v * n_h, f3.cols());
  for (Eigen::Index c = 0; c < f3.cols(); ++c) {
    CMatrix acc = CMatrix::Zero(null_basis.cols(), n_h);
    for (std::size_t k = 0; k < effectives.size(); ++k) {
      const auto& e = effectives[k];
      const CVector seg = f3.col(c).segment(off[k], block_size(e));
      const Eigen::Map<const CMatrix> y(seg.data(), e.r_e(), e.r_a());
      acc.noalias() += e.u_el_eff * y * e.u_az.transpose();
    }
    const CMatrix grid = null_basis * acc;
    out.col(c) = Eigen::Map<const CVector>(grid.data(), grid.size());
  }
  return out;
}

PrecoderStack build_multilayer(const CMatrix& null_basis, std::vector<EffectiveEigen> effectives,
                               const CMatrix& h_eff) {
  check_shared_dims(effectives);
  const auto off = layer2_offsets(effectives);
  const Eigen::Index avail = effectives.front().u_az.rows() * effectives.front().r_ni();
  if (avail < off.back()) {
    throw Error(ErrorCode::InsufficientDimensions,
                "N_H r_NI = " + std::to_string(avail) + " < sum r_A r_E = " +
                    std::to_string(off.back()));
  }
  PrecoderStack s;
  s.null_basis = null_basis;
  s.gram = layer2_gram(effectives);
  auto l3 = layer3(h_eff, s.gram);
  s.effectives = std::move(effectives);
  s.f3 = std::move(l3.f3);
  s.upsilon = std::move(l3.upsilon);
  s.composed = compose(s.null_basis, s.effectives, s.f3);
  for (Eigen::Index k = 0; k < s.composed.cols(); ++k) {
    const double norm = s.composed.col(k).norm();
    if (std::abs(norm - 1.0) > kRenormTol) {
      s.composed.col(k) /= norm;
      s.f3.col(k) /= norm;
      s.upsilon(k) /= norm;
    }
  }
  return s;
}

PrecoderStack build_multilayer_exact(const CMatrix& null_basis,
                                     std::vector<EffectiveEigen> effectives,
                                     std::span<const CVector> w_bars) {
  const CMatrix h_eff = effective_channels(effectives, w_bars);
  return build_multilayer(null_basis, std::move(effectives), h_eff);
}

CMatrix conjugate_beamforming(const CMatrix& est_channels) {
  CMatrix out = est_channels;
  for (Eigen::Index k = 0; k < out.cols(); ++k) {
    const double norm = out.col(k).norm();
    if (!(norm > 0.0)) throw Error(ErrorCode::ZeroChannel, "user " + std::to_string(k));
    out.col(k) /= norm;
  }
  return out;
}

CMatrix zf_baseline(const CMatrix& est_channels) {
  CMatrix d = zf_direction(est_channels);
  for (Eigen::Index k = 0; k < d.cols(); ++k) d.col(k).normalize();
  return d;
}

}  // namespace fdmimo
