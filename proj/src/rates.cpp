#include "fdmimo/rates.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "fdmimo/error.hpp"
#include "fdmimo/precoding.hpp"

namespace fdmimo {

double dbm_to_mw(double dbm) { return std::pow(10.0, dbm / 10.0); }

double noise_power_dbm(double bandwidth_hz, double noise_figure_db) {
  if (!(bandwidth_hz > 0.0)) throw Error(ErrorCode::InvalidParameter, "bandwidth must be > 0");
  return -174.0 + 10.0 * std::log10(bandwidth_hz) + noise_figure_db;
}

double LinkBudget::snr_per_stream() const {
  if (k_users < 1) throw Error(ErrorCode::InvalidParameter, "k_users must be >= 1");
  const double sigma2 = dbm_to_mw(noise_power_dbm(bandwidth_hz, noise_figure_db));
  return dbm_to_mw(tx_power_dbm) / (k_users * sigma2);
}

double SinrTerms::rate() const { return std::log2(1.0 + sinr()); }

SinrTerms sinr_direct(std::span<const CVector> h_from_bs, std::span<const CMatrix> precoders,
                      std::size_t serving, Eigen::Index k, double snr) {
  if (h_from_bs.size() != precoders.size()) {
    throw Error(ErrorCode::DimensionMismatch, "one channel per precoder required");
  }
  if (serving >= precoders.size() || k < 0 || k >= precoders[serving].cols()) {
    throw Error(ErrorCode::DimensionMismatch, "serving stream out of range");
  }
  if (!(snr > 0.0)) throw Error(ErrorCode::InvalidParameter, "snr must be > 0");
  SinrTerms t;
  t.noise = 1.0 / snr;
  for (std::size_t b = 0; b < precoders.size(); ++b) {
    const CMatrix& f = precoders[b];
    if (f.cols() == 0) continue;
    if (f.rows() != h_from_bs[b].size()) {
      throw Error(ErrorCode::DimensionMismatch, "channel length != precoder rows");
    }
    const Eigen::RowVectorXcd amp = h_from_bs[b].adjoint() * f;
    if (b == serving) {
      t.desired = std::norm(amp(k));
      t.intra = amp.squaredNorm() - t.desired;
    } else {
      t.inter += amp.squaredNorm();
    }
  }
  t.intra = std::max(t.intra, 0.0);
  return t;
}

RVector rate_closed_form(const CMatrix& gram, std::span<const CVector> w_bars, double snr) {
  const auto k = static_cast<Eigen::Index>(w_bars.size());
  Eigen::Index total = 0;
  for (const auto& w : w_bars) total += w.size();
  if (total != gram.rows()) throw Error(ErrorCode::DimensionMismatch, "W does not match G");
  CMatrix w = CMatrix::Zero(total, k);
  Eigen::Index row = 0;
  for (Eigen::Index i = 0; i < k; ++i) {
    const auto& v = w_bars[static_cast<std::size_t>(i)];
    w.block(row, i, v.size(), 1) = v;
    row += v.size();
  }
  const RVector ups = layer3(gram * w, gram).upsilon;
  return (1.0 + snr * ups.array().square()).log() / std::log(2.0);
}

RVector rate_closed_form_plain(const CMatrix& gram, std::span<const CVector> w_bars, double snr) {
  const RVector ups = upsilon_plain(gram, w_bars);
  return (1.0 + snr * ups.array().square()).log() / std::log(2.0);
}

double single_user_rate_gain(double channel_power, double snr) {
  return std::log2(1.0 + snr * channel_power);
}

double single_user_rate(const CVector& w_bar, double snr) {
  return single_user_rate_gain(w_bar.squaredNorm(), snr);
}

double cb_ceiling(double rho_own, std::span<const double> rho_interferers, double snr) {
  double denom = 0.0;
  for (double r : rho_interferers) denom += r * r;
  if (!(denom > 0.0)) throw Error(ErrorCode::NoInterferers, "ceiling is unbounded");
  return std::log2(1.0 + snr * rho_own * rho_own / denom);
}

double edge_lower_bound(const CVector& w_bar, const CMatrix& u_el_eff, double snr) {
  if (u_el_eff.size() == 0) throw Error(ErrorCode::EmptyInput, "empty effective basis");
  const Eigen::JacobiSVD<CMatrix> svd(u_el_eff);
  const double s = svd.singularValues().minCoeff();
  // A tall basis needs all r_E singular values; a wide one has a zero direction.
  const double smin = u_el_eff.rows() < u_el_eff.cols() ? 0.0 : s;
  return std::log2(1.0 + snr * w_bar.squaredNorm() * smin * smin);
}

double empirical_cdf(std::span<const double> values, double x) {
  if (values.empty()) throw Error(ErrorCode::EmptyInput, "no values");
  const auto n = std::count_if(values.begin(), values.end(), [x](double v) { return v <= x; });
  return static_cast<double>(n) / static_cast<double>(values.size());
}

CdfSeries cdf_series(std::span<const double> values, int grid) {
  if (values.empty()) throw Error(ErrorCode::EmptyInput, "no values");
  if (grid < 2) throw Error(ErrorCode::InvalidParameter, "grid must be >= 2");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double top = std::max(sorted.back(), 0.0);
  CdfSeries out;
  for (int i = 0; i < grid; ++i) {
    const double x = i == grid - 1 ? top : top * i / (grid - 1);
    const auto it = std::upper_bound(sorted.begin(), sorted.end(), x);
    out.rate.push_back(x);
    out.cdf.push_back(static_cast<double>(it - sorted.begin()) / static_cast<double>(sorted.size()));
  }
  return out;
}

double percentile(std::span<const double> values, double p) {
  if (values.empty()) throw Error(ErrorCode::EmptyInput, "no values");
  if (!(p >= 0.0 && p <= 100.0)) throw Error(ErrorCode::InvalidParameter, "p outside [0, 100]");
  std::vector<double> s(values.begin(), values.end());
  std::sort(s.begin(), s.end());
  const double pos = p / 100.0 * static_cast<double>(s.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, s.size() - 1);
  return s[lo] + (pos - static_cast<double>(lo)) * (s[hi] - s[lo]);
}

double mean(std::span<const double> values) {
  if (values.empty()) throw Error(ErrorCode::EmptyInput, "no values");
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

}  // namespace fdmimo
