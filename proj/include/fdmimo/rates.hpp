#pragma once

#include <span>
#include <vector>

#include "fdmimo/linalg.hpp"

namespace fdmimo {

/// Transmit power in dBm, noise from -174 dBm/Hz + 10 log10(BW) + NF.
struct LinkBudget {
  double tx_power_dbm = 35.0;
  double bandwidth_hz = 10e6;
  double noise_figure_db = 7.0;
  int k_users = 20;

  /// SNR = P / (K sigma^2), linear.
  double snr_per_stream() const;
};

double noise_power_dbm(double bandwidth_hz, double noise_figure_db);
double dbm_to_mw(double dbm);

/// Received-signal components, all normalized by P/K.
struct SinrTerms {
  double desired = 0.0;
  double intra = 0.0;  // same-cell streams
  double inter = 0.0;  // other-cell precoders
  double noise = 0.0;  // 1 / snr

  double sinr() const { return desired / (intra + inter + noise); }
  double rate() const;
};

/// `h_from_bs[b]` is the channel from BS b to the user, `precoders[b]` is
/// F_b (N x K_b). The user is stream `k` of BS `serving`. Empty precoders are
/// treated as silent BSs.
SinrTerms sinr_direct(std::span<const CVector> h_from_bs, std::span<const CMatrix> precoders,
                      std::size_t serving, Eigen::Index k, double snr);

/// closed-form rate log2(1 + snr Upsilon_kk^2) with the normalization that makes
/// the composed columns unit-norm, G = F2^H F2.
RVector rate_closed_form(const CMatrix& gram, std::span<const CVector> w_bars, double snr);

/// Same, using the plain normalization [(W^H G^2 W)^{-1}]_kk.
RVector rate_closed_form_plain(const CMatrix& gram, std::span<const CVector> w_bars, double snr);

/// log2(1 + snr ||w_bar||^2).
double single_user_rate(const CVector& w_bar, double snr);
double single_user_rate_gain(double channel_power, double snr);

/// log2(1 + snr rho_own^2 / sum rho_int^2). NoInterferers if the sum is 0.
double cb_ceiling(double rho_own, std::span<const double> rho_interferers, double snr);

/// log2(1 + snr ||w_bar||^2 sigma_min^2(U_el_eff)).
double edge_lower_bound(const CVector& w_bar, const CMatrix& u_el_eff, double snr);

struct CdfSeries {
  std::vector<double> rate;
  std::vector<double> cdf;
};

/// Empirical CDF at `grid` evenly spaced points on [0, max(values)].
CdfSeries cdf_series(std::span<const double> values, int grid);

/// Fraction of values <= x.
double empirical_cdf(std::span<const double> values, double x);

/// Linear-interpolated percentile, p in [0, 100].
double percentile(std::span<const double> values, double p);

double mean(std::span<const double> values);

}  // namespace fdmimo
