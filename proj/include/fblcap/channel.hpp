#pragma once

#include <complex>
#include <span>
#include <vector>

#include "fblcap/rng.hpp"

namespace fblcap {

/// Link parameters for one operating point.
///
/// theta is the QoS exponent in 1/bit, n the block length and n_t the pilot
/// length in channel uses, m the number of parallel sub-channels, gamma0 the
/// linear transmit SNR p/sigma2, and eps the block decoding error probability.
struct SystemParams {
  double theta = 0.01;
  int n = 300;
  int n_t = 20;
  int m = 5;
  double gamma0 = 1.0;
  double sigma2 = 1.0;
  double eps = 1e-5;

  /// Throws DomainError naming the first violated constraint.
  void validate() const;

  int n_d() const { return n - n_t; }
  /// theta * log2(e): the exponent of (1 + snr) per data symbol.
  double theta_prime() const;
  /// theta' * n_d, the order of the exponential integral in the analytic form.
  double expint_order() const { return theta_prime() * n_d(); }
  double pilot_fraction() const { return static_cast<double>(n_t) / n; }
};

/// Effective average received SNR G after MMSE estimation with n_t pilot
/// symbols; the estimation error is folded into the noise. Accepts a
/// real-valued pilot length so the pilot fraction can be treated as continuous.
double avg_received_snr(double n_t, double gamma0);

struct FadingDraw {
  std::vector<double> x;        // unit-mean exponential channel gains
  std::vector<double> snr_hat;  // G * x_i

  static FadingDraw from_gains(std::vector<double> gains, double avg_snr);
  static FadingDraw from_snr(std::vector<double> snr_hat);
  /// m i.i.d. sub-channel draws.
  static FadingDraw sample(int m, double avg_snr, Rng& rng);

  std::size_t size() const { return snr_hat.size(); }
};

struct EstimateSample {
  std::complex<double> h;
  std::complex<double> h_hat;
  std::complex<double> z;  // h - h_hat
};

/// One pilot-based MMSE channel estimate. The pilot sequence is unit-norm, so
/// after matched filtering the received pilot is sqrt(n_t p) h + CN(0, sigma2).
EstimateSample mmse_sample(int n_t, double gamma0, Rng& rng, double sigma2 = 1.0);

/// Normal-approximation achievable rate in bits per channel use, with the
/// channel dispersion replaced by its upper bound log2(e)^2. Negative values
/// are returned unclamped.
double fbl_rate(const FadingDraw& draw, double eps, int n_d, int m);

/// Exact channel dispersion in (bits/channel use)^2.
double exact_dispersion(const FadingDraw& draw);

enum class RatePolicy { kUnclamped, kClampAtZero };

/// Bits delivered in one block: 0 with probability eps, else m n_d R.
double service_sample(const SystemParams& params, const FadingDraw& draw, Rng& rng,
                      RatePolicy policy = RatePolicy::kUnclamped);

}  // namespace fblcap
