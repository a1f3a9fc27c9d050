#include "fblcap/channel.hpp"

#include <cmath>
#include <sstream>

#include "fblcap/errors.hpp"
#include "fblcap/specfun.hpp"

namespace fblcap {

namespace {

[[noreturn]] void fail(const std::string& what) { throw DomainError("SystemParams: " + what); }

void check_eps(double eps) {
  if (!(eps > 0.0 && eps < 1.0)) {
    std::ostringstream msg;
    msg << "eps must lie in the open interval (0,1) (got " << eps << ")";
    throw DomainError(msg.str());
  }
}

}  // namespace

void SystemParams::validate() const {
  if (n < 2) fail("n must be >= 2");
  if (n_t < 1 || n_t > n - 1) fail("n_t must satisfy 1 <= n_t <= n-1");
  if (m < 1) fail("m must be >= 1");
  if (!(gamma0 > 0.0) || !std::isfinite(gamma0)) fail("gamma0 must be finite and > 0");
  if (!(theta > 0.0) || !std::isfinite(theta)) fail("theta must be finite and > 0");
  if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) fail("sigma2 must be finite and > 0");
  if (!(eps > 0.0 && eps < 1.0)) fail("eps must lie in the open interval (0,1)");
}

double SystemParams::theta_prime() const { return theta * kLog2e; }

double avg_received_snr(double n_t, double gamma0) {
  return n_t * gamma0 * gamma0 / (1.0 + gamma0 + n_t * gamma0);
}

FadingDraw FadingDraw::from_gains(std::vector<double> gains, double avg_snr) {
  FadingDraw draw;
  draw.snr_hat.reserve(gains.size());
  for (double g : gains) draw.snr_hat.push_back(avg_snr * g);
  draw.x = std::move(gains);
  return draw;
}

FadingDraw FadingDraw::from_snr(std::vector<double> snr_hat) {
  FadingDraw draw;
  draw.x = snr_hat;
  draw.snr_hat = std::move(snr_hat);
  return draw;
}

FadingDraw FadingDraw::sample(int m, double avg_snr, Rng& rng) {
  std::vector<double> gains(static_cast<std::size_t>(m));
  for (auto& g : gains) g = rng.exponential();
  return from_gains(std::move(gains), avg_snr);
}

EstimateSample mmse_sample(int n_t, double gamma0, Rng& rng, double sigma2) {
  if (n_t < 1) throw DomainError("mmse_sample: n_t must be >= 1");
  const double power = gamma0 * sigma2;
  const double amp = std::sqrt(n_t * power);

  const auto [hr, hi] = rng.complex_normal();
  const auto [wr, wi] = rng.complex_normal();
  const std::complex<double> h{hr, hi};
  const std::complex<double> noise = std::sqrt(sigma2) * std::complex<double>{wr, wi};

  const std::complex<double> y = amp * h + noise;
  const std::complex<double> h_hat = (amp / (n_t * power + sigma2)) * y;
  const std::complex<double> z = h - h_hat;
  // Re-associate so that h == h_hat + z holds bit for bit.
  return {h_hat + z, h_hat, z};
}

double fbl_rate(const FadingDraw& draw, double eps, int n_d, int m) {
  check_eps(eps);
  if (n_d < 1) throw DomainError("fbl_rate: n_d must be >= 1");
  if (m < 1 || draw.size() != static_cast<std::size_t>(m))
    throw DomainError("fbl_rate: draw length must equal m >= 1");
  double shannon = 0.0;
  for (double s : draw.snr_hat) shannon += std::log1p(s);
  shannon *= kLog2e / m;
  return shannon - kLog2e / std::sqrt(static_cast<double>(n_d) * m) * q_inv(eps);
}

double exact_dispersion(const FadingDraw& draw) {
  if (draw.size() == 0) throw DomainError("exact_dispersion: empty draw");
  double acc = 0.0;
  for (double s : draw.snr_hat) {
    const double inv = 1.0 / (1.0 + s);
    acc += 1.0 - inv * inv;
  }
  return acc / static_cast<double>(draw.size()) * kLog2e * kLog2e;
}

double service_sample(const SystemParams& params, const FadingDraw& draw, Rng& rng,
                      RatePolicy policy) {
  // Decide the error event first so the fading draw is untouched by it.
  const bool block_error = rng.uniform_open0() <= params.eps;
  if (block_error) return 0.0;
  double rate = fbl_rate(draw, params.eps, params.n_d(), params.m);
  if (policy == RatePolicy::kClampAtZero && rate < 0.0) rate = 0.0;
  return static_cast<double>(params.m) * params.n_d() * rate;
}

}  // namespace fblcap
