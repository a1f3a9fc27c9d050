#include "fblcap/mcsim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <span>
#include <thread>
#include <vector>

#include "fblcap/errors.hpp"
#include "fblcap/specfun.hpp"

namespace fblcap {

namespace {

double pairwise_sum(std::span<const double> v) {
  if (v.size() <= 8) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
  }
  const std::size_t half = v.size() / 2;
  return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

struct Moments {
  double count = 0.0;
  double mean = 0.0;
  double m2 = 0.0;  // sum of squared deviations
};

Moments combine(const Moments& a, const Moments& b) {
  if (a.count == 0.0) return b;
  if (b.count == 0.0) return a;
  const double n = a.count + b.count;
  const double delta = b.mean - a.mean;
  return {n, a.mean + delta * (b.count / n), a.m2 + b.m2 + delta * delta * (a.count * b.count / n)};
}

Moments reduce_pairwise(std::span<const Moments> parts) {
  if (parts.empty()) return {};
  if (parts.size() == 1) return parts.front();
  const std::size_t half = parts.size() / 2;
  return combine(reduce_pairwise(parts.first(half)), reduce_pairwise(parts.subspan(half)));
}

Moments batch_moments(std::span<const double> y) {
  Moments out;
  out.count = static_cast<double>(y.size());
  out.mean = pairwise_sum(y) / out.count;
  std::vector<double> sq(y.size());
  std::transform(y.begin(), y.end(), sq.begin(), [&](double v) {
    const double d = v - out.mean;
    return d * d;
  });
  out.m2 = pairwise_sum(sq);
  return out;
}

}  // namespace

void McConfig::validate() const {
  if (samples < 1) throw DomainError("McConfig: samples must be >= 1");
  if (batch < 1) throw DomainError("McConfig: batch must be >= 1");
}

McEstimate ec_monte_carlo(const SystemParams& params, const McConfig& cfg) {
  params.validate();
  cfg.validate();

  const int m = params.m;
  const int n_d = params.n_d();
  const double snr = avg_received_snr(params.n_t, params.gamma0);
  const double eps = params.eps;
  const double tp = params.theta_prime();
  // theta m n_d R = tp n_d sum ln(1+snr_i) - penalty
  const double penalty = tp * std::sqrt(static_cast<double>(m) * n_d) * q_inv(eps);
  const bool clamp = cfg.rate_policy == RatePolicy::kClampAtZero;
  const bool sampled = cfg.mode == BernoulliMode::kSampled;
  const bool tilted = cfg.sampler == FadingSampler::kImportance;
  constexpr double kMix = 0.5;
  const double rate = 1.0 + tp * n_d * snr;

  const std::uint64_t n_batches = (cfg.samples + cfg.batch - 1) / cfg.batch;
  std::vector<Moments> parts(n_batches);

  auto run_batch = [&](std::uint64_t b) {
    Rng rng(cfg.seed, b);
    const std::uint64_t begin = b * cfg.batch;
    const std::uint64_t count = std::min(cfg.batch, cfg.samples - begin);
    std::vector<double> y(count);
    for (auto& out : y) {
      double log_sum = 0.0;
      double log_w = 0.0;  // log of p(x)/q(x) over the m gains
      for (int i = 0; i < m; ++i) {
        double x;
        if (tilted) {
          const bool steep = rng.uniform_open0() <= kMix;
          x = rng.exponential() / (steep ? rate : 1.0);
          log_w -= std::log((1.0 - kMix) + kMix * rate * std::exp(-(rate - 1.0) * x));
        } else {
          x = rng.exponential();
        }
        log_sum += std::log1p(snr * x);
      }
      double exponent = tp * n_d * log_sum - penalty;  // theta * bits delivered
      if (clamp && exponent < 0.0) exponent = 0.0;
      const double fading = std::exp(log_w - exponent);
      if (sampled) {
        out = rng.uniform_open0() <= eps ? 1.0 : fading;
      } else {
        out = eps + (1.0 - eps) * fading;
      }
    }
    parts[b] = batch_moments(y);
  };

  unsigned workers = cfg.workers != 0 ? cfg.workers : std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::uint64_t>(workers, n_batches));
  if (workers <= 1) {
    for (std::uint64_t b = 0; b < n_batches; ++b) run_batch(b);
  } else {
    std::atomic<std::uint64_t> next{0};
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::uint64_t b = next++; b < n_batches; b = next++) run_batch(b);
      });
    }
  }

  const Moments total = reduce_pairwise(parts);
  if (!std::isfinite(total.mean) || !std::isfinite(total.m2))
    throw NumericalError("ec_monte_carlo: non-finite sample encountered");

  McEstimate est;
  est.samples_used = cfg.samples;
  est.value = -std::log(total.mean) / params.theta;
  const double var = total.count > 1.0 ? total.m2 / (total.count - 1.0) : 0.0;
  const double se_mean = std::sqrt(std::max(var, 0.0) / total.count);
  est.std_error = se_mean / (params.theta * total.mean);
  return est;
}

}  // namespace fblcap
