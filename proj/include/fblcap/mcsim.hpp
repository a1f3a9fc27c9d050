#pragma once

#include <cstdint>

#include "fblcap/channel.hpp"

namespace fblcap {

enum class BernoulliMode {
  kMarginalized,  // average eps + (1-eps) exp(-theta m n_d R)
  kSampled,       // flip the block-error coin and average exp(-theta s)
};

enum class FadingSampler {
  kImportance,  // defensive mixture Exp(1) / Exp(1 + theta' n_d G), weights <= 2 per sub-channel
  kDirect,      // plain Exp(1) draws
};

struct McConfig {
  std::uint64_t samples = 1'000'000;
  std::uint64_t seed = 1;
  std::uint64_t batch = 65'536;
  unsigned workers = 0;  // 0: hardware concurrency
  BernoulliMode mode = BernoulliMode::kMarginalized;
  RatePolicy rate_policy = RatePolicy::kUnclamped;
  FadingSampler sampler = FadingSampler::kImportance;

  void validate() const;
};

struct McEstimate {
  double value = 0.0;   // bits/block
  double std_error = 0.0;  // bits/block, delta method
  std::uint64_t samples_used = 0;
};

/// Monte-Carlo estimate of -(1/theta) ln E{exp(-theta s)} over i.i.d. blocks.
///
/// With direct sampling the variance of exp(-theta s) is carried by deep fades
/// on every sub-channel at once, which 1e6 draws rarely see when m and G are
/// large; the sample stderr then comes out far too small. The default
/// importance sampler puts half of each gain draw on Exp(1 + theta' n_d G) and
/// reweights, which leaves the estimand unchanged.
///
/// Batch b draws from Rng(seed, b) and batch sums are combined by ordered
/// pairwise summation, so the result is bit-identical for any worker count.
/// There is no restriction on theta' n_d. Throws NumericalError on a NaN draw.
McEstimate ec_monte_carlo(const SystemParams& params, const McConfig& cfg);

}  // namespace fblcap
