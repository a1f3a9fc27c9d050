#pragma once

#include <array>
#include <cstdint>
#include <string_view>

namespace fblcap {

// xoshiro256** seeded through splitmix64. Independent streams are derived
// from (seed, stream) by hashing both into the splitmix64 seed, so worker k
// of any pool always sees the same sequence for batch k.
class Rng {
 public:
  static constexpr std::string_view kFamily = "xoshiro256** / splitmix64(seed, stream)";

  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

  std::uint64_t next();

  /// Uniform on (0, 1], 53-bit resolution.
  double uniform_open0();

  /// Unit-mean exponential variate by inversion, -ln(U).
  double exponential();

  /// Pair of independent N(0, 1/2) variates (real and imaginary part of
  /// a CN(0,1) sample) by Box-Muller.
  std::array<double, 2> complex_normal();

 private:
  std::array<std::uint64_t, 4> s_{};
};

}  // namespace fblcap
