#include "fblcap/rng.hpp"

#include <bit>
#include <cmath>
#include <numbers>

namespace fblcap {

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace

Rng::Rng(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t mix = seed;
  std::uint64_t state = splitmix64(mix) ^ (stream * 0xD1B54A32D192ED03ULL);
  for (auto& word : s_) word = splitmix64(state);
  if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[0] = 1;
}

std::uint64_t Rng::next() {
  const std::uint64_t result = std::rotl(s_[1] * 5, 7) * 9;
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = std::rotl(s_[3], 45);
  return result;
}

double Rng::uniform_open0() {
  return static_cast<double>((next() >> 11) + 1) * 0x1.0p-53;
}

double Rng::exponential() { return -std::log(uniform_open0()); }

std::array<double, 2> Rng::complex_normal() {
  const double radius = std::sqrt(exponential());  // |z|^2 ~ Exp(1)
  const double angle = 2.0 * std::numbers::pi * uniform_open0();
  return {radius * std::cos(angle), radius * std::sin(angle)};
}

}  // namespace fblcap
