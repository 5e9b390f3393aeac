#pragma once

#include <cmath>
#include <cstdint>

namespace sysid::rng {

// Counter-based splittable generator. Every draw is a pure function of
// (seed, stream tag, t, i, k), so substreams are independent by key and the
// output is identical regardless of evaluation order or thread count.
// Mixing is the splitmix64 finalizer chained over the key words.

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

inline std::uint64_t chain(std::uint64_t h, std::uint64_t w) { return mix64(h + kGolden + w); }

// Stream tags. Noise isolation across attack strategies holds because each
// purpose draws only from its own tag.
enum Stream : std::uint64_t {
  kX0 = 1,
  kNoise = 2,
  kSchedule = 3,
  kAttack = 4,
  kTrial = 5,
  kSysD = 6,
  kSysN = 7,
  kSysQ = 8,
  kSysRetry = 9,
  kTest = 10,
};

inline std::uint64_t word(std::uint64_t seed, std::uint64_t tag, std::uint64_t t, std::uint64_t i,
                          std::uint64_t k = 0) {
  std::uint64_t h = mix64(seed + kGolden);
  h = chain(h, tag);
  h = chain(h, t);
  h = chain(h, i);
  h = chain(h, k);
  return h;
}

// uniform in [0, 1), 53-bit resolution
inline double unit(std::uint64_t seed, std::uint64_t tag, std::uint64_t t, std::uint64_t i,
                   std::uint64_t k = 0) {
  return static_cast<double>(word(seed, tag, t, i, k) >> 11) * 0x1.0p-53;
}

inline bool bernoulli(double p, std::uint64_t seed, std::uint64_t tag, std::uint64_t t,
                      std::uint64_t i) {
  return unit(seed, tag, t, i) < p;
}

// standard normal via Box-Muller; two words per draw, keyed not sequential
inline double gaussian(std::uint64_t seed, std::uint64_t tag, std::uint64_t t, std::uint64_t i) {
  double u1 = unit(seed, tag, t, i, 0);
  double u2 = unit(seed, tag, t, i, 1);
  if (u1 <= 0.0) u1 = 0x1.0p-53;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
}

// uniform in [-half_width, half_width]
inline double uniform_sym(double half_width, std::uint64_t seed, std::uint64_t tag, std::uint64_t t,
                          std::uint64_t i) {
  return (2.0 * unit(seed, tag, t, i) - 1.0) * half_width;
}

// derived per-trial seed used by the harness: hash(base_seed, T, trial)
inline std::uint64_t trial_seed(std::uint64_t base_seed, std::uint64_t T, std::uint64_t trial) {
  return word(base_seed, kTrial, T, trial);
}

}  // namespace sysid::rng
