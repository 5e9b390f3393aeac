#pragma once

#include <cstdint>
#include <vector>

#include "sysid/numerics.hpp"
#include "sysid/sysgen.hpp"

namespace sysid {

enum class NoiseKind { Gaussian, UniformBounded };

struct NoiseModel {
  NoiseKind kind = NoiseKind::Gaussian;
  // Gaussian: per-coordinate standard deviation; UniformBounded: half-width.
  // 0 is accepted as the degenerate "noise disabled" limit.
  double sigma_w = 1.0;

  void validate() const;
};

enum class AttackKind {
  None,
  ScaledState,            // v_i = c * x_i on attacked (i,t); explosive for large c
  MisleadingNodewise,     // v_i = c_bar * sign(x_i): bounded, state-following sign
  MisleadingAlternating,  // v = c_bar * x/||x|| on odd t when ALL nodes attacked
  FixedOffset,            // v_i = mu
};

struct AttackStrategy {
  AttackKind kind = AttackKind::None;
  double param = 0.0;  // c / c_bar / mu depending on kind
  double p = 0.0;      // per-node Bernoulli attack probability, in [0, 0.5)

  void validate() const;
};

struct AttackSchedule {
  std::size_t T = 0, n = 0;
  std::vector<std::uint8_t> xi;  // [T x n], row-major

  bool at(std::size_t t, std::size_t i) const { return xi[t * n + i] != 0; }
};

struct TrajectoryRecord {
  SystemMatrix system;
  std::size_t T = 0;
  std::uint64_t seed = 0;
  NoiseModel noise_model;
  AttackStrategy attack_strategy;
  std::vector<Vec> states;   // T+1
  std::vector<Vec> noise;    // T
  std::vector<Vec> attacks;  // T
  AttackSchedule schedule;
  double max_abs_attack = 0.0;  // realized max |v| (sigma_v diagnostic)
};

Vec default_x0(std::size_t n, double sigma, std::uint64_t seed);

// x_{t+1} = A x_t + w_t + v_t with ground-truth logging. RNG substreams are
// keyed per purpose, so the noise realization is identical across attack
// kinds and thread counts for a fixed seed. x0 == nullptr draws the default.
TrajectoryRecord simulate(const SystemMatrix& sys, std::size_t T, const NoiseModel& noise,
                          const AttackStrategy& attack, const Vec* x0, std::uint64_t seed);

}  // namespace sysid
