#include "sysid/simulate.hpp"

#include <cmath>

#include "sysid/rng.hpp"

namespace sysid {

namespace {
constexpr double kOverflowAbs = 1e150;
}

void NoiseModel::validate() const {
  if (!(sigma_w >= 0.0)) fail(ErrorCode::ConfigError, "NoiseModel: sigma_w must be >= 0");
}

void AttackStrategy::validate() const {
  if (!(p >= 0.0 && p < 0.5)) fail(ErrorCode::ConfigError, "AttackStrategy: p must lie in [0, 0.5)");
  if (kind == AttackKind::None && p != 0.0)
    fail(ErrorCode::ConfigError, "AttackStrategy: kind None forces p = 0");
  if ((kind == AttackKind::MisleadingNodewise || kind == AttackKind::MisleadingAlternating) &&
      param < 0.0)
    fail(ErrorCode::ConfigError, "AttackStrategy: c_bar must be >= 0");
}

Vec default_x0(std::size_t n, double sigma, std::uint64_t seed) {
  Vec x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = sigma == 0.0 ? 0.0 : sigma * rng::gaussian(seed, rng::kX0, 0, i);
  return x;
}

TrajectoryRecord simulate(const SystemMatrix& sys, std::size_t T, const NoiseModel& noise,
                          const AttackStrategy& attack, const Vec* x0, std::uint64_t seed) {
  const std::size_t n = sys.A.rows();
  if (sys.A.cols() != n || n == 0) fail(ErrorCode::DimensionMismatch, "simulate: A not square");
  if (T < 1) fail(ErrorCode::ConfigError, "simulate: T must be >= 1");
  noise.validate();
  attack.validate();

  TrajectoryRecord rec;
  rec.system = sys;
  rec.T = T;
  rec.seed = seed;
  rec.noise_model = noise;
  rec.attack_strategy = attack;
  rec.states.reserve(T + 1);
  rec.noise.reserve(T);
  rec.attacks.reserve(T);
  rec.schedule.T = T;
  rec.schedule.n = n;
  rec.schedule.xi.assign(T * n, 0);

  Vec x = x0 ? *x0 : default_x0(n, noise.sigma_w, seed);
  if (x.size() != n) fail(ErrorCode::DimensionMismatch, "simulate: x0 dimension");
  rec.states.push_back(x);

  for (std::size_t t = 0; t < T; ++t) {
    Vec w(n);
    for (std::size_t i = 0; i < n; ++i) {
      if (noise.sigma_w == 0.0)
        w[i] = 0.0;
      else if (noise.kind == NoiseKind::Gaussian)
        w[i] = noise.sigma_w * rng::gaussian(seed, rng::kNoise, t, i);
      else
        w[i] = rng::uniform_sym(noise.sigma_w, seed, rng::kNoise, t, i);
    }

    bool all_attacked = true;
    for (std::size_t i = 0; i < n; ++i) {
      bool hit = attack.kind != AttackKind::None && rng::bernoulli(attack.p, seed, rng::kSchedule, t, i);
      rec.schedule.xi[t * n + i] = hit ? 1 : 0;
      all_attacked = all_attacked && hit;
    }

    Vec v(n, 0.0);
    switch (attack.kind) {
      case AttackKind::None:
        break;
      case AttackKind::ScaledState:
        for (std::size_t i = 0; i < n; ++i)
          if (rec.schedule.at(t, i)) v[i] = attack.param * x[i];
        break;
      case AttackKind::MisleadingNodewise:
        for (std::size_t i = 0; i < n; ++i)
          if (rec.schedule.at(t, i) && x[i] != 0.0) v[i] = x[i] > 0.0 ? attack.param : -attack.param;
        break;
      case AttackKind::MisleadingAlternating:
        if (t % 2 == 1 && all_attacked) {
          double nx = norm2(x);
          if (nx > 0.0)
            for (std::size_t i = 0; i < n; ++i) v[i] = attack.param * x[i] / nx;
        }
        break;
      case AttackKind::FixedOffset:
        for (std::size_t i = 0; i < n; ++i)
          if (rec.schedule.at(t, i)) v[i] = attack.param;
        break;
    }
    for (double vi : v) rec.max_abs_attack = std::max(rec.max_abs_attack, std::abs(vi));

    Vec xn = matvec(sys.A, x);
    for (std::size_t i = 0; i < n; ++i) {
      xn[i] += w[i] + v[i];
      if (!(std::abs(xn[i]) <= kOverflowAbs))
        fail(ErrorCode::NonFiniteState,
             "simulate: state overflow at t=" + std::to_string(t + 1) + " (unstable configuration)");
    }
    rec.noise.push_back(std::move(w));
    rec.attacks.push_back(std::move(v));
    rec.states.push_back(xn);
    x = std::move(xn);
  }
  return rec;
}

}  // namespace sysid
