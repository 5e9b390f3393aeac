#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "sysid/io.hpp"
#include "sysid/simulate.hpp"

using namespace sysid;

static SystemMatrix zero_plant(std::size_t n) {
  SystemMatrix s;
  s.A = Matrix(n, n);
  s.rho = 0.0;
  s.opnorm = 0.0;
  s.psi = 1.0;
  return s;
}

static SystemMatrix bench_plant() { return generate_system(SystemSpec{10, 0.75, 1.5, 42}); }

TEST_CASE("noise-free unforced rollout collapses to zero") {
  Vec e1{1.0, 0.0, 0.0};
  auto rec = simulate(zero_plant(3), 4, {NoiseKind::Gaussian, 0.0}, {}, &e1, 7);
  CHECK(rec.states.size() == 5);
  CHECK(rec.states[0] == e1);
  for (std::size_t t = 1; t <= 4; ++t)
    for (double v : rec.states[t]) CHECK(v == 0.0);
  for (const auto& w : rec.noise)
    for (double v : w) CHECK(v == 0.0);
}

TEST_CASE("no attack means zero inputs and an empty schedule") {
  auto rec = simulate(bench_plant(), 50, {NoiseKind::Gaussian, 3.0}, {AttackKind::None, 0.0, 0.0},
                      nullptr, 11);
  CHECK(rec.max_abs_attack == 0.0);
  for (const auto& v : rec.attacks)
    for (double vi : v) CHECK(vi == 0.0);
  for (auto b : rec.schedule.xi) CHECK(b == 0);
}

TEST_CASE("logged pieces reconstruct the trajectory bitwise") {
  AttackStrategy strategies[] = {
      {AttackKind::None, 0.0, 0.0},
      {AttackKind::ScaledState, 0.5, 0.3},
      {AttackKind::MisleadingNodewise, 120.0, 0.4},
      {AttackKind::MisleadingAlternating, 30.0, 0.45},
      {AttackKind::FixedOffset, -2.5, 0.2},
  };
  SystemMatrix sys = generate_system(SystemSpec{4, 0.6, 1.1, 5});
  for (const auto& atk : strategies) {
    auto rec = simulate(sys, 40, {NoiseKind::Gaussian, 1.0}, atk, nullptr, 99);
    for (std::size_t t = 0; t < rec.T; ++t) {
      Vec pred = matvec(sys.A, rec.states[t]);
      for (std::size_t i = 0; i < 4; ++i) {
        pred[i] += rec.noise[t][i] + rec.attacks[t][i];
        CHECK(pred[i] == rec.states[t + 1][i]);
      }
    }
  }
}

TEST_CASE("attacks only strike scheduled node-times") {
  AttackStrategy strategies[] = {
      {AttackKind::ScaledState, 2.0, 0.3},
      {AttackKind::MisleadingNodewise, 5.0, 0.4},
      {AttackKind::MisleadingAlternating, 3.0, 0.45},
      {AttackKind::FixedOffset, 1.0, 0.25},
  };
  SystemMatrix sys = generate_system(SystemSpec{3, 0.5, 0.9, 2});
  for (const auto& atk : strategies) {
    auto rec = simulate(sys, 200, {NoiseKind::Gaussian, 1.0}, atk, nullptr, 123);
    for (std::size_t t = 0; t < rec.T; ++t)
      for (std::size_t i = 0; i < 3; ++i)
        if (!rec.schedule.at(t, i)) CHECK(rec.attacks[t][i] == 0.0);
  }
}

TEST_CASE("same seed, same record; new seed, new noise") {
  SystemMatrix sys = bench_plant();
  NoiseModel nm{NoiseKind::Gaussian, 3.0};
  AttackStrategy atk{AttackKind::MisleadingNodewise, 120.0, 0.4};
  auto a = simulate(sys, 60, nm, atk, nullptr, 42);
  auto b = simulate(sys, 60, nm, atk, nullptr, 42);
  CHECK(a.states == b.states);
  CHECK(a.noise == b.noise);
  CHECK(a.attacks == b.attacks);
  CHECK(a.schedule.xi == b.schedule.xi);
  auto c = simulate(sys, 60, nm, atk, nullptr, 43);
  CHECK(a.noise != c.noise);
}

TEST_CASE("noise stream does not depend on the attack strategy") {
  SystemMatrix sys = bench_plant();
  NoiseModel nm{NoiseKind::Gaussian, 3.0};
  auto base = simulate(sys, 80, nm, {AttackKind::None, 0.0, 0.0}, nullptr, 321);
  AttackStrategy strategies[] = {
      {AttackKind::ScaledState, 0.2, 0.3},
      {AttackKind::MisleadingNodewise, 120.0, 0.4},
      {AttackKind::MisleadingAlternating, 30.0, 0.45},
      {AttackKind::FixedOffset, 4.0, 0.2},
  };
  for (const auto& atk : strategies) {
    auto rec = simulate(sys, 80, nm, atk, nullptr, 321);
    CHECK(rec.noise == base.noise);  // bitwise: substreams are keyed by purpose
    CHECK(rec.states[0] == base.states[0]);
  }
}

TEST_CASE("default initial state scales with the noise level") {
  CHECK(default_x0(5, 0.0, 9) == Vec(5, 0.0));
  Vec x = default_x0(10000, 1.0, 31);
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= double(x.size());
  double var = 0.0;
  for (double v : x) var += (v - mean) * (v - mean);
  double sd = std::sqrt(var / double(x.size()));
  CHECK(sd > 0.97);
  CHECK(sd < 1.03);
  CHECK(std::abs(mean) < 0.05);
}

TEST_CASE("uniform noise respects its half-width") {
  auto rec = simulate(zero_plant(2), 500, {NoiseKind::UniformBounded, 2.5}, {}, nullptr, 8);
  double hi = 0.0;
  for (const auto& w : rec.noise)
    for (double v : w) {
      CHECK(std::abs(v) <= 2.5);
      hi = std::max(hi, std::abs(v));
    }
  CHECK(hi > 2.0);  // actually fills the range
}

TEST_CASE("empirical attack frequency matches p") {
  auto rec = simulate(bench_plant(), 10000, {NoiseKind::Gaussian, 3.0},
                      {AttackKind::MisleadingNodewise, 120.0, 0.4}, nullptr, 17);
  double hits = 0.0;
  for (auto b : rec.schedule.xi) hits += b;
  double freq = hits / double(rec.schedule.xi.size());
  CHECK(freq > 0.37);
  CHECK(freq < 0.43);
}

TEST_CASE("state-proportional attack at large gain overflows loudly") {
  SystemMatrix sys = bench_plant();
  CHECK_THROWS_AS(
      (void)simulate(sys, 2000, {NoiseKind::Gaussian, 3.0}, {AttackKind::ScaledState, 30.0, 0.4},
                     nullptr, 1),
      Error);
  try {
    (void)simulate(sys, 2000, {NoiseKind::Gaussian, 3.0}, {AttackKind::ScaledState, 30.0, 0.4},
                   nullptr, 1);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NonFiniteState);
  }
}

TEST_CASE("zero-magnitude alternating attack is indistinguishable from none") {
  auto a = simulate(zero_plant(2), 300, {NoiseKind::Gaussian, 1.0},
                    {AttackKind::MisleadingAlternating, 0.0, 0.45}, nullptr, 77);
  auto b = simulate(zero_plant(2), 300, {NoiseKind::Gaussian, 1.0}, {AttackKind::None, 0.0, 0.0},
                    nullptr, 77);
  CHECK(a.states == b.states);
  CHECK(a.noise == b.noise);
}

TEST_CASE("strategy validation") {
  CHECK_THROWS_AS(AttackStrategy({AttackKind::ScaledState, 1.0, 0.5}).validate(), Error);   // p too big
  CHECK_THROWS_AS(AttackStrategy({AttackKind::ScaledState, 1.0, -0.1}).validate(), Error);
  CHECK_THROWS_AS(AttackStrategy({AttackKind::None, 0.0, 0.3}).validate(), Error);          // none forces p=0
  CHECK_THROWS_AS(AttackStrategy({AttackKind::MisleadingNodewise, -1.0, 0.3}).validate(), Error);
  CHECK_THROWS_AS(NoiseModel({NoiseKind::Gaussian, -1.0}).validate(), Error);
  AttackStrategy ok{AttackKind::FixedOffset, -3.0, 0.49};
  ok.validate();  // negative offsets are allowed
}

TEST_CASE("trajectory JSON and CSV round trips") {
  SystemMatrix sys = generate_system(SystemSpec{3, 0.5, 1.0, 13});
  auto rec = simulate(sys, 25, {NoiseKind::Gaussian, 2.0},
                      {AttackKind::MisleadingNodewise, 8.0, 0.3}, nullptr, 5);

  json j = rec;
  auto back = j.get<TrajectoryRecord>();
  CHECK(back.states == rec.states);
  CHECK(back.noise == rec.noise);
  CHECK(back.attacks == rec.attacks);
  CHECK(back.schedule.xi == rec.schedule.xi);
  CHECK(back.system.A == rec.system.A);
  CHECK(back.seed == rec.seed);
  CHECK(back.max_abs_attack == rec.max_abs_attack);

  std::string csv = trajectory_to_csv(rec);
  std::vector<Vec> states, noise, attacks;
  std::vector<std::vector<std::uint8_t>> xi;
  trajectory_states_from_csv(csv, 3, states, noise, attacks, xi);
  CHECK(states == rec.states);
  CHECK(noise == rec.noise);
  CHECK(attacks == rec.attacks);
  REQUIRE(xi.size() == rec.T);
  for (std::size_t t = 0; t < rec.T; ++t)
    for (std::size_t i = 0; i < 3; ++i) CHECK((xi[t][i] != 0) == rec.schedule.at(t, i));
}
