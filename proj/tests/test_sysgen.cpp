#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "sysid/io.hpp"
#include "sysid/sysgen.hpp"

using namespace sysid;

TEST_CASE("benchmark plant hits both targets") {
  SystemSpec spec{10, 0.75, 1.5, 42};
  SystemMatrix sys = generate_system(spec);
  CHECK(sys.rho >= 0.749999);
  CHECK(sys.rho <= 0.750001);
  CHECK(sys.opnorm >= 1.499);
  CHECK(sys.opnorm <= 1.501);
  CHECK(sys.psi >= 1.0);
  CHECK(std::isfinite(sys.psi));
  // independent re-measurement of the returned matrix
  CHECK(spectral_radius(sys.A) == doctest::Approx(0.75).epsilon(1e-5));
  CHECK(operator_norm(sys.A) == doctest::Approx(1.5).epsilon(1e-3));
}

TEST_CASE("generation is deterministic in the seed") {
  SystemSpec spec{6, 0.6, 1.2, 9001};
  SystemMatrix a = generate_system(spec);
  SystemMatrix b = generate_system(spec);
  CHECK(a.A == b.A);  // bitwise
  spec.seed = 9002;
  SystemMatrix c = generate_system(spec);
  CHECK(a.A != c.A);
}

TEST_CASE("scalar system is the target itself") {
  SystemMatrix sys = generate_system(SystemSpec{1, 0.5, 0.5, 3});
  CHECK(std::abs(std::abs(sys.A(0, 0)) - 0.5) < 1e-9);
  CHECK(sys.opnorm == doctest::Approx(0.5).epsilon(1e-6));
}

TEST_CASE("normal case: equal targets force a near-normal matrix") {
  SystemMatrix sys = generate_system(SystemSpec{3, 0.9, 0.9, 17});
  CHECK(sys.rho == doctest::Approx(0.9).epsilon(1e-5));
  CHECK(sys.opnorm == doctest::Approx(0.9).epsilon(1e-2));
}

TEST_CASE("targets are met across a parameter sweep") {
  for (std::uint64_t s = 0; s < 100; ++s) {
    std::size_t n = 2 + s % 7;
    double rho = 0.2 + 0.007 * double(s);
    double op = rho * (1.0 + 0.02 * double(s % 40));
    SystemMatrix sys = generate_system(SystemSpec{n, rho, op, 100 + s});
    CHECK(std::abs(sys.rho - rho) <= 1e-6);
    CHECK(std::abs(sys.opnorm - op) <= 1e-3);
  }
}

TEST_CASE("invalid specs are rejected") {
  CHECK_THROWS_AS((void)generate_system(SystemSpec{0, 0.5, 0.5, 1}), Error);
  CHECK_THROWS_AS((void)generate_system(SystemSpec{3, 0.0, 0.5, 1}), Error);
  CHECK_THROWS_AS((void)generate_system(SystemSpec{3, 1.0, 1.5, 1}), Error);
  CHECK_THROWS_AS((void)generate_system(SystemSpec{3, 0.5, 0.4, 1}), Error);   // opnorm < rho
  CHECK_THROWS_AS((void)generate_system(SystemSpec{1, 0.5, 0.9, 1}), Error);   // scalar: must match
}

TEST_CASE("stability constant on hand matrices") {
  CHECK(estimate_psi(scale(Matrix::identity(2), 0.5), 0.5, 50) == doctest::Approx(1.0));
  CHECK(estimate_psi(Matrix(3, 3), 0.0, 50) == doctest::Approx(1.0));

  Matrix j(2, 2);  // defective: powers transiently grow before decaying
  j(0, 0) = 0.5; j(0, 1) = 10.0; j(1, 1) = 0.5;
  CHECK(estimate_psi(j, 0.5, 100) > 1.0);
}

TEST_CASE("psi bounds realized trajectories of the plant") {
  SystemMatrix sys = generate_system(SystemSpec{5, 0.7, 1.3, 55});
  Matrix p = Matrix::identity(5);
  double worst = 0.0;
  for (std::size_t t = 0; t <= 50; ++t) {
    worst = std::max(worst, operator_norm(p) / std::pow(sys.rho, double(t)));
    p = matmul(sys.A, p);
  }
  CHECK(worst <= sys.psi * (1.0 + 1e-6));
}

TEST_CASE("system JSON round trip is bitwise") {
  SystemMatrix sys = generate_system(SystemSpec{4, 0.6, 1.1, 21});
  json j = sys;
  auto back = j.get<SystemMatrix>();
  CHECK(back.A == sys.A);
  CHECK(back.rho == sys.rho);
  CHECK(back.opnorm == sys.opnorm);
  CHECK(back.psi == sys.psi);
}
