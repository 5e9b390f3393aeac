#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "sysid/numerics.hpp"
#include "sysid/rng.hpp"

using namespace sysid;

static Matrix rand_matrix(std::size_t m, std::size_t n, std::uint64_t seed, std::uint64_t tag) {
  Matrix a(m, n);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) a(i, j) = rng::gaussian(seed, rng::kTest, tag * 1000 + i, j);
  return a;
}

static Matrix rot2(double theta) {
  Matrix r(2, 2);
  r(0, 0) = std::cos(theta);
  r(0, 1) = -std::sin(theta);
  r(1, 0) = std::sin(theta);
  r(1, 1) = std::cos(theta);
  return r;
}

TEST_CASE("matmul and transpose basics") {
  Matrix a(2, 3);
  a(0, 0) = 1; a(0, 1) = 2; a(0, 2) = 3;
  a(1, 0) = 4; a(1, 1) = 5; a(1, 2) = 6;
  Matrix i3 = Matrix::identity(3);
  CHECK(matmul(a, i3) == a);
  Matrix at = transpose(a);
  CHECK(at.rows() == 3);
  CHECK(at(2, 1) == 6);
  Matrix s = sub(add(a, a), scale(a, 2.0));
  for (double v : s.data()) CHECK(v == 0.0);
  Vec x{1, 1, 1};
  Vec y = matvec(a, x);
  CHECK(y[0] == doctest::Approx(6));
  CHECK(y[1] == doctest::Approx(15));
}

TEST_CASE("least squares: scalar regressor") {
  // rows (1) and (2), targets 1 and 3: normal equation 5a = 7
  Matrix x(2, 1);
  x(0, 0) = 1;
  x(1, 0) = 2;
  Vec y{1, 3};
  Vec a = qr_solve_normal(x, y);
  REQUIRE(a.size() == 1);
  CHECK(a[0] == doctest::Approx(1.4).epsilon(1e-12));
}

TEST_CASE("least squares recovers planted coefficients exactly") {
  for (std::uint64_t s = 0; s < 5; ++s) {
    Matrix x = rand_matrix(50, 5, 77 + s, 1);
    Vec truth(5);
    for (std::size_t j = 0; j < 5; ++j) truth[j] = double(j) - 2.0;
    Vec y = matvec(x, truth);
    Vec a = qr_solve_normal(x, y);
    for (std::size_t j = 0; j < 5; ++j) CHECK(std::abs(a[j] - truth[j]) < 1e-10);
  }
}

TEST_CASE("least squares residual is orthogonal to the column space") {
  Matrix x = rand_matrix(40, 6, 11, 2);
  Vec y(40);
  for (std::size_t t = 0; t < 40; ++t) y[t] = rng::gaussian(11, rng::kTest, 5000 + t, 0);
  Vec a = qr_solve_normal(x, y);
  Vec r = y;
  Vec xa = matvec(x, a);
  for (std::size_t t = 0; t < 40; ++t) r[t] -= xa[t];
  // X^T r should vanish relative to the problem scale
  Matrix xt = transpose(x);
  Vec g = matvec(xt, r);
  double scale_ = frobenius(x) * norm2(y) + 1e-300;
  CHECK(norm2(g) / scale_ < tol::kLsOrthoRel);
}

TEST_CASE("rank deficiency is detected, not silently solved") {
  Matrix x(50, 3);
  for (std::size_t t = 0; t < 50; ++t) {
    double v = rng::gaussian(3, rng::kTest, t, 0);
    x(t, 0) = v;
    x(t, 1) = 2.0 * v;  // exact multiple of column 0
    x(t, 2) = rng::gaussian(3, rng::kTest, t, 1);
  }
  Vec y(50, 1.0);
  CHECK_THROWS_AS((void)qr_solve_normal(x, y), Error);

  Matrix wide(2, 3, 1.0);  // fewer rows than unknowns
  Vec y2{1, 2};
  CHECK_THROWS_AS((void)qr_solve_normal(wide, y2), Error);
}

TEST_CASE("operator norm: diagonal and nilpotent") {
  Matrix d(2, 2);
  d(0, 0) = 3;
  d(1, 1) = 1;
  CHECK(operator_norm(d) == doctest::Approx(3).epsilon(1e-9));

  Matrix nil(2, 2);
  nil(0, 1) = 1;
  CHECK(operator_norm(nil) == doctest::Approx(1).epsilon(1e-9));
  CHECK(spectral_radius(nil) == doctest::Approx(0).epsilon(1e-9));

  CHECK(operator_norm(scale(Matrix::identity(3), 2.0)) == doctest::Approx(2).epsilon(1e-9));
  CHECK(operator_norm(Matrix(4, 4)) == 0.0);
}

TEST_CASE("operator norm equals the largest planted singular value") {
  // A = U diag(sigma) V^T with U, V products of plane rotations
  for (int k = 0; k < 20; ++k) {
    double s1 = 0.5 + 0.1 * k, s2 = 0.3, s3 = 0.1;
    Matrix d(3, 3);
    d(0, 0) = s1; d(1, 1) = s2; d(2, 2) = s3;
    auto plane = [](std::size_t n, std::size_t i, std::size_t j, double th) {
      Matrix r = Matrix::identity(n);
      r(i, i) = std::cos(th); r(j, j) = std::cos(th);
      r(i, j) = -std::sin(th); r(j, i) = std::sin(th);
      return r;
    };
    Matrix u = matmul(plane(3, 0, 1, 0.3 + k), plane(3, 1, 2, 1.1 * k));
    Matrix v = matmul(plane(3, 0, 2, 0.7 * k), plane(3, 0, 1, 2.2 + k));
    Matrix a = matmul(u, matmul(d, transpose(v)));
    CHECK(operator_norm(a) == doctest::Approx(s1).epsilon(1e-8));
  }
}

TEST_CASE("spectral radius: triangular, rotation, and scaling") {
  Matrix d(2, 2);
  d(0, 0) = 0.75;
  d(1, 1) = 0.2;
  CHECK(spectral_radius(d) == doctest::Approx(0.75).epsilon(1e-6));

  Matrix tri(3, 3);
  tri(0, 0) = -0.9; tri(0, 1) = 5; tri(0, 2) = 3;
  tri(1, 1) = 0.4;  tri(1, 2) = -2;
  tri(2, 2) = 0.1;
  CHECK(spectral_radius(tri) == doctest::Approx(0.9).epsilon(1e-6));

  Matrix r = scale(rot2(1.5707963267948966), 0.5);  // complex pair at +/- 0.5i
  CHECK(spectral_radius(r) == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(operator_norm(r) == doctest::Approx(0.5).epsilon(1e-8));

  CHECK(spectral_radius(scale(Matrix::identity(3), 2.0)) == doctest::Approx(2).epsilon(1e-6));
  CHECK(spectral_radius(Matrix(3, 3)) == 0.0);

  Matrix a = rand_matrix(5, 5, 99, 3);
  double rho = spectral_radius(a);
  CHECK(spectral_radius(scale(a, -3.0)) == doctest::Approx(3.0 * rho).epsilon(1e-6));
}

TEST_CASE("block-diagonal eigenvalue placement") {
  // scaled rotation block (modulus r) next to a real eigenvalue d
  for (int k = 0; k < 10; ++k) {
    double r = 0.2 + 0.07 * k, d = 0.55;
    Matrix a(3, 3);
    Matrix blk = scale(rot2(0.9 + 0.2 * k), r);
    a(0, 0) = blk(0, 0); a(0, 1) = blk(0, 1);
    a(1, 0) = blk(1, 0); a(1, 1) = blk(1, 1);
    a(2, 2) = d;
    a(0, 2) = 2.0;  // coupling above the diagonal leaves the spectrum alone
    CHECK(spectral_radius(a) == doctest::Approx(std::max(r, d)).epsilon(1e-6));
  }
}

TEST_CASE("spectral radius never exceeds the operator norm") {
  for (std::uint64_t s = 0; s < 50; ++s) {
    Matrix a = rand_matrix(4, 4, 1000 + s, 4);
    CHECK(spectral_radius(a) <= operator_norm(a) * (1.0 + 1e-6) + 1e-12);
  }
}

TEST_CASE("norm helpers") {
  Vec v{3, 4};
  CHECK(norm2(v) == doctest::Approx(5));
  CHECK(dot(v, v) == doctest::Approx(25));
  Matrix a(2, 2);
  a(0, 0) = 3; a(1, 1) = 4;
  CHECK(frobenius(a) == doctest::Approx(5));
}
