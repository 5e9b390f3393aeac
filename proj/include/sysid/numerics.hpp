#pragma once

#include <cstddef>
#include <vector>

#include "sysid/errors.hpp"

namespace sysid {

using Vec = std::vector<double>;

// Dense row-major matrix. Row-major layout is fixed for serialization
// determinism; all public operations leave entries finite.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), a_(rows * cols, fill) {}

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double& operator()(std::size_t r, std::size_t c) { return a_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return a_[r * cols_ + c]; }

  const std::vector<double>& data() const { return a_; }
  std::vector<double>& data() { return a_; }

  Vec row(std::size_t r) const { return Vec(a_.begin() + r * cols_, a_.begin() + (r + 1) * cols_); }
  void set_row(std::size_t r, const Vec& v);

  bool operator==(const Matrix& o) const = default;

 private:
  std::size_t rows_ = 0, cols_ = 0;
  std::vector<double> a_;
};

// Tolerances used across the numeric kernel, centralized for reproducibility.
namespace tol {
inline constexpr double kRankRel = 1e-10;       // QR rank test, relative to max |R_jj|
inline constexpr double kOpnormRel = 1e-9;      // power iteration relative accuracy
inline constexpr double kSpectralRel = 1e-6;    // eigenvalue iteration relative accuracy
inline constexpr double kLsOrthoRel = 1e-8;     // residual orthogonality certificate
}  // namespace tol

Matrix matmul(const Matrix& a, const Matrix& b);
Matrix transpose(const Matrix& a);
Matrix add(const Matrix& a, const Matrix& b);
Matrix sub(const Matrix& a, const Matrix& b);
Matrix scale(const Matrix& a, double c);
Vec matvec(const Matrix& a, const Vec& x);

double dot(const Vec& a, const Vec& b);
double norm2(const Vec& v);
double frobenius(const Matrix& a);

// Least squares via Householder QR. Throws RankDeficient when some |R_jj|
// falls below kRankRel * max |R_jj|.
Vec qr_solve_normal(const Matrix& X, const Vec& y);

// Largest singular value via repeated squaring of A^T A plus a short
// Rayleigh-quotient polish; robust to clustered singular values.
double operator_norm(const Matrix& A);

// Max |eigenvalue| via Hessenberg reduction + shifted QR iteration.
double spectral_radius(const Matrix& A);

}  // namespace sysid
