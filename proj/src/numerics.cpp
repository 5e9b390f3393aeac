#include "sysid/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>

#include "sysid/rng.hpp"

namespace sysid {

void Matrix::set_row(std::size_t r, const Vec& v) {
  if (v.size() != cols_) fail(ErrorCode::DimensionMismatch, "set_row: size mismatch");
  std::copy(v.begin(), v.end(), a_.begin() + r * cols_);
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) fail(ErrorCode::DimensionMismatch, "matmul: inner dims");
  Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k) {
      double aik = a(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
    }
  return c;
}

Matrix transpose(const Matrix& a) {
  Matrix t(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
  return t;
}

Matrix add(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) fail(ErrorCode::DimensionMismatch, "add");
  Matrix c = a;
  for (std::size_t i = 0; i < c.data().size(); ++i) c.data()[i] += b.data()[i];
  return c;
}

Matrix sub(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) fail(ErrorCode::DimensionMismatch, "sub");
  Matrix c = a;
  for (std::size_t i = 0; i < c.data().size(); ++i) c.data()[i] -= b.data()[i];
  return c;
}

Matrix scale(const Matrix& a, double c) {
  Matrix s = a;
  for (double& v : s.data()) v *= c;
  return s;
}

Vec matvec(const Matrix& a, const Vec& x) {
  if (a.cols() != x.size()) fail(ErrorCode::DimensionMismatch, "matvec");
  Vec y(a.rows(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < a.cols(); ++j) s += a(i, j) * x[j];
    y[i] = s;
  }
  return y;
}

double dot(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(const Vec& v) { return std::sqrt(dot(v, v)); }

double frobenius(const Matrix& a) {
  double s = 0.0;
  for (double v : a.data()) s += v * v;
  return std::sqrt(s);
}

Vec qr_solve_normal(const Matrix& X, const Vec& y) {
  const std::size_t m = X.rows(), n = X.cols();
  if (y.size() != m) fail(ErrorCode::DimensionMismatch, "qr_solve_normal: y size");
  if (m == 0 || n == 0) fail(ErrorCode::DimensionMismatch, "qr_solve_normal: empty");
  if (m < n) fail(ErrorCode::RankDeficient, "qr_solve_normal: underdetermined");

  Matrix R = X;
  Vec qty = y;
  // Householder QR, transforming y alongside
  for (std::size_t k = 0; k < n; ++k) {
    double sigma = 0.0;
    for (std::size_t i = k; i < m; ++i) sigma += R(i, k) * R(i, k);
    sigma = std::sqrt(sigma);
    if (sigma == 0.0) continue;  // column already zero below; rank test catches it
    double alpha = R(k, k) >= 0.0 ? -sigma : sigma;
    Vec v(m - k);
    v[0] = R(k, k) - alpha;
    for (std::size_t i = k + 1; i < m; ++i) v[i - k] = R(i, k);
    double vtv = 0.0;
    for (double t : v) vtv += t * t;
    if (vtv == 0.0) continue;
    double beta = 2.0 / vtv;
    for (std::size_t j = k; j < n; ++j) {
      double s = 0.0;
      for (std::size_t i = k; i < m; ++i) s += v[i - k] * R(i, j);
      s *= beta;
      for (std::size_t i = k; i < m; ++i) R(i, j) -= s * v[i - k];
    }
    double s = 0.0;
    for (std::size_t i = k; i < m; ++i) s += v[i - k] * qty[i];
    s *= beta;
    for (std::size_t i = k; i < m; ++i) qty[i] -= s * v[i - k];
    R(k, k) = alpha;
    for (std::size_t i = k + 1; i < m; ++i) R(i, k) = 0.0;
  }

  double maxdiag = 0.0;
  for (std::size_t j = 0; j < n; ++j) maxdiag = std::max(maxdiag, std::abs(R(j, j)));
  if (maxdiag == 0.0) fail(ErrorCode::RankDeficient, "qr_solve_normal: zero matrix");
  for (std::size_t j = 0; j < n; ++j)
    if (std::abs(R(j, j)) < tol::kRankRel * maxdiag)
      fail(ErrorCode::RankDeficient, "qr_solve_normal: rank deficient");

  Vec a(n);
  for (std::size_t jj = n; jj-- > 0;) {
    double s = qty[jj];
    for (std::size_t k = jj + 1; k < n; ++k) s -= R(jj, k) * a[k];
    a[jj] = s / R(jj, jj);
  }
  return a;
}

double operator_norm(const Matrix& A) {
  const std::size_t m = A.rows(), n = A.cols();
  if (m == 0 || n == 0) fail(ErrorCode::DimensionMismatch, "operator_norm: empty");

  double amax = 0.0;
  for (double v : A.data()) amax = std::max(amax, std::abs(v));
  if (amax == 0.0) return 0.0;
  if (!std::isfinite(amax)) fail(ErrorCode::NoConvergence, "operator_norm: non-finite entries");

  // Work on B = S^T S with S = A / amax. Repeated squaring of B amplifies the
  // top eigenvalue's dominance doubly exponentially, so clustered singular
  // values cost nothing: any gap r < 1 is crushed to r^(2^64), and an exact
  // cluster only means the limit projector has rank > 1, which is harmless
  // for the Rayleigh quotient.
  const Matrix S = scale(A, 1.0 / amax);
  const Matrix B = matmul(transpose(S), S);
  Matrix P = scale(B, 1.0 / frobenius(B));
  for (int k = 0; k < 64; ++k) {
    Matrix Q = matmul(P, P);
    double qf = frobenius(Q);
    if (qf == 0.0) break;  // squaring underflowed: P already dominated
    Q = scale(Q, 1.0 / qf);
    double step = frobenius(sub(Q, P));
    P = std::move(Q);
    if (step <= 1e-15) break;  // projector fixed point
  }

  // dominant direction: the largest column of the limit projector
  std::size_t best = 0;
  double best_norm = -1.0;
  for (std::size_t j = 0; j < n; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += P(i, j) * P(i, j);
    if (s > best_norm) {
      best_norm = s;
      best = j;
    }
  }
  Vec z(n);
  for (std::size_t i = 0; i < n; ++i) z[i] = P(i, best);
  double zn = norm2(z);
  if (zn == 0.0) return 0.0;
  for (double& v : z) v /= zn;

  // polish and evaluate the Rayleigh quotient through the original B
  for (int it = 0; it < 2; ++it) {
    Vec w = matvec(B, z);
    double wn = norm2(w);
    if (wn == 0.0) break;
    for (std::size_t i = 0; i < n; ++i) z[i] = w[i] / wn;
  }
  Vec w = matvec(B, z);
  double lambda = dot(z, w);
  return amax * std::sqrt(std::max(lambda, 0.0));
}


namespace {

// Householder similarity reduction to upper Hessenberg form.
Matrix hessenberg(const Matrix& A) {
  const std::size_t n = A.rows();
  Matrix H = A;
  if (n < 3) return H;
  for (std::size_t k = 0; k + 2 < n; ++k) {
    double sigma = 0.0;
    for (std::size_t i = k + 1; i < n; ++i) sigma += H(i, k) * H(i, k);
    sigma = std::sqrt(sigma);
    if (sigma == 0.0) continue;
    double alpha = H(k + 1, k) >= 0.0 ? -sigma : sigma;
    Vec v(n - k - 1);
    v[0] = H(k + 1, k) - alpha;
    for (std::size_t i = k + 2; i < n; ++i) v[i - k - 1] = H(i, k);
    double vtv = 0.0;
    for (double t : v) vtv += t * t;
    if (vtv == 0.0) continue;
    double beta = 2.0 / vtv;
    // left: H = P H
    for (std::size_t j = k; j < n; ++j) {
      double s = 0.0;
      for (std::size_t i = k + 1; i < n; ++i) s += v[i - k - 1] * H(i, j);
      s *= beta;
      for (std::size_t i = k + 1; i < n; ++i) H(i, j) -= s * v[i - k - 1];
    }
    // right: H = H P
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      for (std::size_t j = k + 1; j < n; ++j) s += H(i, j) * v[j - k - 1];
      s *= beta;
      for (std::size_t j = k + 1; j < n; ++j) H(i, j) -= s * v[j - k - 1];
    }
    H(k + 1, k) = alpha;
    for (std::size_t i = k + 2; i < n; ++i) H(i, k) = 0.0;
  }
  return H;
}

using cx = std::complex<double>;

}  // namespace

double spectral_radius(const Matrix& A) {
  const std::size_t n = A.rows();
  if (n == 0 || A.cols() != n) fail(ErrorCode::DimensionMismatch, "spectral_radius: not square");
  if (n == 1) return std::abs(A(0, 0));

  Matrix Hr = hessenberg(A);
  std::vector<cx> H(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) H[i * n + j] = cx(Hr(i, j), 0.0);
  auto h = [&](std::size_t i, std::size_t j) -> cx& { return H[i * n + j]; };

  const double ulp = 2.3e-16;
  double radius = 0.0;
  std::size_t hi = n - 1;
  std::size_t total = 0, stall = 0;
  const std::size_t cap = 30 * n + 3000;

  while (true) {
    // deflate negligible subdiagonal entries
    for (std::size_t k = 0; k < hi; ++k) {
      double s = std::abs(h(k, k)) + std::abs(h(k + 1, k + 1));
      if (std::abs(h(k + 1, k)) <= ulp * s) h(k + 1, k) = 0.0;
    }
    if (hi == 0) {
      radius = std::max(radius, std::abs(h(0, 0)));
      break;
    }
    if (h(hi, hi - 1) == cx(0.0)) {
      radius = std::max(radius, std::abs(h(hi, hi)));
      --hi;
      stall = 0;
      continue;
    }
    // active block [lo..hi]
    std::size_t lo = hi;
    while (lo > 0 && h(lo, lo - 1) != cx(0.0)) --lo;

    // Wilkinson shift: eigenvalue of trailing 2x2 nearest h(hi,hi)
    cx a = h(hi - 1, hi - 1), b = h(hi - 1, hi), c = h(hi, hi - 1), d = h(hi, hi);
    cx tr = a + d, det = a * d - b * c;
    cx disc = std::sqrt(tr * tr - 4.0 * det);
    cx l1 = (tr + disc) * 0.5, l2 = (tr - disc) * 0.5;
    cx mu = (std::abs(l1 - d) < std::abs(l2 - d)) ? l1 : l2;
    if (stall > 0 && stall % 12 == 0) {
      // exceptional shift to break rare limit cycles; deterministic
      mu = d + cx(0.75 * std::abs(h(hi, hi - 1)), 0.25 * std::abs(h(hi, hi - 1)));
    }

    // explicit shifted QR step on the active block via Givens rotations
    const std::size_t bs = hi - lo + 1;
    std::vector<cx> cs(bs - 1), sn(bs - 1);
    for (std::size_t k = lo; k < hi; ++k) h(k, k) -= mu;
    h(hi, hi) -= mu;
    for (std::size_t k = lo; k < hi; ++k) {
      cx f = h(k, k), g = h(k + 1, k);
      double scale = std::abs(f) + std::abs(g);
      cx cc, ss;
      if (scale == 0.0) {
        cc = 1.0;
        ss = 0.0;
      } else {
        double r = scale * std::sqrt(std::norm(f / scale) + std::norm(g / scale));
        cc = std::abs(f) / r;
        cx fsign = (f == cx(0.0)) ? cx(1.0) : f / std::abs(f);
        ss = fsign * std::conj(g) / r;  // [c, s; -conj(s), c] zeroes g, c real
      }
      cs[k - lo] = cc;
      sn[k - lo] = ss;
      for (std::size_t j = k; j <= hi; ++j) {
        cx t1 = h(k, j), t2 = h(k + 1, j);
        h(k, j) = cc * t1 + ss * t2;
        h(k + 1, j) = -std::conj(ss) * t1 + cc * t2;
      }
      h(k + 1, k) = 0.0;
    }
    // RQ: apply adjoint rotations on the right
    for (std::size_t k = lo; k < hi; ++k) {
      cx cc = cs[k - lo], ss = sn[k - lo];
      std::size_t top = lo, bot = std::min(hi, k + 1);
      for (std::size_t i = top; i <= bot; ++i) {
        cx t1 = h(i, k), t2 = h(i, k + 1);
        h(i, k) = cc * t1 + std::conj(ss) * t2;
        h(i, k + 1) = -ss * t1 + cc * t2;
      }
    }
    for (std::size_t k = lo; k < hi; ++k) h(k, k) += mu;
    h(hi, hi) += mu;

    ++total;
    ++stall;
    if (total > cap) fail(ErrorCode::NoConvergence, "spectral_radius: iteration cap reached");
  }
  return radius;
}

}  // namespace sysid
