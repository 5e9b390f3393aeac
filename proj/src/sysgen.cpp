#include "sysid/sysgen.hpp"

#include <cmath>
#include <limits>

#include "sysid/rng.hpp"

namespace sysid {

void SystemSpec::validate() const {
  if (n < 1) fail(ErrorCode::ConfigError, "SystemSpec: n must be >= 1");
  if (!(rho_target > 0.0 && rho_target < 1.0))
    fail(ErrorCode::ConfigError, "SystemSpec: rho_target must lie in (0,1)");
  if (!(opnorm_target >= rho_target))
    fail(ErrorCode::ConfigError, "SystemSpec: opnorm_target must be >= rho_target");
  if (n == 1 && opnorm_target != rho_target)
    fail(ErrorCode::ConfigError, "SystemSpec: n=1 forces opnorm_target == rho_target");
}

namespace {

// Haar-ish orthogonal matrix: QR of an iid Gaussian matrix, R-diagonal signs fixed.
Matrix random_orthogonal(std::size_t n, std::uint64_t seed) {
  Matrix G(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) G(i, j) = rng::gaussian(seed, rng::kSysQ, i, j);
  // Gram-Schmidt is adequate here (n is small and G is generic)
  Matrix Q(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    Vec v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = G(i, j);
    for (std::size_t k = 0; k < j; ++k) {
      double proj = 0.0;
      for (std::size_t i = 0; i < n; ++i) proj += Q(i, k) * v[i];
      for (std::size_t i = 0; i < n; ++i) v[i] -= proj * Q(i, k);
    }
    // second pass for orthogonality at working precision
    for (std::size_t k = 0; k < j; ++k) {
      double proj = 0.0;
      for (std::size_t i = 0; i < n; ++i) proj += Q(i, k) * v[i];
      for (std::size_t i = 0; i < n; ++i) v[i] -= proj * Q(i, k);
    }
    double nv = norm2(v);
    if (nv == 0.0) fail(ErrorCode::InfeasibleTargets, "random_orthogonal: degenerate draw");
    for (std::size_t i = 0; i < n; ++i) Q(i, j) = v[i] / nv;
  }
  return Q;
}

}  // namespace

double estimate_psi(const Matrix& A, double rho, std::size_t horizon) {
  if (horizon < 1) fail(ErrorCode::ConfigError, "estimate_psi: horizon must be >= 1");
  double best = 1.0;  // t = 0 term: ||I|| / rho^0
  Matrix P = A;
  double rho_t = rho;
  for (std::size_t t = 1; t <= horizon; ++t) {
    double nt = operator_norm(P);
    if (nt > 0.0) {
      if (rho_t == 0.0) return std::numeric_limits<double>::infinity();
      best = std::max(best, nt / rho_t);
    }
    if (t < horizon) {
      P = matmul(P, A);
      rho_t *= rho;
    }
  }
  return best;
}

SystemMatrix generate_system(const SystemSpec& spec) {
  spec.validate();
  const std::size_t n = spec.n;

  for (std::uint64_t retry = 0; retry < 32; ++retry) {
    std::uint64_t sub = rng::word(spec.seed, rng::kSysRetry, retry, 0);

    Matrix M(n, n);  // D + cN, upper triangular
    M(0, 0) = spec.rho_target;
    for (std::size_t i = 1; i < n; ++i)
      M(i, i) = rng::uniform_sym(spec.rho_target, sub, rng::kSysD, i, 0);
    Matrix N(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) N(i, j) = rng::gaussian(sub, rng::kSysN, i, j);

    auto norm_at = [&](double c) {
      Matrix T = M;
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) T(i, j) = c * N(i, j);
      return operator_norm(T);
    };

    double c = 0.0;
    double base = norm_at(0.0);  // = max |D_ii| = rho_target
    if (spec.opnorm_target > base + 1e-12) {
      if (n == 1) fail(ErrorCode::InfeasibleTargets, "generate_system: n=1 cannot inflate norm");
      double lo = 0.0, hi = 1.0;
      bool bracketed = false;
      while (hi <= 1e6) {
        if (norm_at(hi) >= spec.opnorm_target) {
          bracketed = true;
          break;
        }
        hi *= 2.0;
      }
      if (!bracketed) continue;  // retry with a new sub-seed
      for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        if (norm_at(mid) < spec.opnorm_target)
          lo = mid;
        else
          hi = mid;
        if (hi - lo < 1e-12 * (1.0 + hi)) break;
      }
      c = 0.5 * (lo + hi);
      if (std::abs(norm_at(c) - spec.opnorm_target) > 1e-3) continue;
    }

    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) M(i, j) = c * N(i, j);

    Matrix Q = random_orthogonal(n, sub);
    Matrix A = matmul(Q, matmul(M, transpose(Q)));

    SystemMatrix out;
    out.A = A;
    out.rho = spectral_radius(A);
    out.opnorm = operator_norm(A);
    out.psi = estimate_psi(A, out.rho, 50);
    if (std::abs(out.rho - spec.rho_target) > 1e-6) continue;
    if (std::abs(out.opnorm - spec.opnorm_target) > 1e-3) continue;
    return out;
  }
  fail(ErrorCode::InfeasibleTargets, "generate_system: targets unreachable after 32 retries");
}

}  // namespace sysid
