#pragma once

#include <cstdint>

#include "sysid/numerics.hpp"

namespace sysid {

struct SystemSpec {
  std::size_t n = 0;
  double rho_target = 0.0;     // spectral radius, in (0,1)
  double opnorm_target = 0.0;  // operator norm, >= rho_target
  std::uint64_t seed = 0;

  void validate() const;
};

struct SystemMatrix {
  Matrix A;
  double rho = 0.0;     // achieved spectral radius
  double opnorm = 0.0;  // achieved operator norm
  double psi = 0.0;     // stability constant: max_t ||A^t|| / rho^t
};

// A = Q (D + cN) Q^T with D diagonal (max |entry| = rho_target), N strictly
// upper triangular and c >= 0 bisected until the operator norm hits
// opnorm_target. Eigenvalue placement and norm inflation decouple; the
// orthogonal similarity preserves both. Deterministic in seed.
SystemMatrix generate_system(const SystemSpec& spec);

// max over t = 0..horizon of ||A^t||_2 / rho^t (1 when A = 0)
double estimate_psi(const Matrix& A, double rho, std::size_t horizon);

}  // namespace sysid
