#pragma once

#include <cstddef>
#include <vector>

#include "sysid/numerics.hpp"

namespace sysid {

struct RegressionData {
  Matrix X;  // [m x n], rows are x_t^T for the retained times
  Vec y;     // [m], entries x_{t+1}^(i)
  std::size_t node = 0;
  std::vector<std::size_t> times;  // one per row
};

struct LadConfig {
  std::size_t max_iters = 500;  // IRLS sweeps
  double tol_obj = 1e-9;        // relative objective change at the epsilon floor
};

struct SolverReport {
  std::size_t iterations = 0;
  double final_objective = 0.0;
  double certificate_gap = 0.0;
  bool certified = true;
  double final_epsilon = 0.0;
};

struct LadSolution {
  Vec a;
  SolverReport report;
};

struct L2Solution {
  Matrix A;
  SolverReport report;
};

// unique least-squares minimizer of sum (y_t - a^T x_t)^2
Vec ls_rowwise(const RegressionData& data);

// minimizer of sum |y_t - a^T x_t| by IRLS on the smoothed objective
// sum sqrt(r^2 + eps^2) with a halving eps schedule; the subgradient
// certificate is computed independently of the solver.
LadSolution lad_rowwise(const RegressionData& data, const LadConfig& cfg = {});

double lad_objective(const RegressionData& data, const Vec& a);

// normalized subgradient optimality gap at a; <= 1e-6 certifies optimality
double lad_certificate(const RegressionData& data, const Vec& a);

// minimizer of sum_t ||x_{t+1} - A x_t||_2 (IRLS, weights 1/max(||r_t||, eps))
L2Solution l2_full(const std::vector<Vec>& states, const LadConfig& cfg = {});

Matrix assemble_matrix(const std::vector<Vec>& rows);

// full-trajectory regression data for one node
RegressionData node_data(const std::vector<Vec>& states, std::size_t node);

inline constexpr double kCertifiedGap = 1e-6;

}  // namespace sysid
